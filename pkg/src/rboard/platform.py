"""Wires registry, preprocessing, store, runner, evaluation and aggregation
over a single on-disk root:

    data/<id>/raw.csv, descriptor.json   registered raw artifacts
    public/<id>/...                      served bundles (train/valid/test_input)
    hidden/<id>/test.csv, seed.json      never served by any route
    store/, archives/                    records and submission blobs
    runs/<run_id>/                       logs and prediction artifacts
    sandbox/<run_id>/                    ephemeral run working directories
"""

from __future__ import annotations

import io
import json
import secrets
import shutil
import threading
import time
import zipfile
from pathlib import Path

from . import aggregation, evaluation, preprocessing
from .config import PlatformConfig
from .errors import NoDatasetsForTask, NotFound, RboardError
from .registry import (
    ColumnSchema,
    CtrSchema,
    DatasetDescriptor,
    DatasetRegistry,
    SplitConfig,
    SplitProtocol,
    TaskType,
    TopNSchema,
    parse_raw_csv,
    parse_schema,
)
from .runner import RunnerService, SandboxLimits, validate_submission
from .store import TERMINAL_RUN_STATUSES, Store


class Platform:
    def __init__(self, root: Path, config: PlatformConfig | None = None):
        # resolve so sandbox invocations receive absolute paths regardless of
        # the server's working directory
        self.root = Path(root).resolve()
        self.config = config or PlatformConfig()
        self.data_dir = self.root / "data"
        self.public_dir = self.root / "public"
        self.hidden_dir = self.root / "hidden"
        self.runs_dir = self.root / "runs"
        self.sandbox_dir = self.root / "sandbox"
        self.tmp_dir = self.root / "tmp"
        for d in (
            self.data_dir,
            self.public_dir,
            self.hidden_dir,
            self.runs_dir,
            self.sandbox_dir,
            self.tmp_dir,
        ):
            d.mkdir(parents=True, exist_ok=True)

        self.store = Store(self.root)
        self.registry = DatasetRegistry(self.data_dir)
        self.runner = RunnerService(
            self.store,
            public_dir=self.public_dir,
            runs_dir=self.runs_dir,
            sandbox_dir=self.sandbox_dir,
            evaluator=self.evaluate_prediction,
            limits=SandboxLimits(
                wall_timeout_seconds=self.config.wall_timeout_seconds,
                memory_bytes=self.config.memory_bytes,
                max_output_bytes=self.config.max_output_bytes,
            ),
            command_template=self.config.command_template,
            workers=self.config.workers,
            log_bound_bytes=self.config.log_bound_bytes,
            timeout_grace_seconds=self.config.timeout_grace_seconds,
        )
        self._registration_lock = threading.Lock()

    # -- datasets --

    def register_dataset(
        self,
        *,
        dataset_id: str,
        task: TaskType,
        name: str,
        schema: ColumnSchema,
        split_config: SplitConfig,
        raw_bytes: bytes,
    ) -> dict:
        """Validate, split, and commit a dataset; atomic under failure.

        All artifacts are staged under tmp/ and moved into place only after
        validation and preprocessing succeed, so a failed registration
        leaves nothing behind. Registrations are serialized.
        """
        with self._registration_lock:
            descriptor = self.registry.build_descriptor(
                dataset_id=dataset_id,
                task=task,
                name=name,
                schema=schema,
                split_config=split_config,
                raw_bytes=raw_bytes,
            )
            header, rows = parse_raw_csv(raw_bytes)
            stage = self.tmp_dir / f"register-{dataset_id}"
            shutil.rmtree(stage, ignore_errors=True)
            try:
                bundle = preprocessing.preprocess_dataset(
                    descriptor,
                    header,
                    rows,
                    split_config.secret_seed,
                    stage / "public",
                    stage / "hidden",
                )
                (stage / "hidden" / "seed.json").write_text(
                    json.dumps(
                        {
                            "secret_seed": split_config.secret_seed,
                            "seed_fingerprint": bundle.seed_fingerprint,
                        }
                    ),
                    encoding="utf-8",
                )
                (stage / "hidden" / "split_meta.json").write_text(
                    json.dumps(
                        {
                            "dataset_id": bundle.dataset_id,
                            "counts": {
                                "train": bundle.train_rows,
                                "valid": bundle.valid_rows,
                                "test": bundle.test_rows,
                            },
                            "public_checksums": bundle.public_checksums,
                            "hidden_checksum": bundle.hidden_checksum,
                        },
                        indent=2,
                        sort_keys=True,
                    ),
                    encoding="utf-8",
                )
                self.registry.materialize(descriptor, raw_bytes, stage / "data")
                (stage / "data").rename(self.data_dir / dataset_id)
                (stage / "public").rename(self.public_dir / dataset_id)
                (stage / "hidden").rename(self.hidden_dir / dataset_id)
            except BaseException:
                shutil.rmtree(stage, ignore_errors=True)
                for d in (self.data_dir, self.public_dir, self.hidden_dir):
                    shutil.rmtree(d / dataset_id, ignore_errors=True)
                raise
            finally:
                shutil.rmtree(stage, ignore_errors=True)
            public = descriptor.to_public_dict()
            self.store.put("dataset", dataset_id, public)
            return public

    def register_dataset_payload(
        self,
        *,
        dataset_id: str,
        task: str,
        name: str,
        schema_doc: dict,
        raw_bytes: bytes,
    ) -> dict:
        """Registration from wire-format inputs (CLI / API).

        ``schema_doc`` carries ``columns`` and ``split``; a missing
        ``secret_seed`` is generated server-side so the seed never has to
        travel.
        """
        task_enum = _parse_task(task)
        columns = schema_doc.get("columns")
        if not isinstance(columns, dict):
            raise RboardError("schema document needs a 'columns' object")
        schema = parse_schema(task_enum, columns)
        split_doc = schema_doc.get("split") or {}
        default_protocol = (
            SplitProtocol.RANDOM_STRATIFIED
            if task_enum is TaskType.CTR
            else SplitProtocol.LEAVE_LATEST_OUT
        )
        protocol = SplitProtocol(split_doc.get("protocol", default_protocol.value))
        seed = split_doc.get("secret_seed")
        if seed is None:
            seed = secrets.randbits(64)
        ratios = split_doc.get("ratios")
        if protocol is SplitProtocol.RANDOM_STRATIFIED and ratios is None:
            ratios = (0.8, 0.1, 0.1)
        split_config = SplitConfig(
            protocol=protocol,
            secret_seed=int(seed),
            ratios=tuple(ratios) if ratios is not None else None,
        )
        return self.register_dataset(
            dataset_id=dataset_id,
            task=task_enum,
            name=name,
            schema=schema,
            split_config=split_config,
            raw_bytes=raw_bytes,
        )

    def get_dataset(self, dataset_id: str) -> dict:
        return self.registry.get_public(dataset_id)

    def list_datasets(self, task: TaskType | None = None) -> list[dict]:
        return self.registry.list_public(task)

    def dataset_ids_for_task(self, task: TaskType) -> list[str]:
        return [d["dataset_id"] for d in self.list_datasets(task)]

    def public_bundle_zip(self, dataset_id: str) -> bytes:
        """Deterministic zip of the dataset's public bundle files."""
        bundle_dir = self.public_dir / dataset_id
        if not bundle_dir.is_dir():
            raise NotFound(f"dataset {dataset_id!r} not found")
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
            for name in preprocessing.PUBLIC_FILES:
                info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                zf.writestr(info, (bundle_dir / name).read_bytes())
        return buf.getvalue()

    def preprocessing_archive(self, dataset_id: str) -> bytes:
        descriptor_doc = self.registry.get_public(dataset_id)
        descriptor = _descriptor_from_public(descriptor_doc)
        return preprocessing.export_preprocessing_code(descriptor)

    # -- submissions and runs --

    def submit(self, archive: bytes, task: str, author: str) -> str:
        task_enum = _parse_task(task)
        submission = validate_submission(
            archive,
            task_enum,
            author,
            size_cap_bytes=self.config.archive_size_cap_bytes,
        )
        dataset_ids = self.dataset_ids_for_task(task_enum)
        if not dataset_ids:
            raise NoDatasetsForTask(f"no datasets registered for task {task_enum.value!r}")
        self.store.put_archive(archive)
        self.store.put("submission", submission.submission_id, submission.to_dict())
        self.runner.schedule_task_runs(submission.submission_id, dataset_ids)
        return submission.submission_id

    def submission_detail(self, submission_id: str) -> dict:
        submission = self.store.get("submission", submission_id)
        runs = self.store.list("run", {"submission_id": submission_id})
        runs.sort(key=lambda r: r["dataset_id"])
        detail_runs = []
        for run in runs:
            entry = {
                "run_id": run["run_id"],
                "dataset_id": run["dataset_id"],
                "status": run["status"],
                "wall_clock_seconds": run["wall_clock_seconds"],
                "exit_code": run["exit_code"],
                "prediction_checksum": run["prediction_checksum"],
                "metrics": None,
                "primary_metric": None,
            }
            if run["status"] == "succeeded" and self.store.exists("result", run["run_id"]):
                result = self.store.get("result", run["run_id"])
                entry["metrics"] = result["metrics"]
                entry["primary_metric"] = result["primary_metric"]
            detail_runs.append(entry)
        submission["runs"] = detail_runs
        return submission

    def run_logs(self, run_id: str) -> str:
        return self.runner.get_run_logs(run_id)

    def code_archive(self, submission_id: str) -> tuple[bytes, str]:
        submission = self.store.get("submission", submission_id)
        checksum = submission["archive_checksum"]
        return self.store.get_archive(checksum), checksum

    def evaluate_prediction(self, dataset_id: str, prediction_path: Path, run_id: str):
        """Score a validated prediction file against the hidden test data."""
        descriptor = _descriptor_from_public(self.registry.get_public(dataset_id))
        hidden_test = self.hidden_dir / dataset_id / "test.csv"
        if descriptor.task is TaskType.CTR:
            labels = evaluation.load_ctr_labels(hidden_test, descriptor.schema)
            return evaluation.evaluate_ctr(prediction_path, labels, run_id=run_id)
        held_out = evaluation.load_topn_held_out(hidden_test, descriptor.schema)
        return evaluation.evaluate_topn(prediction_path, held_out, run_id=run_id)

    # -- leaderboard --

    def leaderboard(self, task: str) -> list[dict]:
        task_enum = _parse_task(task)
        dataset_ids = self.dataset_ids_for_task(task_enum)
        submissions = [
            s
            for s in self.store.list("submission", {"task": task_enum.value})
            if s["status"] in ("completed", "failed")
        ]
        runs_by_submission: dict[str, list[dict]] = {}
        results_by_run: dict[str, dict] = {}
        for sub in submissions:
            runs = self.store.list("run", {"submission_id": sub["submission_id"]})
            terminal = [r for r in runs if r["status"] in TERMINAL_RUN_STATUSES]
            runs_by_submission[sub["submission_id"]] = terminal
            for run in terminal:
                if self.store.exists("result", run["run_id"]):
                    results_by_run[run["run_id"]] = self.store.get("result", run["run_id"])
        return aggregation.build_leaderboard(
            dataset_ids=dataset_ids,
            submissions=submissions,
            runs_by_submission=runs_by_submission,
            results_by_run=results_by_run,
        )

    # -- worker lifecycle --

    def start_workers(self) -> None:
        self.runner.start()

    def stop_workers(self) -> None:
        self.runner.stop()

    def process_queued_runs(self) -> None:
        self.runner.drain()

    def wait_for_submission(self, submission_id: str, timeout: float = 120.0) -> dict:
        """Poll until every run of the submission is terminal."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            submission = self.store.get("submission", submission_id)
            if submission["status"] in ("completed", "failed"):
                return submission
            time.sleep(0.1)
        raise TimeoutError(f"submission {submission_id} still running after {timeout}s")


def _parse_task(task: str | TaskType) -> TaskType:
    if isinstance(task, TaskType):
        return task
    try:
        return TaskType(task)
    except ValueError:
        raise NotFound(f"unknown task {task!r}; expected one of: ctr, topn")


def _descriptor_from_public(doc: dict) -> DatasetDescriptor:
    """Rebuild a descriptor object from its public JSON form.

    The secret seed is not part of the public form; operations that need it
    read hidden/<id>/seed.json instead. The placeholder seed here is never
    used for splitting.
    """
    task = TaskType(doc["task"])
    if task is TaskType.CTR:
        schema = CtrSchema(
            feature_columns=tuple(doc["schema"]["features"]),
            label_column=doc["schema"]["label"],
        )
    else:
        schema = TopNSchema(
            user_column=doc["schema"]["user"],
            item_column=doc["schema"]["item"],
            timestamp_column=doc["schema"]["timestamp"],
        )
    split = doc["split_config"]
    return DatasetDescriptor(
        dataset_id=doc["dataset_id"],
        task=task,
        name=doc["name"],
        raw_checksum=doc["raw_checksum"],
        schema=schema,
        split_config=SplitConfig(
            protocol=SplitProtocol(split["protocol"]),
            secret_seed=0,
            ratios=tuple(split["ratios"]) if "ratios" in split else None,
        ),
        created_at=doc["created_at"],
    )
