"""Submission validation and sandboxed per-dataset execution.

Each run gets a fresh working directory containing only the extracted
archive and a copy of the dataset's public bundle; the hidden test tree
lives outside the sandbox root and is never mounted in. Isolation is
process-level (fresh cwd, minimal environment, process-group kill, rlimit
memory cap, network namespace when the host permits), not container-grade.
"""

from __future__ import annotations

import io
import os
import queue
import resource
import shlex
import shutil
import signal
import subprocess
import threading
import time
import uuid
import zipfile
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .errors import (
    ArchiveTooLarge,
    InvalidStateTransition,
    MalformedArchive,
    MissingEntryFile,
    NoDatasetsForTask,
    NotFound,
    OutputInvalid,
)
from .evaluation import MetricResult
from .registry import TaskType, sha256_hex
from .store import TERMINAL_RUN_STATUSES, Store

ENTRY_FILE = "main.py"
PREDICTION_FILENAME = "predictions.csv"
LOG_FILENAME = "log.txt"
TRUNCATION_MARKER = b"\n...[log truncated]...\n"


@dataclass(frozen=True)
class SandboxLimits:
    wall_timeout_seconds: float = 3600.0
    memory_bytes: int = 8 * 2**30
    max_output_bytes: int = 2**30

    def __post_init__(self):
        if min(self.wall_timeout_seconds, self.memory_bytes, self.max_output_bytes) <= 0:
            raise ValueError("all sandbox limits must be strictly positive")


@dataclass(frozen=True)
class Submission:
    submission_id: str
    task: TaskType
    author: str
    archive_checksum: str
    entry_file: str
    submitted_at: str
    status: str  # pending | running | completed | failed
    manifest: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "task": self.task.value,
            "author": self.author,
            "archive_checksum": self.archive_checksum,
            "entry_file": self.entry_file,
            "submitted_at": self.submitted_at,
            "status": self.status,
            "manifest": list(self.manifest),
        }


def validate_submission(
    archive: bytes, task: TaskType, author: str, *, size_cap_bytes: int
) -> Submission:
    """Check the archive contract and return a pending submission record.

    The entry file must sit at the archive root; total uncompressed size is
    capped; member paths may not escape the extraction directory.
    """
    try:
        zf = zipfile.ZipFile(io.BytesIO(archive))
        infos = zf.infolist()
    except zipfile.BadZipFile as exc:
        raise MalformedArchive(f"not a valid zip archive: {exc}") from exc
    total = sum(info.file_size for info in infos)
    if total > size_cap_bytes:
        raise ArchiveTooLarge(
            f"uncompressed size {total} exceeds cap {size_cap_bytes}"
        )
    for info in infos:
        name = info.filename
        if name.startswith("/") or ".." in Path(name).parts:
            raise MalformedArchive(f"archive member {name!r} escapes the root")
    names = {info.filename for info in infos}
    if ENTRY_FILE not in names:
        raise MissingEntryFile(
            f"archive must contain {ENTRY_FILE!r} at its root"
        )
    return Submission(
        submission_id=f"sub-{uuid.uuid4().hex[:12]}",
        task=task,
        author=author,
        archive_checksum=sha256_hex(archive),
        entry_file=ENTRY_FILE,
        submitted_at=datetime.now(timezone.utc).isoformat(),
        status="pending",
        manifest=tuple(sorted(names)),
    )


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunnerService:
    """FIFO run queue with a bounded worker pool.

    ``evaluator(dataset_id, prediction_path, run_id)`` scores a validated
    prediction against the hidden truth and is the only collaborator that
    touches hidden data.
    """

    def __init__(
        self,
        store: Store,
        *,
        public_dir: Path,
        runs_dir: Path,
        sandbox_dir: Path,
        evaluator: Callable[[str, Path, str], MetricResult],
        limits: SandboxLimits,
        command_template: str = "python3 {entry}",
        workers: int = 1,
        log_bound_bytes: int = 64 * 1024,
        timeout_grace_seconds: float = 1.0,
    ):
        self.store = store
        self.public_dir = public_dir
        self.runs_dir = runs_dir
        self.sandbox_dir = sandbox_dir
        self.evaluator = evaluator
        self.limits = limits
        self.command_template = command_template
        self.workers = workers
        self.log_bound_bytes = log_bound_bytes
        self.timeout_grace_seconds = timeout_grace_seconds
        self._queue: queue.Queue[str | None] = queue.Queue()
        self._threads: list[threading.Thread] = []
        self._started = False
        self._netns_prefix = _probe_network_namespace()

    # -- scheduling --

    def schedule_task_runs(self, submission_id: str, dataset_ids: list[str]) -> list[str]:
        """Create one queued run per dataset and mark the submission running."""
        submission = self.store.get("submission", submission_id)
        if submission["status"] != "pending":
            raise InvalidStateTransition(
                f"submission {submission_id!r} is {submission['status']}, not pending"
            )
        if not dataset_ids:
            raise NoDatasetsForTask(
                f"no datasets registered for task {submission['task']!r}"
            )
        run_ids = []
        with self.store.transaction():
            for dataset_id in sorted(dataset_ids):
                run_id = f"run-{uuid.uuid4().hex[:12]}"
                self.store.put(
                    "run",
                    run_id,
                    {
                        "run_id": run_id,
                        "submission_id": submission_id,
                        "dataset_id": dataset_id,
                        "status": "queued",
                        "wall_clock_seconds": None,
                        "exit_code": None,
                        "log_excerpt": "",
                        "prediction_checksum": None,
                        "created_at": _utc_now(),
                    },
                )
                run_ids.append(run_id)
            submission["status"] = "running"
            self.store.put("submission", submission_id, submission)
        for run_id in run_ids:
            self._queue.put(run_id)
        return run_ids

    # -- worker pool --

    def start(self) -> None:
        if self._started:
            return
        self._started = True
        for i in range(self.workers):
            t = threading.Thread(target=self._worker, name=f"runner-{i}", daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self) -> None:
        if not self._started:
            return
        for _ in self._threads:
            self._queue.put(None)
        for t in self._threads:
            t.join(timeout=10)
        self._threads.clear()
        self._started = False

    def _worker(self) -> None:
        while True:
            run_id = self._queue.get()
            if run_id is None:
                return
            try:
                self.execute_run(run_id)
            except Exception:  # keep the pool alive; the run record has the story
                pass

    def drain(self) -> None:
        """Execute all queued runs on the calling thread (test/CLI helper)."""
        while True:
            try:
                run_id = self._queue.get_nowait()
            except queue.Empty:
                return
            if run_id is not None:
                self.execute_run(run_id)

    # -- execution --

    def execute_run(self, run_id: str, limits: SandboxLimits | None = None) -> dict:
        limits = limits or self.limits
        run = self.store.get("run", run_id)
        if run["status"] != "queued":
            raise InvalidStateTransition(
                f"run {run_id!r} is {run['status']}, not queued"
            )
        submission = self.store.get("submission", run["submission_id"])
        bundle_dir = self.public_dir / run["dataset_id"]
        if not (bundle_dir / "train.csv").is_file():
            raise NotFound(f"public bundle for {run['dataset_id']!r} missing")

        run["status"] = "running"
        self.store.put("run", run_id, run)

        run_dir = self.runs_dir / run_id
        run_dir.mkdir(parents=True, exist_ok=True)
        log_path = run_dir / LOG_FILENAME
        workdir = self.sandbox_dir / run_id
        try:
            outcome = self._run_sandboxed(
                submission, run, workdir, log_path, limits
            )
        finally:
            shutil.rmtree(workdir, ignore_errors=True)

        result: MetricResult | None = outcome.pop("_result", None)
        run.update(outcome)
        run["log_excerpt"] = self._read_bounded_log(log_path, 4096)

        with self.store.transaction():
            if result is not None:
                self.store.put("result", run_id, result.to_dict())
            self.store.put("run", run_id, run)
            self._finalize_submission(run["submission_id"])
        return run

    def _run_sandboxed(
        self,
        submission: dict,
        run: dict,
        workdir: Path,
        log_path: Path,
        limits: SandboxLimits,
    ) -> dict:
        task = submission["task"]
        archive = self.store.get_archive(submission["archive_checksum"])
        workdir.mkdir(parents=True, exist_ok=True)
        with zipfile.ZipFile(io.BytesIO(archive)) as zf:
            zf.extractall(workdir)

        # The public bundle is copied inside the sandbox so the child never
        # receives a path outside its own tree.
        bundle_dst = workdir / "bundle"
        bundle_dst.mkdir()
        for name in ("train.csv", "valid.csv", "test_input.csv"):
            shutil.copy(self.public_dir / run["dataset_id"] / name, bundle_dst / name)
        out_dir = workdir / "out"
        out_dir.mkdir()
        for aux in ("home", "tmp"):
            (workdir / aux).mkdir()
        output_path = out_dir / PREDICTION_FILENAME

        argv = self._netns_prefix + shlex.split(
            self.command_template.format(entry=ENTRY_FILE)
        )
        argv += [
            "--task", task,
            "--train", str(bundle_dst / "train.csv"),
            "--valid", str(bundle_dst / "valid.csv"),
            "--test-input", str(bundle_dst / "test_input.csv"),
            "--output", str(output_path),
        ]
        env = {
            "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
            "HOME": str(workdir / "home"),
            "TMPDIR": str(workdir / "tmp"),
            "PYTHONDONTWRITEBYTECODE": "1",
            "LANG": os.environ.get("LANG", "C.UTF-8"),
        }

        mem = limits.memory_bytes

        def preexec():
            try:
                resource.setrlimit(resource.RLIMIT_AS, (mem, mem))
            except (ValueError, OSError):
                pass  # cap is best-effort where the host forbids raising it

        proc = None
        spawn_error: OSError | None = None
        with open(log_path, "wb") as log_fh:
            for _attempt in (1, 2):  # one retry on infrastructure error only
                try:
                    started = time.monotonic()
                    proc = subprocess.Popen(
                        argv,
                        cwd=workdir,
                        env=env,
                        stdout=log_fh,
                        stderr=subprocess.STDOUT,
                        stdin=subprocess.DEVNULL,
                        start_new_session=True,
                        preexec_fn=preexec,
                    )
                    spawn_error = None
                    break
                except OSError as exc:
                    spawn_error = exc
            if spawn_error is not None:
                log_fh.write(f"spawn failure: {spawn_error}\n".encode())
                return {
                    "status": "failed",
                    "wall_clock_seconds": 0.0,
                    "exit_code": None,
                }

            timed_out = False
            try:
                exit_code = proc.wait(timeout=limits.wall_timeout_seconds)
            except subprocess.TimeoutExpired:
                timed_out = True
                self._kill_tree(proc)
                exit_code = proc.wait()
            wall = time.monotonic() - started

        if timed_out:
            return {
                "status": "timeout",
                "wall_clock_seconds": wall,
                "exit_code": None,
            }
        if exit_code != 0:
            return {
                "status": "failed",
                "wall_clock_seconds": wall,
                "exit_code": exit_code,
            }
        if not output_path.is_file():
            return {
                "status": "output_invalid",
                "wall_clock_seconds": wall,
                "exit_code": exit_code,
                "error": "no prediction file written",
            }
        if output_path.stat().st_size > limits.max_output_bytes:
            return {
                "status": "output_invalid",
                "wall_clock_seconds": wall,
                "exit_code": exit_code,
                "error": "prediction file exceeds output size cap",
            }

        # Preserve the artifact, then validate + score it.
        kept = self.runs_dir / run["run_id"] / PREDICTION_FILENAME
        shutil.move(str(output_path), kept)
        try:
            result = self.evaluator(run["dataset_id"], kept, run["run_id"])
        except OutputInvalid as exc:
            return {
                "status": "output_invalid",
                "wall_clock_seconds": wall,
                "exit_code": exit_code,
                "error": exc.message,
            }
        return {
            "status": "succeeded",
            "wall_clock_seconds": wall,
            "exit_code": exit_code,
            "prediction_checksum": sha256_hex(kept.read_bytes()),
            "_result": result,
        }

    @staticmethod
    def _kill_tree(proc: subprocess.Popen) -> None:
        try:
            os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            proc.kill()

    def _finalize_submission(self, submission_id: str) -> None:
        runs = self.store.list("run", {"submission_id": submission_id})
        if not runs or any(r["status"] not in TERMINAL_RUN_STATUSES for r in runs):
            return
        submission = self.store.get("submission", submission_id)
        if submission["status"] in ("completed", "failed"):
            return
        any_success = any(r["status"] == "succeeded" for r in runs)
        submission["status"] = "completed" if any_success else "failed"
        self.store.put("submission", submission_id, submission)

    # -- logs --

    def get_run_logs(self, run_id: str) -> str:
        if not self.store.exists("run", run_id):
            raise NotFound(f"run {run_id!r} not found")
        log_path = self.runs_dir / run_id / LOG_FILENAME
        if not log_path.is_file():
            return ""
        return self._read_bounded_log(log_path, self.log_bound_bytes)

    @staticmethod
    def _read_bounded_log(log_path: Path, bound: int) -> str:
        if not log_path.is_file():
            return ""
        size = log_path.stat().st_size
        with open(log_path, "rb") as fh:
            if size <= bound:
                data = fh.read()
            else:
                head = fh.read((bound - len(TRUNCATION_MARKER)) // 2)
                fh.seek(size - (bound - len(TRUNCATION_MARKER) - len(head)))
                tail = fh.read()
                data = head + TRUNCATION_MARKER + tail
        return data.decode("utf-8", errors="replace")


_NETNS_PREFIX: list[str] | None = None


def _probe_network_namespace() -> list[str]:
    """Prefix the sandbox command with ``unshare -n`` when the host allows it.

    Network access is disabled by contract; where namespaces are unavailable
    the child still runs with a scrubbed environment (documented best-effort).
    Probed once per process.
    """
    global _NETNS_PREFIX
    if _NETNS_PREFIX is not None:
        return _NETNS_PREFIX
    prefix: list[str] = []
    try:
        probe = subprocess.run(
            ["unshare", "-n", "true"],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
            timeout=5,
        )
        if probe.returncode == 0:
            prefix = ["unshare", "-n"]
    except (OSError, subprocess.SubprocessError):
        pass
    _NETNS_PREFIX = prefix
    return prefix
