"""Dataset identity, raw-data validation, and checksummed storage.

Raw input is header-bearing, comma-separated, UTF-8 CSV with ``\\n`` newlines;
a single bit-exact ingestion format keeps checksums meaningful. The secret
split seed is never part of a descriptor's public serialization.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Union

from .errors import DuplicateId, EmptyDataset, NotFound, SchemaViolation

DATASET_ID_RE = re.compile(r"^[a-z0-9-]{1,64}$")
MAX_SEED = 2**64 - 1


class TaskType(str, Enum):
    CTR = "ctr"
    TOPN = "topn"


class SplitProtocol(str, Enum):
    RANDOM_STRATIFIED = "random_stratified"
    LEAVE_LATEST_OUT = "leave_latest_out"


@dataclass(frozen=True)
class CtrSchema:
    feature_columns: tuple[str, ...]
    label_column: str

    def to_dict(self) -> dict:
        return {
            "features": list(self.feature_columns),
            "label": self.label_column,
        }


@dataclass(frozen=True)
class TopNSchema:
    user_column: str
    item_column: str
    timestamp_column: str

    def to_dict(self) -> dict:
        return {
            "user": self.user_column,
            "item": self.item_column,
            "timestamp": self.timestamp_column,
        }


ColumnSchema = Union[CtrSchema, TopNSchema]


@dataclass(frozen=True)
class SplitConfig:
    protocol: SplitProtocol
    secret_seed: int
    ratios: tuple[float, float, float] | None = None

    def __post_init__(self):
        if not 0 <= self.secret_seed <= MAX_SEED:
            raise ValueError("secret_seed must be an unsigned 64-bit integer")
        if self.protocol is SplitProtocol.RANDOM_STRATIFIED:
            if self.ratios is None:
                raise ValueError("random_stratified requires ratios")
            if len(self.ratios) != 3 or any(r <= 0 for r in self.ratios):
                raise ValueError("ratios must be three fractions, each > 0")
            if abs(sum(self.ratios) - 1.0) > 1e-9:
                raise ValueError("ratios must sum to 1.0")
        elif self.ratios is not None:
            raise ValueError("leave_latest_out takes no ratios")

    def to_public_dict(self) -> dict:
        # The secret seed is withheld from every public serialization.
        out: dict = {"protocol": self.protocol.value}
        if self.ratios is not None:
            out["ratios"] = list(self.ratios)
        return out


@dataclass(frozen=True)
class DatasetDescriptor:
    dataset_id: str
    task: TaskType
    name: str
    raw_checksum: str
    schema: ColumnSchema
    split_config: SplitConfig
    created_at: str

    def to_public_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "task": self.task.value,
            "name": self.name,
            "raw_checksum": self.raw_checksum,
            "schema": self.schema.to_dict(),
            "split_config": self.split_config.to_public_dict(),
            "created_at": self.created_at,
        }


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def parse_schema(task: TaskType, payload: dict) -> ColumnSchema:
    """Parse the columns section of an operator-supplied schema document."""
    try:
        if task is TaskType.CTR:
            features = tuple(str(c) for c in payload["features"])
            label = str(payload["label"])
            if not features:
                raise SchemaViolation("schema needs at least one feature column")
            if label in features:
                raise SchemaViolation(f"label column {label!r} repeats a feature column")
            return CtrSchema(feature_columns=features, label_column=label)
        return TopNSchema(
            user_column=str(payload["user"]),
            item_column=str(payload["item"]),
            timestamp_column=str(payload["timestamp"]),
        )
    except KeyError as exc:
        raise SchemaViolation(f"schema is missing key {exc.args[0]!r}") from exc


def parse_raw_csv(raw_bytes: bytes) -> tuple[list[str], list[list[str]]]:
    """Decode and parse raw CSV into (header, data rows)."""
    try:
        text = raw_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaViolation(f"raw file is not valid UTF-8: {exc}") from exc
    reader = csv.reader(io.StringIO(text, newline=""))
    rows = list(reader)
    if not rows:
        raise EmptyDataset("raw file has no header row")
    header, data = rows[0], rows[1:]
    if not data:
        raise EmptyDataset("raw file has a header but no data rows")
    return header, data


def validate_raw(schema: ColumnSchema, header: list[str], rows: list[list[str]]) -> None:
    """Check a parsed raw file against its schema.

    Errors name the offending column or 1-based file line (header is line 1).
    """
    if isinstance(schema, CtrSchema):
        expected = set(schema.feature_columns) | {schema.label_column}
    else:
        expected = {schema.user_column, schema.item_column, schema.timestamp_column}

    seen = set(header)
    if len(seen) != len(header):
        raise SchemaViolation("raw header contains duplicate column names")
    missing = sorted(expected - seen)
    if missing:
        raise SchemaViolation(f"raw header is missing column {missing[0]!r}")
    extra = sorted(seen - expected)
    if extra:
        raise SchemaViolation(f"raw header has unexpected column {extra[0]!r}")

    index = {name: i for i, name in enumerate(header)}
    for n, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise SchemaViolation(
                f"row {n}: expected {len(header)} fields, found {len(row)}"
            )
        if isinstance(schema, CtrSchema):
            label = row[index[schema.label_column]]
            if label not in ("0", "1"):
                raise SchemaViolation(
                    f"row {n}: label column {schema.label_column!r} "
                    f"must be 0 or 1, found {label!r}"
                )
        else:
            ts = row[index[schema.timestamp_column]]
            if not ts.isdigit():
                raise SchemaViolation(
                    f"row {n}: timestamp column {schema.timestamp_column!r} "
                    f"must be non-negative integer epoch seconds, found {ts!r}"
                )


class DatasetRegistry:
    """Owns the ``data/<dataset_id>/`` raw artifacts and descriptor lookups."""

    def __init__(self, data_dir: Path):
        self.data_dir = data_dir
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def dataset_dir(self, dataset_id: str) -> Path:
        return self.data_dir / dataset_id

    def exists(self, dataset_id: str) -> bool:
        return (self.dataset_dir(dataset_id) / "descriptor.json").is_file()

    def build_descriptor(
        self,
        *,
        dataset_id: str,
        task: TaskType,
        name: str,
        schema: ColumnSchema,
        split_config: SplitConfig,
        raw_bytes: bytes,
    ) -> DatasetDescriptor:
        """Validate identity and raw content; no artifacts are written."""
        if not DATASET_ID_RE.match(dataset_id):
            raise SchemaViolation(
                f"dataset_id {dataset_id!r} must match [a-z0-9-]{{1,64}}"
            )
        if self.exists(dataset_id):
            raise DuplicateId(f"dataset {dataset_id!r} already registered")
        header, rows = parse_raw_csv(raw_bytes)
        validate_raw(schema, header, rows)
        return DatasetDescriptor(
            dataset_id=dataset_id,
            task=task,
            name=name,
            raw_checksum=sha256_hex(raw_bytes),
            schema=schema,
            split_config=split_config,
            created_at=datetime.now(timezone.utc).isoformat(),
        )

    def materialize(self, descriptor: DatasetDescriptor, raw_bytes: bytes, dest: Path) -> None:
        """Write raw.csv and the public descriptor.json under ``dest``."""
        dest.mkdir(parents=True, exist_ok=True)
        (dest / "raw.csv").write_bytes(raw_bytes)
        (dest / "descriptor.json").write_text(
            json.dumps(descriptor.to_public_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def get_public(self, dataset_id: str) -> dict:
        path = self.dataset_dir(dataset_id) / "descriptor.json"
        if not path.is_file():
            raise NotFound(f"dataset {dataset_id!r} not found")
        return json.loads(path.read_text(encoding="utf-8"))

    def raw_bytes(self, dataset_id: str) -> bytes:
        path = self.dataset_dir(dataset_id) / "raw.csv"
        if not path.is_file():
            raise NotFound(f"dataset {dataset_id!r} not found")
        return path.read_bytes()

    def list_public(self, task: TaskType | None = None) -> list[dict]:
        out = []
        for child in sorted(self.data_dir.iterdir()) if self.data_dir.is_dir() else []:
            if not (child / "descriptor.json").is_file():
                continue
            desc = json.loads((child / "descriptor.json").read_text(encoding="utf-8"))
            if task is None or desc["task"] == task.value:
                out.append(desc)
        return out
