"""Deterministic split generation and public-bundle derivation.

Users receive train and labeled validation data; test labels (and held-out
items) stay on the hidden side of the tree. Everything about the protocol
except the random seed is exportable for review.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import DegenerateClass, EmptyInteractions
from .registry import (
    CtrSchema,
    DatasetDescriptor,
    TaskType,
    TopNSchema,
    sha256_hex,
)

PUBLIC_FILES = ("train.csv", "valid.csv", "test_input.csv", "MANIFEST.json")
ROW_ID_COLUMN = "row_id"


@dataclass(frozen=True)
class Interaction:
    user: str
    item: str
    ts: int
    row: tuple[str, ...]


@dataclass(frozen=True)
class SplitBundle:
    dataset_id: str
    train_rows: int
    valid_rows: int
    test_rows: int
    public_checksums: dict[str, str]
    hidden_checksum: str
    seed_fingerprint: str


def split_random_stratified(
    rows: Sequence, labels: Sequence, ratios: tuple[float, float, float], seed: int
) -> tuple[list, list, list]:
    """Label-stratified three-way split, deterministic in (rows, ratios, seed).

    Within each class the part sizes follow largest-remainder rounding of the
    class quotas; leftover units go to the part with the largest cumulative
    quota deficit across classes, which keeps the overall sizes on the
    largest-remainder totals as well. Output order within each part is a
    seed-fixed permutation.
    """
    if len(rows) != len(labels):
        raise ValueError("rows and labels must have equal length")
    if not rows:
        raise DegenerateClass("cannot split zero rows")
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must be three positive fractions summing to 1")

    rng = random.Random(seed)
    by_class: dict[str, list[int]] = {}
    for i, y in enumerate(labels):
        by_class.setdefault(str(y), []).append(i)

    parts: tuple[list[int], list[int], list[int]] = ([], [], [])
    deficits = [0.0, 0.0, 0.0]
    for label in sorted(by_class):
        idxs = by_class[label]
        rng.shuffle(idxs)
        quotas = [len(idxs) * r for r in ratios]
        counts = [math.floor(q) for q in quotas]
        for p in range(3):
            deficits[p] += quotas[p] - counts[p]
        leftover = len(idxs) - sum(counts)
        for p in sorted(range(3), key=lambda p: (-deficits[p], p))[:leftover]:
            counts[p] += 1
            deficits[p] -= 1.0
        offset = 0
        for p in range(3):
            parts[p].extend(idxs[offset : offset + counts[p]])
            offset += counts[p]

    out = []
    for part in parts:
        rng.shuffle(part)
        out.append([rows[i] for i in part])
    return out[0], out[1], out[2]


def split_leave_latest_out(
    interactions: Sequence[Interaction],
) -> tuple[list[Interaction], list[Interaction], list[Interaction]]:
    """Per-user holdout: latest interaction to test, second-latest to valid.

    Timestamp ties break toward the lexicographically larger item id. Users
    with fewer than three interactions contribute everything to train and are
    excluded from evaluation.
    """
    if not interactions:
        raise EmptyInteractions("no interactions to split")
    by_user: dict[str, list[Interaction]] = {}
    for inter in interactions:
        by_user.setdefault(inter.user, []).append(inter)

    train: list[Interaction] = []
    valid: list[Interaction] = []
    test: list[Interaction] = []
    for user in sorted(by_user):
        ordered = sorted(by_user[user], key=lambda r: (r.ts, r.item))
        if len(ordered) < 3:
            train.extend(ordered)
            continue
        train.extend(ordered[:-2])
        valid.append(ordered[-2])
        test.append(ordered[-1])
    return train, valid, test


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    data = buf.getvalue().encode("utf-8")
    path.write_bytes(data)
    return sha256_hex(data)


def _seed_fingerprint(dataset_id: str, seed: int) -> str:
    return sha256_hex(f"{dataset_id}:{seed}".encode("utf-8"))


def preprocess_dataset(
    descriptor: DatasetDescriptor,
    header: list[str],
    rows: list[list[str]],
    seed: int,
    public_dir: Path,
    hidden_dir: Path,
) -> SplitBundle:
    """Split a validated raw dataset and emit the public and hidden files.

    ``public_dir`` receives train.csv, valid.csv, test_input.csv and
    MANIFEST.json; ``hidden_dir`` receives test.csv. Both runs of this
    function over identical inputs produce byte-identical files.
    """
    public_dir.mkdir(parents=True, exist_ok=True)
    hidden_dir.mkdir(parents=True, exist_ok=True)
    schema = descriptor.schema

    if descriptor.task is TaskType.CTR:
        assert isinstance(schema, CtrSchema)
        label_idx = header.index(schema.label_column)
        labels = [row[label_idx] for row in rows]
        ratios = descriptor.split_config.ratios
        train, valid, test = split_random_stratified(rows, labels, ratios, seed)
        test_labels = {row[label_idx] for row in test}
        if test_labels != {"0", "1"}:
            raise DegenerateClass(
                f"test split must contain both label classes, got {sorted(test_labels)}"
            )
        hidden_sum = _write_csv(hidden_dir / "test.csv", header, test)
        public_header = [c for c in header if c != schema.label_column]
        strip = lambda row: [v for i, v in enumerate(row) if i != label_idx]
        checksums = {
            "train.csv": _write_csv(public_dir / "train.csv", header, train),
            "valid.csv": _write_csv(public_dir / "valid.csv", header, valid),
            "test_input.csv": _write_csv(
                public_dir / "test_input.csv",
                public_header + [ROW_ID_COLUMN],
                [strip(row) + [str(i)] for i, row in enumerate(test)],
            ),
        }
        counts = (len(train), len(valid), len(test))
    else:
        assert isinstance(schema, TopNSchema)
        user_idx = header.index(schema.user_column)
        item_idx = header.index(schema.item_column)
        ts_idx = header.index(schema.timestamp_column)
        interactions = [
            Interaction(
                user=row[user_idx],
                item=row[item_idx],
                ts=int(row[ts_idx]),
                row=tuple(row),
            )
            for row in rows
        ]
        train, valid, test = split_leave_latest_out(interactions)
        evaluated_users = sorted({inter.user for inter in test})
        hidden_sum = _write_csv(
            hidden_dir / "test.csv", header, [list(inter.row) for inter in test]
        )
        checksums = {
            "train.csv": _write_csv(
                public_dir / "train.csv", header, [list(i.row) for i in train]
            ),
            "valid.csv": _write_csv(
                public_dir / "valid.csv", header, [list(i.row) for i in valid]
            ),
            "test_input.csv": _write_csv(
                public_dir / "test_input.csv",
                [schema.user_column],
                [[u] for u in evaluated_users],
            ),
        }
        counts = (len(train), len(valid), len(test))

    manifest = {
        "dataset_id": descriptor.dataset_id,
        "files": checksums,
    }
    manifest_bytes = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()
    (public_dir / "MANIFEST.json").write_bytes(manifest_bytes)
    checksums = dict(checksums)
    checksums["MANIFEST.json"] = sha256_hex(manifest_bytes)

    return SplitBundle(
        dataset_id=descriptor.dataset_id,
        train_rows=counts[0],
        valid_rows=counts[1],
        test_rows=counts[2],
        public_checksums=checksums,
        hidden_checksum=hidden_sum,
        seed_fingerprint=_seed_fingerprint(descriptor.dataset_id, seed),
    )


def export_preprocessing_code(descriptor: DatasetDescriptor) -> bytes:
    """Zip of the split implementation and this dataset's parameters.

    The archive is byte-stable across calls; the split seed is the one thing
    deliberately left out.
    """
    params = {
        "dataset_id": descriptor.dataset_id,
        "task": descriptor.task.value,
        "protocol": descriptor.split_config.protocol.value,
        "schema": descriptor.schema.to_dict(),
        "withheld": "split seed",
    }
    if descriptor.split_config.ratios is not None:
        params["ratios"] = list(descriptor.split_config.ratios)

    source = Path(__file__).read_text(encoding="utf-8")
    buf = io.BytesIO()
    # Fixed timestamps and stored (uncompressed) members keep the archive
    # byte-identical across exports.
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, payload in (
            ("params.json", json.dumps(params, indent=2, sort_keys=True) + "\n"),
            ("preprocessing.py", source),
        ):
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, payload)
    return buf.getvalue()
