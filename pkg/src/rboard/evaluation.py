"""Prediction-file validation and task scoring against hidden test data.

The file contracts are strict so that an accepted prediction always scores:
CTR files cover row ids 0..n-1 exactly once with finite scores in [0, 1];
top-N files list each user once as a contiguous block with ranks 1..len.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from . import metrics
from .errors import OutputInvalid
from .registry import CtrSchema, TopNSchema

MAX_ITEMS_PER_USER = 50
DEFAULT_K = 10

CTR_METRICS = ("auc", "log_loss")
TOPN_METRICS = ("ndcg@10", "recall@10", "hit_rate@10", "mrr")


@dataclass(frozen=True)
class MetricResult:
    metrics: dict[str, float]
    primary_metric: str
    run_id: str = ""

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "metrics": dict(self.metrics),
            "primary_metric": self.primary_metric,
        }


def _read_csv(path: Path) -> list[list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise OutputInvalid(f"prediction file unreadable: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise OutputInvalid("prediction file is not valid UTF-8") from exc


def parse_ctr_predictions(path: Path, n_rows: int) -> list[float]:
    """Scores indexed by row_id, after full coverage and range validation."""
    rows = _read_csv(path)
    if not rows or rows[0] != ["row_id", "score"]:
        raise OutputInvalid("CTR prediction header must be exactly 'row_id,score'")
    scores: list[float | None] = [None] * n_rows
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise OutputInvalid(f"line {n}: expected 2 fields, found {len(row)}")
        try:
            row_id = int(row[0])
        except ValueError:
            raise OutputInvalid(f"line {n}: row_id {row[0]!r} is not an integer")
        if not 0 <= row_id < n_rows:
            raise OutputInvalid(f"line {n}: row_id {row_id} outside 0..{n_rows - 1}")
        if scores[row_id] is not None:
            raise OutputInvalid(f"line {n}: duplicate row_id {row_id}")
        try:
            score = float(row[1])
        except ValueError:
            raise OutputInvalid(f"line {n}: score {row[1]!r} is not numeric")
        if not math.isfinite(score):
            raise OutputInvalid(f"line {n}: score for row_id {row_id} is not finite")
        if not 0.0 <= score <= 1.0:
            raise OutputInvalid(f"line {n}: score {score} outside [0, 1]")
        scores[row_id] = score
    missing = next((i for i, s in enumerate(scores) if s is None), None)
    if missing is not None:
        raise OutputInvalid(f"prediction is missing row_id {missing}")
    return scores  # type: ignore[return-value]


def parse_topn_predictions(path: Path) -> dict[str, list[str]]:
    """Ordered item lists per user, one contiguous block per user."""
    rows = _read_csv(path)
    if not rows or rows[0] != ["user_id", "item_id", "rank"]:
        raise OutputInvalid(
            "top-N prediction header must be exactly 'user_id,item_id,rank'"
        )
    ranked: dict[str, list[str]] = {}
    current: str | None = None
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise OutputInvalid(f"line {n}: expected 3 fields, found {len(row)}")
        user, item, rank_text = row
        if user != current:
            if user in ranked:
                raise OutputInvalid(f"line {n}: duplicate user {user!r}")
            ranked[user] = []
            current = user
        items = ranked[user]
        if item in items:
            raise OutputInvalid(f"line {n}: duplicate item {item!r} for user {user!r}")
        try:
            rank = int(rank_text)
        except ValueError:
            raise OutputInvalid(f"line {n}: rank {rank_text!r} is not an integer")
        if rank != len(items) + 1:
            raise OutputInvalid(
                f"line {n}: user {user!r} ranks must be contiguous from 1, "
                f"expected {len(items) + 1}, found {rank}"
            )
        if len(items) >= MAX_ITEMS_PER_USER:
            raise OutputInvalid(
                f"line {n}: user {user!r} exceeds {MAX_ITEMS_PER_USER} items"
            )
        items.append(item)
    return ranked


def evaluate_ctr(path: Path, labels: Sequence[int], run_id: str = "") -> MetricResult:
    """AUC and log-loss of a prediction file joined positionally by row_id."""
    scores = parse_ctr_predictions(path, len(labels))
    return MetricResult(
        metrics={
            "auc": metrics.auc(labels, scores),
            "log_loss": metrics.log_loss(labels, scores),
        },
        primary_metric="auc",
        run_id=run_id,
    )


def evaluate_topn(
    path: Path,
    held_out: Mapping[str, str],
    k_list: Sequence[int] = (DEFAULT_K,),
    run_id: str = "",
) -> MetricResult:
    """Ranked-retrieval metrics averaged uniformly over evaluated users.

    ``held_out`` maps each evaluated user to their single held-out item.
    """
    ranked = parse_topn_predictions(path)
    missing = sorted(set(held_out) - set(ranked))
    if missing:
        raise OutputInvalid(f"prediction is missing evaluated user {missing[0]!r}")

    users = sorted(held_out)
    result: dict[str, float] = {}
    for k in k_list:
        result[f"ndcg@{k}"] = _mean(
            metrics.ndcg_at_k(ranked[u], {held_out[u]}, k) for u in users
        )
        result[f"recall@{k}"] = _mean(
            metrics.recall_at_k(ranked[u], {held_out[u]}, k) for u in users
        )
        result[f"hit_rate@{k}"] = _mean(
            metrics.hit_rate_at_k(ranked[u], {held_out[u]}, k) for u in users
        )
    result["mrr"] = _mean(metrics.mrr(ranked[u], {held_out[u]}) for u in users)
    return MetricResult(
        metrics=result, primary_metric=f"ndcg@{k_list[0]}", run_id=run_id
    )


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values)


# -- hidden-truth loaders used by the platform's evaluator --


def load_ctr_labels(hidden_test: Path, schema: CtrSchema) -> list[int]:
    with open(hidden_test, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    label_idx = rows[0].index(schema.label_column)
    return [int(row[label_idx]) for row in rows[1:]]


def load_topn_held_out(hidden_test: Path, schema: TopNSchema) -> dict[str, str]:
    with open(hidden_test, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    user_idx = rows[0].index(schema.user_column)
    item_idx = rows[0].index(schema.item_column)
    return {row[user_idx]: row[item_idx] for row in rows[1:]}
