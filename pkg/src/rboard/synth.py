"""Seeded synthetic dataset generators for demos and end-to-end checks.

CTR rows carry a per-item click propensity so a popularity-style baseline
separates cleanly from random scoring; top-N interactions draw items from a
skewed popularity distribution for the same reason.
"""

from __future__ import annotations

import csv
import io
import random

CTR_SCHEMA_DOC = {"columns": {"features": ["user_id", "item_id"], "label": "click"}}
TOPN_SCHEMA_DOC = {
    "columns": {"user": "user_id", "item": "item_id", "timestamp": "timestamp"}
}


def _to_csv(header: list[str], rows: list[list[str]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def make_ctr_dataset(
    seed: int, *, n_rows: int = 1500, n_items: int = 30, n_users: int = 60
) -> bytes:
    """Raw CTR CSV with item-driven labels; both classes well represented."""
    rng = random.Random(seed)
    while True:
        propensity = [rng.betavariate(0.9, 2.2) for _ in range(n_items)]
        rows = []
        positives = 0
        for _ in range(n_rows):
            item = rng.randrange(n_items)
            label = 1 if rng.random() < propensity[item] else 0
            positives += label
            rows.append([f"u{rng.randrange(n_users)}", f"i{item}", str(label)])
        # Keep each class large enough that every stratified part gets both.
        if 0.1 * n_rows <= positives <= 0.9 * n_rows:
            return _to_csv(["user_id", "item_id", "click"], rows)


def make_topn_dataset(
    seed: int,
    *,
    n_users: int = 70,
    n_items: int = 40,
    min_interactions: int = 4,
    max_interactions: int = 14,
) -> bytes:
    """Raw interaction CSV with popularity-skewed item choice (~1/rank)."""
    rng = random.Random(seed)
    weights = [1.0 / (j + 1) for j in range(n_items)]
    rows = []
    for u in range(n_users):
        count = rng.randint(min_interactions, max_interactions)
        chosen: set[int] = set()
        while len(chosen) < count:
            chosen.add(rng.choices(range(n_items), weights=weights)[0])
        ordered = list(chosen)
        rng.shuffle(ordered)  # interaction order independent of popularity
        base = rng.randrange(1_000_000)
        for offset, item in enumerate(ordered):
            rows.append([f"u{u:03d}", f"i{item:03d}", str(base + offset)])
    return _to_csv(["user_id", "item_id", "timestamp"], rows)
