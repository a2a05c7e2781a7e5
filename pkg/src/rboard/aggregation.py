"""Cross-dataset aggregation: per-dataset ranks and the leaderboard order.

Aggregation uses mean rank on each dataset's primary metric rather than mean
metric value: metric scales are not comparable across datasets, ranks are.
Competition ranking ("1,2,2,4") keeps tied submissions interchangeable.
"""

from __future__ import annotations

from collections.abc import Collection, Mapping
from enum import Enum

from .errors import IncompleteRanks


class Direction(Enum):
    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


def rank_within_dataset(
    results: Mapping[str, float], direction: Direction = Direction.HIGHER_BETTER
) -> dict[str, int]:
    """Competition ranks: tied values share the rank, next value skips ahead.

    A submission's rank is 1 plus the number of strictly better submissions.
    """
    reverse = direction is Direction.HIGHER_BETTER
    ordered = sorted(results.items(), key=lambda kv: kv[1], reverse=reverse)
    ranks: dict[str, int] = {}
    for position, (submission_id, value) in enumerate(ordered):
        if position > 0 and value == ordered[position - 1][1]:
            ranks[submission_id] = ranks[ordered[position - 1][0]]
        else:
            ranks[submission_id] = position + 1
    return ranks


def aggregate(ranks: Mapping[str, int], dataset_ids: Collection[str]) -> float:
    """Arithmetic mean rank over the task's datasets; requires one rank each."""
    missing = set(dataset_ids) - set(ranks)
    extra = set(ranks) - set(dataset_ids)
    if missing or extra:
        raise IncompleteRanks(
            f"expected one rank per dataset {sorted(dataset_ids)}, got {sorted(ranks)}"
        )
    if not dataset_ids:
        raise IncompleteRanks("cannot aggregate over zero datasets")
    return sum(ranks[d] for d in dataset_ids) / len(dataset_ids)


def build_leaderboard(
    *,
    dataset_ids: Collection[str],
    submissions: list[dict],
    runs_by_submission: Mapping[str, list[dict]],
    results_by_run: Mapping[str, dict],
) -> list[dict]:
    """Leaderboard entries in display order from a snapshot of the store.

    Eligible submissions (every run succeeded) come first, ascending by mean
    rank, then smaller total runtime, then earlier submission; ineligible
    ones follow, flagged, in submission order. Output is a pure function of
    the snapshot.
    """
    dataset_ids = sorted(dataset_ids)
    entries = []
    for sub in submissions:
        runs = runs_by_submission.get(sub["submission_id"], [])
        by_dataset = {r["dataset_id"]: r for r in runs}
        eligible = len(runs) == len(dataset_ids) and all(
            r["status"] == "succeeded" for r in runs
        )
        entries.append(
            {
                "submission": sub,
                "runs": by_dataset,
                "eligible": eligible,
            }
        )

    # Per-dataset competition ranks over eligible submissions only.
    rank_maps: dict[str, dict[str, int]] = {}
    for dataset_id in dataset_ids:
        scores = {}
        for entry in entries:
            if not entry["eligible"]:
                continue
            run = entry["runs"][dataset_id]
            result = results_by_run[run["run_id"]]
            scores[entry["submission"]["submission_id"]] = result["metrics"][
                result["primary_metric"]
            ]
        if scores:
            rank_maps[dataset_id] = rank_within_dataset(scores)

    output = []
    for entry in entries:
        sub = entry["submission"]
        per_dataset = {}
        total_runtime = 0.0
        for dataset_id in dataset_ids:
            run = entry["runs"].get(dataset_id)
            if run is None:
                continue
            total_runtime += run.get("wall_clock_seconds") or 0.0
            result = results_by_run.get(run["run_id"])
            per_dataset[dataset_id] = {
                "status": run["status"],
                "wall_clock_seconds": run.get("wall_clock_seconds"),
                "metrics": result["metrics"] if result else None,
                "rank": rank_maps[dataset_id][sub["submission_id"]]
                if entry["eligible"]
                else None,
            }
        mean_rank = None
        if entry["eligible"]:
            ranks = {d: per_dataset[d]["rank"] for d in dataset_ids}
            mean_rank = aggregate(ranks, dataset_ids)
        output.append(
            {
                "submission_id": sub["submission_id"],
                "author": sub["author"],
                "submitted_at": sub["submitted_at"],
                "eligible": entry["eligible"],
                "per_dataset": per_dataset,
                "mean_rank": mean_rank,
                "total_runtime_seconds": total_runtime,
            }
        )

    eligible_entries = [e for e in output if e["eligible"]]
    ineligible_entries = [e for e in output if not e["eligible"]]
    eligible_entries.sort(
        key=lambda e: (
            e["mean_rank"],
            e["total_runtime_seconds"],
            e["submitted_at"],
            e["submission_id"],
        )
    )
    ineligible_entries.sort(key=lambda e: (e["submitted_at"], e["submission_id"]))
    return eligible_entries + ineligible_entries
