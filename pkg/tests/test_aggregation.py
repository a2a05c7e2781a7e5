import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rboard.aggregation import (
    Direction,
    aggregate,
    build_leaderboard,
    rank_within_dataset,
)
from rboard.errors import IncompleteRanks


class TestRankWithinDataset:
    def test_competition_ranking(self):
        values = {"A": 0.9, "B": 0.8, "C": 0.8, "D": 0.7}
        assert rank_within_dataset(values) == {"A": 1, "B": 2, "C": 2, "D": 4}

    def test_single_submission(self):
        assert rank_within_dataset({"only": 0.4}) == {"only": 1}

    def test_full_tie(self):
        assert rank_within_dataset({"a": 0.5, "b": 0.5, "c": 0.5}) == {
            "a": 1, "b": 1, "c": 1,
        }

    def test_lower_better(self):
        values = {"A": 0.2, "B": 0.5}
        assert rank_within_dataset(values, Direction.LOWER_BETTER) == {"A": 1, "B": 2}

    @given(st.dictionaries(st.text(min_size=1, max_size=4), st.floats(0, 1), min_size=1, max_size=12))
    @settings(max_examples=100, deadline=None)
    def test_rank_is_one_plus_strictly_better(self, values):
        ranks = rank_within_dataset(values)
        for sid, value in values.items():
            better = sum(1 for v in values.values() if v > value)
            assert ranks[sid] == better + 1

    @given(st.dictionaries(st.text(min_size=1, max_size=4), st.floats(0.01, 1), min_size=1, max_size=10))
    @settings(max_examples=60, deadline=None)
    def test_monotone_transform_leaves_ranks_unchanged(self, values):
        transformed = {k: 3.0 * v + 1.0 for k, v in values.items()}
        assert rank_within_dataset(values) == rank_within_dataset(transformed)


class TestAggregate:
    def test_mean(self):
        ranks = {"d1": 1, "d2": 2, "d3": 1}
        assert aggregate(ranks, ["d1", "d2", "d3"]) == pytest.approx(4 / 3)

    def test_single_dataset_identity(self):
        assert aggregate({"d1": 7}, ["d1"]) == 7

    def test_ordering_comparison(self):
        better = aggregate({"d1": 1, "d2": 2, "d3": 1}, ["d1", "d2", "d3"])
        worse = aggregate({"d1": 2, "d2": 1, "d3": 2}, ["d1", "d2", "d3"])
        assert better < worse

    def test_incomplete(self):
        with pytest.raises(IncompleteRanks):
            aggregate({"d1": 1}, ["d1", "d2"])
        with pytest.raises(IncompleteRanks):
            aggregate({"d1": 1, "dx": 2}, ["d1"])


def snapshot(metric_values, *, runtimes=None, statuses=None):
    """Build a leaderboard snapshot: {sid: {dataset: value}} -> inputs."""
    dataset_ids = sorted({d for per in metric_values.values() for d in per})
    submissions, runs_by, results_by = [], {}, {}
    for i, (sid, per_dataset) in enumerate(sorted(metric_values.items())):
        submissions.append(
            {"submission_id": sid, "author": sid, "submitted_at": f"2026-01-0{i + 1}"}
        )
        runs = []
        for dataset_id in dataset_ids:
            run_id = f"run-{sid}-{dataset_id}"
            status = (statuses or {}).get((sid, dataset_id), "succeeded")
            runs.append(
                {
                    "run_id": run_id,
                    "dataset_id": dataset_id,
                    "status": status,
                    "wall_clock_seconds": (runtimes or {}).get(sid, 1.0),
                }
            )
            if status == "succeeded":
                results_by[run_id] = {
                    "metrics": {"auc": per_dataset[dataset_id]},
                    "primary_metric": "auc",
                }
        runs_by[sid] = runs
    return dict(
        dataset_ids=dataset_ids,
        submissions=submissions,
        runs_by_submission=runs_by,
        results_by_run=results_by,
    )


class TestBuildLeaderboard:
    def test_orders_by_mean_rank(self):
        board = build_leaderboard(
            **snapshot({
                "fast": {"d1": 0.9, "d2": 0.6, "d3": 0.9},
                "slow": {"d1": 0.8, "d2": 0.7, "d3": 0.8},
            })
        )
        assert [e["submission_id"] for e in board] == ["fast", "slow"]
        assert board[0]["mean_rank"] == pytest.approx(4 / 3)
        assert board[1]["mean_rank"] == pytest.approx(5 / 3)

    def test_runtime_breaks_ties(self):
        board = build_leaderboard(
            **snapshot(
                {"a": {"d1": 0.9, "d2": 0.5}, "b": {"d1": 0.5, "d2": 0.9}},
                runtimes={"a": 100.0, "b": 50.0},
            )
        )
        assert board[0]["mean_rank"] == board[1]["mean_rank"] == 1.5
        assert [e["submission_id"] for e in board] == ["b", "a"]

    def test_ineligible_after_eligible(self):
        board = build_leaderboard(
            **snapshot(
                {"good": {"d1": 0.1}, "partial": {"d1": 0.99}},
                statuses={("partial", "d1"): "failed"},
            )
        )
        assert [e["submission_id"] for e in board] == ["good", "partial"]
        assert board[1]["eligible"] is False
        assert board[1]["mean_rank"] is None
        assert board[1]["per_dataset"]["d1"]["rank"] is None

    def test_all_tie_dataset_preserves_order(self):
        base = {
            "x": {"d1": 0.9, "d2": 0.4},
            "y": {"d1": 0.7, "d2": 0.6},
            "z": {"d1": 0.5, "d2": 0.5},
        }
        before = build_leaderboard(**snapshot(base))
        with_tie = {
            sid: dict(per, d3=0.5) for sid, per in base.items()  # same value for all
        }
        after = build_leaderboard(**snapshot(with_tie))
        assert [e["submission_id"] for e in before] == [e["submission_id"] for e in after]
        # every eligible mean rank shifts by the same constant
        shifts = {
            a["submission_id"]: a["mean_rank"] * 3 - b["mean_rank"] * 2
            for a, b in zip(after, before)
        }
        assert all(v == pytest.approx(1.0) for v in shifts.values())

    def test_deterministic_output(self):
        snap = snapshot({"a": {"d1": 0.9}, "b": {"d1": 0.8}})
        one = json.dumps(build_leaderboard(**snap), sort_keys=True)
        two = json.dumps(build_leaderboard(**snap), sort_keys=True)
        assert one == two

    def test_empty(self):
        assert build_leaderboard(
            dataset_ids=["d1"], submissions=[], runs_by_submission={}, results_by_run={}
        ) == []
