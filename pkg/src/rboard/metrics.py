"""Task-specific evaluation metrics.

All functions are pure and stateless: identical inputs give bit-identical
outputs, so server-side scoring and offline re-scoring can never diverge.
The same implementations back both the evaluation engine and the CLI's
local evaluator.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import AbstractSet

from .errors import EmptyInput, EmptyRelevant, SingleClass

LOG_LOSS_EPS = 1e-15


def auc(labels: Sequence[int], scores: Sequence[float]) -> float:
    """Area under the ROC curve via the rank-sum statistic.

    Equals the probability that a uniformly random positive outranks a
    uniformly random negative, with ties counted 1/2 (average ranks).
    Requires at least one positive and one negative label.
    """
    if len(labels) != len(scores):
        raise ValueError("labels and scores must have equal length")
    n = len(labels)
    pos = sum(1 for y in labels if y == 1)
    neg = n - pos
    if pos == 0 or neg == 0:
        raise SingleClass("auc undefined: labels contain a single class")

    order = sorted(range(n), key=lambda i: scores[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        avg_rank = (i + j + 2) / 2.0  # 1-based average rank of the tie block
        for t in range(i, j + 1):
            ranks[order[t]] = avg_rank
        i = j + 1

    rank_sum = sum(r for r, y in zip(ranks, labels) if y == 1)
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg)


def log_loss(
    labels: Sequence[int], probs: Sequence[float], eps: float = LOG_LOSS_EPS
) -> float:
    """Negative mean log-likelihood with probabilities clamped to [eps, 1-eps]."""
    if len(labels) != len(probs):
        raise ValueError("labels and probs must have equal length")
    if not labels:
        raise EmptyInput("log_loss undefined on empty input")
    total = 0.0
    for y, p in zip(labels, probs):
        # Clamp the probability of the true class directly: forming 1-(1-eps)
        # in floating point would lose the clamp's precision near p=1.
        q = p if y == 1 else 1.0 - p
        q = min(max(q, eps), 1.0 - eps)
        total += -math.log(q)
    return total / len(labels)


def ndcg_at_k(
    ranked: Sequence[str], relevant: AbstractSet[str], k: int
) -> float:
    """Binary-relevance NDCG with log-2 discount, positions indexed from 1.

    ``ranked`` must not contain duplicates (enforced upstream at parse time).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant:
        raise EmptyRelevant("ndcg undefined for an empty relevant set")
    dcg = sum(
        1.0 / math.log2(i + 2)
        for i, item in enumerate(ranked[:k])
        if item in relevant
    )
    idcg = sum(1.0 / math.log2(i + 2) for i in range(min(k, len(relevant))))
    return dcg / idcg


def recall_at_k(
    ranked: Sequence[str], relevant: AbstractSet[str], k: int
) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant:
        raise EmptyRelevant("recall undefined for an empty relevant set")
    hits = sum(1 for item in ranked[:k] if item in relevant)
    return hits / len(relevant)


def hit_rate_at_k(
    ranked: Sequence[str], relevant: AbstractSet[str], k: int
) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    return 1.0 if any(item in relevant for item in ranked[:k]) else 0.0


def mrr(ranked: Sequence[str], relevant: AbstractSet[str]) -> float:
    """Reciprocal rank of the first relevant item, 0 when none appears."""
    for i, item in enumerate(ranked):
        if item in relevant:
            return 1.0 / (i + 1)
    return 0.0
