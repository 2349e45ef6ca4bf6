"""Aggregation of local explanations into one ranked global importance list.

A greedy submodular pick selects a budgeted set of instances whose
explanations jointly cover the most feature importance; the picked
explanations' signed contributions are then summed per feature and ranked by
absolute value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lime import Explanation


@dataclass(frozen=True)
class GlobalExplanation:
    """Ranked (feature, summed contribution) pairs over every schema feature,
    plus the instance indices the aggregate was built from."""

    entries: tuple[tuple[str, float], ...]
    picked_instances: tuple[int, ...]
    budget: int
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= len(self.entries):
            raise ValueError(f"k={self.k} out of range for {len(self.entries)} entries")

    def contribution(self, feature: str) -> float:
        for name, value in self.entries:
            if name == feature:
                return value
        raise KeyError(f"no entry for feature {feature!r}")

    def to_jsonable(self, sensitive: frozenset[str] | set[str] = frozenset()) -> dict:
        return {
            "entries": [{"feature": n, "contribution": v, "sensitive": n in sensitive}
                        for n, v in self.entries],
            "picked_instances": list(self.picked_instances),
            "budget": self.budget,
            "k": self.k,
        }


def _contribution_matrix(explanations: list[Explanation]) -> tuple[np.ndarray, tuple[str, ...]]:
    names = explanations[0].feature_order or tuple(sorted(n for n, _ in
                                                          explanations[0].contributions))
    index = {n: j for j, n in enumerate(names)}
    A = np.zeros((len(explanations), len(names)))
    for i, e in enumerate(explanations):
        for n, v in e.contributions:
            A[i, index[n]] = v
    return A, names


def coverage(A: np.ndarray, importance: np.ndarray, picked: list[int]) -> float:
    """Weighted feature coverage of a pick set: the summed importance of every
    feature touched (nonzero contribution) by at least one picked explanation."""
    if not picked:
        return 0.0
    covered = (np.abs(A[picked]) > 0).any(axis=0)
    return float(importance[covered].sum())


def submodular_pick(explanations: list[Explanation], budget: int) -> list[int]:
    """Greedy maximization of weighted feature coverage.

    Feature importance is sqrt of the summed |contribution| across all
    candidates. Ties break toward the lowest candidate index, so the result is
    deterministic for a fixed input order.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if len(explanations) < budget:
        raise ValueError(f"budget {budget} exceeds the {len(explanations)} candidates")
    A, _ = _contribution_matrix(explanations)
    importance = np.sqrt(np.abs(A).sum(axis=0))
    covers = np.abs(A) > 0

    picked: list[int] = []
    covered = np.zeros(A.shape[1], dtype=bool)
    remaining = list(range(len(explanations)))
    for _ in range(budget):
        gains = [importance[covers[i] & ~covered].sum() for i in remaining]
        best = int(np.argmax(gains))  # first maximum wins: lowest index
        choice = remaining.pop(best)
        picked.append(choice)
        covered |= covers[choice]
    return picked


def aggregate(explanations: list[Explanation], picked: list[int], k: int = 10) \
        -> GlobalExplanation:
    """Sum the signed contributions of the picked explanations per feature and
    rank by absolute value (ties keep feature-name order)."""
    if not picked:
        raise ValueError("picked instance list is empty")
    for i in picked:
        if not 0 <= i < len(explanations):
            raise ValueError(f"picked index {i} out of range")
    A, names = _contribution_matrix(explanations)
    totals = A[picked].sum(axis=0)
    order = sorted(range(len(names)), key=lambda j: (-abs(totals[j]), j))
    entries = tuple((names[j], float(totals[j])) for j in order)
    return GlobalExplanation(entries=entries, picked_instances=tuple(picked),
                             budget=len(picked), k=min(k, len(entries)))


def top_k(g: GlobalExplanation, k: int) -> list[tuple[str, float]]:
    """First k entries of the ranked list."""
    if not 1 <= k <= len(g.entries):
        raise ValueError(f"k={k} out of range for {len(g.entries)} entries")
    return list(g.entries[:k])
