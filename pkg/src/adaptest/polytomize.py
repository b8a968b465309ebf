"""Percentile discretization of continuous predicted scores into K levels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import KTooLargeForData

DEFAULT_K = 8


@dataclass(frozen=True)
class ThresholdTable:
    """Per item: K sorted cut points, the (100k/K)-percentiles for k=1..K."""

    thresholds: dict[int, np.ndarray]
    K: int

    def __post_init__(self):
        for item_id, cuts in self.thresholds.items():
            if len(cuts) != self.K:
                raise ValueError(f"item {item_id}: expected {self.K} thresholds")
            if np.any(np.diff(cuts) < 0):
                raise ValueError(f"item {item_id}: thresholds must be non-decreasing")


def fit_thresholds(poly_predictions: dict[int, np.ndarray], K: int = DEFAULT_K) -> ThresholdTable:
    """Cut points from the fitting split's predicted scores, per item.

    threshold[k] is the (100k/K)-th linear-interpolation percentile, so the
    last threshold is the split's maximum prediction.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    qs = [100.0 * k / K for k in range(1, K + 1)]
    table = {}
    for item_id, values in poly_predictions.items():
        values = np.asarray(values, dtype=float)
        if len(values) < K:
            raise KTooLargeForData(
                f"item {item_id}: {len(values)} predictions cannot support K={K}"
            )
        table[item_id] = np.percentile(values, qs, method="linear")
    return ThresholdTable(table, K)


def apply_thresholds(table: ThresholdTable, yhat: float, item_id: int) -> int:
    """Level of a predicted score: 1 + the number of cut points strictly below
    it, clamped to K.

    Scores at or below the lowest cut map to level 1 (a flat table maps
    everything to 1); scores above the top cut clamp to K.
    """
    cuts = table.thresholds[item_id]
    return min(int(np.sum(cuts < yhat)) + 1, table.K)


def polytomize_scores(table: ThresholdTable, scores: dict[int, float]) -> dict[int, int]:
    return {i: apply_thresholds(table, s, i) for i, s in scores.items()}


def unobserved_levels(levels_by_item: dict[int, np.ndarray], K: int) -> dict[int, list[int]]:
    """Which levels of 1..K never occur per item; empty when all are in use."""
    missing = {}
    for item_id, levels in levels_by_item.items():
        seen = set(int(v) for v in np.asarray(levels).ravel())
        gap = [k for k in range(1, K + 1) if k not in seen]
        if gap:
            missing[item_id] = gap
    return missing
