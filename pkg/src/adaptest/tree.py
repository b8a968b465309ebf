"""Variance-reduction regression tree (CART-style) grown best-first.

The tree doubles as an adaptive questioning policy: each internal node tests
one item's value, so a root-to-leaf walk is an item ordering.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TreeNode:
    """feature is the item id tested; None marks a leaf.  Rows with
    value <= threshold descend left."""

    feature: int | None
    threshold: float | None
    left: int
    right: int
    value: float
    n: int


@dataclass(frozen=True)
class RegressionTree:
    nodes: tuple[TreeNode, ...]

    @property
    def root_is_leaf(self) -> bool:
        return self.nodes[0].feature is None

    @property
    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if n.feature is None)

    def leaf_value(self, features: dict[int, float]) -> float:
        idx = 0
        while self.nodes[idx].feature is not None:
            node = self.nodes[idx]
            idx = node.left if features[node.feature] <= node.threshold else node.right
        return self.nodes[idx].value

    def to_json(self) -> list[dict]:
        return [
            {
                "feature": n.feature,
                "threshold": n.threshold,
                "left": n.left,
                "right": n.right,
                "value": n.value,
                "n": n.n,
            }
            for n in self.nodes
        ]

    @classmethod
    def from_json(cls, data: list[dict]) -> "RegressionTree":
        return cls(
            tuple(
                TreeNode(
                    feature=row["feature"],
                    threshold=row["threshold"],
                    left=row["left"],
                    right=row["right"],
                    value=row["value"],
                    n=row["n"],
                )
                for row in data
            )
        )


def _best_split(
    X: np.ndarray, y: np.ndarray, rows: np.ndarray, feature_ids: list[int], min_leaf: int
) -> tuple[float, int, float] | None:
    """Highest SSE reduction over (feature, threshold); ties prefer the lowest
    item id, then the lowest threshold.  None when nothing splits."""
    best: tuple[float, int, float] | None = None
    y_rows = y[rows]
    n = len(rows)
    if n < 2 * min_leaf:
        return None
    total_sum = y_rows.sum()
    total_sq = float(y_rows @ y_rows)
    parent_sse = total_sq - total_sum**2 / n
    for col, item_id in enumerate(feature_ids):
        order = np.argsort(X[rows, col], kind="stable")
        xs = X[rows, col][order]
        ys = y_rows[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys**2)
        for split_at in range(min_leaf, n - min_leaf + 1):
            if xs[split_at - 1] == xs[split_at]:
                continue
            left_n = split_at
            left_sse = csq[split_at - 1] - csum[split_at - 1] ** 2 / left_n
            right_n = n - split_at
            right_sum = total_sum - csum[split_at - 1]
            right_sse = (total_sq - csq[split_at - 1]) - right_sum**2 / right_n
            gain = parent_sse - left_sse - right_sse
            if gain <= 1e-12:
                continue
            threshold = (xs[split_at - 1] + xs[split_at]) / 2.0
            if best is None or gain > best[0] + 1e-12:
                best = (gain, item_id, threshold)
    return best


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    feature_ids: list[int],
    *,
    max_leaves: int = 16,
    min_leaf: int = 5,
) -> RegressionTree:
    """Grow best-first: always expand the pending leaf whose split removes the
    most SSE, until max_leaves or nothing improves.  A pure target yields a
    single-leaf tree."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(y) or X.shape[1] != len(feature_ids):
        raise ValueError("X must be n x len(feature_ids) aligned with y")
    if len(y) < 1:
        raise ValueError("need at least one row")
    col_of = {item_id: c for c, item_id in enumerate(feature_ids)}

    nodes: list[dict] = []

    def new_node(rows: np.ndarray) -> int:
        nodes.append(
            {
                "rows": rows,
                "feature": None,
                "threshold": None,
                "left": -1,
                "right": -1,
                "value": float(y[rows].mean()),
                "n": len(rows),
            }
        )
        return len(nodes) - 1

    root = new_node(np.arange(len(y)))
    heap: list[tuple[float, int, int, float, int]] = []
    counter = 0

    def push_candidate(idx: int):
        nonlocal counter
        found = _best_split(X, y, nodes[idx]["rows"], feature_ids, min_leaf)
        if found is not None:
            gain, item_id, threshold = found
            heapq.heappush(heap, (-gain, item_id, counter, threshold, idx))
            counter += 1

    push_candidate(root)
    n_leaves = 1
    while heap and n_leaves < max_leaves:
        neg_gain, item_id, _, threshold, idx = heapq.heappop(heap)
        rows = nodes[idx]["rows"]
        mask = X[rows, col_of[item_id]] <= threshold
        left = new_node(rows[mask])
        right = new_node(rows[~mask])
        nodes[idx].update(feature=item_id, threshold=threshold, left=left, right=right)
        n_leaves += 1
        push_candidate(left)
        push_candidate(right)

    return RegressionTree(
        tuple(
            TreeNode(
                feature=n["feature"],
                threshold=n["threshold"],
                left=n["left"],
                right=n["right"],
                value=n["value"],
                n=n["n"],
            )
            for n in nodes
        )
    )
