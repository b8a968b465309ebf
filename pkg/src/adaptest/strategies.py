"""Adaptive item-selection policies and the session state they share.

A session walks one respondent through the item bank: a policy proposes the
next item, the caller supplies that item's polytomized level and per-item
regression prediction, and the state re-estimates the latent trait after
every step.  Policies:

- maximum Fisher information at the current trait estimate ("alirt"),
- an actor-critic pair of regression families trained on item subsets,
- a regression-tree walk over already-collected answers,
- fixed orders (correlation-ranked forward/backward) and per-respondent
  random orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Protocol

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import (
    DegenerateTree,
    EmptySession,
    InsufficientData,
    ItemAlreadyAdministered,
    NoItemsRemaining,
    PowersetTooLarge,
    SetMismatch,
    UnknownStrategy,
)
from .grm import GrmModel, LatentEstimate, item_information, map_estimate
from .ridge import RidgeModel
from .seeding import derive_rng
from .tree import RegressionTree, fit_tree

STRATEGY_IDS = ("alirt", "actor_critic", "random", "forward", "backward", "tree")
SCORING_IDS = ("latent", "ctt")

MAX_ACTOR_CRITIC_ITEMS = 16


# ---------------------------------------------------------------------------
# Session state


@dataclass(frozen=True)
class SessionState:
    """Immutable snapshot of one respondent's progress through the bank."""

    administered: tuple[int, ...]
    remaining: frozenset[int]
    theta: LatentEstimate
    yhat_history: tuple[float, ...]
    levels: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        overlap = set(self.administered) & self.remaining
        if overlap:
            raise ValueError(f"items both administered and remaining: {sorted(overlap)}")
        if len(self.yhat_history) != len(self.administered):
            raise ValueError("one prediction per administered item required")
        if set(self.levels) != set(self.administered):
            raise ValueError("levels must cover exactly the administered items")
        if len(set(self.administered)) != len(self.administered):
            raise ValueError("administered items must be unique")

    @property
    def step(self) -> int:
        return len(self.administered)

    @property
    def done(self) -> bool:
        return not self.remaining

    def yhat_for(self, item_id: int) -> float:
        return self.yhat_history[self.administered.index(item_id)]


def initial_state(item_ids: Iterable[int], *, theta0: float = 0.0) -> SessionState:
    ids = frozenset(item_ids)
    if not ids:
        raise ValueError("need at least one item")
    return SessionState(
        administered=(),
        remaining=ids,
        theta=LatentEstimate(theta=theta0, posterior_sd=1.0, n_items_used=0),
        yhat_history=(),
        levels={},
    )


def advance(
    model: GrmModel,
    state: SessionState,
    item_id: int,
    level: int,
    yhat: float,
) -> SessionState:
    """Record one answered item and re-estimate the trait by MAP over all
    levels collected so far."""
    if item_id in state.administered:
        raise ItemAlreadyAdministered(f"item {item_id} was already administered")
    if item_id not in state.remaining:
        raise ValueError(f"item {item_id} is not in this session's bank")
    levels = dict(state.levels)
    levels[item_id] = level
    theta = map_estimate(model, levels)
    return replace(
        state,
        administered=state.administered + (item_id,),
        remaining=state.remaining - {item_id},
        theta=theta,
        yhat_history=state.yhat_history + (float(yhat),),
        levels=levels,
    )


def alirt_update(
    model: GrmModel, state: SessionState, item_id: int, level: int, yhat: float
) -> SessionState:
    """Alias kept for symmetry with alirt_next; the update rule is shared by
    every policy."""
    return advance(model, state, item_id, level, yhat)


def alirt_next(model: GrmModel, state: SessionState) -> int:
    """Remaining item with maximum Fisher information at the current trait
    estimate; ties go to the lowest item id."""
    if not state.remaining:
        raise NoItemsRemaining("all items have been administered")
    theta = np.array([state.theta.theta])
    best_id = None
    best_info = -np.inf
    for item_id in sorted(state.remaining):
        info = float(item_information(model.items[item_id], theta)[0])
        if info > best_info:
            best_info = info
            best_id = item_id
    return best_id


def ctt_score(state: SessionState) -> float:
    """Mean of the per-item regression predictions collected so far."""
    if not state.yhat_history:
        raise EmptySession("cannot score a session with no administered items")
    return float(np.mean(state.yhat_history))


# ---------------------------------------------------------------------------
# Actor-critic subset models

SubsetKey = tuple[int, ...]


@dataclass(frozen=True)
class ActorCriticModel:
    """Two regression families over item subsets.

    measure_models[S] predicts the measure from the per-item predictions of
    the items in S (one model per non-empty subset).  error_models[(S, i)]
    predicts the squared error that the measure model for S + {i} would incur,
    from the predictions of the items in S alone — this is what the selection
    rule minimizes.  Empty-prefix error models are intercept-only.
    """

    item_ids: tuple[int, ...]
    measure_models: Mapping[SubsetKey, RidgeModel]
    error_models: Mapping[tuple[SubsetKey, int], RidgeModel]
    lam: float

    @property
    def n_measure_models(self) -> int:
        return len(self.measure_models)

    @property
    def n_error_models(self) -> int:
        return len(self.error_models)

    @property
    def n_nonempty_error_models(self) -> int:
        return sum(1 for S, _ in self.error_models if S)


def _subset_from_mask(mask: int, item_ids: tuple[int, ...]) -> SubsetKey:
    return tuple(item_ids[p] for p in range(len(item_ids)) if mask >> p & 1)


def train_actor_critic(
    yhat_measure: np.ndarray,
    y_measure: np.ndarray,
    yhat_error: np.ndarray,
    y_error: np.ndarray,
    item_ids: Iterable[int],
    *,
    lam: float = 1.0,
) -> ActorCriticModel:
    """Fit every subset measure model on one split and every error model on a
    second, disjoint split.

    yhat_* are (n, J) matrices of per-item regression predictions, columns
    aligned with sorted item_ids; y_* are the matching measure scores.
    """
    ids = tuple(sorted(item_ids))
    J = len(ids)
    if J > MAX_ACTOR_CRITIC_ITEMS:
        raise PowersetTooLarge(
            f"{J} items means {2**J - 1} subset models; the limit is {MAX_ACTOR_CRITIC_ITEMS} items"
        )
    Xm = np.asarray(yhat_measure, dtype=float)
    ym = np.asarray(y_measure, dtype=float)
    Xe = np.asarray(yhat_error, dtype=float)
    ye = np.asarray(y_error, dtype=float)
    for X, y, name in ((Xm, ym, "measure"), (Xe, ye, "error")):
        if X.ndim != 2 or X.shape[1] != J:
            raise ValueError(f"{name} predictions must be an (n, {J}) matrix")
        if X.shape[0] != len(y):
            raise ValueError(f"{name} predictions and scores disagree on n")
        if X.shape[0] < 2:
            raise InsufficientData(0, f"need at least 2 {name}-split rows, got {X.shape[0]}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError(f"{name} inputs must be finite")
    if lam <= 0:
        raise ValueError("lam must be positive")

    # Centered Gram matrices let every subset solve reuse the same products.
    mu_m = Xm.mean(axis=0)
    Xm_c = Xm - mu_m
    ym_bar = float(ym.mean())
    Gm = Xm_c.T @ Xm_c
    cm = Xm_c.T @ (ym - ym_bar)

    mu_e = Xe.mean(axis=0)
    Xe_c = Xe - mu_e
    Ge = Xe_c.T @ Xe_c

    measure_models: dict[SubsetKey, RidgeModel] = {}
    pred_on_error_split: dict[SubsetKey, np.ndarray] = {}
    full = (1 << J) - 1
    for mask in range(1, full + 1):
        pos = [p for p in range(J) if mask >> p & 1]
        S = tuple(ids[p] for p in pos)
        A = Gm[np.ix_(pos, pos)] + lam * np.eye(len(pos))
        w = np.linalg.solve(A, cm[pos])
        b = ym_bar - float(mu_m[pos] @ w)
        measure_models[S] = RidgeModel(weights=w, intercept=b, lam=lam)
        pred_on_error_split[S] = Xe[:, pos] @ w + b

    error_models: dict[tuple[SubsetKey, int], RidgeModel] = {}
    for mask in range(full + 1):
        pos = [p for p in range(J) if mask >> p & 1]
        S = tuple(ids[p] for p in pos)
        free = [p for p in range(J) if not (mask >> p & 1)]
        if not free:
            continue
        if pos:
            factor = cho_factor(Ge[np.ix_(pos, pos)] + lam * np.eye(len(pos)))
        for p_next in free:
            bigger = _subset_from_mask(mask | (1 << p_next), ids)
            sq_err = (pred_on_error_split[bigger] - ye) ** 2
            if not pos:
                error_models[(S, ids[p_next])] = RidgeModel(
                    weights=np.zeros(0), intercept=float(sq_err.mean()), lam=lam
                )
                continue
            t_bar = float(sq_err.mean())
            w = cho_solve(factor, Xe_c[:, pos].T @ (sq_err - t_bar))
            b = t_bar - float(mu_e[pos] @ w)
            error_models[(S, ids[p_next])] = RidgeModel(weights=w, intercept=b, lam=lam)

    return ActorCriticModel(
        item_ids=ids, measure_models=measure_models, error_models=error_models, lam=lam
    )


def actor_critic_next(model: ActorCriticModel, state: SessionState) -> int:
    """Remaining item whose error model predicts the smallest squared error;
    ties go to the lowest item id."""
    if not state.remaining:
        raise NoItemsRemaining("all items have been administered")
    S = tuple(sorted(state.administered))
    x = np.array([state.yhat_for(item_id) for item_id in S])
    best_id = None
    best_err = np.inf
    for item_id in sorted(state.remaining):
        try:
            err_model = model.error_models[(S, item_id)]
        except KeyError:
            raise SetMismatch(
                f"no error model for prefix {S} and candidate {item_id}"
            ) from None
        err = err_model.predict(x) if len(S) else err_model.intercept
        if err < best_err:
            best_err = err
            best_id = item_id
    return best_id


def actor_critic_score(model: ActorCriticModel, state: SessionState) -> float:
    """Measure prediction from the model trained on exactly the administered
    subset."""
    if not state.administered:
        raise EmptySession("cannot score a session with no administered items")
    S = tuple(sorted(state.administered))
    try:
        measure_model = model.measure_models[S]
    except KeyError:
        raise SetMismatch(f"no measure model for item set {S}") from None
    x = np.array([state.yhat_for(item_id) for item_id in S])
    return float(measure_model.predict(x))


# ---------------------------------------------------------------------------
# Fixed and random orders


def item_score_correlations(
    levels: np.ndarray, y: np.ndarray, item_ids: Iterable[int]
) -> dict[int, float]:
    """|Pearson r| between each item's polytomized level column and the
    measure.  A constant column gets 0 (least informative) rather than an
    error, so degenerate items sort last."""
    ids = tuple(sorted(item_ids))
    L = np.asarray(levels, dtype=float)
    y = np.asarray(y, dtype=float)
    if L.ndim != 2 or L.shape[1] != len(ids) or L.shape[0] != len(y):
        raise ValueError("levels must be an (n, J) matrix aligned with y")
    out: dict[int, float] = {}
    y_c = y - y.mean()
    y_ss = float(y_c @ y_c)
    for col, item_id in enumerate(ids):
        x_c = L[:, col] - L[:, col].mean()
        x_ss = float(x_c @ x_c)
        if x_ss <= 0 or y_ss <= 0:
            out[item_id] = 0.0
        else:
            out[item_id] = abs(float(x_c @ y_c) / np.sqrt(x_ss * y_ss))
    return out


def fixed_order(kind: str, correlations: Mapping[int, float]) -> tuple[int, ...]:
    """Deterministic ask-order from per-item |correlation| with the measure.

    forward ranks strongest first.  backward eliminates the weakest item
    repeatedly and asks in reverse elimination order; with all correlations
    distinct the two coincide.  Ties in the resulting ask-order always prefer
    the lowest item id.
    """
    if kind not in ("forward", "backward"):
        raise UnknownStrategy(f"unknown fixed order {kind!r}")
    if kind == "forward":
        return tuple(sorted(correlations, key=lambda i: (-correlations[i], i)))
    pool = dict(correlations)
    eliminated: list[int] = []
    while pool:
        # Weakest goes first; among ties the higher id is eliminated earlier
        # so that the reversed ask-order still prefers the lower id.
        victim = min(pool, key=lambda i: (pool[i], -i))
        eliminated.append(victim)
        del pool[victim]
    return tuple(reversed(eliminated))


def random_order(item_ids: Iterable[int], seed: int, key: str) -> tuple[int, ...]:
    """Per-respondent permutation, reproducible from (seed, key)."""
    ids = sorted(item_ids)
    rng = derive_rng(seed, "order", key)
    return tuple(int(i) for i in rng.permutation(ids))


# ---------------------------------------------------------------------------
# Uniform policy interface


class SelectionPolicy(Protocol):
    strategy_id: str

    def next_item(self, state: SessionState, key: str) -> int: ...


@dataclass(frozen=True)
class AlirtPolicy:
    model: GrmModel
    strategy_id: str = "alirt"

    def next_item(self, state: SessionState, key: str) -> int:
        return alirt_next(self.model, state)


@dataclass(frozen=True)
class ActorCriticPolicy:
    model: ActorCriticModel
    strategy_id: str = "actor_critic"

    def next_item(self, state: SessionState, key: str) -> int:
        return actor_critic_next(self.model, state)


@dataclass(frozen=True)
class FixedOrderPolicy:
    order: tuple[int, ...]
    strategy_id: str

    def next_item(self, state: SessionState, key: str) -> int:
        if not state.remaining:
            raise NoItemsRemaining("all items have been administered")
        for item_id in self.order:
            if item_id in state.remaining:
                return item_id
        raise NoItemsRemaining("fixed order does not cover the remaining items")


@dataclass(frozen=True)
class RandomOrderPolicy:
    item_ids: tuple[int, ...]
    seed: int
    strategy_id: str = "random"

    def next_item(self, state: SessionState, key: str) -> int:
        if not state.remaining:
            raise NoItemsRemaining("all items have been administered")
        for item_id in random_order(self.item_ids, self.seed, key):
            if item_id in state.remaining:
                return item_id
        raise NoItemsRemaining("random order does not cover the remaining items")


@dataclass(frozen=True)
class TreePolicy:
    """Walk the tree using answers already collected; an internal node that
    tests an unanswered item proposes that item.  Reaching a leaf (or a node
    whose test the walk cannot follow further) falls back to a fixed order."""

    tree: RegressionTree
    fallback: tuple[int, ...]
    strategy_id: str = "tree"
    mode: str = "levels"

    def __post_init__(self):
        if self.mode not in ("levels", "yhat"):
            raise ValueError(f"unknown tree walk mode {self.mode!r}")
        if not self.fallback:
            raise DegenerateTree("a tree policy needs a non-empty fallback order")

    def _value(self, state: SessionState, item_id: int) -> float:
        if self.mode == "levels":
            return float(state.levels[item_id])
        return state.yhat_for(item_id)

    def next_item(self, state: SessionState, key: str) -> int:
        if not state.remaining:
            raise NoItemsRemaining("all items have been administered")
        idx = 0
        while True:
            node = self.tree.nodes[idx]
            if node.feature is None:
                break
            if node.feature in state.remaining:
                return node.feature
            if node.feature not in state.levels:
                break
            idx = node.left if self._value(state, node.feature) <= node.threshold else node.right
        for item_id in self.fallback:
            if item_id in state.remaining:
                return item_id
        raise NoItemsRemaining("fallback order does not cover the remaining items")


def decision_tree_strategy(
    levels: np.ndarray,
    y: np.ndarray,
    item_ids: Iterable[int],
    *,
    fallback: Iterable[int] | None = None,
    max_leaves: int = 16,
    min_leaf: int = 5,
    mode: str = "levels",
) -> TreePolicy:
    """Fit the regression tree on training levels and wrap it as a policy.

    When the tree cannot split at all (pure target, constant features) and no
    fallback order is supplied there is no way to propose an item, which is
    the degenerate case."""
    ids = sorted(item_ids)
    tree = fit_tree(
        np.asarray(levels, dtype=float), y, ids, max_leaves=max_leaves, min_leaf=min_leaf
    )
    if fallback is None:
        if tree.root_is_leaf:
            raise DegenerateTree(
                "the tree has no usable split and no fallback order was given"
            )
        corr = item_score_correlations(levels, y, ids)
        fallback = fixed_order("forward", corr)
    return TreePolicy(tree=tree, fallback=tuple(fallback), mode=mode)
