"""One fitted assessment pipeline: per-item regressions, polytomization
thresholds, the graded-response model, and every selection policy trained
from a (train, poly) pair of respondent splits.

The same object backs both the cross-validated benchmark (one pipeline per
fold rotation) and the live service (one pipeline serialized as a bundle).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingModel
from .errors import SetMismatch, UnknownStrategy
from .grm import GrmModel, LatentEstimate, fit_grm, map_estimate
from .items import ItemBank
from .polytomize import ThresholdTable, fit_thresholds, polytomize_scores
from .records import Dataset, RespondentRecord
from .ridge import RidgeModel, fit_item_models, predict_item_scores
from .strategies import (
    ActorCriticModel,
    ActorCriticPolicy,
    AlirtPolicy,
    FixedOrderPolicy,
    RandomOrderPolicy,
    SelectionPolicy,
    TreePolicy,
    decision_tree_strategy,
    fixed_order,
    item_score_correlations,
    train_actor_critic,
)

DEFAULT_STRATEGIES = ("alirt", "random", "forward", "backward")
ALL_STRATEGIES = ("alirt", "actor_critic", "random", "forward", "backward", "tree")


@dataclass
class FittedPipeline:
    """Everything needed to administer and score an assessment."""

    items: ItemBank
    embeddings: EmbeddingModel
    K: int
    seed: int
    item_models: dict[int, RidgeModel]
    thresholds: ThresholdTable
    grm: GrmModel
    fixed_orders: dict[str, tuple[int, ...]]
    actor_critic: ActorCriticModel | None = None
    tree_policy: TreePolicy | None = None
    theta0: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def item_ids(self) -> list[int]:
        return self.items.item_ids

    @property
    def available_strategies(self) -> tuple[str, ...]:
        out = ["alirt", "random", "forward", "backward"]
        if self.actor_critic is not None:
            out.insert(1, "actor_critic")
        if self.tree_policy is not None:
            out.append("tree")
        return tuple(out)

    def predicted_scores(self, record: RespondentRecord) -> dict[int, float]:
        """ŷ for every item the record answers usably."""
        return predict_item_scores(self.item_models, self.embeddings, record)

    def full_scores(self, record: RespondentRecord) -> dict[int, float]:
        """ŷ for every item in the bank; missing or unusable answers are an
        error because benchmark targets need the complete profile."""
        scores = self.predicted_scores(record)
        if set(scores) != set(self.item_ids):
            missing = sorted(set(self.item_ids) - set(scores))
            raise SetMismatch(
                f"respondent {record.respondent_id!r} has no usable answer for items {missing}"
            )
        return scores

    def levels_for(self, scores: dict[int, float]) -> dict[int, int]:
        return polytomize_scores(self.thresholds, scores)

    def latent_all(self, levels: dict[int, int]) -> LatentEstimate:
        """MAP estimate from every item in the bank — the evaluation target."""
        if set(levels) != set(self.item_ids):
            raise SetMismatch("latent_all needs a level for every item")
        return map_estimate(self.grm, levels)

    def policy(self, strategy: str) -> SelectionPolicy:
        if strategy == "alirt":
            return AlirtPolicy(model=self.grm)
        if strategy == "actor_critic":
            if self.actor_critic is None:
                raise UnknownStrategy("actor_critic was not trained in this pipeline")
            return ActorCriticPolicy(model=self.actor_critic)
        if strategy == "random":
            return RandomOrderPolicy(item_ids=tuple(self.item_ids), seed=self.seed)
        if strategy in ("forward", "backward"):
            return FixedOrderPolicy(
                order=self.fixed_orders[strategy], strategy_id=strategy
            )
        if strategy == "tree":
            if self.tree_policy is None:
                raise UnknownStrategy("tree was not trained in this pipeline")
            return self.tree_policy
        raise UnknownStrategy(f"unknown strategy {strategy!r}")


def _score_matrix(
    pipeline_items: list[int],
    records: list[RespondentRecord],
    scores_by_rid: dict[str, dict[int, float]],
) -> np.ndarray:
    return np.array(
        [[scores_by_rid[r.respondent_id][i] for i in pipeline_items] for r in records]
    )


def fit_pipeline(
    dataset: Dataset,
    embeddings: EmbeddingModel,
    *,
    K: int,
    seed: int,
    train_ids: frozenset[str] | set[str],
    poly_ids: frozenset[str] | set[str],
    strategies: tuple[str, ...] = DEFAULT_STRATEGIES,
    theta0: str | float = 0.0,
    ac_lambda: float = 1.0,
    tree_max_leaves: int = 16,
    tree_min_leaf: int = 5,
    on_unobserved: str = "collapse",
) -> FittedPipeline:
    """Fit the full pipeline from two disjoint respondent splits.

    The poly split trains the per-item regressions and their polytomization
    thresholds; the train split fits the graded-response model, the fixed
    orders, the tree, and the actor-critic measure models (whose error models
    come from the poly split).  Respondents outside the two splits influence
    nothing.
    """
    unknown = set(strategies) - set(ALL_STRATEGIES)
    if unknown:
        raise UnknownStrategy(f"unknown strategies: {sorted(unknown)}")
    overlap = set(train_ids) & set(poly_ids)
    if overlap:
        raise ValueError(f"train and poly splits overlap: {sorted(overlap)[:5]}")
    ids = dataset.items.item_ids
    poly_ds = dataset.subset(set(poly_ids))
    train_ds = dataset.subset(set(train_ids))

    item_models = fit_item_models(poly_ds, embeddings, seed=seed)

    def all_scores(ds: Dataset) -> dict[str, dict[int, float]]:
        out = {}
        for rec in ds.records:
            scores = predict_item_scores(item_models, embeddings, rec)
            if set(scores) != set(ids):
                missing = sorted(set(ids) - set(scores))
                raise SetMismatch(
                    f"respondent {rec.respondent_id!r} has no usable answer for items {missing}"
                )
            out[rec.respondent_id] = scores
        return out

    poly_scores = all_scores(poly_ds)
    train_scores = all_scores(train_ds)

    thresholds = fit_thresholds(
        {
            i: np.array([poly_scores[r.respondent_id][i] for r in poly_ds.records])
            for i in ids
        },
        K,
    )

    train_levels = np.array(
        [
            [polytomize_scores(thresholds, train_scores[r.respondent_id])[i] for i in ids]
            for r in train_ds.records
        ]
    )
    y_train = np.array(train_ds.measure_vector())

    grm = fit_grm(train_levels, K, item_ids=ids, on_unobserved=on_unobserved)

    correlations = item_score_correlations(train_levels, y_train, ids)
    fixed_orders = {
        kind: fixed_order(kind, correlations) for kind in ("forward", "backward")
    }

    actor_critic = None
    if "actor_critic" in strategies:
        y_poly = np.array(poly_ds.measure_vector())
        actor_critic = train_actor_critic(
            _score_matrix(ids, train_ds.records, train_scores),
            y_train,
            _score_matrix(ids, poly_ds.records, poly_scores),
            y_poly,
            ids,
            lam=ac_lambda,
        )

    tree_policy = None
    if "tree" in strategies:
        tree_policy = decision_tree_strategy(
            train_levels.astype(float),
            y_train,
            ids,
            fallback=fixed_orders["forward"],
            max_leaves=tree_max_leaves,
            min_leaf=tree_min_leaf,
        )

    if theta0 == "train_mean":
        estimates = [
            map_estimate(grm, dict(zip(ids, row))).theta for row in train_levels
        ]
        theta0_value = float(np.mean(estimates))
    else:
        theta0_value = float(theta0)

    meta = {
        "train_ids": sorted(train_ids),
        "poly_ids": sorted(poly_ids),
        "n_train": len(train_ds.records),
        "n_poly": len(poly_ds.records),
        "grm_converged": bool(grm.fit_meta.get("converged", True)),
        "collapsed_items": sorted(grm.fit_meta.get("collapsed", {})),
    }

    return FittedPipeline(
        items=dataset.items,
        embeddings=embeddings,
        K=K,
        seed=seed,
        item_models=item_models,
        thresholds=thresholds,
        grm=grm,
        fixed_orders=fixed_orders,
        actor_critic=actor_critic,
        tree_policy=tree_policy,
        theta0=theta0_value,
        meta=meta,
    )
