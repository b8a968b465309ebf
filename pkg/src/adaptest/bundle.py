"""Self-contained JSON bundle for a fitted pipeline.

A bundle holds everything the live service needs — item bank, embedding
vocabulary, per-item regressions, polytomization thresholds, item curves,
fixed orders, and the optional actor-critic and tree policies — so a single
file fully determines scoring behavior.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingModel
from .errors import BundleNotLoaded
from .grm import GrmItemParams, GrmModel
from .items import ItemBank
from .pipeline import DEFAULT_STRATEGIES, FittedPipeline, fit_pipeline
from .polytomize import ThresholdTable
from .records import Dataset
from .ridge import RidgeModel
from .splits import make_splits
from .strategies import ActorCriticModel, TreePolicy
from .tree import RegressionTree

BUNDLE_FORMAT = "adaptest-bundle"
BUNDLE_VERSION = 1
SCORE_EXPOSURES = ("trajectory", "final_only")


def _ridge_to_json(model: RidgeModel) -> dict:
    return {
        "weights": [float(w) for w in model.weights],
        "intercept": float(model.intercept),
        "lambda": float(model.lam),
    }


def _ridge_from_json(data: dict) -> RidgeModel:
    return RidgeModel(
        weights=np.array(data["weights"], dtype=float),
        intercept=float(data["intercept"]),
        lam=float(data["lambda"]),
    )


def _subset_key(subset: tuple[int, ...]) -> str:
    return ",".join(str(i) for i in subset)


def _parse_subset(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",")) if text else ()


def pipeline_to_bundle(
    pipeline: FittedPipeline,
    *,
    measure: str | None = None,
    max_items: int = 5,
    score_exposure: str = "trajectory",
) -> dict:
    if score_exposure not in SCORE_EXPOSURES:
        raise ValueError(f"score_exposure must be one of {SCORE_EXPOSURES}")
    emb = pipeline.embeddings
    words = sorted(emb.vocabulary, key=emb.vocabulary.get)
    grm_items = []
    for item_id in sorted(pipeline.grm.items):
        params = pipeline.grm.items[item_id]
        grm_items.append(
            {
                "item_id": item_id,
                "alpha": float(params.alpha),
                "betas": [float(b) for b in params.betas],
                "level_map": list(params.level_map) if params.level_map else None,
            }
        )
    actor_critic = None
    if pipeline.actor_critic is not None:
        ac = pipeline.actor_critic
        actor_critic = {
            "lambda": float(ac.lam),
            "measure_models": {
                _subset_key(subset): _ridge_to_json(m)
                for subset, m in sorted(ac.measure_models.items())
            },
            "error_models": {
                f"{_subset_key(subset)}|{item}": _ridge_to_json(m)
                for (subset, item), m in sorted(ac.error_models.items())
            },
        }
    tree = None
    if pipeline.tree_policy is not None:
        tree = {
            "nodes": pipeline.tree_policy.tree.to_json(),
            "fallback": list(pipeline.tree_policy.fallback),
            "mode": pipeline.tree_policy.mode,
        }
    return {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "measure": measure,
        "K": pipeline.K,
        "seed": pipeline.seed,
        "max_items": max_items,
        "theta0": pipeline.theta0,
        "score_exposure": score_exposure,
        "strategies": list(pipeline.available_strategies),
        "items": pipeline.items.to_json(),
        "embeddings": {
            "words": words,
            "vectors": [[float(v) for v in emb.vectors[emb.vocabulary[w]]] for w in words],
        },
        "item_models": {
            str(i): _ridge_to_json(m) for i, m in sorted(pipeline.item_models.items())
        },
        "thresholds": {
            str(i): [float(t) for t in cuts]
            for i, cuts in sorted(pipeline.thresholds.thresholds.items())
        },
        "grm": {"K": pipeline.grm.K, "items": grm_items, "fit_meta": pipeline.grm.fit_meta},
        "fixed_orders": {k: list(v) for k, v in sorted(pipeline.fixed_orders.items())},
        "actor_critic": actor_critic,
        "tree": tree,
        "meta": pipeline.meta,
    }


def bundle_to_pipeline(data: dict) -> tuple[FittedPipeline, dict]:
    """Rebuild the pipeline plus a config dict {measure, max_items,
    score_exposure} from a parsed bundle."""
    if data.get("format") != BUNDLE_FORMAT:
        raise BundleNotLoaded(f"not a recognized bundle (format={data.get('format')!r})")
    if data.get("version") != BUNDLE_VERSION:
        raise BundleNotLoaded(f"unsupported bundle version {data.get('version')!r}")
    items = ItemBank.from_json(data["items"])
    words = data["embeddings"]["words"]
    embeddings = EmbeddingModel(
        vocabulary={w: i for i, w in enumerate(words)},
        vectors=np.array(data["embeddings"]["vectors"], dtype=float),
        provenance="bundle",
    )
    grm_items = {}
    for entry in data["grm"]["items"]:
        grm_items[int(entry["item_id"])] = GrmItemParams(
            alpha=float(entry["alpha"]),
            betas=tuple(float(b) for b in entry["betas"]),
            level_map=tuple(entry["level_map"]) if entry.get("level_map") else None,
        )
    grm = GrmModel(items=grm_items, K=int(data["grm"]["K"]), fit_meta=data["grm"]["fit_meta"])
    actor_critic = None
    if data.get("actor_critic"):
        ac = data["actor_critic"]
        measure_models = {
            _parse_subset(key): _ridge_from_json(m)
            for key, m in ac["measure_models"].items()
        }
        error_models = {}
        for key, m in ac["error_models"].items():
            subset_text, item_text = key.rsplit("|", 1)
            error_models[(_parse_subset(subset_text), int(item_text))] = _ridge_from_json(m)
        actor_critic = ActorCriticModel(
            item_ids=tuple(items.item_ids),
            measure_models=measure_models,
            error_models=error_models,
            lam=float(ac["lambda"]),
        )
    tree_policy = None
    if data.get("tree"):
        tree_policy = TreePolicy(
            tree=RegressionTree.from_json(data["tree"]["nodes"]),
            fallback=tuple(data["tree"]["fallback"]),
            mode=data["tree"]["mode"],
        )
    pipeline = FittedPipeline(
        items=items,
        embeddings=embeddings,
        K=int(data["K"]),
        seed=int(data["seed"]),
        item_models={
            int(i): _ridge_from_json(m) for i, m in data["item_models"].items()
        },
        thresholds=ThresholdTable(
            thresholds={
                int(i): np.array(cuts, dtype=float)
                for i, cuts in data["thresholds"].items()
            },
            K=int(data["K"]),
        ),
        grm=grm,
        fixed_orders={k: tuple(v) for k, v in data["fixed_orders"].items()},
        actor_critic=actor_critic,
        tree_policy=tree_policy,
        theta0=float(data["theta0"]),
        meta=data.get("meta", {}),
    )
    config = {
        "measure": data.get("measure"),
        "max_items": int(data["max_items"]),
        "score_exposure": data.get("score_exposure", "trajectory"),
    }
    return pipeline, config


def save_bundle(data: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")


def load_bundle(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise BundleNotLoaded(f"bundle file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise BundleNotLoaded(f"bundle is not valid json: {exc}") from None
    if not isinstance(data, dict):
        raise BundleNotLoaded("bundle must be a json object")
    return data


def fit_bundle(
    dataset: Dataset,
    embeddings: EmbeddingModel,
    *,
    K: int = 8,
    seed: int,
    strategies: tuple[str, ...] = DEFAULT_STRATEGIES,
    rotation: int = 0,
    measure: str | None = None,
    max_items: int = 5,
    theta0: str | float = 0.0,
    score_exposure: str = "trajectory",
) -> dict:
    """Train a deployable bundle using one fold rotation's train/poly splits
    (the test fold is simply unused here)."""
    split = make_splits(dataset.respondent_ids, seed)[rotation]
    pipeline = fit_pipeline(
        dataset,
        embeddings,
        K=K,
        seed=seed,
        train_ids=split.train_ids,
        poly_ids=split.poly_ids,
        strategies=strategies,
        theta0=theta0,
    )
    return pipeline_to_bundle(
        pipeline, measure=measure, max_items=max_items, score_exposure=score_exposure
    )
