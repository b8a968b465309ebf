"""Ridge regression: per-item response-to-measure models and subset scorers.

All fits minimize ||y - Xw - b||^2 + lambda ||w||^2 with an unpenalized
intercept, solved through the centered normal equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingModel, embed_response
from .errors import AllWordsOutOfVocabulary, InsufficientData, SetMismatch, SingularSystem
from .records import Dataset
from .seeding import derive_int, derive_rng

LAMBDA_GRID = tuple(10.0**e for e in range(-2, 5))
ItemScores = dict[int, float]


@dataclass(frozen=True)
class RidgeModel:
    weights: np.ndarray
    intercept: float
    lam: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.intercept):
            raise ValueError("ridge parameters must be finite")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")

    def predict(self, x: np.ndarray) -> float | np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.weights + self.intercept


def fit_ridge(X: np.ndarray, y: np.ndarray, lam: float) -> RidgeModel:
    """Closed-form ridge fit on centered data; deterministic for fixed input."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be n x d and y length n")
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least 2 rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("inputs must be finite")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    if lam == 0.0 and np.linalg.matrix_rank(Xc) < d:
        raise SingularSystem(
            f"unpenalized fit on rank-deficient design ({n} rows, {d} columns)"
        )
    gram = Xc.T @ Xc + lam * np.eye(d)
    weights = np.linalg.solve(gram, Xc.T @ (y - y_mean))
    return RidgeModel(weights, y_mean - float(x_mean @ weights), lam)


def _cv_rmse(X: np.ndarray, y: np.ndarray, lam: float, fold_of: np.ndarray) -> float:
    errors = []
    for fold in np.unique(fold_of):
        held = fold_of == fold
        model = fit_ridge(X[~held], y[~held], lam)
        errors.append(model.predict(X[held]) - y[held])
    pooled = np.concatenate(errors)
    return float(np.sqrt(np.mean(pooled**2)))


def select_lambda(
    X: np.ndarray, y: np.ndarray, *, seed: int, grid: tuple[float, ...] = LAMBDA_GRID
) -> float:
    """Pick lambda by internal k-fold CV (k=5 when data allows), lowest RMSE.

    Ties go to the smaller lambda; splits too small to cross-validate fall
    back to lambda=1.
    """
    n = X.shape[0]
    if n < 4:
        return 1.0
    k = min(5, n // 2)
    rng = derive_rng(seed, "lambda-cv")
    fold_of = rng.permutation(n) % k
    scores = [_cv_rmse(X, y, lam, fold_of) for lam in grid]
    return float(grid[int(np.argmin(scores))])


def item_design(
    dataset: Dataset, embeddings: EmbeddingModel, item_id: int
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Design matrix for one item: embedded responses and measure targets.

    Respondents whose answer has no in-vocabulary word are left out.
    """
    rows, targets, ids = [], [], []
    for rec in dataset.records:
        words = rec.words_for(item_id)
        if not words:
            continue
        try:
            rows.append(embed_response(embeddings, words))
        except AllWordsOutOfVocabulary:
            continue
        targets.append(dataset.measures[rec.respondent_id])
        ids.append(rec.respondent_id)
    if not rows:
        return np.zeros((0, embeddings.d)), np.zeros(0), ids
    return np.vstack(rows), np.asarray(targets, dtype=float), ids


def fit_item_models(
    dataset: Dataset,
    embeddings: EmbeddingModel,
    *,
    seed: int,
    grid: tuple[float, ...] = LAMBDA_GRID,
) -> dict[int, RidgeModel]:
    """One ridge model per item, each with its own cross-validated lambda."""
    models: dict[int, RidgeModel] = {}
    for item_id in dataset.items.item_ids:
        X, y, _ = item_design(dataset, embeddings, item_id)
        if X.shape[0] < 2:
            raise InsufficientData(item_id, f"only {X.shape[0]} usable responses")
        lam = select_lambda(X, y, seed=derive_int(seed, "item", item_id), grid=grid)
        models[item_id] = fit_ridge(X, y, lam)
    return models


def predict_item_scores(
    models: dict[int, RidgeModel],
    embeddings: EmbeddingModel,
    record,
) -> ItemScores:
    """Per-item predicted measures for one respondent (skips unusable answers)."""
    scores: ItemScores = {}
    for item_id, model in models.items():
        words = record.words_for(item_id)
        if not words:
            continue
        try:
            x = embed_response(embeddings, words)
        except AllWordsOutOfVocabulary:
            continue
        scores[item_id] = float(model.predict(x))
    return scores


@dataclass(frozen=True)
class SubsetRidge:
    """Ridge model bound to an exact item subset.

    ``block`` is the per-item feature width: 1 when features are the items'
    predicted scores, d when they are the items' concatenated embeddings.
    """

    item_ids: tuple[int, ...]
    model: RidgeModel
    block: int = 1

    def __post_init__(self):
        if tuple(sorted(self.item_ids)) != self.item_ids:
            raise ValueError("item_ids must be sorted")
        if len(self.model.weights) != self.block * len(self.item_ids):
            raise ValueError("weight length must be block * subset size")

    def feature_vector(self, by_item: dict[int, float | np.ndarray]) -> np.ndarray:
        if set(by_item) != set(self.item_ids):
            raise SetMismatch(
                f"model covers items {list(self.item_ids)}, got {sorted(by_item)}"
            )
        parts = [np.atleast_1d(np.asarray(by_item[i], dtype=float)) for i in self.item_ids]
        x = np.concatenate(parts)
        if len(x) != self.block * len(self.item_ids):
            raise SetMismatch("feature width does not match the trained layout")
        return x


def fit_subset_ridge(
    features_by_item: dict[int, np.ndarray], y: np.ndarray, lam: float
) -> SubsetRidge:
    """Train a subset-bound model from per-item feature columns/blocks."""
    ids = tuple(sorted(features_by_item))
    blocks = [_as_block(features_by_item[i]) for i in ids]
    widths = {b.shape[1] for b in blocks}
    if len(widths) != 1:
        raise ValueError("all items must contribute the same feature width")
    X = np.hstack(blocks)
    return SubsetRidge(ids, fit_ridge(X, y, lam), block=widths.pop())


def _as_block(col: np.ndarray) -> np.ndarray:
    arr = np.asarray(col, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


def score_regr_yhat(administered: ItemScores, model_for_set: SubsetRidge) -> float:
    """Predict the measure from the administered items' per-item scores."""
    if model_for_set.block != 1:
        raise SetMismatch("model was trained on embeddings, not per-item scores")
    x = model_for_set.feature_vector(dict(administered))
    return float(model_for_set.model.predict(x))


def score_regr_x(
    administered_embeddings: dict[int, np.ndarray], model_for_set: SubsetRidge
) -> float:
    """Predict the measure from the administered items' concatenated embeddings."""
    if model_for_set.block == 1:
        raise SetMismatch("model was trained on per-item scores, not embeddings")
    x = model_for_set.feature_vector(dict(administered_embeddings))
    return float(model_for_set.model.predict(x))
