"""Synthetic cohorts with known ground truth.

Two generators: graded responses drawn straight from item curves (for
parameter-recovery oracles), and a language cohort whose per-response word
vectors carry the latent trait linearly (for end-to-end pipeline checks).
The language generator emits one unique token per response together with a
matching embedding table, so everything downstream of word lookup runs
unmodified on synthetic data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .embeddings import EmbeddingModel
from .grm import GrmItemParams
from .items import ItemBank, ItemDescriptor
from .records import Dataset, RespondentRecord

MEASURE_RANGE = (0.0, 27.0)


@dataclass(frozen=True)
class SyntheticCohortSpec:
    """Everything a generator needs; reproducible from the seed alone."""

    n: int
    J: int = 11
    K: int = 8
    seed: int = 0
    item_params: tuple[GrmItemParams, ...] | None = None
    loadings: tuple[float, ...] | None = None
    embed_dim: int = 10
    embed_noise: float = 1.0
    measure_scale: float = 4.5
    measure_offset: float = 13.5
    measure_noise: float = 1.0
    measure_range: tuple[float, float] = MEASURE_RANGE

    def __post_init__(self):
        if self.n < 1 or self.J < 1 or self.K < 2:
            raise ValueError("need n >= 1, J >= 1, K >= 2")
        if self.item_params is not None and len(self.item_params) != self.J:
            raise ValueError("item_params length must equal J")
        if self.loadings is not None and len(self.loadings) != self.J:
            raise ValueError("loadings length must equal J")


def synthetic_item_bank(J: int) -> ItemBank:
    return ItemBank(
        [
            ItemDescriptor(j, f"Describe aspect {j} of your recent experience.", f"Aspect {j}", 1)
            for j in range(1, J + 1)
        ]
    )


def spread_item_params(J: int, K: int, seed: int) -> tuple[GrmItemParams, ...]:
    """Well-separated true curves: alphas across [0.8, 3], difficulty ladders
    inside [-2.4, 2] with gaps of at least 0.3 so every category keeps mass."""
    rng = np.random.default_rng(seed)
    items = []
    for _ in range(J):
        alpha = float(rng.uniform(0.8, 3.0))
        start = float(rng.uniform(-2.4, -1.9))
        gaps = rng.uniform(0.3, 0.55, size=K - 2) if K > 2 else np.empty(0)
        betas = start + np.concatenate([[0.0], np.cumsum(gaps)])
        items.append(GrmItemParams(alpha, betas))
    return tuple(items)


def descending_loadings(J: int) -> tuple[float, ...]:
    """Item signal strengths sloping from 3.0 down to 0.4, so early item ids
    are genuinely more informative and ordering strategies have a target."""
    if J == 1:
        return (3.0,)
    return tuple(0.4 + 2.6 * (J - j) / (J - 1) for j in range(1, J + 1))


def planted_loadings(J: int, hot_item: int = 1, strength: float = 3.0) -> tuple[float, ...]:
    """Only one item carries any signal; the rest are pure noise."""
    return tuple(strength if j == hot_item else 0.0 for j in range(1, J + 1))


def simulate_grm(spec: SyntheticCohortSpec) -> tuple[np.ndarray, np.ndarray]:
    """Draw (levels n x J, thetas n) from the spec's true item curves."""
    if spec.item_params is None:
        raise ValueError("spec.item_params required for graded-response simulation")
    rng = np.random.default_rng(spec.seed)
    thetas = rng.standard_normal(spec.n)
    levels = np.empty((spec.n, spec.J), dtype=int)
    for j, params in enumerate(spec.item_params):
        cut = expit(params.alpha * (thetas[None, :] - params.betas[:, None]))
        u = rng.random(spec.n)
        levels[:, j] = 1 + (u[None, :] < cut).sum(axis=0)
    return levels, thetas


def simulate_language_cohort(
    spec: SyntheticCohortSpec,
) -> tuple[Dataset, EmbeddingModel, np.ndarray]:
    """Cohort whose response vectors are loading_j * theta_i * direction_j
    plus isotropic noise, with an affine measure clamped to the spec range."""
    rng = np.random.default_rng(spec.seed)
    loadings = np.asarray(
        spec.loadings if spec.loadings is not None else descending_loadings(spec.J)
    )
    directions = rng.normal(size=(spec.J, spec.embed_dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    thetas = rng.standard_normal(spec.n)
    lo, hi = spec.measure_range
    measures_raw = (
        spec.measure_scale * thetas
        + spec.measure_offset
        + spec.measure_noise * rng.standard_normal(spec.n)
    )
    measures_clamped = np.clip(measures_raw, lo, hi)

    vocab: dict[str, int] = {}
    vectors: list[np.ndarray] = []
    records: list[RespondentRecord] = []
    measures: dict[str, float] = {}
    for i in range(spec.n):
        rid = f"s{i:05d}"
        responses: dict[int, tuple[str, ...]] = {}
        for j in range(1, spec.J + 1):
            token = f"w_{rid}_i{j}"
            vec = loadings[j - 1] * thetas[i] * directions[j - 1] + spec.embed_noise * rng.normal(
                size=spec.embed_dim
            )
            vocab[token] = len(vectors)
            vectors.append(vec)
            responses[j] = (token,)
        records.append(RespondentRecord(rid, responses))
        measures[rid] = float(measures_clamped[i])
    dataset = Dataset(synthetic_item_bank(spec.J), records, measures)
    embeddings = EmbeddingModel(vocab, np.vstack(vectors), provenance="lsa")
    return dataset, embeddings, thetas
