"""Word vectors: log-entropy weighted LSA over a corpus, PCA projection of
externally supplied vectors, and response embedding by word-vector averaging."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AllWordsOutOfVocabulary,
    DegenerateInput,
    EmptyCorpus,
    MalformedRow,
    RankTooLarge,
)

DEFAULT_DIM = 10
DEFAULT_RANK = 300


@dataclass(frozen=True)
class EmbeddingModel:
    """Immutable word -> vector lookup table."""

    vocabulary: dict[str, int]
    vectors: np.ndarray
    provenance: str = "lsa"

    def __post_init__(self):
        if self.vectors.ndim != 2 or len(self.vocabulary) != self.vectors.shape[0]:
            raise ValueError("one vector row per vocabulary word required")
        if self.vectors.shape[1] < 1:
            raise ValueError("embedding dimension must be >= 1")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding vectors must be finite")

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word: str) -> bool:
        return word in self.vocabulary

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.vocabulary[word]]


def _log_entropy_matrix(corpus: list[list[str]]) -> tuple[np.ndarray, dict[str, int]]:
    """Term-document matrix with cells log(1+tf) * (1 - normalized term entropy)."""
    vocab: dict[str, int] = {}
    for doc in corpus:
        for word in doc:
            if word not in vocab:
                vocab[word] = len(vocab)
    if not vocab:
        raise EmptyCorpus("corpus has no words")
    n_docs = len(corpus)
    counts = np.zeros((len(vocab), n_docs))
    for d_idx, doc in enumerate(corpus):
        for word in doc:
            counts[vocab[word], d_idx] += 1.0
    gf = counts.sum(axis=1, keepdims=True)
    if n_docs == 1:
        global_weight = np.ones(len(vocab))
    else:
        p = np.divide(counts, gf, out=np.zeros_like(counts), where=gf > 0)
        logp = np.log(p, out=np.zeros_like(p), where=p > 0)
        entropy = -(p * logp).sum(axis=1) / np.log(n_docs)
        global_weight = 1.0 - entropy
    return np.log1p(counts) * global_weight[:, None], vocab


def fit_lsa(
    corpus: list[list[str]],
    d: int = DEFAULT_DIM,
    rank: int | None = None,
    *,
    scale_singular: bool = True,
) -> EmbeddingModel:
    """LSA word vectors: SVD of the log-entropy weighted term-document matrix.

    A word's vector is its first ``d`` left-singular coordinates, scaled by the
    singular values unless ``scale_singular`` is off.  ``rank`` defaults to
    min(300, vocabulary size, document count).
    """
    if not corpus:
        raise EmptyCorpus("no documents")
    weighted, vocab = _log_entropy_matrix(corpus)
    max_rank = min(weighted.shape)
    if rank is None:
        rank = min(DEFAULT_RANK, max_rank)
    if rank > max_rank:
        raise RankTooLarge(f"rank {rank} exceeds min(|V|, |docs|) = {max_rank}")
    if not 1 <= d <= rank:
        raise RankTooLarge(f"d must be in 1..rank, got d={d} rank={rank}")
    u, s, _ = np.linalg.svd(weighted, full_matrices=False)
    vectors = u[:, :d] * s[:d] if scale_singular else u[:, :d].copy()
    return EmbeddingModel(vocab, vectors, provenance="lsa")


@dataclass(frozen=True)
class ProjectionModel:
    """PCA map to a lower dimension: x -> (x - mean) @ components."""

    mean: np.ndarray
    components: np.ndarray  # d_in x d_out, orthonormal columns
    explained_variance: np.ndarray = field(repr=False, default=None)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) @ self.components

    @property
    def d_out(self) -> int:
        return self.components.shape[1]


def fit_projection(vectors: np.ndarray, d_out: int) -> ProjectionModel:
    """Principal components of a point cloud, variance-sorted."""
    x = np.asarray(vectors, dtype=float)
    n, d_in = x.shape
    if not 1 <= d_out <= d_in:
        raise RankTooLarge(f"d_out must be in 1..{d_in}, got {d_out}")
    if n <= d_out:
        raise RankTooLarge(f"need more than {d_out} points, got {n}")
    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s[0] <= 1e-12:
        raise DegenerateInput("point cloud has zero variance")
    components = vt[:d_out].T.copy()
    # sign convention: largest-magnitude loading of each component is positive
    for c in range(d_out):
        pivot = np.argmax(np.abs(components[:, c]))
        if components[pivot, c] < 0:
            components[:, c] = -components[:, c]
    return ProjectionModel(mean, components, explained_variance=(s[:d_out] ** 2) / max(n - 1, 1))


def project_embeddings(model: EmbeddingModel, projection: ProjectionModel) -> EmbeddingModel:
    """Apply a fitted projection to every vector in the table."""
    return EmbeddingModel(
        dict(model.vocabulary), projection.apply(model.vectors), provenance="projected"
    )


def embed_response(model: EmbeddingModel, words) -> np.ndarray:
    """Mean of the in-vocabulary word vectors; unknown words are skipped."""
    rows = [model.vocabulary[w] for w in words if w in model.vocabulary]
    if not rows:
        raise AllWordsOutOfVocabulary(f"none of {list(words)[:8]} are in the vocabulary")
    return model.vectors[rows].mean(axis=0)


def save_embeddings(path: str | Path, model: EmbeddingModel) -> None:
    """Write the table as csv: word,v1,...,vd with round-trippable floats."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["word"] + [f"v{i}" for i in range(1, model.d + 1)])
        order = sorted(model.vocabulary, key=lambda w: model.vocabulary[w])
        for word in order:
            writer.writerow([word] + [repr(float(v)) for v in model.vector(word)])


def load_embeddings(path: str | Path, provenance: str = "projected") -> EmbeddingModel:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2 or header[0].strip() != "word":
            raise MalformedRow(1, "expected header word,v1,...,vd")
        d = len(header) - 1
        vocab: dict[str, int] = {}
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise MalformedRow(line_no, f"expected {d + 1} fields, got {len(row)}")
            word = row[0]
            if word in vocab:
                raise MalformedRow(line_no, f"duplicate word {word!r}")
            try:
                vec = [float(v) for v in row[1:]]
            except ValueError:
                raise MalformedRow(line_no, "non-numeric vector entry") from None
            vocab[word] = len(rows)
            rows.append(vec)
    if not rows:
        raise EmptyCorpus("embedding table has no rows")
    return EmbeddingModel(vocab, np.array(rows), provenance=provenance)
