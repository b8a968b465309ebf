"""Deterministic respondent splits for the rotating benchmark.

Respondents are dealt into 9 folds by sorting on a keyed blake2b digest of
their id, then taking rank modulo 9.  The digest makes the assignment a pure
function of (respondent_id, seed): reordering the input file changes nothing,
and fold sizes never differ by more than one.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import TooFewRespondents

N_FOLDS = 9


def _sort_key(respondent_id: str, seed: int) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    h.update(str(seed).encode())
    h.update(b"\x00")
    h.update(respondent_id.encode())
    return h.digest()


def fold_assignments(respondent_ids: list[str], seed: int) -> dict[str, int]:
    """Map each respondent id to a fold index in 0..8."""
    if len(set(respondent_ids)) != len(respondent_ids):
        raise ValueError("respondent ids must be unique")
    if len(respondent_ids) < N_FOLDS:
        raise TooFewRespondents(
            f"need at least {N_FOLDS} respondents to form {N_FOLDS} folds, got {len(respondent_ids)}"
        )
    ranked = sorted(respondent_ids, key=lambda rid: (_sort_key(rid, seed), rid))
    return {rid: rank % N_FOLDS for rank, rid in enumerate(ranked)}


@dataclass(frozen=True)
class DatasetSplit:
    """One rotation: a test fold, four polytomization folds, four training folds."""

    rotation: int
    test_ids: frozenset[str]
    poly_ids: frozenset[str]
    train_ids: frozenset[str]

    def __post_init__(self):
        overlap = (
            (self.test_ids & self.poly_ids)
            | (self.test_ids & self.train_ids)
            | (self.poly_ids & self.train_ids)
        )
        if overlap:
            raise ValueError(f"split groups overlap: {sorted(overlap)[:5]}")


def make_splits(respondent_ids: list[str], seed: int) -> list[DatasetSplit]:
    """Build the 9 rotations.

    Rotation r tests on fold r, polytomizes on folds r+1..r+4 (mod 9), and
    trains on folds r+5..r+8 (mod 9).
    """
    assignment = fold_assignments(respondent_ids, seed)
    folds: list[set[str]] = [set() for _ in range(N_FOLDS)]
    for rid, f in assignment.items():
        folds[f].add(rid)
    splits = []
    for r in range(N_FOLDS):
        poly = set()
        for off in range(1, 5):
            poly |= folds[(r + off) % N_FOLDS]
        train = set()
        for off in range(5, 9):
            train |= folds[(r + off) % N_FOLDS]
        splits.append(
            DatasetSplit(
                rotation=r,
                test_ids=frozenset(folds[r]),
                poly_ids=frozenset(poly),
                train_ids=frozenset(train),
            )
        )
    return splits
