"""Stable seed derivation.

Sub-seeds come from a keyed blake2b digest, never from Python's salted
``hash()``, so every run of every process agrees on them.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_int(seed: int, *parts: str | int) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(str(seed).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode())
    return int.from_bytes(h.digest(), "big")


def derive_rng(seed: int, *parts: str | int) -> np.random.Generator:
    return np.random.default_rng(derive_int(seed, *parts))
