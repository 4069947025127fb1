"""Deterministic per-tile random streams.

Each tile gets its own stream derived from (master_seed, slide_id, tile
ordinal) through a splitmix64 finalizer chain, so results do not depend on
evaluation order or thread count. An optional extra key (e.g. a model id)
derives further independent streams for the same tile.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 finalizer step on a 64-bit value."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stable_hash64(text: str) -> int:
    """Stable 64-bit hash of a string (independent of PYTHONHASHSEED)."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master_seed: int, slide_id: str, ordinal: int, extra: str | None = None) -> int:
    """Mix the identifying triple (plus optional key) into one 64-bit seed."""
    s = splitmix64(master_seed & _MASK)
    s = splitmix64(s ^ stable_hash64(slide_id))
    s = splitmix64(s ^ (ordinal & _MASK))
    if extra is not None:
        s = splitmix64(s ^ stable_hash64(extra))
    return s


def tile_rng(master_seed: int, slide_id: str, ordinal: int, extra: str | None = None) -> np.random.Generator:
    """The tile's private random stream."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, slide_id, ordinal, extra)))
