"""Deterministic, scheduler-independent random streams.

All randomness flows through Philox (a counter-based generator) keyed by
SeedSequence entropy tuples. Stream tags are strings hashed with SHA-256
so the mapping is stable across processes and platforms; replication r of
a run always derives its stream from (master_seed, r, tag...).
"""

from __future__ import annotations

import hashlib

import numpy as np


def _coerce(part: "int | str") -> int:
    if isinstance(part, (int, np.integer)):
        return int(part)
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"seed parts must be ints or strings, got {type(part).__name__}")


def seed_entropy(seed: "int | tuple") -> tuple[int, ...]:
    parts = seed if isinstance(seed, tuple) else (seed,)
    return tuple(_coerce(p) for p in parts)


def generator(seed: "int | tuple | np.random.Generator") -> np.random.Generator:
    """Philox generator for a seed int, tagged tuple, or pass-through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed_entropy(seed)))
    )
