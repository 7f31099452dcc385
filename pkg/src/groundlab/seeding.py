"""Named random sub-streams derived from a single run seed.

Every source of randomness in a run draws from `substream(seed, name)`.
Stream derivation hashes the (seed, name) pair, so adding a new consumer
never perturbs the draws seen by existing ones, and identical
(seed, name) pairs produce identical streams on any platform.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, name: str) -> int:
    """Collapse (seed, name) into a 64-bit child seed via SHA-256."""
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed: int, name: str) -> np.random.Generator:
    """A PCG64 generator keyed by (seed, name)."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, name)))
