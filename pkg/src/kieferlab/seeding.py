"""Stateless seed derivation for replicate-parallel Monte Carlo.

Every random stream in the package is keyed by (master seed, index path).
Child seeds are derived with numpy's SeedSequence hashing, so results never
depend on scheduling order or on how many replicates run before a given one.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed", "generator"]


def derive_seed(master: int, *indices: int) -> int:
    """Derive a 64-bit child seed from a master seed and an index path.

    The mapping is a pure function of its arguments (SeedSequence spawn
    keys), which is what makes parallel replicate generation reproducible.
    """
    ss = np.random.SeedSequence(
        entropy=int(master), spawn_key=tuple(int(i) for i in indices)
    )
    lo, hi = ss.generate_state(2)
    return int(lo) | (int(hi) << 32)


def generator(seed: int) -> np.random.Generator:
    """PCG64 generator for a given seed (the package-wide bit stream)."""
    return np.random.Generator(np.random.PCG64(int(seed)))
