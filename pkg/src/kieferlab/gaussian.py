"""Skeleton Kiefer-process simulation on the dyadic space-time grid.

The field is built from independent block increments: each block of length
2**m contributes a vector with law N(0, 2**m Lambda), and the path at the
block boundary times is their running sum.  The theory couples these
increments to the data through a nonconstructive conditional argument; here
they are simulated independently of any trajectory (the marginal laws are
identical), and data-to-Gaussian proximity is measured separately by the
transport module.  This is the central constructive substitution of the
package.

Normal variates come from numpy's PCG64 + standard_normal (ziggurat), fixed
here so that a given (seed, numpy version) pins the bit stream.  Blocks use
per-block derived seeds, so they could be drawn in parallel without
changing results.  Path values exist only at block boundaries; nothing is
interpolated inside a block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import LambdaEstimate, psd_factor
from .empirical import BlockSchedule, DyadicGrid
from .seeding import derive_seed, generator

__all__ = ["KieferPath", "simulate_kiefer"]


@dataclass(frozen=True, eq=False)
class KieferPath:
    """Gaussian field values K[s_j, t_ell] at block boundary times."""

    grid: DyadicGrid
    times: np.ndarray
    values: np.ndarray  # shape (grid.size, len(times)); column 0 is zero
    schedule: BlockSchedule
    seed: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        t = np.asarray(self.times, dtype=np.int64)
        if v.shape != (self.grid.size, t.size):
            raise ValueError("values must have shape (grid points, times)")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "times", t)


def simulate_kiefer(
    lam: LambdaEstimate, schedule: BlockSchedule, seed: int
) -> KieferPath:
    """Draw the skeleton path for one schedule.

    Each of the 2**(L-m) blocks contributes an independent increment
    V_ell = 2**(m/2) * G @ z_ell with G the PSD factor of Lambda and
    z_ell standard normal; K[., t_ell] is the cumulative sum, zero at the
    first boundary.
    """
    if lam.grid.r != schedule.r:
        raise ValueError(
            f"grid resolution {lam.grid.r} does not match schedule r={schedule.r}"
        )
    fac = psd_factor(lam)
    scale = math.sqrt(2.0**schedule.m)
    dim = schedule.dim
    increments = np.empty((schedule.n_blocks, dim), dtype=np.float64)
    for ell in range(schedule.n_blocks):
        rng = generator(derive_seed(seed, ell))
        increments[ell] = scale * (fac.factor @ rng.standard_normal(dim))
    values = np.zeros((dim, schedule.n_blocks + 1), dtype=np.float64)
    values[:, 1:] = np.cumsum(increments, axis=0).T
    return KieferPath(
        grid=lam.grid,
        times=schedule.boundary_times(),
        values=values,
        schedule=schedule,
        seed=int(seed),
    )
