"""Empirical CDFs, the two-parameter empirical process, dyadic grids and
block-sum vectors.

The central object is the field R(s, t) = sum_{1<=i<=t} (1{X_i <= s} - F(s))
evaluated on a dyadic spatial grid s_j = j * 2**-r.  Centering always uses an
ECDF fitted on an independent calibration sample, never on the trajectory
under analysis.  Ties at grid points follow the closed-right convention
1{x <= s}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Trajectory

__all__ = [
    "DyadicGrid",
    "EcdfModel",
    "ecdf",
    "ecdf_eval",
    "EmpiricalField",
    "empirical_process",
    "dyadic_projection",
    "BlockSchedule",
    "block_schedule",
    "schedule_bracketing",
    "BlockSumSample",
    "block_sums",
    "first_block_vector",
    "grid_ranks",
]


@dataclass(frozen=True)
class DyadicGrid:
    """Spatial grid {j * 2**-r : j = 1..2**r - 1} shared by all fields."""

    r: int
    points: np.ndarray = field(init=False)

    def __post_init__(self):
        if int(self.r) < 1:
            raise ValueError("grid resolution r must be a positive integer")
        object.__setattr__(self, "r", int(self.r))
        pts = np.arange(1, 2**self.r) * 2.0**-self.r
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return 2**self.r - 1


@dataclass(frozen=True, eq=False)
class EcdfModel:
    """Right-continuous empirical CDF of a calibration sample."""

    sorted_sample: np.ndarray
    size: int = field(init=False)

    def __post_init__(self):
        s = np.asarray(self.sorted_sample, dtype=np.float64)
        if s.size == 0:
            raise ValueError("calibration sample must be nonempty")
        if np.any(np.diff(s) < 0):
            raise ValueError("sorted_sample must be nondecreasing")
        s.setflags(write=False)
        object.__setattr__(self, "sorted_sample", s)
        object.__setattr__(self, "size", int(s.shape[0]))


def ecdf(calibration) -> EcdfModel:
    """Fit an ECDF.  Accepts a Trajectory or a plain array of reals."""
    values = getattr(calibration, "values", calibration)
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("calibration sample must be nonempty")
    return EcdfModel(sorted_sample=np.sort(arr))


def ecdf_eval(model: EcdfModel, s):
    """F(s) = (#sample values <= s) / size; vectorized over s."""
    counts = np.searchsorted(model.sorted_sample, s, side="right")
    out = counts / model.size
    if np.isscalar(s) or np.ndim(s) == 0:
        return float(out)
    return out


def grid_ranks(values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Rank of each value against an ascending grid.

    rank(x) = #{j : points[j] < x}, so 1{x <= points[j]} holds exactly for
    grid indices j >= rank(x).  Ranks take values in 0..len(points).
    """
    return np.searchsorted(points, values, side="left")


def _cumulative_counts(ranks_hist: np.ndarray) -> np.ndarray:
    # ranks_hist has len(points)+1 bins; entry j of the cumsum is the
    # number of values <= points[j].
    return np.cumsum(ranks_hist[:-1])


@dataclass(frozen=True, eq=False)
class EmpiricalField:
    """R(s_j, t_k) on a dyadic grid at a set of increasing integer times."""

    grid: DyadicGrid
    times: np.ndarray
    values: np.ndarray  # shape (grid.size, len(times))

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.int64)
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.size, t.shape[0]):
            raise ValueError("values must have shape (grid points, times)")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def empirical_process(
    traj: Trajectory, F: EcdfModel, grid: DyadicGrid, times
) -> EmpiricalField:
    """Evaluate R(s_j, t) = sum_{1<=i<=t} (1{X_i <= s_j} - F(s_j)).

    Single cumulative pass over the trajectory; times must be increasing
    nonnegative integers not exceeding the trajectory length.
    """
    t_arr = np.asarray(times, dtype=np.int64)
    if t_arr.ndim != 1 or t_arr.size == 0:
        raise ValueError("times must be a nonempty 1-d array")
    if np.any(np.diff(t_arr) <= 0):
        raise ValueError("times must be strictly increasing")
    if t_arr[0] < 0:
        raise ValueError("times must be nonnegative")
    if t_arr[-1] > traj.length:
        raise ValueError(
            f"largest time {t_arr[-1]} exceeds trajectory length {traj.length}"
        )
    pts = grid.points
    f_grid = ecdf_eval(F, pts)
    ranks = grid_ranks(traj.values[: t_arr[-1]], pts)
    out = np.empty((grid.size, t_arr.size), dtype=np.float64)
    hist = np.zeros(pts.size + 1, dtype=np.int64)
    prev = 0
    for k, t in enumerate(t_arr):
        if t > prev:
            hist += np.bincount(ranks[prev:t], minlength=pts.size + 1)
            prev = int(t)
        out[:, k] = _cumulative_counts(hist) - t * f_grid
    return EmpiricalField(grid=grid, times=t_arr, values=out)


def dyadic_projection(s: float, K: int) -> float:
    """Round s down to the 2**-K lattice: 2**-K * floor(2**K * s)."""
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [0,1], got {s!r}")
    if int(K) < 0:
        raise ValueError("K must be a nonnegative integer")
    return math.floor(s * 2.0**K) * 2.0**-K


@dataclass(frozen=True)
class BlockSchedule:
    """Dyadic block layout: 2**(L-m) blocks of length 2**m starting at 2**L,
    with spatial resolution r.  ``flagged`` records a violated 4r <= m
    constraint (small L), in which case the coupling bound does not apply.
    """

    L: int
    r: int
    m: int
    epsilon: float
    flagged: bool = False

    def __post_init__(self):
        if self.L < 1 or self.r < 1 or self.m < 0:
            raise ValueError("schedule requires L >= 1, r >= 1, m >= 0")
        if self.m > self.L:
            raise ValueError("schedule requires m <= L")

    @property
    def n_blocks(self) -> int:
        return 2 ** (self.L - self.m)

    @property
    def block_length(self) -> int:
        return 2**self.m

    @property
    def dim(self) -> int:
        return 2**self.r - 1

    def boundary_times(self) -> np.ndarray:
        """Absolute times 2**L + ell * 2**m for ell = 0..2**(L-m)."""
        return 2**self.L + np.arange(self.n_blocks + 1, dtype=np.int64) * 2**self.m


def block_schedule(L: int, epsilon: float) -> BlockSchedule:
    """Resolution/block-length split r = (floor(L/5) ^ floor(2 eps L +
    5 log2 L)) v 1, m = L - r.

    Returns a flagged schedule when 4r <= m fails (only possible for
    small L).
    """
    L = int(L)
    if L < 1:
        raise ValueError("L must be a positive integer")
    if not (0.0 < epsilon < 0.1):
        raise ValueError(f"epsilon must lie in (0, 1/10), got {epsilon!r}")
    r = max(min(L // 5, math.floor(2.0 * epsilon * L + 5.0 * math.log2(L))), 1)
    m = L - r
    return BlockSchedule(L=L, r=r, m=m, epsilon=float(epsilon), flagged=4 * r > m)


def schedule_bracketing(L: int, epsilon: float) -> bool:
    """Check 2**(2 eps L - 1) * L**5 <= 2**r(L) <= 2**(2 eps L) * L**5.

    Equivalent in log2: 2 eps L - 1 + 5 log2 L <= r(L) <= 2 eps L + 5 log2 L.
    The inequality is an asymptotic property of the schedule; it holds
    exactly when the epsilon branch of the minimum is active.
    """
    sched = block_schedule(L, epsilon)
    x = 2.0 * epsilon * L + 5.0 * math.log2(L)
    return (x - 1.0) - 1e-9 <= sched.r <= x + 1e-9


@dataclass(frozen=True, eq=False)
class BlockSumSample:
    """Per-block centered indicator sums U_ell on the schedule's grid."""

    schedule: BlockSchedule
    vectors: np.ndarray  # shape (n_blocks, 2**r - 1)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.shape != (self.schedule.n_blocks, self.schedule.dim):
            raise ValueError("vectors must have shape (n_blocks, 2**r - 1)")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)


def _block_vector(values, pts, f_grid, start, length):
    # Centered indicator sum over values[start : start+length].
    ranks = grid_ranks(values[start : start + length], pts)
    hist = np.bincount(ranks, minlength=pts.size + 1)
    return _cumulative_counts(hist) - length * f_grid


def block_sums(
    traj: Trajectory, F: EcdfModel, schedule: BlockSchedule
) -> BlockSumSample:
    """Block vectors U_ell, ell = 1..2**(L-m), over the index windows
    (2**L + (ell-1) 2**m, 2**L + ell 2**m].

    Each vector equals the increment of the empirical field across its
    block; requires a trajectory of length at least 2**(L+1).
    """
    needed = 2 ** (schedule.L + 1)
    if traj.length < needed:
        raise ValueError(
            f"trajectory length {traj.length} < 2**(L+1) = {needed} required "
            f"for L={schedule.L}"
        )
    grid = DyadicGrid(schedule.r)
    pts = grid.points
    f_grid = ecdf_eval(F, pts)
    blen = schedule.block_length
    base = 2**schedule.L
    vecs = np.empty((schedule.n_blocks, schedule.dim), dtype=np.float64)
    for ell in range(schedule.n_blocks):
        vecs[ell] = _block_vector(traj.values, pts, f_grid, base + ell * blen, blen)
    return BlockSumSample(schedule=schedule, vectors=vecs)


def first_block_vector(
    traj: Trajectory, F: EcdfModel, schedule: BlockSchedule
) -> np.ndarray:
    """U_{L,1} alone; needs only the first 2**L + 2**m trajectory samples."""
    needed = 2**schedule.L + schedule.block_length
    if traj.length < needed:
        raise ValueError(
            f"trajectory length {traj.length} < 2**L + 2**m = {needed}"
        )
    grid = DyadicGrid(schedule.r)
    f_grid = ecdf_eval(F, grid.points)
    return _block_vector(
        traj.values, grid.points, f_grid, 2**schedule.L, schedule.block_length
    )
