"""Long-run covariance estimation on a dyadic grid and its PSD factorization.

The target is the two-sided series
Lambda(s, s') = Cov_0(s, s') + sum_{k>0} [Cov_k(s, s') + Cov_k(s', s)]
of lagged indicator covariances, truncated at ``max_lag`` (rectangular
truncation, no taper: the estimator is a literal partial sum of the series,
and any resulting negativity is repaired explicitly and reported rather
than hidden).  Standard errors come from nonoverlapping batch means, the
standard device for dependent data.

Per-lag covariances are computed exactly from grid ranks via joint rank
histograms, which costs O(n) per lag independently of grid size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import Trajectory
from .empirical import DyadicGrid, EcdfModel, ecdf_eval, grid_ranks
from .errors import FactorizationError

__all__ = [
    "LambdaEstimate",
    "PsdFactor",
    "estimate_lambda",
    "psd_factor",
    "restrict_lambda",
    "default_max_lag",
]

JITTER_START_FACTOR = 1e-12
JITTER_LIMIT_FACTOR = 1e-4
DEFAULT_BATCHES = 32


@dataclass(eq=False)
class LambdaEstimate:
    """Symmetric long-run covariance matrix on a dyadic grid, with
    batch-means standard errors.  ``psd_repaired`` is set by psd_factor
    when ridge jitter was needed."""

    grid: DyadicGrid
    matrix: np.ndarray
    max_lag: int
    se: np.ndarray
    psd_repaired: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        se = np.asarray(self.se, dtype=np.float64)
        g = self.grid.size
        if m.shape != (g, g) or se.shape != (g, g):
            raise ValueError("matrix and se must be (grid.size, grid.size)")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(m).max())):
            raise ValueError("matrix must be symmetric to working precision")
        self.matrix = m
        self.se = se


@dataclass(frozen=True, eq=False)
class PsdFactor:
    """Lower-triangular G with G @ G.T ~= Lambda + jitter * I."""

    factor: np.ndarray
    jitter: float


def default_max_lag(n: int) -> int:
    """Truncation default ceil(n**(1/3)), capped at 1000."""
    return min(int(np.ceil(n ** (1.0 / 3.0))), 1000)


def _lagged_cov(ranks: np.ndarray, f_grid: np.ndarray, k: int) -> np.ndarray:
    """Exact empirical mean of centered indicator products at lag k.

    Entry (j, j') averages (1{X_i <= s_j} - F_j)(1{X_{i+k} <= s_j'} - F_j')
    over the n-k available pairs.
    """
    n = ranks.size
    g1 = f_grid.size + 1
    m = n - k
    joint = np.bincount(ranks[:m] * g1 + ranks[k:], minlength=g1 * g1)
    cum = joint.reshape(g1, g1).cumsum(axis=0).cumsum(axis=1)[:-1, :-1]
    total = np.bincount(ranks, minlength=g1)
    m1 = np.cumsum((total - np.bincount(ranks[m:], minlength=g1))[:-1])
    m2 = np.cumsum((total - np.bincount(ranks[:k], minlength=g1))[:-1])
    cov = (
        cum / m
        - np.outer(m1, f_grid) / m
        - np.outer(f_grid, m2) / m
        + np.outer(f_grid, f_grid)
    )
    return cov


def _lambda_matrix(ranks: np.ndarray, f_grid: np.ndarray, max_lag: int) -> np.ndarray:
    lam = _lagged_cov(ranks, f_grid, 0)
    for k in range(1, max_lag + 1):
        c = _lagged_cov(ranks, f_grid, k)
        lam = lam + c + c.T
    return lam


def estimate_lambda(
    traj: Trajectory,
    F: EcdfModel,
    grid: DyadicGrid,
    max_lag: int,
    n_batches: int = DEFAULT_BATCHES,
) -> LambdaEstimate:
    """Truncated long-run covariance estimate with batch-means SE.

    Requires traj.length >= 100 * max_lag so that each of the
    ``n_batches`` contiguous batches comfortably exceeds the truncation
    lag.
    """
    max_lag = int(max_lag)
    if max_lag < 1:
        raise ValueError("max_lag must be a positive integer")
    if traj.length < 100 * max_lag:
        raise ValueError(
            f"trajectory length {traj.length} < 100 * max_lag = {100 * max_lag}"
        )
    if n_batches < 2:
        raise ValueError("need at least 2 batches for batch-means SE")
    f_grid = ecdf_eval(F, grid.points)
    ranks = grid_ranks(traj.values, grid.points)
    matrix = _lambda_matrix(ranks, f_grid, max_lag)
    matrix = 0.5 * (matrix + matrix.T)  # symmetrize away rounding drift

    batches = np.array_split(ranks, n_batches)
    if min(b.size for b in batches) <= max_lag + 1:
        raise ValueError("batches shorter than max_lag; increase trajectory length")
    stack = np.stack([_lambda_matrix(b, f_grid, max_lag) for b in batches])
    se = stack.std(axis=0, ddof=1) / np.sqrt(n_batches)
    return LambdaEstimate(grid=grid, matrix=matrix, max_lag=max_lag, se=se)


def psd_factor(lam: LambdaEstimate) -> PsdFactor:
    """Cholesky factor of the estimate, adding escalating ridge jitter on
    failure (delta doubling from 1e-12 * trace).

    Raises FactorizationError once the jitter would exceed 1e-4 * trace:
    at that point the estimate is too noisy and the caller must increase
    the trajectory length.  Sets ``lam.psd_repaired`` when jitter was used.
    """
    m = lam.matrix
    if not np.any(m):
        # Degenerate but acceptable: a zero field has the zero factor.
        return PsdFactor(factor=np.zeros_like(m), jitter=0.0)
    trace = float(np.trace(m))
    if trace <= 0.0:
        raise FactorizationError(f"covariance trace must be positive, got {trace}")
    jitter = 0.0
    while True:
        try:
            g = np.linalg.cholesky(m + jitter * np.eye(m.shape[0]))
            break
        except np.linalg.LinAlgError:
            jitter = JITTER_START_FACTOR * trace if jitter == 0.0 else 2.0 * jitter
            if jitter > JITTER_LIMIT_FACTOR * trace:
                raise FactorizationError(
                    f"jitter {jitter:.3e} exceeds {JITTER_LIMIT_FACTOR:.0e} * trace; "
                    "estimate too noisy, increase trajectory length"
                ) from None
    if jitter > 0.0:
        lam.psd_repaired = True
    return PsdFactor(factor=g, jitter=jitter)


def restrict_lambda(lam: LambdaEstimate, r: int) -> LambdaEstimate:
    """Restrict an estimate to the coarser dyadic resolution r.

    The coarse points j * 2**-r are a subset of the fine grid, so this is
    a submatrix selection.
    """
    r = int(r)
    if r > lam.grid.r:
        raise ValueError(f"cannot refine: have resolution {lam.grid.r}, want {r}")
    if r == lam.grid.r:
        return lam
    step = 2 ** (lam.grid.r - r)
    idx = np.arange(1, 2**r) * step - 1
    return LambdaEstimate(
        grid=DyadicGrid(r),
        matrix=lam.matrix[np.ix_(idx, idx)].copy(),
        max_lag=lam.max_lag,
        se=lam.se[np.ix_(idx, idx)].copy(),
        psd_repaired=lam.psd_repaired,
    )
