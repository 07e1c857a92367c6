"""Dependence diagnostics: lagged indicator covariances, the pairwise
coefficient beta(sigma(X_0), X_k), and decay-rate fits.

For map orbits the chain covariance is read off the forward orbit through
the time-reversal identity: the orbit (T, T^2, ..., T^n) has the law of the
reversed chain, so the orbit average of
(1{T^i <= s} - F(s)) (1{T^{i+k} <= s'} - F(s'))
estimates the chain covariance Cov(1{X_k <= s}, 1{X_0 <= s'}).  The same
reversal makes the LATER orbit index the conditioning coordinate when
estimating beta.

beta(sigma(X_0), X_k) is the expected sup-distance between the conditional
and unconditional distribution functions of the lag-k coordinate.  The
estimator here bins the conditioning coordinate into equal-count groups by
rank order and takes the sup over a dyadic grid of probability levels of
the target coordinate, so the estimate depends only on ranks; the true sup
over the reals is bounded below by this, i.e. the estimator is reported as
a lower bound.  The one-sided-past coefficients beta_1 and beta_2 of the
theory are not estimable from one realization without model structure and
are deliberately not estimated; beta(sigma(X_0), X_k) is a lower bound for
both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .empirical import EcdfModel, ecdf_eval
from .errors import EstimationError
from .seeding import generator

__all__ = [
    "BetaEstimate",
    "DecayFit",
    "lag_covariance",
    "lag_covariance_profile",
    "estimate_beta",
    "beta_noise_floor",
    "independence_noise_floor",
    "decay_profile_fit",
    "fit_decay",
]

DEFAULT_BETA_GRID_R = 8


@dataclass(frozen=True)
class BetaEstimate:
    """Rank-based estimate of beta(sigma(X_0), X_k) at one lag."""

    lag: int
    value: float
    bins: int
    pairs: int

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError("beta estimate must lie in [0,1]")


@dataclass(frozen=True)
class DecayFit:
    """OLS fit of log(value) on log(lag); slope estimates -a in O(k^-a)."""

    slope: float
    intercept: float
    r_squared: float
    lag_range: tuple[int, int]


def _centered_indicators(values, F, s, s2):
    a = (values <= s).astype(np.float64) - ecdf_eval(F, s)
    b = (values <= s2).astype(np.float64) - ecdf_eval(F, s2)
    return a, b


def lag_covariance(
    traj: Trajectory, F: EcdfModel, s: float, s2: float, k: int
) -> float:
    """Empirical mean over i of (1{X_i <= s} - F(s))(1{X_{i+k} <= s2} - F(s2)).

    For orbits the reversed-index convention applies: this quantity
    estimates the chain covariance Cov(1{X_k <= s}, 1{X_0 <= s2}).
    """
    k = int(k)
    if k < 0:
        raise ValueError("lag k must be nonnegative")
    if traj.length <= k + 1:
        raise ValueError(f"lag {k} too large for trajectory of length {traj.length}")
    n = traj.length
    a, b = _centered_indicators(traj.values, F, s, s2)
    return float(np.dot(a[: n - k], b[k:]) / (n - k))


def lag_covariance_profile(
    traj: Trajectory, F: EcdfModel, s: float, s2: float, lags
) -> np.ndarray:
    """lag_covariance over many lags, sharing the indicator arrays."""
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size == 0 or np.any(lags < 0):
        raise ValueError("lags must be nonnegative")
    if traj.length <= int(lags.max()) + 1:
        raise ValueError("largest lag too large for trajectory")
    n = traj.length
    a, b = _centered_indicators(traj.values, F, s, s2)
    out = np.empty(lags.size, dtype=np.float64)
    for i, k in enumerate(lags):
        out[i] = np.dot(a[: n - k], b[k:]) / (n - k)
    return out


def estimate_beta(
    traj: Trajectory, k: int, bins: int, grid_r: int = DEFAULT_BETA_GRID_R
) -> BetaEstimate:
    """Bin-averaged sup distance between conditional and marginal ECDFs.

    Pairs are (conditioning, target) = (X_i, X_{i+k}) for sequences and
    (X_{i+k}, X_i) for orbits (time reversal).  The conditioning coordinate
    is split into ``bins`` equal-count groups by rank; within each group
    the target's conditional ECDF is compared with its marginal ECDF at
    the empirical quantiles of dyadic probability levels j * 2**-grid_r.
    The result is the count-weighted average of the per-group sups.
    """
    k = int(k)
    bins = int(bins)
    if k < 1:
        raise ValueError("lag k must be a positive integer")
    if bins < 1:
        raise ValueError("bins must be a positive integer")
    n_pairs = traj.length - k
    if n_pairs < 100 * bins:
        raise EstimationError(
            f"need >= 100 pairs per bin on average: {n_pairs} pairs for "
            f"{bins} bins at lag {k} (trajectory length {traj.length})"
        )
    values = traj.values
    if traj.spec.kind == "lsv":
        cond, target = values[k:], values[: traj.length - k]
    else:
        cond, target = values[: traj.length - k], values[k:]

    sorted_target = np.sort(target)
    levels = np.arange(1, 2**grid_r) * 2.0**-grid_r
    # Empirical level-u quantile = order statistic of rank ceil(u * N).
    q_idx = np.ceil(levels * n_pairs).astype(np.int64) - 1
    thresholds = sorted_target[q_idx]
    marginal = np.searchsorted(sorted_target, thresholds, side="right") / n_pairs

    order = np.argsort(cond, kind="stable")
    total = 0.0
    for group in np.array_split(order, bins):
        gsort = np.sort(target[group])
        cond_cdf = np.searchsorted(gsort, thresholds, side="right") / group.size
        total += group.size * float(np.max(np.abs(cond_cdf - marginal)))
    value = total / n_pairs
    return BetaEstimate(lag=k, value=value, bins=bins, pairs=int(n_pairs))


def beta_noise_floor(
    traj: Trajectory,
    k: int,
    bins: int,
    seed: int,
    grid_r: int = DEFAULT_BETA_GRID_R,
) -> float:
    """estimate_beta on a shuffled copy: the estimator's level under
    independence, used to floor values before decay fitting."""
    rng = generator(seed)
    shuffled = traj.values.copy()
    rng.shuffle(shuffled)
    return estimate_beta(
        Trajectory(values=shuffled, spec=traj.spec), k, bins, grid_r
    ).value


def independence_noise_floor(
    n_pairs: int, bins: int, grid_size: int, confidence: float = 0.999
) -> float:
    """Hoeffding union bound on the bin-averaged sup under independence.

    With B groups of about N/B pairs and G evaluation points, every group
    sup deviation stays below t_b = sqrt(ln(2 G (B+1) / alpha) / (2 N/B))
    with probability >= confidence, and the marginal adds its own
    t_all = sqrt(ln(2 G (B+1) / alpha) / (2 N)).
    """
    if not (0.0 < confidence < 1.0):
        raise ValueError("confidence must lie in (0,1)")
    alpha = 1.0 - confidence
    n_b = n_pairs // bins
    log_term = math.log(2.0 * grid_size * (bins + 1) / alpha)
    return math.sqrt(log_term / (2.0 * n_b)) + math.sqrt(log_term / (2.0 * n_pairs))


def decay_profile_fit(
    traj: Trajectory,
    F: EcdfModel,
    s: float,
    lags,
    n_batches: int = 32,
    significance: float = 3.0,
    min_lags: int = 5,
):
    """Lag-covariance profile at (s, s) with per-lag batch SEs, floored at
    the noise level, then decay-fitted.

    Lags whose covariance does not exceed ``significance`` batch SEs are
    dropped before fitting (they are indistinguishable from zero and would
    corrupt a log-log fit).  Returns (profile, floor, kept_mask, DecayFit).
    """
    lags = np.asarray(lags, dtype=np.int64)
    profile = lag_covariance_profile(traj, F, s, s, lags)
    pieces = np.array_split(np.arange(traj.length), n_batches)
    batch_vals = np.empty((n_batches, lags.size))
    for b, idx in enumerate(pieces):
        sub = Trajectory(values=traj.values[idx], spec=traj.spec)
        batch_vals[b] = lag_covariance_profile(sub, F, s, s, lags)
    floor = significance * batch_vals.std(axis=0, ddof=1) / math.sqrt(n_batches)
    kept = profile > floor
    if int(kept.sum()) < min_lags:
        raise EstimationError(
            f"only {int(kept.sum())} lags exceed the noise floor; need {min_lags}"
        )
    fit = fit_decay(list(zip(lags[kept], profile[kept])))
    return profile, floor, kept, fit


def fit_decay(points) -> DecayFit:
    """OLS of log(value) on log(lag) over (lag, value) pairs, value > 0.

    Callers must floor noisy values at the noise level first; nonpositive
    values are a domain error here.
    """
    pts = [(int(l), float(v)) for l, v in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 (lag, value) points")
    lags = np.array([p[0] for p in pts], dtype=np.float64)
    vals = np.array([p[1] for p in pts], dtype=np.float64)
    if np.any(lags <= 0):
        raise ValueError("lags must be positive")
    if np.any(vals <= 0.0):
        raise ValueError("values must be strictly positive; floor at the noise level first")
    x = np.log(lags)
    y = np.log(vals)
    xbar, ybar = x.mean(), y.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    if sxx == 0.0:
        raise ValueError("lags must not all coincide")
    slope = float(np.sum((x - xbar) * (y - ybar)) / sxx)
    intercept = ybar - slope * xbar
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    ss_tot = float(np.sum((y - ybar) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0  # constant data: the flat line fits exactly
    else:
        r2 = max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return DecayFit(
        slope=slope,
        intercept=float(intercept),
        r_squared=r2,
        lag_range=(int(lags.min()), int(lags.max())),
    )
