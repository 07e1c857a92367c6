"""Generators for the stationary processes under study.

Three process families are supported:

* ``lsv`` -- the two-branch expanding interval map with a neutral fixed
  point at 0 and tangency parameter ``gamma``; orbits are started from a
  uniform draw and a burn-in prefix is discarded, which by ergodicity
  yields an approximately invariant sample.
* ``linear`` -- a causal moving average with geometric coefficients
  ``rho**k`` and centered uniform innovations.
* ``iid`` -- independent uniform(0,1) draws, the classical baseline.

All generation is a pure function of (spec, n): equal inputs give
bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit
from scipy.signal import lfilter

from .seeding import generator

__all__ = ["ProcessSpec", "Trajectory", "lsv_apply", "generate_trajectory"]

KINDS = ("lsv", "linear", "iid")

DEFAULT_BURN_IN = 10_000


@dataclass(frozen=True)
class ProcessSpec:
    """Parameters of one stationary process, including its seed.

    ``gamma`` is required for kind ``lsv`` and must lie in (0,1); ``rho``
    is required for kind ``linear`` and must lie in (0,1).  ``burn_in``
    counts warm-up steps that are generated and discarded.
    """

    kind: str
    gamma: float | None = None
    rho: float | None = None
    burn_in: int = DEFAULT_BURN_IN
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown process kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "lsv":
            if self.gamma is None or not (0.0 < self.gamma < 1.0):
                raise ValueError(f"lsv requires gamma in (0,1), got {self.gamma!r}")
        if self.kind == "linear":
            if self.rho is None or not (0.0 < self.rho < 1.0):
                raise ValueError(f"linear requires rho in (0,1), got {self.rho!r}")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")

    def with_seed(self, seed: int) -> "ProcessSpec":
        return replace(self, seed=int(seed))

    def n_coeffs(self) -> int:
        """Moving-average truncation K: smallest K with rho**K < 2**-52."""
        if self.kind != "linear":
            raise ValueError("n_coeffs is defined for linear processes only")
        return int(math.floor(52.0 * math.log(2.0) / -math.log(self.rho))) + 1


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One finite realization of a stationary process (burn-in excluded)."""

    values: np.ndarray
    spec: ProcessSpec
    length: int = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "length", int(v.shape[0]))
        if self.length < 1:
            raise ValueError("trajectory must contain at least one value")


def lsv_apply(x: float, gamma: float) -> float:
    """One step of the two-branch intermittent interval map.

    T(x) = x * (1 + (2x)**gamma) on [0, 1/2] and 2x - 1 on (1/2, 1].
    The (2x)**gamma form is algebraically 2**gamma * x**gamma but keeps
    T(1/2) exactly 1.0 and T(x) <= 1.0 in floating point.
    """
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0,1], got {x!r}")
    if not (0.0 < gamma < 1.0):
        raise ValueError(f"gamma must lie in (0,1), got {gamma!r}")
    if x <= 0.5:
        return x * (1.0 + (2.0 * x) ** gamma)
    return 2.0 * x - 1.0


@njit(cache=True)
def _lsv_orbit(x0, gamma, burn_in, n):
    # Same arithmetic as lsv_apply; the (2x)**gamma form is load-bearing
    # for the exact branch identities.
    out = np.empty(n, dtype=np.float64)
    x = x0
    for _ in range(burn_in):
        if x <= 0.5:
            x = x * (1.0 + (2.0 * x) ** gamma)
        else:
            x = 2.0 * x - 1.0
    for i in range(n):
        if x <= 0.5:
            x = x * (1.0 + (2.0 * x) ** gamma)
        else:
            x = 2.0 * x - 1.0
        out[i] = x
    return out


def generate_trajectory(spec: ProcessSpec, n: int) -> Trajectory:
    """Generate n samples of the process described by ``spec``.

    lsv: iterate the map from a uniform start on (0,1), discard
    ``spec.burn_in`` iterates, return the next n.  Double precision is
    safe near the neutral fixed point: the escape recursion
    x -> x*(1 + (2x)**gamma) never underflows for starts >= 2**-53.

    linear: X_i = sum_{k=0}^{K} rho**k eps_{i-k} with centered uniform
    innovations eps ~ U(-1/2, 1/2) and K per ``spec.n_coeffs()``; the K
    partial-window samples and the burn-in prefix are discarded.

    iid: n uniform(0,1) draws (burn_in has no effect).
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    rng = generator(spec.seed)
    if spec.kind == "iid":
        values = rng.random(n)
    elif spec.kind == "lsv":
        x0 = rng.random()
        while x0 == 0.0:  # uniform on the open interval (0,1)
            x0 = rng.random()
        values = _lsv_orbit(x0, float(spec.gamma), int(spec.burn_in), n)
    else:
        k = spec.n_coeffs()
        eps = rng.random(n + spec.burn_in + k) - 0.5
        weights = spec.rho ** np.arange(k + 1)
        full = lfilter(weights, [1.0], eps)
        values = np.ascontiguousarray(full[k + spec.burn_in :])
    return Trajectory(values=values, spec=spec)
