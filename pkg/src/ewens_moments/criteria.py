"""Numeric evaluators for the convergence conditions on additive functions.

Each function computes the left-hand side of one condition at a single n.
Limits are never claimed; :func:`trend` tabulates a quantity across an n-grid
so the caller can inspect how it behaves.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np

from .core import AdditiveSpec, EwensParams
from .errors import DomainError
from .moments import upsilon_restricted

__all__ = [
    "negative_weight_mass",
    "short_support_mass",
    "long_level_mass",
    "large_weight_mass",
    "poisson_short_long_split",
    "long_upsilon",
    "short_subset_mass",
    "moment_series",
    "trend",
]


def _tilt(params: EwensParams) -> np.ndarray:
    """(1/j)(1 - j/n)^(theta - 1) for j = 1..n-1 (index j)."""
    n = params.n
    j = np.arange(n, dtype=np.float64)
    out = np.zeros(n)
    out[1:] = (1.0 - j[1:] / n) ** (params.theta_float - 1.0) / j[1:]
    return out


def _weights_below_n(spec: AdditiveSpec) -> np.ndarray:
    return spec.array[:spec.n]


def negative_weight_mass(params: EwensParams, spec: AdditiveSpec) -> float:
    """sum_{j<n} 1{a_j <= -1}/j (1 - j/n)^(theta-1); must vanish for convergence."""
    return float(_tilt(params) @ (_weights_below_n(spec) <= -1))


def short_support_mass(spec: AdditiveSpec) -> float:
    """sum_{j <= n/2} 1{a_j != 0}/j."""
    return math.fsum(1.0 / j for j in spec.support() if 2 * j <= spec.n)


def long_level_mass(params: EwensParams, spec: AdditiveSpec, k: int) -> float:
    """theta sum_{n/2 < j < n} 1{a_j = k}/j (1 - j/n)^(theta-1).

    Compare with e^-mu mu^k / k! for a Poisson(mu) limit.
    """
    n = params.n
    a = _weights_below_n(spec)
    j = np.arange(n)
    mask = (a == k) & (2 * j > n)
    return params.theta_float * float(_tilt(params) @ mask)


def large_weight_mass(params: EwensParams, spec: AdditiveSpec, K: int) -> float:
    """sum_{j<n} 1{a_j >= K}/j (1 - j/n)^(theta-1)."""
    return float(_tilt(params) @ (_weights_below_n(spec) >= K))


def poisson_short_long_split(params: EwensParams, subset: AdditiveSpec, r: int):
    """For a 0/1 subset: (theta sum*_{j<=r} 1/j, sum*_{r<j<n} (1/j)(1 - j/n)^(theta-1)).

    A Poisson(mu) limit needs the first near mu and the second near 0 for
    some r = o(n).
    """
    subset.require_zero_one("poisson_short_long_split")
    if not 1 <= r <= params.n:
        raise DomainError(f"r must lie in [1, {params.n}], got {r!r}")
    n = params.n
    js = np.array(subset.support(), dtype=np.int64)
    short = params.theta_float * math.fsum(1.0 / j for j in js if j <= r)
    tilt = _tilt(params)
    long = float(tilt[js[(js > r) & (js < n)]].sum())
    return short, long


def long_upsilon(params: EwensParams, subset: AdditiveSpec, L: int, l: int) -> float:
    """upsilon_n(l) restricted to lengths n/L < j < n."""
    subset.require_zero_one("long_upsilon")
    n = params.n
    kept = [j for j in subset.support() if j * L > n and j < n]
    if not kept:
        return 0.0
    return upsilon_restricted(params, AdditiveSpec.indicator(n, kept), l)


def short_subset_mass(subset: AdditiveSpec, L: int) -> float:
    """sum*_{j <= n/L} 1/j."""
    subset.require_zero_one("short_subset_mass")
    return math.fsum(1.0 / j for j in subset.support() if j * L <= subset.n)


def moment_series(moments, base: float = 2.0) -> float:
    """Partial sum of sum_l Upsilon(l) base^l / l!, including l = 0."""
    vals = list(getattr(moments, "values", moments))
    return 1.0 + math.fsum(float(v) * base ** l / math.factorial(l)
                           for l, v in enumerate(vals, start=1))


def trend(fn: Callable[[int], float], n_grid: Iterable[int]) -> list[tuple[int, float]]:
    """[(n, fn(n))] over the grid."""
    return [(int(n), float(fn(int(n)))) for n in n_grid]
