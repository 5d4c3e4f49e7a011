"""Spectral statistics of permutation matrices read off the cycle structure.

A j-cycle contributes the j-th roots of unity, i.e. angles t/j, t = 0..j-1
(in units of a full turn), and the factor (1 - x^j) to the characteristic
polynomial Z_n(x) = prod_j (1 - x^j)^{k_j}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import AdditiveSpec, CycleStructure, to_fraction
from .errors import DomainError

__all__ = ["AngleWindow", "char_poly_log_abs", "eigen_angle_count", "angle_spec",
           "angle_counts"]


@dataclass(frozen=True)
class AngleWindow:
    """Half-open window [lo, hi) of angles in turns, 0 <= lo < hi <= 1.

    Endpoints are held as exact Fractions; a float endpoint is taken at its
    exact binary value, so the boundary rule is the same half-open one.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = to_fraction(self.lo), to_fraction(self.hi)
        if not 0 <= lo < hi <= 1:
            raise DomainError(f"window needs 0 <= lo < hi <= 1, got [{self.lo}, {self.hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def parse(cls, text: str) -> "AngleWindow":
        """From ``"lo:hi"``, e.g. ``"0:1/10"``."""
        try:
            lo, hi = text.split(":")
        except ValueError:
            raise DomainError(f"window must look like lo:hi, got {text!r}") from None
        return cls(lo, hi)

    def count_in_cycle(self, j: int) -> int:
        """#{0 <= t < j : lo <= t/j < hi} = ceil(hi j) - ceil(lo j)."""
        return _ceil(self.hi * j) - _ceil(self.lo * j)


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def char_poly_log_abs(s: CycleStructure, x: float) -> tuple[float, int]:
    """(log|Z_n(x)|, sign of Z_n(x)) for real x."""
    x = float(x)
    log_abs = 0.0
    sign = 1
    for j, c in s.parts:
        f = 1.0 - x ** j
        if f == 0.0:
            raise DomainError(f"Z_n vanishes at x={x}: factor 1 - x^{j} is zero")
        log_abs += c * math.log(abs(f))
        if f < 0 and c % 2:
            sign = -sign
    return log_abs, sign


def eigen_angle_count(s: CycleStructure, window: AngleWindow) -> int:
    """Number of eigenvalue angles in the window, sum_j s_j (ceil(hi j) - ceil(lo j))."""
    return sum(c * window.count_in_cycle(j) for j, c in s.parts)


def angle_spec(n: int, window: AngleWindow) -> AdditiveSpec:
    """The additive function with a_j = #{t < j : t/j in window}."""
    return AdditiveSpec(n, {j: window.count_in_cycle(j) for j in range(1, n + 1)},
                        {"angle_window": [str(window.lo), str(window.hi)]})


def angle_counts(lengths: np.ndarray, offsets: np.ndarray, window: AngleWindow,
                 n: int) -> np.ndarray:
    """Vectorized eigen_angle_count for a batch of draws."""
    per = angle_spec(n, window).array[lengths]
    return np.add.reduceat(per, offsets[:-1])
