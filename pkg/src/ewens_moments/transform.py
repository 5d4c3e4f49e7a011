"""The long-cycle transform t_theta and the integrals behind the instances.

For theta < 1 the factor (s - x)^(theta - 1) blows up at x = s; integrals of
that shape are taken after substituting w = (s - x)^theta, which leaves a
smooth integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from scipy import integrate, optimize

from .errors import DomainError

__all__ = ["ThetaTransform", "singular_integral", "interval_upsilon_limit"]

_QUAD = dict(epsabs=1e-13, epsrel=1e-12, limit=200)


def singular_integral(theta: float, s: float, a: float, b: float, g) -> float:
    """int_a^b (s - x)^(theta - 1) g(x) dx for a <= b <= s."""
    if b <= a:
        return 0.0
    if theta >= 1:
        val, _ = integrate.quad(lambda x: (s - x) ** (theta - 1) * g(x), a, b, **_QUAD)
        return val
    inv = 1.0 / theta
    val, _ = integrate.quad(lambda w: g(s - w ** inv), (s - b) ** theta, (s - a) ** theta,
                            **_QUAD)
    return val / theta


@dataclass(frozen=True)
class ThetaTransform:
    """t_theta(x) = theta int_{1/2}^x (1 - u)^(theta - 1) du / u on [1/2, 1]."""

    theta: float

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta!r}")

    @property
    def integer_theta(self) -> bool:
        return float(self.theta).is_integer()

    def integral(self, a: float, b: float, method: str = "auto") -> float:
        """theta int_a^b (1 - u)^(theta - 1) du / u for 0 < a <= b <= 1."""
        if not 0 < a <= b <= 1:
            raise DomainError(f"need 0 < a <= b <= 1, got ({a!r}, {b!r})")
        th = float(self.theta)
        if method == "closed" or (method == "auto" and self.integer_theta and th <= 60):
            if not self.integer_theta:
                raise DomainError("the closed form needs an integer theta")
            # expand (1 - u)^(theta - 1) binomially
            t = int(th)
            acc = math.log(b / a)
            for k in range(1, t):
                acc += math.comb(t - 1, k) * (-1) ** k * (b ** k - a ** k) / k
            return th * acc
        return th * singular_integral(th, 1.0, a, b, lambda u: 1.0 / u)

    def t(self, x: float, method: str = "auto") -> float:
        if not 0.5 <= x <= 1:
            raise DomainError(f"x must lie in [1/2, 1], got {x!r}")
        return self.integral(0.5, x, method)

    __call__ = t

    @cached_property
    def t1(self) -> float:
        return self.t(1.0)

    @property
    def mu_bound(self) -> float:
        """-log(1 - t_theta(1)); only meaningful when t_theta(1) < 1."""
        if self.t1 >= 1:
            raise DomainError(f"t_theta(1) = {self.t1} >= 1 for theta = {self.theta}")
        return -math.log1p(-self.t1)

    def inverse(self, y: float) -> float:
        """The x in [1/2, 1] with t_theta(x) = y."""
        if not 0 <= y <= self.t1 + 1e-15:
            raise DomainError(f"y must lie in [0, t_theta(1) = {self.t1}], got {y!r}")
        if y <= 0:
            return 0.5
        if y >= self.t1:
            return 1.0
        return optimize.brentq(lambda x: self.t(x) - y, 0.5, 1.0, xtol=1e-15, rtol=1e-15,
                               maxiter=200)


def interval_upsilon_limit(theta: float, intervals, l: int) -> float:
    """Limit of upsilon_n(l) for the indicator of a union of (lo, hi] fractions of n.

    l = 1: theta int (1-u)^(theta-1) du/u over the union.
    l = 2: theta^2 iint_{u+v<1} (1-u-v)^(theta-1) du dv/(uv) over the union squared.
    l >= 3 is only handled when every l-tuple of lengths sums past n (limit 0).
    """
    ivs = [(float(lo), float(hi)) for lo, hi in intervals]
    for lo, hi in ivs:
        if not 0 < lo < hi <= 1:
            raise DomainError(f"interval ({lo}, {hi}] must satisfy 0 < lo < hi <= 1")
    th = float(theta)
    if l == 1:
        tr = ThetaTransform(th)
        return sum(tr.integral(lo, hi) for lo, hi in ivs)
    if l == 2:
        total = 0.0
        for a, b in ivs:
            for c, d in ivs:
                def inner(u, c=c, d=d):
                    top = min(d, 1.0 - u)
                    return singular_integral(th, 1.0 - u, c, top, lambda v: 1.0 / v) / u
                top_u = min(b, 1.0 - c)
                if top_u > a:
                    val, _ = integrate.quad(inner, a, top_u, **_QUAD)
                    total += val
        return th * th * total
    lowest = min(lo for lo, _ in ivs)
    if l * lowest >= 1:
        return 0.0
    raise DomainError(f"order {l} limit is only available for l <= 2")
