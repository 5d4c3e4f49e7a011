"""Discrete laws on the nonnegative integers and their factorial moments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from scipy import stats

from .errors import DomainError
from .moments import FactorialMomentVector, Provenance

__all__ = [
    "DiscreteLaw",
    "point_mass",
    "poisson_law",
    "bernoulli_law",
    "binomial_law",
    "geometric_law",
    "quasi_poisson_law",
    "mixed_poisson_law",
    "factorial_moments_to_pmf",
    "tv_distance",
    "tv_distance_with_error",
    "membership_necessary_check",
    "TAIL_CUT",
]

TAIL_CUT = 1e-14
SUM_TOL = 1e-12


def _falling(x: int, l: int) -> int:
    out = 1
    for t in range(l):
        out *= x - t
    return out


@dataclass(frozen=True)
class DiscreteLaw:
    """A pmf listed on ``offset, offset + 1, ...`` plus an unlisted tail.

    ``tail`` bounds the mass beyond the listed support (it is not
    renormalized away).  ``closed_moments`` optionally gives the factorial
    moment of order ``l`` in closed form.  Entries may be Fractions.
    """

    pmf: tuple
    name: str = ""
    offset: int = 0
    tail: float = 0.0
    closed_moments: Callable[[int], float] | None = field(default=None, compare=False,
                                                          repr=False)

    def __post_init__(self):
        pmf = tuple(self.pmf)
        object.__setattr__(self, "pmf", pmf)
        if not pmf:
            raise DomainError("a law needs at least one listed probability")
        if any(p < 0 for p in pmf):
            raise DomainError(f"negative probability in law {self.name!r}")
        if self.tail < 0:
            raise DomainError("tail mass must be nonnegative")
        total = sum(pmf) + self.tail
        exact = all(isinstance(p, (int, Fraction)) for p in pmf) and self.tail == 0
        if (total != 1) if exact else abs(float(total) - 1.0) > SUM_TOL:
            raise DomainError(f"law {self.name!r} has total mass {float(total)!r}")

    @property
    def support(self) -> range:
        """Listed values (the tail lies above them)."""
        return range(self.offset, self.offset + len(self.pmf))

    def prob(self, i: int):
        k = i - self.offset
        return self.pmf[k] if 0 <= k < len(self.pmf) else 0

    def mass_dict(self) -> dict:
        return {self.offset + k: p for k, p in enumerate(self.pmf) if p}

    def factorial_moment(self, l: int):
        if l == 0:
            return 1
        if self.closed_moments is not None:
            return self.closed_moments(l)
        return sum(p * _falling(self.offset + k, l) for k, p in enumerate(self.pmf))

    def factorial_moments(self, L: int) -> FactorialMomentVector:
        return FactorialMomentVector(tuple(self.factorial_moment(l) for l in range(1, L + 1)),
                                     Provenance.TARGET_LAW)

    def mean(self):
        return self.factorial_moment(1)

    def cdf(self, x) -> float:
        """P(Y < x), the left-continuous convention used for T_n(x)."""
        return float(sum(p for v, p in self.mass_dict().items() if v < x))


def point_mass(value: int = 0) -> DiscreteLaw:
    return DiscreteLaw((1,), name=f"delta({value})", offset=value)


def _cut_index(sf: Callable[[int], float], cut: float) -> int:
    k = 0
    while sf(k) >= cut:
        k += 1
    return k


def poisson_law(mu: float, support_cut: int | None = None) -> DiscreteLaw:
    """Poisson(mu) listed up to the first i with P(Y > i) < 1e-14 (or ``support_cut``)."""
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu!r}")
    dist = stats.poisson(mu)
    top = _cut_index(dist.sf, TAIL_CUT) if support_cut is None else int(support_cut)
    pmf = tuple(float(x) for x in dist.pmf(range(top + 1)))
    tail = max(0.0, float(dist.sf(top)))
    return DiscreteLaw(pmf, name=f"Poisson({mu:g})", tail=tail,
                       closed_moments=lambda l: mu ** l)


def bernoulli_law(p) -> DiscreteLaw:
    if not 0 <= p <= 1:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    return DiscreteLaw((1 - p, p), name=f"Be({float(p):g})",
                       closed_moments=lambda l: p if l == 1 else 0 * p)


def binomial_law(M: int, p) -> DiscreteLaw:
    if not 0 <= p <= 1:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    if M < 0:
        raise DomainError(f"M must be nonnegative, got {M}")
    pmf = tuple(math.comb(M, i) * p ** i * (1 - p) ** (M - i) for i in range(M + 1))
    return DiscreteLaw(pmf, name=f"Bi({M}, {float(p):g})",
                       closed_moments=lambda l: _falling(M, l) * p ** l)


def geometric_law(p: float) -> DiscreteLaw:
    """P(k) = p q^k on k >= 0; factorial moments l! (q/p)^l."""
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    dist = stats.geom(p, loc=-1)
    top = _cut_index(dist.sf, TAIL_CUT)
    pmf = tuple(float(x) for x in dist.pmf(range(top + 1)))
    q = 1.0 - p
    return DiscreteLaw(pmf, name=f"Geometric({p:g})", tail=max(0.0, float(dist.sf(top))),
                       closed_moments=lambda l: math.factorial(l) * (q / p) ** l)


def mixed_poisson_law(beta: float, lam: float, tau: float) -> DiscreteLaw:
    """beta * Poisson(lam) + (1 - beta) * Poisson(tau)."""
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    if not (lam > 0 and tau > 0):
        raise DomainError("both Poisson means must be positive")
    if lam == tau:
        raise DomainError("the two Poisson means must differ")
    a, b = stats.poisson(lam), stats.poisson(tau)
    top = _cut_index(lambda k: beta * a.sf(k) + (1 - beta) * b.sf(k), TAIL_CUT)
    ks = range(top + 1)
    pmf = tuple(float(x) for x in beta * a.pmf(ks) + (1 - beta) * b.pmf(ks))
    tail = max(0.0, float(beta * a.sf(top) + (1 - beta) * b.sf(top)))
    return DiscreteLaw(pmf, name=f"MixPoisson({beta:g}; {lam:g}, {tau:g})", tail=tail,
                       closed_moments=lambda l: beta * lam ** l + (1 - beta) * tau ** l)


def factorial_moments_to_pmf(moments, support: int | None = None,
                             name: str = "inverted", tol: float = 1e-9) -> DiscreteLaw:
    """Invert factorial moments of a law on {0..support}.

    P(i) = sum_{j=i}^{L} (-1)^(j-i) Upsilon(j) / (i! (j-i)!), Upsilon(0) = 1.
    ``moments`` is a FactorialMomentVector or a sequence Upsilon(1..L).
    """
    vals = list(moments.values if isinstance(moments, FactorialMomentVector) else moments)
    L = len(vals)
    support = L if support is None else int(support)
    if support > L:
        raise DomainError(f"support {support} needs moments through order {support}, got {L}")
    ups = [1, *vals]
    exact = all(isinstance(v, (int, Fraction)) for v in ups)
    pmf = []
    for i in range(support + 1):
        acc = sum((-1) ** (j - i) * ups[j] / (math.factorial(i) * math.factorial(j - i))
                  if not exact else
                  Fraction((-1) ** (j - i) * ups[j], math.factorial(i) * math.factorial(j - i))
                  for j in range(i, L + 1))
        pmf.append(acc)
    worst = min(pmf)
    if worst < -tol:
        raise DomainError(f"factorial moments give negative mass {float(worst):.3g}")
    total = sum(pmf)
    if abs(float(total) - 1.0) > tol:
        raise DomainError(f"factorial moments give total mass {float(total)!r}")
    if not exact:
        pmf = [max(0.0, float(p)) for p in pmf]
        # absorb rounding so the law validates
        drift = 1.0 - math.fsum(pmf)
        k = max(range(len(pmf)), key=pmf.__getitem__)
        pmf[k] += drift
    return DiscreteLaw(tuple(pmf), name=name)


def quasi_poisson_law(k: int, lam) -> DiscreteLaw:
    """The (k, lam) quasi-Poisson law: factorial moments lam^l for l <= k, 0 beyond."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if not 0 < lam <= 1:
        raise DomainError(f"lam must lie in (0, 1], got {lam!r}")
    law = factorial_moments_to_pmf([lam ** l for l in range(1, k + 1)], k,
                                   name=f"QuasiPoisson({k}, {float(lam):g})")
    return DiscreteLaw(law.pmf, name=law.name,
                       closed_moments=lambda l: lam ** l if l <= k else 0 * lam)


def _mass_and_tail(x):
    return x.mass_dict(), float(getattr(x, "tail", 0.0))


def tv_distance_with_error(p, q) -> tuple[float, float]:
    """(1/2) sum |p_i - q_i| over listed values, and the bound from unlisted tails.

    Accepts DiscreteLaw or EmpiricalLaw for either argument.
    """
    mp, tp = _mass_and_tail(p)
    mq, tq = _mass_and_tail(q)
    keys = set(mp) | set(mq)
    value = 0.5 * math.fsum(abs(float(mp.get(k, 0)) - float(mq.get(k, 0))) for k in keys)
    return value, 0.5 * (tp + tq)


def tv_distance(p, q) -> float:
    return tv_distance_with_error(p, q)[0]


def membership_necessary_check(moments, rtol: float = 1e-12) -> tuple[bool, int | None]:
    """Check Upsilon(l) <= Upsilon(1)^l for every available order.

    Returns ``(ok, first violating order or None)``.
    """
    vals = list(moments.values if isinstance(moments, FactorialMomentVector) else moments)
    if len(vals) < 2:
        raise DomainError("the check needs moments through order >= 2")
    u1 = vals[0]
    for l, v in enumerate(vals[1:], start=2):
        bound = u1 ** l
        if v > bound + rtol * max(1.0, abs(float(bound))):
            return False, l
    return True, None
