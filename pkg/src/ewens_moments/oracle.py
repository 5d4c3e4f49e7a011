"""Ground truth at small n: enumeration of partitions and permutations, and the
exact total variation distance between short-cycle counts and Poisson variables.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping

import numpy as np
from scipy.special import gammaln

from .core import (
    AdditiveSpec,
    CycleStructure,
    EwensParams,
    additive_value,
    esf_probability,
    falling_factorial,
)
from .errors import DomainError, ResourceError
from .laws import DiscreteLaw
from .moments import watterson_moment

__all__ = [
    "partition_count",
    "PartitionIterator",
    "exact_law",
    "brute_force_permutations",
    "permutation_weight_total",
    "SeriesCoeffs",
    "exp_series",
    "exact_tv_short_cycles",
    "watterson_composed_moment",
    "law_factorial_moment",
    "EXACT_LAW_MAX_N",
    "BRUTE_FORCE_MAX_N",
    "RATIONAL_MAX_N",
]

EXACT_LAW_MAX_N = 60
BRUTE_FORCE_MAX_N = 9
RATIONAL_MAX_N = 12
TV_ENUM_MAX_STATES = 2_000_000


@lru_cache(maxsize=None)
def partition_count(n: int) -> int:
    """p(n) via Euler's pentagonal recurrence."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    total, k = 0, 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 > n:
            break
        sign = 1 if k % 2 else -1
        total += sign * partition_count(n - g1)
        g2 = k * (3 * k + 1) // 2
        if g2 <= n:
            total += sign * partition_count(n - g2)
        k += 1
    return total


class PartitionIterator:
    """Every partition of n, once each, as a CycleStructure."""

    def __init__(self, n: int):
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        self.n = n

    def __len__(self) -> int:
        return partition_count(self.n)

    def __iter__(self) -> Iterator[CycleStructure]:
        for parts in _ascending_partitions(self.n):
            yield CycleStructure(self.n, Counter(parts).items())


def _ascending_partitions(n: int):
    # Kelleher's accelerated ascending composition generator
    a = [0] * (n + 1)
    k = 1
    y = n - 1
    while k != 0:
        x = a[k - 1] + 1
        k -= 1
        while 2 * x <= y:
            a[k] = x
            y -= x
            k += 1
        l = k + 1
        while x <= y:
            a[k] = x
            a[l] = y
            yield a[:k + 2]
            x += 1
            y -= 1
        a[k] = x + y
        y = x + y - 1
        yield a[:k + 1]


def _use_exact(params: EwensParams, exact) -> bool:
    if exact is None:
        return params.n <= RATIONAL_MAX_N and isinstance(params.theta, (int, Fraction))
    return bool(exact)


def _law_from_histogram(hist: Mapping[int, object], name: str) -> DiscreteLaw:
    lo, hi = min(hist), max(hist)
    pmf = tuple(hist.get(v, 0) for v in range(lo, hi + 1))
    return DiscreteLaw(pmf, name=name, offset=lo)


def exact_law(params: EwensParams, spec: AdditiveSpec, exact: bool | None = None) -> DiscreteLaw:
    """Law of h(sigma) by summing the ESF over the fibres of h.

    Rational arithmetic is used by default for n <= 12 and int/Fraction theta.
    """
    if params.n > EXACT_LAW_MAX_N:
        raise ResourceError(f"exact_law enumerates p(n) partitions; n={params.n} exceeds "
                            f"{EXACT_LAW_MAX_N}")
    if spec.n != params.n:
        raise DomainError(f"spec has n={spec.n} but params have n={params.n}")
    ex = _use_exact(params, exact)
    hist: dict[int, object] = defaultdict(int)
    for s in PartitionIterator(params.n):
        hist[additive_value(spec, s)] += esf_probability(params, s, exact=ex)
    return _law_from_histogram(hist, "exact law")


@lru_cache(maxsize=None)
def _cycle_type_census(n: int) -> dict:
    """Number of permutations of each cycle type, found by walking all n! of them."""
    census: Counter = Counter()
    for perm in itertools.permutations(range(n)):
        seen = [False] * n
        lengths = []
        for i in range(n):
            if not seen[i]:
                L, j = 0, i
                while not seen[j]:
                    seen[j] = True
                    j = perm[j]
                    L += 1
                lengths.append(L)
        census[tuple(sorted(lengths))] += 1
    return dict(census)


def _check_brute(n: int) -> None:
    if n > BRUTE_FORCE_MAX_N:
        raise ResourceError(f"brute force walks n! permutations; n={n} exceeds {BRUTE_FORCE_MAX_N}")


def permutation_weight_total(params: EwensParams, exact: bool | None = None):
    """sum over S_n of theta^w(sigma) (equals theta^(n))."""
    _check_brute(params.n)
    th = params.theta_exact if _use_exact(params, exact) else params.theta_float
    return sum(count * th ** len(lengths)
               for lengths, count in _cycle_type_census(params.n).items())


def brute_force_permutations(params: EwensParams, spec: AdditiveSpec,
                             exact: bool | None = None) -> DiscreteLaw:
    """Law of h(sigma) from the theta^w-weighted histogram over all of S_n."""
    _check_brute(params.n)
    if spec.n != params.n:
        raise DomainError(f"spec has n={spec.n} but params have n={params.n}")
    ex = _use_exact(params, exact)
    th = params.theta_exact if ex else params.theta_float
    hist: dict[int, object] = defaultdict(int)
    total = 0
    for lengths, count in _cycle_type_census(params.n).items():
        wgt = count * th ** len(lengths)
        hist[sum(spec.weight(L) for L in lengths)] += wgt
        total += wgt
    return _law_from_histogram({v: w / total for v, w in hist.items()}, "permutation census")


@dataclass(frozen=True)
class SeriesCoeffs:
    """Coefficients e_0..e_N of exp(sum_j p_j w^j).

    ``log_abs`` holds log|e_m|, ``sign`` the signs; ``values`` exponentiates.
    """

    log_abs: np.ndarray
    sign: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.sign * np.exp(self.log_abs)

    def __len__(self):
        return len(self.log_abs)


def exp_series(coeff_source: Mapping[int, float], N: int) -> SeriesCoeffs:
    """e_m = (1/m) sum_{k<=m} k p_k e_{m-k}, e_0 = 1.

    Every step is rescaled by its running maximum so large N cannot overflow.
    """
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    kp = np.zeros(N + 1)
    for j, pj in coeff_source.items():
        if 1 <= j <= N:
            kp[j] = j * float(pj)
    # e_m = mant[m] * 2**expo[m]; rescaling by powers of two is exact
    mant = np.zeros(N + 1)
    expo = np.zeros(N + 1, dtype=np.int64)
    mant[0] = 1.0
    for m in range(1, N + 1):
        prev = slice(m - 1, None, -1)  # e_{m-1}, ..., e_0
        top = int(expo[prev].max())
        acc = float(np.dot(kp[1:m + 1], np.ldexp(mant[prev], expo[prev] - top))) / m
        mant[m], ex = math.frexp(acc)
        expo[m] = top + ex
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(mant)) + expo * math.log(2.0)
    return SeriesCoeffs(log_abs, np.sign(mant))


def _short_cycle_terms(params: EwensParams, r: int):
    """(P(T_0r = l) for l <= n, P(T_0r > n), log of nu/Poisson ratio per l)."""
    n, th = params.n, params.theta_float
    harm = math.fsum(1.0 / j for j in range(1, r + 1))
    short = exp_series({j: th / j for j in range(1, r + 1)}, n)
    p_t = np.exp(short.log_abs - th * harm) * short.sign
    rest = exp_series({j: th / j for j in range(r + 1, n + 1)}, n)
    log_norm = gammaln(n + 1) - params.log_rising[n]
    # nu_n(k_1..k_r = s) / prod Poisson(s) depends on l = sum j s_j only
    log_ratio = log_norm + rest.log_abs[::-1] + th * harm
    return p_t, max(0.0, 1.0 - math.fsum(p_t)), log_ratio


def exact_tv_short_cycles(params: EwensParams, r: int, method: str = "aggregate") -> float:
    """TV distance between (k_1..k_r) under the Ewens measure and independent
    Poisson(theta/j) variables.

    ``aggregate`` groups states by l = sum j s_j (exact, O(n^2)); ``enumerate``
    walks every state with l <= n and marginalizes the ESF over all
    partitions (small n only, used as an independent check).
    """
    n = params.n
    if not 1 <= r <= n:
        raise DomainError(f"r must lie in [1, {n}], got {r!r}")
    if method == "aggregate":
        p_t, beyond, log_ratio = _short_cycle_terms(params, r)
        ratio = np.exp(log_ratio)
        return 0.5 * math.fsum(p_t * np.abs(ratio - 1.0)) + 0.5 * beyond
    if method == "enumerate":
        return _tv_by_enumeration(params, r)
    raise DomainError(f"unknown method {method!r}")


def _tv_by_enumeration(params: EwensParams, r: int) -> float:
    n, th = params.n, params.theta_float
    if n > EXACT_LAW_MAX_N:
        raise ResourceError(f"enumeration needs n <= {EXACT_LAW_MAX_N}, got {n}")
    nu: dict[tuple, float] = defaultdict(float)
    for s in PartitionIterator(n):
        nu[tuple(s.count(j) for j in range(1, r + 1))] += esf_probability(params, s)
    states = 0
    tv = 0.0
    covered = 0.0

    def walk(j, budget, prefix, logp):
        nonlocal states, tv, covered
        if j > r:
            states += 1
            if states > TV_ENUM_MAX_STATES:
                raise ResourceError(f"more than {TV_ENUM_MAX_STATES} short-cycle states")
            p = math.exp(logp)
            covered += p
            tv += abs(nu.get(prefix, 0.0) - p)
            return
        lam = th / j
        for s in range(budget // j + 1):
            walk(j + 1, budget - s * j, prefix + (s,),
                 logp - lam + s * math.log(lam) - math.lgamma(s + 1))

    walk(1, n, (), 0.0)
    # Poisson mass on states with l > n, where nu vanishes
    return 0.5 * (tv + max(0.0, 1.0 - covered))


@lru_cache(maxsize=None)
def _scaled_falling_coeffs(a: int, k: int) -> tuple:
    """c_t with (a x)_(k) = sum_t c_t x_(t), t = 0..k.

    From (1+z)^(a x) = sum_t C(x, t) ((1+z)^a - 1)^t: c_t = k!/t! [z^k] ((1+z)^a - 1)^t.
    For a >= 0 every c_t is a nonnegative integer.
    """
    base = [0] + [math.comb(a, i) if a >= 0 else _gen_binom(a, i) for i in range(1, k + 1)]
    out = [1 if k == 0 else 0]
    power = [1] + [0] * k
    for t in range(1, k + 1):
        nxt = [0] * (k + 1)
        for i, c in enumerate(power):
            if c:
                for j in range(1, k + 1 - i):
                    nxt[i + j] += c * base[j]
        power = nxt
        out.append(math.factorial(k) * power[k] // math.factorial(t))
    return tuple(out)


def _gen_binom(a: int, i: int) -> int:
    return math.prod(a - r for r in range(i)) // math.factorial(i)


def watterson_composed_moment(params: EwensParams, spec: AdditiveSpec, k: int,
                              exact: bool | None = None):
    """E h_(k) assembled from Watterson's joint factorial moments.

    (sum_j a_j k_j)_(k) splits by the multivariate Vandermonde identity into
    products of (a_j k_j)_(k_j), and each of those is a combination of
    (k_j)_(t).  With nonnegative weights all coefficients are nonnegative, so
    the float result carries no cancellation.  Only practical for small supports.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    ex = _use_exact(params, exact)
    support = spec.support()
    if len(support) > 12:
        raise ResourceError(f"support of size {len(support)} is too large to expand")
    zero = Fraction(0) if ex else 0.0
    total = zero
    for split in _compositions_into(k, len(support)):
        multinom = math.factorial(k) // math.prod(math.factorial(e) for e in split)
        options = [[(t, c) for t, c in enumerate(_scaled_falling_coeffs(spec.weight(j), e)) if c]
                   for j, e in zip(support, split)]
        for choice in itertools.product(*options):
            multi = [(j, t) for j, (t, _) in zip(support, choice) if t]
            if sum(j * t for j, t in multi) > params.n:
                continue
            coef = multinom * math.prod(c for _, c in choice)
            total += coef * (watterson_moment(params, multi, exact=ex) if multi else 1)
    return total


def _compositions_into(p: int, parts: int):
    """Tuples of ``parts`` nonnegative integers summing to p."""
    if parts == 0:
        if p == 0:
            yield ()
        return
    if parts == 1:
        yield (p,)
        return
    for first in range(p + 1):
        for rest in _compositions_into(p - first, parts - 1):
            yield (first, *rest)


def law_factorial_moment(law: DiscreteLaw, k: int):
    """sum_v P(v) v_(k) for an enumerated law."""
    return sum(p * falling_factorial(v, k) for v, p in law.mass_dict().items())
