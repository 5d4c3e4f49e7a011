"""Factorial moments of additive functions under the Ewens measure.

Two evaluation routes are provided:

* the exact moments gamma_n(k) = E_n h(sigma)_(k) from the beta recurrence
  (float or exact rational arithmetic), and
* the approximating functionals Upsilon_n(l, m) and upsilon_n(l), built from
  composition vectors c_k[J] with c_0 = delta_0 and
  c_k = theta * sum_r C(k-1, r-1) (v_r * c_{k-r}), v_r[j] = a_j(r) / j.

Both reduce to truncated convolutions, done directly for small sizes and by
FFT for large ones (see :func:`ewens_moments.backend.causal_convolve`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Integral

import numpy as np

from . import backend
from .core import (
    AdditiveSpec,
    EwensParams,
    falling_factorial,
    psi_exact,
    truncate_weights,
)
from .errors import DomainError, ValidationError

__all__ = [
    "Provenance",
    "FactorialMomentVector",
    "BetaTable",
    "build_beta_table",
    "gamma_zero",
    "exact_factorial_moment",
    "exact_factorial_moments",
    "composition_factorial_moments",
    "watterson_moment",
    "upsilon_vector",
    "upsilon_truncated",
    "upsilon_restricted",
    "approx_error_bound",
    "concentration_D",
    "concentration_D_min",
    "MAX_UPSILON_ORDER",
]

MAX_UPSILON_ORDER = 12


class Provenance(str, Enum):
    EXACT_RECURRENCE = "exact-recurrence"
    WATTERSON = "watterson"
    TRUNCATED_UPSILON = "truncated-upsilon"
    MONTE_CARLO = "monte-carlo"
    TARGET_LAW = "target-law"


@dataclass(frozen=True)
class FactorialMomentVector:
    """Factorial moments Upsilon(1..L), indexed from 1.

    ``errors`` holds standard errors for Monte Carlo estimates.
    """

    values: tuple
    provenance: Provenance
    errors: tuple | None = None

    def __post_init__(self):
        values = tuple(self.values)
        if not values:
            raise ValidationError("a factorial moment vector needs order L >= 1")
        if not all(math.isfinite(float(v)) for v in values):
            raise ValidationError(f"non-finite factorial moment in {values}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        if self.errors is not None:
            object.__setattr__(self, "errors", tuple(self.errors))

    @property
    def order(self) -> int:
        return len(self.values)

    def __getitem__(self, l: int):
        if not 1 <= l <= self.order:
            raise IndexError(f"order {l} outside 1..{self.order}")
        return self.values[l - 1]

    def __len__(self):
        return self.order

    def with_zero(self) -> list:
        """[1, Upsilon(1), ..., Upsilon(L)]."""
        return [1, *self.values]

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


def gamma_zero() -> int:
    """gamma_n(0) = E h_(0) = 1 by convention."""
    return 1


def _check_order(k, name="k") -> int:
    if isinstance(k, bool) or not isinstance(k, Integral) or k < 1:
        raise DomainError(f"{name} must be a positive integer, got {k!r}")
    return int(k)


def _falling_vectors(spec: AdditiveSpec, K: int, length: int, exact: bool = False):
    """v_r[j] = a_j(r) / j for r = 1..K, as arrays of ``length`` (index = j)."""
    out = {}
    for r in range(1, K + 1):
        if exact:
            v = [Fraction(0)] * length
            for j, a in spec.weights.items():
                if j < length:
                    v[j] = Fraction(falling_factorial(a, r), j)
        else:
            v = np.zeros(length)
            for j, a in spec.weights.items():
                if j < length:
                    v[j] = falling_factorial(a, r) / j
        out[r] = v
    return out


@dataclass(frozen=True)
class BetaTable:
    """Table of beta_m(k) for 0 <= m <= n, 0 <= k <= K.

    Float tables store ``scaled[k, m] = beta_m(k) * n!/theta^(n)``; the
    scaling keeps entries near O(1) (``scaled[0, m] = psi_n(m)``) so
    ``gamma_n(k) = scaled[k, n]``.  Exact tables store Fractions unscaled.
    """

    params: EwensParams
    order: int
    scaled: np.ndarray | None = None
    exact_entries: tuple | None = None

    @property
    def exact(self) -> bool:
        return self.exact_entries is not None

    @property
    def log_scale(self) -> float:
        """log(n!/theta^(n))."""
        n = self.params.n
        return math.lgamma(n + 1) - float(self.params.log_rising[n])

    def beta(self, m: int, k: int):
        if self.exact:
            return self.exact_entries[k][m]
        return math.exp(self.log_abs_beta(m, k)) * self.sign(m, k)

    def log_abs_beta(self, m: int, k: int) -> float:
        if self.exact:
            v = self.exact_entries[k][m]
            return math.log(abs(v)) if v else -math.inf
        v = self.scaled[k, m]
        return math.log(abs(v)) - self.log_scale if v else -math.inf

    def sign(self, m: int, k: int) -> int:
        v = self.exact_entries[k][m] if self.exact else self.scaled[k, m]
        return int(v > 0) - int(v < 0)

    def gamma(self, k: int):
        if self.exact:
            return self.exact_entries[k][-1] / self.exact_entries[0][-1]
        return float(self.scaled[k, -1])


def build_beta_table(params: EwensParams, spec: AdditiveSpec, K: int,
                     exact: bool = False, method: str = "auto") -> BetaTable:
    """Run the beta recurrence up to order K for every degree m <= n.

    beta_m(k) = theta sum_{r=1}^{k} C(k-1, r-1) sum_{j<=m} a_j(r)/j beta_{m-j}(k-r),
    with beta_m(0) = theta^(m)/m! (the r = k term is the recurrence's last sum).
    Negative weights are allowed; their falling factorials alternate in sign.
    """
    K = _check_order(K, "K")
    if spec.n != params.n:
        raise DomainError(f"spec has n={spec.n} but params have n={params.n}")
    n = params.n
    if exact:
        th = params.theta_exact
        v = _falling_vectors(spec, K, n + 1, exact=True)
        base = [Fraction(1)]
        for m in range(1, n + 1):
            base.append(base[-1] * (th + m - 1) / m)
        rows = [base]
        for k in range(1, K + 1):
            row = [Fraction(0)] * (n + 1)
            for m in range(1, n + 1):
                acc = Fraction(0)
                for r in range(1, k + 1):
                    vr, prev = v[r], rows[k - r]
                    inner = sum((vr[j] * prev[m - j] for j in range(1, m + 1) if vr[j]),
                                Fraction(0))
                    acc += math.comb(k - 1, r - 1) * inner
                row[m] = th * acc
            rows.append(row)
        return BetaTable(params, K, exact_entries=tuple(tuple(r) for r in rows))

    th = params.theta_float
    v = _falling_vectors(spec, K, n + 1)
    table = np.zeros((K + 1, n + 1))
    table[0] = np.exp(params.log_psi)
    for k in range(1, K + 1):
        acc = np.zeros(n + 1)
        for r in range(1, k + 1):
            if not v[r].any():
                continue
            acc += math.comb(k - 1, r - 1) * backend.causal_convolve(v[r], table[k - r], n + 1,
                                                                    method=method)
        table[k] = th * acc
    table.setflags(write=False)
    return BetaTable(params, K, scaled=table)


def exact_factorial_moments(params: EwensParams, spec: AdditiveSpec, K: int,
                            exact: bool = False, method: str = "auto") -> FactorialMomentVector:
    table = build_beta_table(params, spec, K, exact=exact, method=method)
    return FactorialMomentVector(tuple(table.gamma(k) for k in range(1, K + 1)),
                                 Provenance.EXACT_RECURRENCE)


def exact_factorial_moment(params: EwensParams, spec: AdditiveSpec, k: int,
                           exact: bool = False, method: str = "auto"):
    """gamma_n(k) = E_n h(sigma)_(k) via the beta recurrence."""
    if k == 0:
        raise DomainError("order k must be >= 1; gamma_n(0) = 1 is given by gamma_zero()")
    k = _check_order(k)
    return build_beta_table(params, spec, k, exact=exact, method=method).gamma(k)


def _composition_vectors(theta, v: dict, K: int, length: int, m: int | None,
                         method: str = "auto") -> list[np.ndarray]:
    c = [np.zeros(length)]
    c[0][0] = 1.0
    for k in range(1, K + 1):
        acc = np.zeros(length)
        for r in range(1, k + 1):
            if m is not None and r > m:
                break
            if not v[r].any():
                continue
            acc += math.comb(k - 1, r - 1) * backend.causal_convolve(v[r], c[k - r], length,
                                                                    method=method)
        c.append(theta * acc)
    return c


def composition_factorial_moments(params: EwensParams, spec: AdditiveSpec, K: int,
                                  method: str = "auto") -> FactorialMomentVector:
    """gamma_n(k) from the closed composition sum with psi_n(n - J) weights.

    A second route to :func:`exact_factorial_moments`, sharing only the
    convolution primitive.
    """
    K = _check_order(K, "K")
    n = params.n
    v = _falling_vectors(spec, K, n + 1)
    c = _composition_vectors(params.theta_float, v, K, n + 1, None, method)
    weight = np.exp(params.log_psi[::-1])  # psi_n(n - J), J = 0..n
    return FactorialMomentVector(tuple(float(c[k] @ weight) for k in range(1, K + 1)),
                                 Provenance.EXACT_RECURRENCE)


def watterson_moment(params: EwensParams, multi, exact: bool = False):
    """Joint factorial moment E_n prod_i k_i(sigma)_(j_i).

    ``multi`` is a list of ``(cycle length i, order j_i)`` pairs with distinct i.
    """
    seen = set()
    ell = 0
    for i, j in multi:
        if i in seen:
            raise DomainError(f"cycle length {i} repeated")
        if not 1 <= i <= params.n:
            raise DomainError(f"cycle length {i} outside 1..{params.n}")
        if j < 1:
            raise DomainError(f"order for cycle length {i} must be >= 1, got {j}")
        seen.add(i)
        ell += i * j
    if ell > params.n:
        return Fraction(0) if exact else 0.0
    if exact:
        th = params.theta_exact
        out = psi_exact(params, params.n - ell)
        for i, j in multi:
            out *= (th / i) ** j
        return out
    th = params.theta_float
    logv = params.log_psi[params.n - ell] + sum(j * math.log(th / i) for i, j in multi)
    return math.exp(logv)


def upsilon_vector(params: EwensParams, spec: AdditiveSpec, L: int, m: int | None = None,
                   method: str = "auto") -> FactorialMomentVector:
    """Upsilon_n(l, m) for l = 1..L.

    Weights are truncated at ``m`` (a_j(m) = min(a_j, m)), which also makes
    every part r_i <= m.  ``m=None`` uses the weights as given.
    """
    L = _check_order(L, "L")
    if L > MAX_UPSILON_ORDER:
        raise DomainError(f"orders above {MAX_UPSILON_ORDER} are not supported (got {L})")
    spec.require_nonnegative("Upsilon_n")
    if m is not None:
        spec = truncate_weights(spec, _check_order(m, "m"))
    n = params.n
    th = params.theta_float
    v = _falling_vectors(spec, L, n)
    c = _composition_vectors(th, v, L, n, m, method)
    J = np.arange(n, dtype=np.float64)
    weight = (1.0 - J / n) ** (th - 1.0)
    return FactorialMomentVector(tuple(float(c[l] @ weight) for l in range(1, L + 1)),
                                 Provenance.TRUNCATED_UPSILON)


def upsilon_truncated(params: EwensParams, spec: AdditiveSpec, l: int, m: int,
                      method: str = "auto") -> float:
    """Upsilon_n(l, m), the truncated approximation of the l-th factorial moment."""
    l = _check_order(l, "l")
    return upsilon_vector(params, spec, l, m, method)[l]


def upsilon_restricted(params: EwensParams, subset: AdditiveSpec, l: int,
                       method: str = "auto") -> float:
    """upsilon_n(l) for the number of cycles with lengths in a 0/1 subset."""
    subset.require_zero_one("upsilon_n")
    return upsilon_truncated(params, subset, l, 1, method)


def approx_error_bound(params: EwensParams, k: int, m: int | None = None,
                       constant: float = 1.0) -> float:
    """constant * (1 + log^k n) / n^min(1, theta).

    The hidden constant depends on the weight bound ``m`` and on ``k``; it is
    supplied by the caller (tests fit it once on exact small-n values).
    """
    n = params.n
    return constant * (1.0 + math.log(n) ** k) / n ** min(1.0, params.theta_float)


def concentration_D(spec: AdditiveSpec, u: float, lam: float) -> float:
    """D_n(u; lam) = sum_{j<=n} min(u^2, (a_j - lam j)^2) / j."""
    if not u > 0:
        raise DomainError(f"u must be positive, got {u!r}")
    j = np.arange(1, spec.n + 1, dtype=np.float64)
    a = spec.array[1:].astype(np.float64)
    return float(np.sum(np.minimum(u * u, (a - lam * j) ** 2) / j))


def concentration_D_min(spec: AdditiveSpec, u: float, max_candidates: int = 4096):
    """Approximate D_n(u) = min_lam D_n(u; lam) over a finite candidate set.

    Candidates: 0, integers |lam| <= max|a_j|, and the ratios a_j/j.  Returns
    ``(value, argmin)``.
    """
    if not u > 0:
        raise DomainError(f"u must be positive, got {u!r}")
    amax = max((abs(a) for a in spec.weights.values()), default=0)
    cands = {0.0}
    cands.update(float(x) for x in range(-amax, amax + 1))
    cands.update(a / j for j, a in spec.weights.items())
    cands = sorted(cands)
    if len(cands) > max_candidates:
        keep = np.linspace(0, len(cands) - 1, max_candidates).round().astype(int)
        cands = sorted({0.0, *(cands[i] for i in keep)})
    best = min(cands, key=lambda lam: (concentration_D(spec, u, lam), abs(lam)))
    return concentration_D(spec, u, best), best
