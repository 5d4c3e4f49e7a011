"""Ewens parameters, cycle structures, additive weight arrays and the ESF.

Probabilities are evaluated in log space and exponentiated only on return.
Every evaluator also has an exact path (``exact=True``) that works with
:class:`fractions.Fraction` and is meant for small ``n``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Integral, Rational, Real
from typing import Iterable, Mapping

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ValidationError

__all__ = [
    "EwensParams",
    "CycleStructure",
    "AdditiveSpec",
    "falling_factorial",
    "rising_factorial_log",
    "rising_factorial_exact",
    "psi",
    "psi_exact",
    "esf_probability",
    "esf_log_probability",
    "additive_value",
    "truncate_weights",
    "to_fraction",
]


def to_fraction(x) -> Fraction:
    """Exact rational value of ``x``.

    Strings go through ``Fraction(str)`` so ``"1/3"`` and ``"0.3333333"`` are
    read as written; floats keep their exact binary value.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot read {x!r} as a rational number") from exc
    if isinstance(x, Integral):
        return Fraction(int(x))
    if isinstance(x, Real):
        if not math.isfinite(float(x)):
            raise DomainError(f"non-finite value {x!r}")
        return Fraction(float(x))
    raise DomainError(f"cannot read {x!r} as a rational number")


def falling_factorial(x, r: int):
    """x_(r) = x (x-1) ... (x-r+1), with x_(0) = 1."""
    out = 1
    for i in range(r):
        out *= x - i
    return out


@dataclass(frozen=True)
class EwensParams:
    """Degree ``n`` and Ewens parameter ``theta``.

    ``theta`` may be an int, float or Fraction; the exact code paths use
    ``Fraction(theta)``.
    """

    n: int
    theta: Real

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, Integral):
            raise DomainError(f"n must be an integer, got {self.n!r}")
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        try:
            ok = float(self.theta) > 0 and math.isfinite(float(self.theta))
        except (TypeError, ValueError):
            ok = False
        if not ok:
            raise DomainError(f"theta must be a positive real, got {self.theta!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def theta_float(self) -> float:
        return float(self.theta)

    @cached_property
    def theta_exact(self) -> Fraction:
        return to_fraction(self.theta)

    @cached_property
    def log_rising(self) -> np.ndarray:
        """log theta^(m) for m = 0..n (n+1 entries)."""
        th = self.theta_float
        m = np.arange(self.n + 1, dtype=np.float64)
        out = gammaln(th + m) - gammaln(th)
        out[0] = 0.0
        return out

    @cached_property
    def log_psi(self) -> np.ndarray:
        """log psi_n(m) for m = 0..n via the product form.

        Summing log1p((theta-1)/k) from the top keeps the terms small, which
        is much more accurate than differencing log-gamma values at large n.
        """
        n = self.n
        k = np.arange(1, n + 1, dtype=np.float64)
        terms = np.log1p((self.theta_float - 1.0) / k)
        # log psi(m) = -sum_{k=m+1}^n terms[k-1]
        suffix = np.concatenate((np.cumsum(terms[::-1])[::-1], [0.0]))
        return -suffix

    def check_m(self, m) -> int:
        if isinstance(m, bool) or not isinstance(m, Integral) or not 0 <= m <= self.n:
            raise DomainError(f"m must be an integer in [0, {self.n}], got {m!r}")
        return int(m)


def rising_factorial_log(params: EwensParams, m: int) -> float:
    """log theta^(m); theta^(0) = 1."""
    return float(params.log_rising[params.check_m(m)])


def rising_factorial_exact(theta, m: int) -> Fraction:
    th = to_fraction(theta)
    out = Fraction(1)
    for i in range(m):
        out *= th + i
    return out


def psi(params: EwensParams, m: int) -> float:
    """psi_n(m) = (n!/theta^(n)) (theta^(m)/m!)."""
    m = params.check_m(m)
    if m == params.n:
        return 1.0
    return math.exp(params.log_psi[m])


def psi_exact(params: EwensParams, m: int) -> Fraction:
    m = params.check_m(m)
    th = params.theta_exact
    out = Fraction(1)
    for k in range(m + 1, params.n + 1):
        out *= Fraction(k) / (k + th - 1)
    return out


class CycleStructure:
    """Cycle-type vector (s_1, ..., s_n) with sum_j j s_j = n.

    Stored sparsely as sorted ``(j, s_j)`` pairs with ``s_j > 0``.
    """

    __slots__ = ("n", "parts", "_hash")

    def __init__(self, n: int, parts: Iterable[tuple[int, int]]):
        merged: dict[int, int] = {}
        for j, c in parts:
            j, c = int(j), int(c)
            if j < 1 or c < 0:
                raise ValidationError(f"invalid cycle entry (length={j}, count={c})")
            if c:
                merged[j] = merged.get(j, 0) + c
        total = sum(j * c for j, c in merged.items())
        if total != n:
            raise ValidationError(f"cycle lengths sum to {total}, expected n={n}")
        self.n = int(n)
        self.parts = tuple(sorted(merged.items()))
        self._hash = hash((self.n, self.parts))

    def __setattr__(self, name, value):
        if hasattr(self, "_hash"):
            raise AttributeError("CycleStructure is immutable")
        super().__setattr__(name, value)

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> "CycleStructure":
        """Dense vector (s_1, ..., s_n)."""
        counts = [int(c) for c in counts]
        if any(c < 0 for c in counts):
            raise ValidationError("cycle counts must be nonnegative")
        n = sum((j + 1) * c for j, c in enumerate(counts))
        if n != len(counts):
            raise ValidationError(
                f"sum of j*s_j is {n} but the vector has length {len(counts)}"
            )
        return cls(n, ((j + 1, c) for j, c in enumerate(counts) if c))

    @classmethod
    def from_lengths(cls, lengths: Iterable[int]) -> "CycleStructure":
        lengths = [int(x) for x in lengths]
        parts: dict[int, int] = {}
        for x in lengths:
            parts[x] = parts.get(x, 0) + 1
        return cls(sum(lengths), parts.items())

    @classmethod
    def from_permutation(cls, perm) -> "CycleStructure":
        """Cycle type of a permutation given as an image list on 0..n-1."""
        n = len(perm)
        seen = bytearray(n)
        lengths = []
        for start in range(n):
            if seen[start]:
                continue
            length = 0
            i = start
            while not seen[i]:
                seen[i] = 1
                i = perm[i]
                length += 1
            lengths.append(length)
        return cls.from_lengths(lengths)

    @property
    def counts(self) -> tuple[int, ...]:
        dense = [0] * self.n
        for j, c in self.parts:
            dense[j - 1] = c
        return tuple(dense)

    def count(self, j: int) -> int:
        for jj, c in self.parts:
            if jj == j:
                return c
        return 0

    @property
    def num_cycles(self) -> int:
        """w(sigma), the total number of cycles."""
        return sum(c for _, c in self.parts)

    def lengths(self) -> list[int]:
        return [j for j, c in reversed(self.parts) for _ in range(c)]

    def __eq__(self, other):
        if not isinstance(other, CycleStructure):
            return NotImplemented
        return self.n == other.n and self.parts == other.parts

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{j}^{c}" for j, c in self.parts)
        return f"CycleStructure(n={self.n}: {body})"


@dataclass(frozen=True)
class AdditiveSpec:
    """Integer weights a_j, 1 <= j <= n, defining h(sigma) = sum_j a_j k_j(sigma).

    Unspecified weights are 0.  ``description`` carries optional symbolic
    provenance (interval unions, construction parameters).
    """

    n: int
    weights: Mapping[int, int] = field(default_factory=dict)
    description: Mapping | None = None

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, Integral) or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        clean: dict[int, int] = {}
        for j, a in dict(self.weights).items():
            if isinstance(j, bool) or not isinstance(j, Integral):
                raise ValidationError(f"weight index {j!r} is not an integer")
            if not 1 <= j <= self.n:
                raise ValidationError(f"weight index {j} outside 1..{self.n}")
            if isinstance(a, bool) or not isinstance(a, Integral):
                if isinstance(a, Real) and float(a).is_integer():
                    a = int(a)
                else:
                    raise ValidationError(f"weight a_{j}={a!r} is not an integer")
            if a:
                clean[int(j)] = int(a)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, n: int) -> "AdditiveSpec":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, value: int = 1) -> "AdditiveSpec":
        return cls(n, {j: value for j in range(1, n + 1)})

    @classmethod
    def from_array(cls, values, description=None) -> "AdditiveSpec":
        """From a sequence (a_1, ..., a_n)."""
        values = list(values)
        return cls(len(values), {j + 1: a for j, a in enumerate(values)}, description)

    @classmethod
    def indicator(cls, n: int, js: Iterable[int], description=None) -> "AdditiveSpec":
        return cls(n, {int(j): 1 for j in js}, description)

    @classmethod
    def from_intervals(cls, n: int, intervals, description=None) -> "AdditiveSpec":
        """Weights constant on fractional intervals (lo*n, hi*n].

        An interval covers the integers ``floor(lo*n) < j <= floor(hi*n)``.
        Endpoints are read exactly (see :func:`to_fraction`), so pass
        ``"1/3"`` rather than ``0.333...`` when the boundary matters.
        """
        weights: dict[int, int] = {}
        resolved = []
        for k, iv in enumerate(intervals):
            try:
                lo, hi, value = iv["lo"], iv["hi"], iv.get("value", 1)
            except (KeyError, TypeError) as exc:
                raise ValidationError(
                    f"intervals[{k}]: expected an object with 'lo', 'hi', 'value'"
                ) from exc
            lo_q, hi_q = to_fraction(lo), to_fraction(hi)
            if not 0 <= lo_q < hi_q:
                raise ValidationError(f"intervals[{k}]: need 0 <= lo < hi, got ({lo}, {hi})")
            if isinstance(value, bool) or not isinstance(value, Integral):
                raise ValidationError(f"intervals[{k}].value={value!r} is not an integer")
            j0 = math.floor(lo_q * n) + 1
            j1 = min(math.floor(hi_q * n), n)
            for j in range(j0, j1 + 1):
                if j in weights:
                    raise ValidationError(f"intervals[{k}] overlaps another interval at j={j}")
                weights[j] = int(value)
            resolved.append({"lo": str(lo_q), "hi": str(hi_q), "value": int(value),
                             "j_range": [j0, j1]})
        desc = {"intervals": resolved}
        if description:
            desc.update(description)
        return cls(n, weights, desc)

    @classmethod
    def from_json(cls, obj, n: int) -> "AdditiveSpec":
        """Parse ``{"explicit": {...}}`` or ``{"intervals": [...]}``."""
        if isinstance(obj, str):
            try:
                obj = json.loads(obj)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"spec: invalid JSON ({exc.msg} at pos {exc.pos})") from exc
        if not isinstance(obj, Mapping):
            raise ValidationError("spec: expected a JSON object")
        keys = set(obj) & {"explicit", "intervals", "constant"}
        if len(keys) != 1:
            raise ValidationError(
                "spec: exactly one of 'explicit', 'intervals' or 'constant' is required"
            )
        if "explicit" in obj:
            raw = obj["explicit"]
            if not isinstance(raw, Mapping):
                raise ValidationError("spec.explicit: expected an object mapping j -> a_j")
            weights = {}
            for key, a in raw.items():
                try:
                    j = int(key)
                except (TypeError, ValueError) as exc:
                    raise ValidationError(f"spec.explicit: key {key!r} is not an integer") from exc
                if isinstance(a, bool) or not isinstance(a, int):
                    raise ValidationError(f"spec.explicit[{key!r}]: value {a!r} is not an integer")
                if not 1 <= j <= n:
                    raise ValidationError(f"spec.explicit: index {j} outside 1..{n}")
                weights[j] = a
            return cls(n, weights)
        if "constant" in obj:
            value = obj["constant"]
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(f"spec.constant: value {value!r} is not an integer")
            return cls.constant(n, value)
        ivs = obj["intervals"]
        if not isinstance(ivs, list):
            raise ValidationError("spec.intervals: expected a list")
        return cls.from_intervals(n, ivs)

    def to_json(self) -> dict:
        out = {"n": self.n, "explicit": {str(j): a for j, a in self.weights.items()}}
        if self.description:
            out["description"] = self.description
        return out

    # -- views --------------------------------------------------------
    def weight(self, j: int) -> int:
        return self.weights.get(j, 0)

    @cached_property
    def array(self) -> np.ndarray:
        """Dense int64 array of length n+1; entry 0 is unused and zero."""
        out = np.zeros(self.n + 1, dtype=np.int64)
        for j, a in self.weights.items():
            out[j] = a
        out.setflags(write=False)
        return out

    def support(self) -> list[int]:
        return list(self.weights)

    @property
    def is_nonnegative(self) -> bool:
        return all(a >= 0 for a in self.weights.values())

    @property
    def is_zero_one(self) -> bool:
        return all(a == 1 for a in self.weights.values())

    @property
    def max_weight(self) -> int:
        return max(self.weights.values(), default=0)

    def require_nonnegative(self, what: str = "operation") -> None:
        bad = [j for j, a in self.weights.items() if a < 0]
        if bad:
            raise DomainError(f"{what} requires a_j >= 0; a_{bad[0]} = {self.weights[bad[0]]}")

    def require_zero_one(self, what: str = "operation") -> None:
        bad = [j for j, a in self.weights.items() if a != 1]
        if bad:
            raise DomainError(f"{what} requires 0/1 weights; a_{bad[0]} = {self.weights[bad[0]]}")

    def __hash__(self):
        return hash((self.n, tuple(self.weights.items())))

    def __eq__(self, other):
        if not isinstance(other, AdditiveSpec):
            return NotImplemented
        return self.n == other.n and self.weights == other.weights


def truncate_weights(spec: AdditiveSpec, m: int) -> AdditiveSpec:
    """Weights min(a_j, m), the truncated function h_n(sigma; m)."""
    if isinstance(m, bool) or not isinstance(m, Integral) or m < 1:
        raise DomainError(f"truncation level must be a positive integer, got {m!r}")
    spec.require_nonnegative("truncate_weights")
    return AdditiveSpec(spec.n, {j: min(a, m) for j, a in spec.weights.items()},
                        spec.description)


def _check_degree(params: EwensParams, s: CycleStructure) -> None:
    if s.n != params.n:
        raise ValidationError(f"cycle structure has l(s) = {s.n}, expected n = {params.n}")


def esf_log_probability(params: EwensParams, s: CycleStructure) -> float:
    _check_degree(params, s)
    n = params.n
    lt = math.log(params.theta_float)
    out = math.lgamma(n + 1) - params.log_rising[n]
    for j, c in s.parts:
        out += c * (lt - math.log(j)) - math.lgamma(c + 1)
    return float(out)


def esf_probability(params: EwensParams, s: CycleStructure, exact: bool = False):
    """Ewens sampling formula n!/theta^(n) prod_j (theta/j)^{s_j}/s_j!."""
    if not exact:
        return math.exp(esf_log_probability(params, s))
    _check_degree(params, s)
    th = params.theta_exact
    out = Fraction(math.factorial(params.n)) / rising_factorial_exact(th, params.n)
    for j, c in s.parts:
        out *= (th / j) ** c / math.factorial(c)
    return out


def additive_value(spec: AdditiveSpec, s: CycleStructure) -> int:
    """h(sigma) = sum_j a_j s_j."""
    if spec.n != s.n:
        raise DomainError(f"spec has n={spec.n} but the cycle structure has n={s.n}")
    return sum(spec.weights.get(j, 0) * c for j, c in s.parts)
