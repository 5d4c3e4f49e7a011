"""Random Ewens permutations (as cycle structures) and Monte Carlo estimates.

Two samplers are available.  ``crp`` runs the sequential insertion process
in the compiled kernel (or its numpy fallback); draw ``d`` of a batch uses a
counter-based substream keyed by ``(seed, d)``, so results do not depend on
threading.  ``conditioned-poisson`` draws independent Poisson(theta/j)
vectors and keeps those with sum_j j xi_j = n.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from scipy import stats

from . import backend
from .core import AdditiveSpec, CycleStructure, EwensParams
from .errors import DomainError, ResourceError
from .moments import FactorialMomentVector, Provenance

__all__ = [
    "Method",
    "SampleBatch",
    "EmpiricalLaw",
    "sample_crp",
    "sample_conditioned_poisson",
    "sample",
    "empirical_law",
    "empirical_factorial_moments",
    "chi_square_gof",
    "chi_square_two_sample",
    "cycle_type_counts",
    "JACKKNIFE_BATCHES",
]

JACKKNIFE_BATCHES = 50
_POISSON_CELLS = 4_000_000  # proposal matrix entries per chunk
DEFAULT_MAX_REJECTS = 10 ** 8


class Method(str, Enum):
    CRP = "crp"
    CONDITIONED_POISSON = "conditioned-poisson"


def _check_count(count) -> int:
    if isinstance(count, bool) or not isinstance(count, (int, np.integer)) or count < 1:
        raise DomainError(f"count must be a positive integer, got {count!r}")
    return int(count)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """``count`` draws stored as concatenated cycle lengths.

    Draw ``d`` owns ``lengths[offsets[d]:offsets[d+1]]`` (decreasing).
    """

    params: EwensParams
    seed: int
    method: Method
    lengths: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.offsets) - 1

    def __len__(self):
        return self.count

    def draw(self, d: int) -> CycleStructure:
        seg = self.lengths[self.offsets[d]:self.offsets[d + 1]]
        return CycleStructure.from_lengths(seg.tolist())

    @cached_property
    def draws(self) -> list[CycleStructure]:
        return [self.draw(d) for d in range(self.count)]

    def additive_values(self, spec: AdditiveSpec) -> np.ndarray:
        if spec.n != self.params.n:
            raise DomainError(f"spec has n={spec.n} but the batch has n={self.params.n}")
        per_cycle = spec.array[self.lengths]
        return np.add.reduceat(per_cycle, self.offsets[:-1]).astype(np.int64)

    def cycle_counts(self, j: int) -> np.ndarray:
        """k_j for every draw."""
        hit = (self.lengths == j).astype(np.int64)
        return np.add.reduceat(hit, self.offsets[:-1])

    def __eq__(self, other):
        if not isinstance(other, SampleBatch):
            return NotImplemented
        return (self.params == other.params and self.seed == other.seed
                and self.method == other.method
                and np.array_equal(self.lengths, other.lengths)
                and np.array_equal(self.offsets, other.offsets))


def sample_crp(params: EwensParams, count: int, seed: int, threads: int | None = None,
               backend_name: str | None = None) -> SampleBatch:
    """Chinese restaurant process: element i+1 opens a new cycle with
    probability theta/(theta+i), otherwise it follows a uniform earlier element."""
    count = _check_count(count)
    lengths, offsets = backend.crp_cycle_lengths(params.n, params.theta_float, int(seed), count,
                                                 threads=threads, backend=backend_name)
    return SampleBatch(params, int(seed), Method.CRP, lengths, offsets)


def sample_conditioned_poisson(params: EwensParams, count: int, seed: int,
                               max_rejects: int | None = DEFAULT_MAX_REJECTS) -> SampleBatch:
    """Rejection sampling of xi_j ~ Poisson(theta/j), j <= n, given sum j xi_j = n.

    Proposals come in fixed chunks; chunk c uses a Philox stream seeded by
    ``(seed, c)``.
    """
    count = _check_count(count)
    n = params.n
    lam = params.theta_float / np.arange(1, n + 1)
    jj = np.arange(1, n + 1)
    rows = max(1, _POISSON_CELLS // n)
    accepted = []
    have = 0
    proposals = 0
    chunk = 0
    limit = math.inf if max_rejects is None else max_rejects
    while have < count:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1),
                                                                          chunk])))
        xi = rng.poisson(lam, size=(rows, n))
        ok = xi[(xi @ jj) == n]
        take = ok[:count - have]
        accepted.append(take)
        have += len(take)
        proposals += rows
        chunk += 1
        if proposals - have > limit and have < count:
            rate = have / proposals
            raise ResourceError(
                f"rejection budget {max_rejects} exhausted after {proposals} proposals; "
                f"acceptance rate estimate {rate:.3g} (accepted {have} of {count})")
    xi = np.concatenate(accepted)
    # cycle lengths in decreasing order, per accepted draw
    rev = xi[:, ::-1]
    per_draw = rev.sum(axis=1)
    lengths = np.repeat(np.tile(jj[::-1], len(xi)), rev.ravel()).astype(np.int64)
    offsets = np.concatenate(([0], np.cumsum(per_draw))).astype(np.int64)
    return SampleBatch(params, int(seed), Method.CONDITIONED_POISSON, lengths, offsets)


def sample(params: EwensParams, count: int, seed: int, method: str = "crp", **kw) -> SampleBatch:
    method = Method(method)
    if method is Method.CRP:
        return sample_crp(params, count, seed, **kw)
    return sample_conditioned_poisson(params, count, seed, **kw)


@dataclass(frozen=True, eq=False)
class EmpiricalLaw:
    """Histogram of an integer statistic; ``values`` keeps draw order when known."""

    counts: dict
    total: int
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise DomainError("frequencies do not sum to the total")

    @classmethod
    def from_values(cls, values) -> "EmpiricalLaw":
        values = np.asarray(values, dtype=np.int64)
        uniq, freq = np.unique(values, return_counts=True)
        return cls({int(v): int(f) for v, f in zip(uniq, freq)}, int(len(values)), values)

    tail = 0.0

    def mass_dict(self) -> dict:
        return {v: f / self.total for v, f in self.counts.items()}

    def frequency(self, v: int) -> int:
        return self.counts.get(v, 0)

    def mean(self) -> float:
        return sum(v * f for v, f in self.counts.items()) / self.total


def empirical_law(batch: SampleBatch, spec: AdditiveSpec) -> EmpiricalLaw:
    return EmpiricalLaw.from_values(batch.additive_values(spec))


def _falling_array(x: np.ndarray, l: int) -> np.ndarray:
    out = np.ones(len(x), dtype=np.float64)
    xf = x.astype(np.float64)
    for t in range(l):
        out *= xf - t
    return out


def empirical_factorial_moments(law: EmpiricalLaw, L: int,
                                batches: int = JACKKNIFE_BATCHES) -> FactorialMomentVector:
    """Sample factorial moments with batch-mean jackknife standard errors."""
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    if law.values is not None:
        vals = law.values
    else:
        vals = np.repeat(np.array(list(law.counts), dtype=np.int64),
                         np.array(list(law.counts.values()), dtype=np.int64))
    N = len(vals)
    B = max(1, min(batches, N))
    edges = np.linspace(0, N, B + 1).astype(int)
    est, err = [], []
    for l in range(1, L + 1):
        f = _falling_array(vals, l)
        total = math.fsum(f)
        est.append(total / N)
        if B < 2:
            err.append(0.0)
            continue
        sums = np.add.reduceat(f, edges[:-1])
        sizes = np.diff(edges)
        loo = (total - sums) / (N - sizes)
        err.append(float(np.sqrt((B - 1) / B * np.sum((loo - loo.mean()) ** 2))))
    return FactorialMomentVector(tuple(est), Provenance.MONTE_CARLO, tuple(err))


def _pool(observed: np.ndarray, expected: np.ndarray, min_expected: float):
    # merge cells from the smallest expected count upward until all are >= min_expected
    order = np.argsort(expected)
    obs_out, exp_out = [], []
    o_acc = e_acc = 0.0
    for i in order:
        o_acc += observed[i]
        e_acc += expected[i]
        if e_acc >= min_expected:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_out:
            obs_out[-1] += o_acc
            exp_out[-1] += e_acc
        else:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
    return np.array(obs_out), np.array(exp_out)


def chi_square_gof(observed: dict, probabilities: dict, min_expected: float = 5.0):
    """Pearson chi-square of observed counts against a probability map.

    Cells with small expectation are pooled.  Returns ``(statistic, p_value, dof)``.
    """
    keys = sorted(set(observed) | set(probabilities))
    total = sum(observed.values())
    obs = np.array([observed.get(k, 0) for k in keys], dtype=float)
    exp = np.array([float(probabilities.get(k, 0)) * total for k in keys])
    if obs[exp == 0].sum() > 0:
        return math.inf, 0.0, len(keys) - 1
    obs, exp = _pool(obs[exp > 0], exp[exp > 0], min_expected)
    exp *= obs.sum() / exp.sum()
    if len(obs) < 2:
        return 0.0, 1.0, 0
    stat, p = stats.chisquare(obs, exp)
    return float(stat), float(p), len(obs) - 1


def chi_square_two_sample(a: dict, b: dict, min_expected: float = 5.0):
    """Chi-square homogeneity test of two count maps; ``(statistic, p_value, dof)``."""
    keys = sorted(set(a) | set(b))
    table = np.array([[a.get(k, 0) for k in keys], [b.get(k, 0) for k in keys]], dtype=float)
    # pool rare categories by pooled expected count
    pooled_exp = table.sum(axis=0) * min(table.sum(axis=1)) / table.sum()
    order = np.argsort(pooled_exp)
    cols, acc, acc_e = [], np.zeros(2), 0.0
    for i in order:
        acc = acc + table[:, i]
        acc_e += pooled_exp[i]
        if acc_e >= min_expected:
            cols.append(acc)
            acc, acc_e = np.zeros(2), 0.0
    if acc.sum() > 0:
        if cols:
            cols[-1] = cols[-1] + acc
        else:
            cols.append(acc)
    if len(cols) < 2:
        return 0.0, 1.0, 0
    stat, p, dof, _ = stats.chi2_contingency(np.array(cols).T, correction=False)
    return float(stat), float(p), int(dof)


def cycle_type_counts(batch: SampleBatch) -> Counter:
    """Frequency of each cycle type, keyed by the tuple of decreasing lengths."""
    out: Counter = Counter()
    L, off = batch.lengths, batch.offsets
    for d in range(batch.count):
        out[tuple(L[off[d]:off[d + 1]].tolist())] += 1
    return out
