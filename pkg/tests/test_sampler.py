import math

import numpy as np
import pytest

from ewens_moments.core import AdditiveSpec, CycleStructure, EwensParams, esf_probability, psi
from ewens_moments.errors import DomainError, ResourceError
from ewens_moments.instances import build_lugo_interval
from ewens_moments.moments import Provenance, watterson_moment
from ewens_moments.oracle import PartitionIterator
from ewens_moments.sampler import (
    EmpiricalLaw,
    Method,
    chi_square_gof,
    chi_square_two_sample,
    cycle_type_counts,
    empirical_factorial_moments,
    empirical_law,
    sample,
    sample_conditioned_poisson,
    sample_crp,
)


def _type_probabilities(params):
    return {tuple(s.lengths()): esf_probability(params, s) for s in PartitionIterator(params.n)}


def test_crp_degree_one():
    batch = sample_crp(EwensParams(1, 3.0), 500, seed=1)
    assert all(d == CycleStructure.from_counts([1]) for d in batch.draws)


def test_crp_uniform_s2():
    N = 100_000
    batch = sample_crp(EwensParams(2, 1), N, seed=2)
    frac = float(np.mean(batch.cycle_counts(1) == 2))
    assert abs(frac - 0.5) <= 3 * math.sqrt(0.25 / N)


def test_crp_fixed_points_n50():
    p = EwensParams(50, 2)
    k1 = sample_crp(p, 100_000, seed=3).cycle_counts(1)
    se = k1.std(ddof=1) / math.sqrt(len(k1))
    assert abs(k1.mean() - 2 * psi(p, 49)) <= 3 * se


def test_draws_are_valid_cycle_structures():
    batch = sample_crp(EwensParams(37, 0.7), 300, seed=4)
    assert batch.count == len(batch) == 300
    sums = np.add.reduceat(batch.lengths, batch.offsets[:-1])
    assert np.all(sums == 37)
    for d in range(batch.count):
        seg = batch.lengths[batch.offsets[d]:batch.offsets[d + 1]]
        assert np.all(np.diff(seg) <= 0)


def test_conditioned_poisson_degree_one():
    batch = sample_conditioned_poisson(EwensParams(1, 1), 200, seed=5)
    assert set(cycle_type_counts(batch)) == {(1,)}


@pytest.mark.parametrize("n", range(2, 9))
def test_conditioned_poisson_types_within_three_se(n):
    p = EwensParams(n, 2)
    N = 10_000
    counts = cycle_type_counts(sample_conditioned_poisson(p, N, seed=100 + n))
    for key, prob in _type_probabilities(p).items():
        se = math.sqrt(prob * (1 - prob) / N)
        assert abs(counts.get(key, 0) / N - prob) <= 3 * se + 1e-12


def test_samplers_agree_n6():
    p = EwensParams(6, 1)
    a = cycle_type_counts(sample_crp(p, 50_000, seed=6))
    b = cycle_type_counts(sample_conditioned_poisson(p, 50_000, seed=7))
    _, pval, dof = chi_square_two_sample(a, b)
    assert dof == len(_type_probabilities(p)) - 1
    assert pval > 1e-3


def test_chi_square_detects_wrong_law():
    p = EwensParams(6, 1)
    counts = cycle_type_counts(sample_crp(EwensParams(6, 2), 20_000, seed=8))
    _, pval, _ = chi_square_gof(counts, _type_probabilities(p))
    assert pval < 1e-10


def test_conditioned_poisson_budget():
    with pytest.raises(ResourceError, match="acceptance rate"):
        sample_conditioned_poisson(EwensParams(400, 1), 50, seed=1, max_rejects=20_000)


@pytest.mark.parametrize("method", ["crp", "conditioned-poisson"])
def test_reproducible(method):
    p = EwensParams(7, 1.3)
    a = sample(p, 2000, 42, method)
    b = sample(p, 2000, 42, method)
    c = sample(p, 2000, 43, method)
    assert a == b
    assert a != c
    assert a.method is Method(method)


def test_crp_thread_count_irrelevant():
    p = EwensParams(300, 0.9)
    ref = sample_crp(p, 3000, seed=9, threads=1)
    for t in (2, 3, 8):
        assert sample_crp(p, 3000, seed=9, threads=t) == ref


def test_count_validation():
    with pytest.raises(DomainError):
        sample_crp(EwensParams(4, 1), 0, seed=1)
    with pytest.raises(DomainError):
        sample_crp(EwensParams(4, 1), True, seed=1)


def test_empirical_law_examples():
    batch = sample_crp(EwensParams(100, 1), 20_000, seed=10)
    assert empirical_law(batch, AdditiveSpec.zeros(100)).counts == {0: 20_000}
    law = empirical_law(batch, AdditiveSpec.constant(100))
    values = law.values
    H = math.fsum(1 / j for j in range(1, 101))
    assert abs(law.mean() - H) <= 3 * values.std(ddof=1) / math.sqrt(len(values))
    with pytest.raises(DomainError):
        empirical_law(batch, AdditiveSpec.zeros(99))


def test_lugo_support_at_most_two():
    p = EwensParams(10_000, 1)
    spec = build_lugo_interval(p, "1/3", "1/2").spec
    law = empirical_law(sample_crp(p, 3000, seed=11), spec)
    assert set(law.counts) <= {0, 1, 2}


def test_empirical_factorial_moments_examples():
    zero = empirical_factorial_moments(EmpiricalLaw.from_values([0] * 50), 3)
    assert zero.values == (0.0, 0.0, 0.0)
    three = empirical_factorial_moments(EmpiricalLaw({3: 10}, 10), 2)
    assert three.values == (3.0, 6.0)
    assert three.provenance is Provenance.MONTE_CARLO
    mu = 1.3
    draws = np.random.default_rng(12).poisson(mu, 200_000)
    est = empirical_factorial_moments(EmpiricalLaw.from_values(draws), 3)
    for l in range(1, 4):
        assert abs(est[l] - mu ** l) <= 3 * est.errors[l - 1]


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_watterson_moments_by_simulation(theta):
    p = EwensParams(200, theta)
    batch = sample_crp(p, 100_000, seed=13)
    k1, k2 = batch.cycle_counts(1), batch.cycle_counts(2)
    for sample_values, exact in [(k1, watterson_moment(p, [(1, 1)])),
                                 (k2, watterson_moment(p, [(2, 1)])),
                                 (k1 * k2, watterson_moment(p, [(1, 1), (2, 1)]))]:
        se = sample_values.std(ddof=1) / math.sqrt(len(sample_values))
        assert abs(sample_values.mean() - exact) <= 3 * se
