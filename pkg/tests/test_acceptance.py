"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N [PASS|FAIL] ...`` line (collected again
in the terminal summary) before asserting.  Run just this file with
``pytest tests/test_acceptance.py -s``.
"""

import math
import time
from fractions import Fraction

import numpy as np

from ewens_moments.core import EwensParams, esf_probability, rising_factorial_exact
from ewens_moments.instances import (
    build_binomial2_subset,
    build_lugo_interval,
    build_poisson_longcycle_spec,
)
from ewens_moments.laws import (
    bernoulli_law,
    binomial_law,
    factorial_moments_to_pmf,
    geometric_law,
    membership_necessary_check,
    poisson_law,
    quasi_poisson_law,
    tv_distance,
)
from ewens_moments.moments import (
    exact_factorial_moments,
    upsilon_restricted,
    upsilon_vector,
    watterson_moment,
)
from ewens_moments.oracle import (
    PartitionIterator,
    brute_force_permutations,
    exact_law,
    exact_tv_short_cycles,
    law_factorial_moment,
    permutation_weight_total,
    watterson_composed_moment,
)
from ewens_moments.core import additive_value
from ewens_moments.sampler import (
    chi_square_gof,
    chi_square_two_sample,
    cycle_type_counts,
    empirical_law,
    sample_conditioned_poisson,
    sample_crp,
)
from ewens_moments.spectral import AngleWindow, angle_spec, eigen_angle_count
from ewens_moments.transform import ThetaTransform

from conftest import random_spec, random_subset
from oracle_values import (
    LUGO_GAP_THETA2,
    LUGO_UPSILON1_THETA2,
    TV_R10_THRESHOLD,
)
from test_spectral import _random_structures


def _close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300) or a == b


def test_criterion_1_oracle_equivalence(acceptance_report):
    start = time.perf_counter()
    checked = 0
    bad = []
    for theta in (Fraction(1, 2), 1, 2):
        for n in range(1, 9):
            for exact in (True, False):
                p = EwensParams(n, theta if exact else float(theta))
                for seed in range(20):
                    spec = random_spec(n, 1000 * n + seed)
                    rec = exact_factorial_moments(p, spec, 4, exact=exact)
                    law_a = exact_law(p, spec, exact=exact)
                    law_b = brute_force_permutations(p, spec, exact=exact)
                    for k in range(1, 5):
                        refs = [law_factorial_moment(law_a, k), law_factorial_moment(law_b, k),
                                watterson_composed_moment(p, spec, k, exact=exact)]
                        ok = all((r == rec[k]) if exact else _close(r, rec[k]) for r in refs)
                        checked += 1
                        if not ok:
                            bad.append((float(theta), n, seed, k, exact))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed <= 120
    acceptance_report(1, "oracle equivalence of moment machinery", ok,
                      f"{checked} comparisons, {len(bad)} mismatches, {elapsed:.1f}s")
    assert not bad, bad[:5]
    assert elapsed <= 120


def test_criterion_2_esf_normalization(acceptance_report):
    start = time.perf_counter()
    identity = all(permutation_weight_total(EwensParams(n, th), exact=True) == rising_factorial_exact(th, n)
                   for th in (1, 2, 3) for n in range(1, 10))
    worst = 0.0
    for th in (0.5, 1, 2, 3):
        for n in range(1, 31):
            p = EwensParams(n, th)
            worst = max(worst, abs(math.fsum(esf_probability(p, s) for s in PartitionIterator(n)) - 1))
    elapsed = time.perf_counter() - start
    ok = identity and worst <= 1e-10
    acceptance_report(2, "ESF normalization and weight identity", ok,
                      f"identity exact n<=9: {identity}; max |sum - 1| for n<=30: {worst:.2e}; {elapsed:.1f}s")
    assert identity
    assert worst <= 1e-10


def test_criterion_3_sampler_correctness(acceptance_report):
    start = time.perf_counter()
    N = 100_000
    pvals = []
    cases = [(n, 2.0) for n in range(2, 9)] + [(8, 0.5), (8, 1.0)]
    for i, (n, theta) in enumerate(cases):
        p = EwensParams(n, theta)
        probs = {tuple(s.lengths()): esf_probability(p, s) for s in PartitionIterator(n)}
        crp = cycle_type_counts(sample_crp(p, N, seed=3000 + i))
        cp = cycle_type_counts(sample_conditioned_poisson(p, N, seed=4000 + i))
        pvals.append(chi_square_gof(crp, probs)[1])
        pvals.append(chi_square_gof(cp, probs)[1])
        pvals.append(chi_square_two_sample(crp, cp)[1])
    z_scores = []
    for j, theta in enumerate((0.5, 1.0, 2.0)):
        p = EwensParams(200, theta)
        batch = sample_crp(p, N, seed=5000 + j)
        for length in (1, 2):
            k = batch.cycle_counts(length)
            se = k.std(ddof=1) / math.sqrt(N)
            z_scores.append(abs(k.mean() - watterson_moment(p, [(length, 1)])) / se)
    elapsed = time.perf_counter() - start
    ok = min(pvals) > 1e-3 and max(z_scores) <= 3 and elapsed <= 60
    acceptance_report(3, "sampler correctness", ok,
                      f"{len(pvals)} chi-square tests, min p = {min(pvals):.4f}; "
                      f"Watterson max |z| = {max(z_scores):.2f}; {elapsed:.1f}s")
    assert min(pvals) > 1e-3
    assert max(z_scores) <= 3
    assert elapsed <= 60


def test_criterion_4_poisson_long_cycles(acceptance_report):
    start = time.perf_counter()
    mu = 0.5
    grid = (10 ** 3, 10 ** 4, 10 ** 5)
    devs = []
    for n in grid:
        p = EwensParams(n, 1)
        ups = upsilon_vector(p, build_poisson_longcycle_spec(p, mu), 3, 8)
        devs.append([abs(ups[l] - mu ** l) for l in (1, 2, 3)])
    devs = np.array(devs)
    within = bool(np.all(devs <= 0.02))
    decreasing = bool(np.all(np.diff(devs, axis=0) < 0))
    n = 10 ** 5
    p = EwensParams(n, 1)
    spec = build_poisson_longcycle_spec(p, mu)
    law = empirical_law(sample_crp(p, 100_000, seed=44), spec)
    tv = tv_distance(law, poisson_law(mu))
    elapsed = time.perf_counter() - start
    ok = within and decreasing and tv <= 0.02 and elapsed <= 180
    acceptance_report(4, "Poisson long-cycle construction", ok,
                      f"max |Upsilon(l,8) - mu^l| by n = {np.round(devs.max(axis=1), 6).tolist()}, "
                      f"decreasing: {decreasing}; TV(empirical, Po(0.5)) = {tv:.4f}; {elapsed:.1f}s")
    assert within and decreasing
    assert tv <= 0.02
    assert elapsed <= 180


def test_criterion_5_binomial_instance(acceptance_report):
    start = time.perf_counter()
    prob = 0.3
    target = np.array([2 * prob, 2 * prob ** 2, 0.0])
    rows = []
    for n in (10 ** 3, 10 ** 4, 10 ** 5):
        p = EwensParams(n, 1)
        rows.append(exact_factorial_moments(p, build_binomial2_subset(p, prob), 3).as_array())
    rows = np.array(rows)
    dev = np.abs(rows - target)
    final_ok = bool(np.all(dev[-1] <= 0.01))
    n = 10 ** 5
    p = EwensParams(n, 1)
    law = empirical_law(sample_crp(p, 100_000, seed=55), build_binomial2_subset(p, prob))
    tv = tv_distance(law, binomial_law(2, prob))
    elapsed = time.perf_counter() - start
    ok = final_ok and tv <= 0.02 and elapsed <= 180
    acceptance_report(5, "binomial instance", ok,
                      f"gamma(1..3) at n=1e5 = {np.round(rows[-1], 6).tolist()}, "
                      f"max deviation {dev[-1].max():.4f}; TV(empirical, Bi(2,0.3)) = {tv:.4f}; {elapsed:.1f}s")
    assert final_ok
    assert tv <= 0.02
    assert elapsed <= 180


def test_criterion_6_lugo_refutation(acceptance_report):
    start = time.perf_counter()
    n = 20_000
    p2 = EwensParams(n, 2)
    spec2 = build_lugo_interval(p2, "1/3", "1/2").spec
    u1 = upsilon_restricted(p2, spec2, 1)
    u2 = upsilon_restricted(p2, spec2, 2)
    gap2 = u1 ** 2 - u2
    p1 = EwensParams(n, 1)
    spec1 = build_lugo_interval(p1, "1/3", "1/2").spec
    gap1 = upsilon_restricted(p1, spec1, 1) ** 2 - upsilon_restricted(p1, spec1, 2)
    elapsed = time.perf_counter() - start
    c1 = abs(u1 - LUGO_UPSILON1_THETA2) <= 0.01
    c2 = gap2 > 0 and abs(gap2 - LUGO_GAP_THETA2) <= 0.01
    c3 = abs(gap1) <= 0.005
    ok = c1 and c2 and c3 and elapsed <= 120
    acceptance_report(6, "Lugo refutation", ok,
                      f"theta=2: upsilon(1) = {u1:.6f} (limit {LUGO_UPSILON1_THETA2:.6f}), "
                      f"gap = {gap2:.6f} (quadrature {LUGO_GAP_THETA2:.6f}); theta=1 gap = {gap1:.2e}; "
                      f"{elapsed:.1f}s")
    assert c1 and c2 and c3
    assert elapsed <= 120


def test_criterion_7_tv_trend(acceptance_report):
    start = time.perf_counter()
    p = EwensParams(2000, 1)
    small = exact_tv_short_cycles(p, 10)
    large = exact_tv_short_cycles(p, 1000)
    elapsed = time.perf_counter() - start
    ok = small < large and small <= TV_R10_THRESHOLD and elapsed <= 120
    acceptance_report(7, "TV trend of short cycle counts", ok,
                      f"TV(r=10) = {small:.3e}, TV(r=1000) = {large:.6f}; {elapsed:.1f}s")
    assert small < large
    assert small <= TV_R10_THRESHOLD
    assert elapsed <= 120


def test_criterion_8_property_suites(acceptance_report):
    start = time.perf_counter()
    failures = []

    # growth bound, theta >= 1
    for theta in (1.0, 2.0):
        p = EwensParams(400, theta)
        for seed in range(200):
            vals = upsilon_vector(p, random_subset(400, seed), 6, 1).as_array()
            if np.any(vals > vals[0] ** np.arange(1, 7) * (1 + 1e-12)):
                failures.append(f"growth theta={theta} seed={seed}")

    # psi sandwich in both regimes
    for theta in (0.5, 1.0, 2.0):
        n = 80
        v = np.exp(EwensParams(n, theta).log_psi)
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        mask = i + j <= n
        lhs = v[np.where(mask, n - i - j, 0)][mask]
        rhs = (v[n - i] * v[n - j])[mask]
        if theta >= 1 and np.any(lhs > rhs * (1 + 1e-12)):
            failures.append(f"sandwich theta={theta}")
        if theta <= 1 and np.any(lhs < rhs * (1 - 1e-12)):
            failures.append(f"sandwich theta={theta}")

    # inversion roundtrip on built-in finite laws
    finite = [bernoulli_law(0.3), binomial_law(2, 0.3), binomial_law(6, 0.45),
              quasi_poisson_law(3, 0.6), quasi_poisson_law(1, 0.2)]
    for law in finite:
        top = max(law.support)
        back = factorial_moments_to_pmf([law_factorial_moment(law, l) for l in range(1, top + 1)], top)
        if max(abs(float(back.prob(v)) - float(law.prob(v))) for v in range(top + 1)) > 1e-10:
            failures.append(f"roundtrip {law.name}")

    # membership check
    for q in (0.2, 0.5, 0.8):
        if membership_necessary_check(geometric_law(q).factorial_moments(5))[0]:
            failures.append(f"membership accepted Geometric({q})")
    for law in [poisson_law(0.5), poisson_law(2.0), bernoulli_law(0.4), binomial_law(3, 0.3)]:
        if not membership_necessary_check(law.factorial_moments(5))[0]:
            failures.append(f"membership rejected {law.name}")

    # t_theta(1) < 1
    for theta in (1.0, 1.2, 1 / math.log(2), 2.0, 5.0):
        if not ThetaTransform(theta).t1 < 1:
            failures.append(f"t_theta(1) >= 1 at theta={theta}")

    # spectral identity
    window = AngleWindow("1/7", "5/8")
    for s in _random_structures(100, 8):
        if eigen_angle_count(s, window) != additive_value(angle_spec(s.n, window), s):
            failures.append(f"spectral identity {s}")

    elapsed = time.perf_counter() - start
    ok = not failures and elapsed <= 60
    acceptance_report(8, "property suites", ok,
                      f"{len(failures)} failures across 6 suites; {elapsed:.1f}s")
    assert not failures, failures[:5]
    assert elapsed <= 60
