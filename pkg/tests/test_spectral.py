import math
import random
from fractions import Fraction

import numpy as np
import pytest

from ewens_moments.core import CycleStructure, EwensParams, additive_value
from ewens_moments.errors import DomainError
from ewens_moments.moments import exact_factorial_moment
from ewens_moments.sampler import sample_crp
from ewens_moments.spectral import (
    AngleWindow,
    angle_counts,
    angle_spec,
    char_poly_log_abs,
    eigen_angle_count,
)


def _random_structures(count, seed):
    rnd = random.Random(seed)
    out = []
    for _ in range(count):
        n = rnd.randint(1, 60)
        lengths, left = [], n
        while left:
            j = rnd.randint(1, left)
            lengths.append(j)
            left -= j
        out.append(CycleStructure.from_lengths(lengths))
    return out


def _literal_trace(s, window):
    # count angles t/j one by one with exact rationals
    return sum(c * sum(1 for t in range(j) if window.lo <= Fraction(t, j) < window.hi)
               for j, c in s.parts)


def test_window_parsing():
    w = AngleWindow.parse("0:1/10")
    assert w.lo == 0 and w.hi == Fraction(1, 10)
    with pytest.raises(DomainError):
        AngleWindow.parse("0.5")
    with pytest.raises(DomainError):
        AngleWindow("1/2", "1/3")
    with pytest.raises(DomainError):
        AngleWindow(0, "3/2")


def test_char_poly_examples():
    s = CycleStructure.from_lengths([3, 2, 2])
    assert char_poly_log_abs(s, 0.0) == (0.0, 1)
    single = CycleStructure.from_lengths([7])
    assert char_poly_log_abs(single, 0.8)[0] == pytest.approx(math.log(1 - 0.8 ** 7), rel=1e-15)
    two = CycleStructure.from_counts([2, 0])
    assert char_poly_log_abs(two, 0.5) == (pytest.approx(2 * math.log(0.5)), 1)
    value, sign = char_poly_log_abs(CycleStructure.from_lengths([2, 1]), 1.5)
    assert sign == 1 and value == pytest.approx(math.log(0.5 * 1.25))
    assert char_poly_log_abs(CycleStructure.from_lengths([1]), 2.0)[1] == -1
    with pytest.raises(DomainError, match=r"x\^2"):
        char_poly_log_abs(CycleStructure.from_lengths([2, 3]), -1.0)


def test_char_poly_additive_over_concatenation():
    for a, b in zip(_random_structures(30, 1), _random_structures(30, 2)):
        joined = CycleStructure.from_lengths(a.lengths() + b.lengths())
        for x in (-0.9, 0.3, 1.7):
            la, sa = char_poly_log_abs(a, x)
            lb, sb = char_poly_log_abs(b, x)
            lj, sj = char_poly_log_abs(joined, x)
            assert lj == pytest.approx(la + lb, rel=1e-12, abs=1e-12)
            assert sj == sa * sb


def test_eigen_angle_examples():
    s = CycleStructure.from_lengths([5, 3, 1])
    assert eigen_angle_count(s, AngleWindow(0, 1)) == 9
    assert eigen_angle_count(CycleStructure.from_lengths([4]), AngleWindow(0, "1/2")) == 2


def test_trace_identity_bit_exact():
    windows = [AngleWindow(0, "1/10"), AngleWindow("1/3", "2/3"), AngleWindow(0.25, 0.75),
               AngleWindow("1/7", 1)]
    for s in _random_structures(100, 3):
        for w in windows:
            count = eigen_angle_count(s, w)
            assert count == additive_value(angle_spec(s.n, w), s) == _literal_trace(s, w)


def test_windows_partitioning_circle_sum_to_n():
    cuts = [Fraction(0), Fraction(1, 7), Fraction(1, 3), Fraction(1, 2), Fraction(5, 6), Fraction(1)]
    windows = [AngleWindow(a, b) for a, b in zip(cuts, cuts[1:])]
    for s in _random_structures(100, 4):
        assert sum(eigen_angle_count(s, w) for w in windows) == s.n


def test_batch_angle_counts_match_scalar():
    p = EwensParams(40, 1.5)
    batch = sample_crp(p, 200, seed=5)
    w = AngleWindow("1/5", "3/5")
    vec = angle_counts(batch.lengths, batch.offsets, w, 40)
    assert vec.tolist() == [eigen_angle_count(d, w) for d in batch.draws]


def test_trace_mean_matches_additive_moment():
    n = 10_000
    p = EwensParams(n, 1)
    w = AngleWindow(0, "1/10")
    batch = sample_crp(p, 5000, seed=6)
    vals = angle_counts(batch.lengths, batch.offsets, w, n)
    exact = exact_factorial_moment(p, angle_spec(n, w), 1)
    assert abs(vals.mean() - exact) <= 3 * vals.std(ddof=1) / math.sqrt(len(vals))
