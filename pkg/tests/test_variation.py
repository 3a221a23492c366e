import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcga.core import InvalidDimensionError, bitstring, hamming_distance, to_str
from pcga.rng import RngStream
from pcga.variation import (
    CROSSOVERS,
    CrossoverOperator,
    MutationOperator,
    crossover,
    fast_strength_pmf,
    mutate,
    one_point_crossover,
    power_law_norm,
    sample_fast_strength,
    sample_sbm_strength,
    sbm_strength_pmf,
    two_point_crossover,
)


def _sbm_oracle(n, p, k):
    return math.comb(n, k) * p**k * (1 - p) ** (n - k) / (1 - (1 - p) ** n)


def test_sbm_pmf_matches_closed_form():
    pmf = sbm_strength_pmf(100, 0.01)
    assert abs(pmf.sum() - 1) < 1e-9
    for k in (1, 2, 3, 10):
        assert pmf[k - 1] == pytest.approx(_sbm_oracle(100, 0.01, k), rel=1e-10)


def test_sbm_n1_always_one(rng):
    assert set(sample_sbm_strength(1, 0.3, rng, size=1000).tolist()) == {1}


def test_sbm_ell1_frequency_within_3_sigma(rng):
    draws = sample_sbm_strength(100, 0.01, rng, size=10**6)
    p1 = _sbm_oracle(100, 0.01, 1)
    sigma = math.sqrt(p1 * (1 - p1) / 10**6)
    assert abs(np.mean(draws == 1) - p1) < 3 * sigma
    assert draws.min() >= 1


@pytest.mark.parametrize("n,p", [(10, 0.5), (50, 0.2), (3, 0.9)])
def test_sbm_large_rate_uses_rejection_and_stays_exact(n, p):
    op = MutationOperator.standard(n, p)
    assert op.reject_zero
    draws = op.sample_strength(RngStream(4), size=200000)
    emp = np.bincount(draws, minlength=n + 1)[1:] / draws.size
    assert draws.min() >= 1
    assert 0.5 * np.abs(emp - sbm_strength_pmf(n, p)).sum() < 0.01


def test_fast_pmf_and_norm():
    assert power_law_norm(10) == pytest.approx(sum(i**-1.5 for i in range(1, 6)), rel=1e-15)
    pmf = fast_strength_pmf(100)
    assert abs(pmf.sum() - 1) < 1e-9
    assert pmf.size == 50
    op = MutationOperator.fast(100)
    assert op.half_n == 50
    assert op.norm_const == pytest.approx(math.fsum(i**-1.5 for i in range(1, 51)), rel=1e-12)


def test_fast_small_dimensions(rng):
    assert set(sample_fast_strength(2, 1.5, rng, size=500).tolist()) == {1}
    with pytest.raises(InvalidDimensionError):
        sample_fast_strength(1, 1.5, rng)
    with pytest.raises(ValueError):
        fast_strength_pmf(10, beta=1.0)


def test_fast_ell1_frequency_n10(rng):
    draws = sample_fast_strength(10, 1.5, rng, size=10**6)
    p1 = 1 / sum(i**-1.5 for i in range(1, 6))
    sigma = math.sqrt(p1 * (1 - p1) / 10**6)
    assert abs(np.mean(draws == 1) - p1) < 3 * sigma
    assert draws.max() <= 5


def test_rate_validation():
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            MutationOperator.standard(10, bad)
    with pytest.raises(ValueError):
        MutationOperator.build("gaussian", 10)


def test_mutate_n1_flips_single_bit(rng):
    op = MutationOperator.standard(1)
    assert to_str(mutate(bitstring("0"), op, rng)) == "1"
    assert to_str(mutate(bitstring("1"), op, rng)) == "0"


@given(st.lists(st.integers(0, 1), min_size=2, max_size=80), st.integers(0, 2**32), st.sampled_from(["sbm", "fast"]))
def test_mutation_flip_count_matches_strength(xs, seed, kind):
    x = bitstring(xs)
    op = MutationOperator.build(kind, x.size)
    rng = RngStream(seed)
    expected = op.sample_strength(rng.copy())
    before = x.copy()
    z = mutate(x, op, rng)
    assert hamming_distance(x, z) == expected >= 1
    assert np.array_equal(x, before)


def test_mutation_distance_matches_pmf_chi_square():
    n = 64
    op = MutationOperator.standard(n)
    rng = RngStream(8)
    x = np.zeros(n, dtype=np.uint8)
    dist = np.array([hamming_distance(x, mutate(x, op, rng)) for _ in range(50000)])
    pmf = sbm_strength_pmf(n, 1 / n)
    # pool the sparse tail into one bin so every expected count is >= 5
    observed = np.array([np.sum(dist == k) for k in range(1, 5)] + [np.sum(dist >= 5)])
    expected = 50000 * np.append(pmf[:4], pmf[4:].sum())
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    # 99th percentile of chi-square with 4 degrees of freedom
    assert chi2 < 13.28


def test_mutation_positions_are_uniform():
    n = 20
    op = MutationOperator.standard(n)
    rng = RngStream(13)
    x = np.zeros(n, dtype=np.uint8)
    hits = np.zeros(n)
    for _ in range(40000):
        hits += mutate(x, op, rng)
    share = hits / hits.sum()
    assert np.all(np.abs(share - 1 / n) < 0.005)


def test_one_point_example():
    assert to_str(one_point_crossover(bitstring("0000"), bitstring("1111"), 2)) == "0011"
    assert to_str(one_point_crossover(bitstring("0000"), bitstring("1111"), 4)) == "0000"
    with pytest.raises(ValueError):
        one_point_crossover(bitstring("0000"), bitstring("1111"), 0)


def test_two_point_example():
    assert to_str(two_point_crossover(bitstring("000000"), bitstring("111111"), 2, 4)) == "001100"
    with pytest.raises(ValueError):
        two_point_crossover(bitstring("0000"), bitstring("1111"), 2, 2)


@pytest.mark.parametrize("kind", CROSSOVERS)
def test_crossover_of_identical_parents_is_identity(kind, rng):
    x = bitstring("0110100111")
    for _ in range(50):
        assert np.array_equal(crossover(x, x, kind, rng), x)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=100), st.data(), st.sampled_from(CROSSOVERS), st.integers(0, 2**32))
def test_crossover_mask_property(xs, data, kind, seed):
    ys = data.draw(st.lists(st.integers(0, 1), min_size=len(xs), max_size=len(xs)))
    x, y = bitstring(xs), bitstring(ys)
    x0, y0 = x.copy(), y.copy()
    z = crossover(x, y, CrossoverOperator(kind), RngStream(seed))
    assert np.all((z == x) | (z == y))
    assert np.array_equal(x, x0) and np.array_equal(y, y0)


def test_one_point_sampled_shape(rng):
    # every child of 0^n and 1^n is 0^c 1^(n-c) with c uniform on [1..n]
    n = 8
    cuts = []
    for _ in range(16000):
        z = crossover(np.zeros(n, np.uint8), np.ones(n, np.uint8), "one-point", rng)
        c = int(n - z.sum())
        assert to_str(z) == "0" * c + "1" * (n - c)
        cuts.append(c)
    counts = np.bincount(cuts, minlength=n + 1)
    assert counts[0] == 0
    assert np.all(np.abs(counts[1:] - 2000) < 3 * math.sqrt(16000 * (1 / n) * (1 - 1 / n)))


def test_two_point_sampled_points_distinct_and_uniform(rng):
    n = 6
    pairs = {}
    for _ in range(30000):
        z = crossover(np.zeros(n, np.uint8), np.ones(n, np.uint8), "two-point", rng)
        s = to_str(z)
        ones = [i for i, b in enumerate(s) if b == "1"]
        # x on [1..c1], y on (c1..c2], x after; so ones form one non-empty run
        assert ones and ones == list(range(ones[0], ones[-1] + 1))
        key = (ones[0], ones[-1] + 1)  # (c1, c2)
        pairs[key] = pairs.get(key, 0) + 1
    assert len(pairs) == math.comb(n, 2)
    expected = 30000 / math.comb(n, 2)
    sigma = math.sqrt(30000 * (1 / 15) * (14 / 15))
    assert all(abs(c - expected) < 3 * sigma for c in pairs.values())


def test_uniform_frequencies_and_symmetry():
    n = 32
    zero, one = np.zeros(n, np.uint8), np.ones(n, np.uint8)
    r1, r2 = RngStream(21), RngStream(22)
    a = np.zeros(n)
    b = np.zeros(n)
    for _ in range(100000):
        a += crossover(zero, one, "uniform", r1)
        b += crossover(one, zero, "uniform", r2)
    fa, fb = a / 100000, b / 100000
    assert np.all((fa >= 0.48) & (fa <= 0.52))
    assert np.all((fb >= 0.48) & (fb <= 0.52))


def test_crossover_length_mismatch(rng):
    with pytest.raises(ValueError):
        crossover(bitstring("01"), bitstring("011"), "uniform", rng)
    with pytest.raises(ValueError):
        CrossoverOperator("three-point")
