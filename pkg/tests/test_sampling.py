from fractions import Fraction
from math import ceil

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mabsobs import ConfigurationError, Sampler, SurveyPlan, estimate_total, sample_size, srswor
from mabsobs import variance_proxy


def oracle(N, p, d):
    """Sample size evaluated in exact rationals from decimal strings."""
    p, d = Fraction(str(p)), Fraction(str(d))
    s2 = p * (1 - p)
    if s2 == 0:
        return 1
    n = ceil(1 / (d * d / (4 * s2) + Fraction(1, N)))
    return min(max(n, 1), N)


@pytest.mark.parametrize("p, expected", [(0, 0), (0.5, 0.25), (0.2, 0.16), (1, 0)])
def test_variance_proxy(p, expected):
    assert variance_proxy(p) == pytest.approx(expected)


def test_worked_sizes():
    assert sample_size(10_000, 0.2, 0.08) == 100
    assert sample_size(100, 0.5, 1) == 1
    assert sample_size(10_000, 0.5, 1e-9) == 10_000


@given(st.integers(1, 10**6), st.floats(0.001, 0.999), st.floats(0.001, 0.999))
def test_matches_rational_oracle(N, p, d):
    assert sample_size(N, p, d) == oracle(N, p, d)


@given(st.integers(1, 10**6), st.floats(0, 1), st.floats(1e-6, 1), st.floats(1e-6, 1))
def test_monotone_in_error_and_clamped(N, p, d1, d2):
    d1, d2 = sorted((d1, d2))
    n1, n2 = sample_size(N, p, d1), sample_size(N, p, d2)
    assert n1 >= n2
    assert 1 <= n2 <= n1 <= N


@given(st.integers(1, 10**6), st.floats(0, 1), st.floats(1e-6, 1))
def test_half_is_the_worst_rate(N, p, d):
    assert sample_size(N, p, d) <= sample_size(N, 0.5, d)


def test_bad_arguments():
    for args in ((0, 0.2, 0.1), (10, 1.5, 0.1), (10, 0.2, 0)):
        with pytest.raises(ValueError):
            sample_size(*args)
    with pytest.raises(ConfigurationError):
        SurveyPlan(0, 0.1, 0.2, 10)


@pytest.mark.parametrize("hits, n, N, expected", [(0, 10, 100, 0), (10, 10, 100, 100),
                                                  (20, 100, 10_000, 2000)])
def test_estimate_total(hits, n, N, expected):
    assert estimate_total(hits, n, N) == expected


@given(st.integers(1, 10**5), st.data())
def test_estimate_stays_in_range(N, data):
    n = data.draw(st.integers(1, N))
    hits = data.draw(st.integers(0, n))
    assert 0 <= estimate_total(hits, n, N) <= N


def test_plan_design_and_resize():
    plan = SurveyPlan.design(10_000, 0.2, 0.08)
    assert plan.n == 100
    assert plan.resized(0.5).n == sample_size(10_000, 0.5, 0.08)


def test_census_draw_is_the_full_set():
    assert sorted(srswor(37, 37, np.random.default_rng(0)).tolist()) == list(range(37))


def test_one_of_two_is_fair():
    sampler = Sampler(2, np.random.default_rng(3))
    counts = np.bincount([int(sampler.draw(1)[0]) for _ in range(10_000)], minlength=2)
    assert np.all(np.abs(counts - 5000) <= 300)


def test_inclusion_frequencies():
    N, n, draws = 50, 10, 10_000
    sampler = Sampler(N, np.random.default_rng(4))
    hits = np.zeros(N)
    for _ in range(draws):
        hits[sampler.draw(n)] += 1
    freq = hits / draws
    sigma = np.sqrt(0.2 * 0.8 / draws)
    assert np.all(np.abs(freq - 0.2) <= 5 * sigma)


@given(st.integers(1, 500), st.data(), st.integers(0, 2**32))
def test_draws_are_distinct_and_in_range(N, data, seed):
    n = data.draw(st.integers(1, N))
    sampler = Sampler(N, np.random.default_rng(seed))
    for _ in range(3):
        ids = sampler.draw(n)
        assert len(set(ids.tolist())) == n
        assert ids.min() >= 0 and ids.max() < N


def test_oversized_draw_is_refused():
    with pytest.raises(ValueError):
        srswor(5, 6, np.random.default_rng(0))


def test_fused_count_matches_draw_then_count():
    mask = np.zeros(100, dtype=bool)
    mask[:30] = True
    x = np.arange(500) % 100
    y = np.zeros(500, dtype=np.int64)
    a, b = Sampler(500, np.random.default_rng(9)), Sampler(500, np.random.default_rng(9))
    for n in (1, 17, 500, 17):
        ids = a.draw(n)
        assert b.count_hits(n, x, y, mask, 1) == int(mask[x[ids]].sum())
