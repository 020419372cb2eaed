import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from lpplab.brownian import (
    c_prime_event_mc,
    c_prime_flags,
    k_star,
    sample_batches,
    sample_bm,
    two_peak_bound,
    two_peak_constant,
    two_peak_integrals,
    two_peak_mc,
)


def _batch(M, step, n, seed):
    xs, blocks = zip(*sample_batches(M, step, n, seed))
    return xs[0], np.concatenate(blocks)


def test_anchored_at_zero_and_deterministic():
    p = sample_bm(1.0, 0.01, seed=5)
    assert p.values[p.x.size // 2] == 0.0 and p.at(0.0) == 0.0
    assert np.array_equal(p.values, sample_bm(1.0, 0.01, seed=5).values)
    assert not np.array_equal(p.values, sample_bm(1.0, 0.01, seed=6).values)


def test_invalid_step():
    with pytest.raises(ValueError):
        sample_bm(1.0, 0.0, 1)
    with pytest.raises(ValueError):
        sample_bm(1.0, 2.0, 1)


def test_variance_at_one_is_two():
    x, w = _batch(1.0, 0.01, 10**5, 1)
    v = w[:, np.argmin(np.abs(x - 1.0))].var(ddof=1)
    assert 1.96 <= v <= 2.04
    v_left = w[:, 0].var(ddof=1)
    assert 1.96 <= v_left <= 2.04


def test_increments_uncorrelated():
    x, w = _batch(1.0, 0.01, 10**5, 2)
    i0, ih, i1 = (np.argmin(np.abs(x - t)) for t in (0.0, 0.5, 1.0))
    c = np.corrcoef(w[:, ih] - w[:, i0], w[:, i1] - w[:, ih])[0, 1]
    assert abs(c) < 0.01


@pytest.mark.parametrize("h", [0.5, 1.0])
def test_reflection_principle(h):
    x, w = _batch(1.0, 1e-4, 10**4, 3)
    mx = w[:, x >= 0].max(axis=1)
    est = np.mean(mx > h)
    exact = 2 * stats.norm.sf(h / math.sqrt(2))
    se = math.sqrt(exact * (1 - exact) / mx.size)
    assert abs(est - exact) <= 3 * se


def test_two_peak_trivial_cases():
    assert two_peak_mc(1.0, (-2.0, 2.0), 0.01, 500, 1e-2, seed=1).estimate == 1.0
    assert two_peak_mc(1.0, (0.0, 0.01), 1e4, 500, 1e-2, seed=1).estimate == 1.0
    with pytest.raises(ValueError):
        two_peak_mc(1.0, (1.5, 2.5), 0.01, 10, 1e-2)


def test_two_peak_small_and_linear():
    a = two_peak_mc(1.0, (-0.005, 0.005), 0.01, 10**5, 1e-3, seed=4)
    b = two_peak_mc(1.0, (-0.0025, 0.0025), 0.005, 10**5, 1e-3, seed=5)
    assert a.estimate < 0.1
    assert 1.4 <= a.estimate / b.estimate <= 2.8


def test_discretisation_bias_small():
    a = two_peak_mc(1.0, (-0.01, 0.01), 0.02, 10**5, 1e-3, seed=3)
    b = two_peak_mc(1.0, (-0.01, 0.01), 0.02, 10**5, 5e-4, seed=3)
    assert abs(a.estimate - b.estimate) < 2 * a.stderr


def test_integrals_match_closed_forms():
    # with u = h1 + h2 each integral reduces to a one-dimensional Gaussian moment
    j1, j2, j3 = two_peak_integrals()
    assert j1 == pytest.approx(2 * math.sqrt(math.pi), rel=1e-8)
    assert j2 == pytest.approx(8.0, rel=1e-8)
    assert j3 == pytest.approx(2 * math.sqrt(math.pi), rel=1e-8)
    assert two_peak_constant(1.0) == pytest.approx(2 / math.pi**1.5, rel=1e-8)
    assert two_peak_constant(2.0) == pytest.approx(two_peak_constant(1.0) / 2, rel=1e-12)


def test_bound_formula():
    c2 = two_peak_constant(1.0)
    assert two_peak_bound(1.0, 0.0, 0.01) == pytest.approx(c2 * 0.01)
    assert two_peak_bound(1.0, 1e-12, 0.01) == pytest.approx(c2 * 0.01, rel=1e-4)
    with pytest.raises(ValueError):
        two_peak_bound(1.0, 0.01, 0.0)


@given(m1=st.floats(0, 1), m2=st.floats(0, 1), e1=st.floats(1e-6, 1), e2=st.floats(1e-6, 1))
def test_bound_monotone(m1, m2, e1, e2):
    (ma, mb), (ea, eb) = sorted([m1, m2]), sorted([e1, e2])
    assert two_peak_bound(1.0, ma, ea) <= two_peak_bound(1.0, mb, ea)
    assert two_peak_bound(1.0, ma, ea) <= two_peak_bound(1.0, ma, eb)


@pytest.mark.parametrize("m,eps", [(m, e) for m in (0.005, 0.01, 0.02)
                                   for e in (0.005, 0.01, 0.02) if m <= e])
def test_bound_dominates_mc(m, eps):
    rep = two_peak_mc(1.0, (-m / 2, m / 2), eps, 2 * 10**4, 1e-3, seed=11)
    assert rep.estimate <= two_peak_bound(1.0, m, eps)


def test_k_star():
    assert k_star(0.1) == 6
    assert 2 ** k_star(0.3) * 0.3 <= 8 < 2 ** (k_star(0.3) + 1) * 0.3


def test_c_prime_parameter_order():
    with pytest.raises(ValueError):
        c_prime_event_mc(2.0, 0.1, 0.05, 0.2, replicas=10)
    with pytest.raises(ValueError):
        c_prime_event_mc(2.0, 0.05, 0.1, 0.2, tau=0.6, replicas=10)


def test_c_prime_clausewise_monotone_in_alpha():
    # both thresholds loosen as alpha grows
    x, w = _batch(6.4, 1e-2, 4000, 7)
    prev = None
    for alpha in (0.05, 0.2, 1.0, 1e3):
        coincide, ann, high = c_prime_flags(x, w, 2.0, 0.05, 0.1, alpha, 0.25)
        assert np.all(ann <= coincide) and np.all(high <= coincide)
        if prev is not None:
            assert np.all(prev[0] <= ann) and np.all(prev[1] <= high)
        prev = (ann, high)


def test_c_prime_large_alpha_bounded_by_coincidence():
    full, ann, high = c_prime_event_mc(2.0, 0.05, 0.1, 1e3, replicas=4000, step=1e-2,
                                       seed=2, clauses=True)
    x, w = _batch(6.4, 1e-2, 4000, 2)
    coincide = c_prime_flags(x, w, 2.0, 0.05, 0.1, 1e3, 0.25)[0].mean()
    assert full.estimate <= coincide
    assert ann.estimate == pytest.approx(coincide)


def test_c_prime_shrinks_with_alpha():
    vals = [c_prime_event_mc(2.0, 0.05, 0.1, a, replicas=2 * 10**4, seed=4).estimate
            for a in (0.4, 0.2, 0.1)]
    assert vals[0] > vals[1] > vals[2]


def test_c_prime_uniform_in_lambda():
    a = c_prime_event_mc(2.0, 0.02, 0.1, 0.2, replicas=2 * 10**4, seed=4).estimate / 0.02
    b = c_prime_event_mc(2.0, 0.05, 0.1, 0.2, replicas=2 * 10**4, seed=4).estimate / 0.05
    assert 1 / 3 <= a / b <= 3
