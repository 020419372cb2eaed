import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from lpplab.estimate import replica_seed
from lpplab.field import (
    EXCLUDED,
    DomainError,
    Droplet,
    FieldSpec,
    Flat,
    LatticePoint,
    RegionViolation,
    Stationary,
    Table,
    initial_condition_at,
    make_ic,
    weight_at,
)

coords = st.integers(-10**6, 10**6)


def _cells(n, seed):
    rng = np.random.default_rng(seed)
    return rng.integers(-10**5, 10**5, n), rng.integers(-10**5, 10**5, n)


def test_weight_deterministic():
    spec = FieldSpec(seed=42)
    a, b = weight_at(spec, (0, 0)), weight_at(FieldSpec(seed=42), (0, 0))
    assert a == b and a > 0


@given(seed=st.integers(0, 2**64 - 1), v1=coords, v2=coords)
def test_single_and_batched_agree_bitwise(seed, v1, v2):
    spec = FieldSpec(seed=seed)
    assert spec.weights_at([v1], [v2])[0] == weight_at(spec, (v1, v2))


def test_evaluation_order_irrelevant():
    spec = FieldSpec(seed=9)
    v1, v2 = _cells(1000, 0)
    w = spec.weights_at(v1, v2)
    perm = np.random.default_rng(1).permutation(1000)
    assert np.array_equal(spec.weights_at(v1[perm], v2[perm]), w[perm])


def test_exp1_mean_and_tail():
    v1, v2 = _cells(10**6, 2)
    w = FieldSpec(seed=3).weights_at(v1, v2)
    assert 0.995 <= w.mean() <= 1.005
    assert abs(np.mean(w > 1) - np.exp(-1)) <= 0.002


def test_exp1_kolmogorov_smirnov():
    v1, v2 = _cells(10**5, 4)
    w = FieldSpec(seed=5).weights_at(v1, v2)
    d = stats.kstest(w, "expon").statistic
    assert d < 1.63 / np.sqrt(w.size)


def test_distinct_seeds_uncorrelated():
    v1, v2 = _cells(10**5, 6)
    a = FieldSpec(seed=1).weights_at(v1, v2)
    b = FieldSpec(seed=2).weights_at(v1, v2)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_region_violation():
    spec = FieldSpec(seed=1, max_sum=10, half_width=4)
    weight_at(spec, (5, 5))
    with pytest.raises(RegionViolation):
        weight_at(spec, (6, 5))
    with pytest.raises(RegionViolation):
        weight_at(spec, (5, 0))


def test_table_field_and_shift():
    t = np.arange(1.0, 7.0).reshape(2, 3)
    spec = FieldSpec.from_table(t, origin=(1, -1))
    assert weight_at(spec, (2, 0)) == t[1, 1]
    assert weight_at(spec.shifted(1, 0), (1, 0)) == t[1, 1]
    with pytest.raises(RegionViolation):
        weight_at(spec, (0, 0))


@given(v1=coords, v2=coords)
def test_lattice_point_parity(v1, v2):
    u = LatticePoint(v1, v2)
    assert (u.d - u.a) % 2 == 0
    assert LatticePoint.from_sa(u.d, u.a) == u


def test_ordering():
    assert LatticePoint(0, 0).precedes(LatticePoint(1, 2))
    assert not LatticePoint(2, 0).precedes(LatticePoint(1, 2))


def test_flat_and_droplet_values():
    assert initial_condition_at(Flat(), (7, -7)) == 0
    assert initial_condition_at(Droplet(), (0, 0)) == 0
    assert initial_condition_at(Droplet(), (5, -5)) == EXCLUDED
    assert initial_condition_at(Stationary(3), (0, 0)) == 0


def test_ic_off_line_is_domain_error():
    with pytest.raises(DomainError):
        initial_condition_at(Flat(), (1, 0))


def test_table_ic():
    ic = Table.from_points({(2, -2): 1.5, (0, 0): -1.0})
    assert initial_condition_at(ic, (2, -2)) == 1.5
    assert initial_condition_at(ic, (1, -1)) == EXCLUDED


def test_stationary_deterministic_and_two_sided():
    a, b = Stationary(11), Stationary(11)
    for u in [(3, -3), (-4, 4)]:
        assert initial_condition_at(a, u) == initial_condition_at(b, u)
    assert initial_condition_at(Stationary(12), (3, -3)) != initial_condition_at(a, (3, -3))


def test_stationary_variance_8k():
    k = 10
    vals = np.array([initial_condition_at(Stationary(replica_seed(77, i)), (k, -k))
                     for i in range(4000)])
    se = 8 * k * np.sqrt(2 / 4000) * 1.5
    assert abs(vals.var(ddof=1) - 8 * k) < 3 * se
    assert abs(vals.mean()) < 3 * np.sqrt(8 * k / 4000)


def test_make_ic():
    assert isinstance(make_ic("flat"), Flat)
    assert isinstance(make_ic("droplet"), Droplet)
    assert isinstance(make_ic("stationary", 4), Stationary)
    with pytest.raises(ValueError):
        make_ic("wedge")
