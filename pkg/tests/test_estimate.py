import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpplab.estimate import (
    ReplicaConfig,
    covariance,
    covariance_exponent,
    event_probability,
    exponent_fit,
    loglog_fit,
    replica_seed,
    run_replicas,
    tail_curve,
    tau_grid,
    variance,
)
from lpplab.field import Droplet, FieldSpec
from lpplab.passage import solve_forward


def test_covariance_hand_values():
    assert covariance([1, 2, 3], [1, 2, 3]).estimate == 1.0
    assert covariance([1, 2, 3], [2, 4, 6]).estimate == 2.0


def test_covariance_errors():
    with pytest.raises(ValueError):
        covariance([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        covariance([1], [1])


@given(xs=st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=50))
def test_covariance_self_is_variance(xs):
    a, b = covariance(xs, xs), variance(xs)
    assert a.estimate == b.estimate and a.stderr == b.stderr
    assert a.ci_low <= a.estimate <= a.ci_high and a.stderr >= 0


def test_jackknife_matches_explicit_loop():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=40), rng.normal(size=40)
    loo = np.array([np.cov(np.delete(x, i), np.delete(y, i))[0, 1] for i in range(40)])
    se = np.sqrt(39 / 40 * np.sum((loo - loo.mean()) ** 2))
    rep = covariance(x, y)
    assert rep.estimate == pytest.approx(np.cov(x, y)[0, 1], rel=1e-12)
    assert rep.stderr == pytest.approx(se, rel=1e-10)


def test_exact_power_law_fit():
    tau = tau_grid()
    fit = exponent_fit(tau, tau ** (4 / 3))
    assert fit.slope == pytest.approx(4 / 3, abs=1e-12) and fit.r2 == pytest.approx(1.0)
    assert exponent_fit(tau, np.full(6, 2.5)).slope == pytest.approx(0.0, abs=1e-12)


@given(c=st.floats(1e-3, 1e3))
def test_fit_scale_equivariance(c):
    tau = tau_grid()
    rho = tau**1.3 * (1 + 0.1 * np.sin(np.arange(6)))
    a, b = exponent_fit(tau, rho), exponent_fit(tau, c * rho)
    assert b.slope == pytest.approx(a.slope, abs=1e-10)
    assert b.intercept == pytest.approx(a.intercept + np.log(c), abs=1e-10)


def test_fit_excludes_nonpositive():
    tau = tau_grid()
    rho = tau**1.0
    rho[2] = -0.1
    fit = loglog_fit(tau, rho)
    assert fit.excluded == (2,) and len(fit.tau) == 5
    with pytest.raises(ValueError):
        loglog_fit(tau[:3], np.array([1.0, -1.0, 0.0]))


def test_event_probability_examples():
    rep = event_probability(np.ones(100, dtype=bool))
    assert rep.estimate == 1.0 and rep.ci_low > 0.9 and rep.ci_high == pytest.approx(1.0)
    half = event_probability(np.arange(1000) % 2 == 0)
    assert half.estimate == 0.5
    assert half.ci_high - 0.5 == pytest.approx(0.031, abs=0.001)
    w1 = event_probability(np.arange(1000) % 2 == 0)
    w4 = event_probability(np.arange(4000) % 2 == 0)
    assert (w4.ci_high - w4.ci_low) < 0.6 * (w1.ci_high - w1.ci_low)


def test_tail_curve_requires_samples():
    with pytest.raises(ValueError):
        tail_curve(np.zeros(50), [1.0])


def _droplet_stat(n, count, seed):
    out = []
    for k in range(count):
        sol = solve_forward(FieldSpec(seed=replica_seed(seed, k)), Droplet(), 2 * n)
        out.append((sol.diag[n] - 4 * n) / n ** (1 / 3))
    return np.array(out)


def test_tail_curve_shape():
    stat = _droplet_stat(100, 2000, 5)
    curve = tail_curve(stat + 2.0, [0.0, 0.5, 1.0, 2.0, 3.0])
    assert 0.05 <= curve[0][1] <= 0.95 and 0.05 <= curve[0][2] <= 0.95
    ups = [c[1] for c in curve]
    los = [c[2] for c in curve]
    assert ups == sorted(ups, reverse=True) and los == sorted(los, reverse=True)


def test_replica_seeds_distinct():
    seeds = {replica_seed(7, k) for k in range(10000)}
    assert len(seeds) == 10000


def test_config_validation():
    with pytest.raises(ValueError):
        ReplicaConfig(n=10, rs=(5,), replicas=0)
    with pytest.raises(ValueError):
        ReplicaConfig(n=10, rs=(11,))


def test_thread_count_does_not_change_records():
    cfg = ReplicaConfig(n=40, rs=(5, 10), replicas=150, seed=3, umax=True, constrained_j=0)
    one = list(run_replicas(cfg, threads=1, chunk=16))
    eight = list(run_replicas(cfg, threads=8, chunk=16))
    assert one == eight


def test_constrained_never_exceeds_unconstrained():
    cfg = ReplicaConfig(n=60, rs=(10, 20), replicas=50, seed=4, constrained_j=0)
    for rec in run_replicas(cfg):
        assert rec.x_r_constrained <= rec.x_r


def test_decoupled_covariance_contains_zero():
    cfg = ReplicaConfig(n=40, rs=(20,), replicas=10**4, seed=8, geometry=False, decoupled=True)
    recs = list(run_replicas(cfg, threads=4))
    rep = covariance([r.x_r for r in recs], [r.x_n for r in recs])
    assert rep.ci_low <= 0 <= rep.ci_high


def test_positive_association():
    cfg = ReplicaConfig(n=500, rs=(250,), replicas=10**4, seed=9, geometry=False)
    recs = list(run_replicas(cfg, threads=4))
    rep = covariance([r.x_r for r in recs], [r.x_n for r in recs])
    assert rep.ci_low > 0


def test_covariance_exponent_shapes():
    cfg = ReplicaConfig(n=80, rs=(8, 16, 24), replicas=400, seed=2, geometry=False)
    reports, fit = covariance_exponent(list(run_replicas(cfg)), 80)
    assert [r.config["r"] for r in reports] == [8, 16, 24]
    assert all(r.n_replicas == 400 for r in reports)
    assert np.isfinite(fit.slope)
