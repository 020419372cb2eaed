import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpplab.field import DomainError, Droplet, FieldSpec, Flat, LatticePoint
from lpplab.geodesic import (
    GeodesicPath,
    NoPathError,
    argmax_on_line,
    crossing_point,
    line_to_point_geodesic,
    overlap,
    profile_path,
    trace_geodesic,
    trace_transverse,
    transversal_fluctuation,
)
from lpplab.passage import BackwardProfile, Strip, solve_backward, solve_forward

seeds = st.integers(0, 2**64 - 1)


def _pts(path):
    return [tuple(map(int, p)) for p in path.points]


def test_two_by_two_geodesic(grid2x2):
    sol = solve_forward(grid2x2, Droplet(), 2, apex=(1, 1))
    path = trace_geodesic(sol, (1, 1))
    assert _pts(path) == [(0, 0), (1, 0), (1, 1)]
    assert path.weight == 4.0


@given(seed=seeds)
def test_traced_weight_equals_solver_value(seed):
    sol = solve_forward(FieldSpec(seed=seed), Flat(), 40)
    path = trace_geodesic(sol, (20, 20))
    assert path.weight == sol.diag[20]


def test_tie_prefers_lower_predecessor():
    t = np.array([[1.0, 2.0], [2.0, 5.0]])
    sol = solve_forward(FieldSpec.from_table(t), Droplet(), 2, apex=(1, 1))
    # v - (0,1) of (1,1) is (1,0)
    assert _pts(trace_geodesic(sol, (1, 1))) == [(0, 0), (1, 0), (1, 1)]
    t2 = np.array([[1.0, 2.0], [2.0, 5.0]]).T.copy()
    t2[0, 1] = t2[1, 0] = 7.0
    sol2 = solve_forward(FieldSpec.from_table(t2), Droplet(), 2, apex=(1, 1))
    assert _pts(trace_geodesic(sol2, (1, 1))) == [(0, 0), (1, 0), (1, 1)]


def test_excluded_endpoint_raises(grid2x2):
    sol = solve_forward(grid2x2, Droplet(), 2, Strip(0), apex=(1, 1))
    with pytest.raises(NoPathError):
        trace_geodesic(sol, (1, 1))


@given(seed=seeds)
def test_path_steps_and_crossings(seed):
    n = 32
    sol = solve_forward(FieldSpec(seed=seed), Flat(), 2 * n)
    path = trace_geodesic(sol, (n, n))
    steps = np.diff(path.points, axis=0)
    assert np.all(steps.sum(axis=1) == 1) and np.all(steps.min(axis=1) == 0)
    assert np.array_equal(path.sums, np.arange(2 * n + 1))
    assert crossing_point(path, 0) == path.start
    assert crossing_point(path, n) == LatticePoint(n, n)


def test_crossing_point_matches_scan():
    n, r = 64, 16
    sol = solve_forward(FieldSpec(seed=64), Flat(), 2 * n)
    path = trace_geodesic(sol, (n, n))
    scan = [p for p in _pts(path) if sum(p) == 2 * r]
    assert [tuple(crossing_point(path, r))] == scan
    with pytest.raises(DomainError):
        crossing_point(path, n + 1)


def test_transversal_fluctuation_examples():
    assert transversal_fluctuation(GeodesicPath([(0, 0), (1, 0), (1, 1)])) == 1
    zig = [(0, 0)]
    for k in range(10):
        x, y = zig[-1]
        zig.append((x + 1, y) if k % 2 == 0 else (x, y + 1))
    assert transversal_fluctuation(GeodesicPath(zig)) == 1


@given(m=st.integers(-20, 20), seed=seeds)
def test_tf_at_least_start_offset(m, seed):
    rng = np.random.default_rng(seed % 2**32)
    pts = [(m, -m)]
    for _ in range(30):
        x, y = pts[-1]
        pts.append((x + 1, y) if rng.random() < 0.5 else (x, y + 1))
    assert transversal_fluctuation(GeodesicPath(pts)) >= 2 * abs(m)


def test_bad_steps_rejected():
    with pytest.raises(ValueError):
        GeodesicPath([(0, 0), (1, 1)])


def test_overlap_examples():
    p = GeodesicPath([(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)])
    q = GeodesicPath([(0, 0), (0, 1), (0, 2), (1, 2), (2, 2)])
    assert overlap(p, p) == len(p)
    assert overlap(GeodesicPath([(1, 0), (2, 0)]), GeodesicPath([(0, 1), (0, 2)])) == 0
    assert overlap(p, q) == 2
    assert overlap(p, q, (1, 3)) == 0


@given(seed=seeds, k=st.integers(1, 12))
def test_overlap_common_suffix(seed, k):
    rng = np.random.default_rng(seed % 2**32)
    a, b = [(0, 0)], [(1, -1)]
    for pts in (a, b):
        for _ in range(8):
            x, y = pts[-1]
            pts.append((x + 1, y) if rng.random() < 0.5 else (x, y + 1))
    # join both at a shared point then share k vertices
    end_a, end_b = a[-1], b[-1]
    meet = (max(end_a[0], end_b[0]) + 1, max(end_a[1], end_b[1]) + 1)
    for pts in (a, b):
        while pts[-1] != meet:
            x, y = pts[-1]
            pts.append((x + 1, y) if x < meet[0] else (x, y + 1))
    suffix = [meet]
    for i in range(k - 1):
        x, y = suffix[-1]
        suffix.append((x + 1, y) if i % 2 else (x, y + 1))
    pa, pb = GeodesicPath(a + suffix[1:]), GeodesicPath(b + suffix[1:])
    expect = len(set(_pts(pa)) & set(_pts(pb)))
    assert overlap(pa, pb) == expect >= k


def test_argmax_examples():
    prof = BackwardProfile.synthetic(3, np.arange(-3, 4), np.array([0, 1, 2, 5, 2, 1, 0.0]))
    assert argmax_on_line(prof) == LatticePoint.on_line(3, 0)
    tie = BackwardProfile.synthetic(3, np.arange(-2, 3), np.array([0, 4, 1, 4, 0.0]))
    assert argmax_on_line(tie) == LatticePoint.on_line(3, -1)


@given(seed=seeds)
def test_umax_matches_forward_from_line(seed):
    f = FieldSpec(seed=seed)
    n, r, w = 20, 5, 6
    prof = solve_backward(f, (n, n), r, w)
    u = argmax_on_line(prof)
    path = line_to_point_geodesic(f, r, (n, n), w)
    assert path.start == u
    assert path.weight == pytest.approx(prof.values.max(), rel=1e-12)


@given(seed=seeds)
def test_profile_path_weight(seed):
    f = FieldSpec(seed=seed)
    prof = solve_backward(f, (12, 12), 3, 4)
    for m in (-2, 0, 3):
        path = profile_path(prof, m)
        assert path.start == LatticePoint.on_line(3, m) and path.end == LatticePoint(12, 12)


@given(seed=seeds)
def test_geodesics_do_not_cross(seed):
    n = 24
    sol = solve_forward(FieldSpec(seed=seed), Flat(), 2 * n, spread=4)
    paths = [trace_transverse(sol, 2 * n, 2 * m) for m in range(-4, 5)]
    for lo, hi in zip(paths, paths[1:]):
        assert np.all(lo <= hi)
