import math

from hypothesis import given, strategies as st

from lpplab import oracle
from lpplab.field import EXCLUDED, LatticePoint
from lpplab.oracle import brute_point_to_point, run_oracle_suite, up_right_paths
from lpplab.passage import Rectangle


@given(d1=st.integers(0, 5), d2=st.integers(0, 5))
def test_path_count_is_binomial(d1, d2):
    paths = list(up_right_paths((0, 0), (d1, d2)))
    assert len(paths) == math.comb(d1 + d2, d1)
    assert all(len(p) == d1 + d2 + 1 for p in paths)
    assert len({tuple(p) for p in paths}) == len(paths)


def test_no_paths_downward():
    assert list(up_right_paths((1, 1), (0, 3))) == []


def test_brute_on_hand_grid(grid2x2):
    # endpoint excluded: max(1 + 3, 1 + 2)
    assert brute_point_to_point(grid2x2, (0, 0), (1, 1)) == 4.0
    assert brute_point_to_point(grid2x2, (0, 0), (0, 0)) == 0.0
    blocked = Rectangle(0, 2, -1, 0)
    assert brute_point_to_point(grid2x2, (0, 0), (1, 1), blocked) == 3.0
    assert brute_point_to_point(grid2x2, (0, 0), (1, 1), Rectangle(0, 2, 0, 0)) == EXCLUDED


def test_suite_passes_quickly():
    rep = run_oracle_suite(8, 500, 1)
    assert rep.passed, rep.failures[:3]
    assert rep.checks >= 4 * 500
    assert rep.seconds < 10


def test_suite_catches_a_broken_solver(monkeypatch):
    real = oracle.point_to_point
    monkeypatch.setattr(oracle, "point_to_point",
                        lambda f, u, v, region: real(f, u, v, region) + 1e-6)
    rep = run_oracle_suite(6, 20, 2)
    assert not rep.passed
    assert all(name == "point_to_point" for name, *_ in rep.failures)


def test_lattice_point_on_line():
    assert LatticePoint.on_line(3, 1) == LatticePoint(4, 2)
