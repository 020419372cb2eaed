"""Exhaustive path enumeration on small lattices, used to check the solvers."""

from __future__ import annotations

import itertools
import time
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import (
    EXCLUDED,
    Droplet,
    FieldSpec,
    Flat,
    LatticePoint,
    Stationary,
    Table,
    as_point,
    initial_condition_at,
    weight_at,
)
from .passage import (
    All,
    Complement,
    Intersection,
    Rectangle,
    Strip,
    exit_constrained_max,
    point_to_point,
    solve_backward,
    solve_forward,
)


def up_right_paths(u, v):
    """All up-right paths from u to v as lists of points."""
    u, v = as_point(u), as_point(v)
    d1, d2 = v.v1 - u.v1, v.v2 - u.v2
    if d1 < 0 or d2 < 0:
        return
    n = d1 + d2
    for rights in itertools.combinations(range(n), d1):
        pts = [u]
        x, y = u
        rs = set(rights)
        for k in range(n):
            if k in rs:
                x += 1
            else:
                y += 1
            pts.append(LatticePoint(x, y))
        yield pts


class _Weights:
    """Memoised weight lookup for one field."""

    def __init__(self, field: FieldSpec):
        self.field = field
        self.cache = {}

    def __call__(self, p) -> float:
        w = self.cache.get(p)
        if w is None:
            w = self.cache[p] = weight_at(self.field, p)
        return w


def _path_weight(wfn, pts, start_value=0.0):
    total = start_value
    for p in pts[:-1]:
        total += wfn(p)
    return total


def brute_point_to_point(field, u, v, region=All()) -> float:
    wfn = _Weights(field)
    best = EXCLUDED
    for pts in up_right_paths(u, v):
        if all(region.contains(p) for p in pts):
            best = max(best, _path_weight(wfn, pts))
    return best


def _starts_below(v):
    v = as_point(v)
    return [LatticePoint(m, -m) for m in range(-v.v2, v.v1 + 1)]


def brute_line_to_point(field, ic, v, region=All()) -> float:
    wfn = _Weights(field)
    best = EXCLUDED
    for u in _starts_below(v):
        pi = initial_condition_at(ic, u)
        if pi == EXCLUDED:
            continue
        for pts in up_right_paths(u, v):
            if all(region.contains(p) for p in pts):
                best = max(best, _path_weight(wfn, pts, pi))
    return best


def brute_exit(field, ic, r, strip, end_half_width) -> float:
    wfn = _Weights(field)
    best = EXCLUDED
    for m in range(-end_half_width, end_half_width + 1):
        v = LatticePoint.on_line(r, m)
        for u in _starts_below(v):
            pi = initial_condition_at(ic, u)
            if pi == EXCLUDED:
                continue
            for pts in up_right_paths(u, v):
                if any(abs(p.a) > strip for p in pts):
                    best = max(best, _path_weight(wfn, pts, pi))
    return best


def _close(x, y, rtol=1e-12):
    if x == EXCLUDED or y == EXCLUDED:
        return x == y
    return abs(x - y) <= rtol * max(1.0, abs(y))


@dataclass
class OracleReport:
    cases: int
    checks: int = 0
    failures: list = dc_field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures


def _random_field(rng):
    if rng.random() < 0.5:
        return FieldSpec(seed=int(rng.integers(0, 2**63)))
    table = rng.exponential(size=(24, 24))
    return FieldSpec.from_table(table, origin=(-12, -12))


def _random_ic(rng):
    kind = rng.integers(0, 4)
    if kind == 0:
        return Flat()
    if kind == 1:
        return Droplet()
    if kind == 2:
        return Stationary(int(rng.integers(0, 2**63)))
    ms = [int(m) for m in rng.choice(np.arange(-6, 7), size=rng.integers(1, 6), replace=False)]
    vals = [float(rng.normal()) if rng.random() < 0.8 else EXCLUDED for _ in ms]
    return Table(tuple(ms), tuple(vals))


def _random_region(rng, max_sum):
    kind = rng.integers(0, 5)
    if kind == 0:
        return All()
    if kind == 1:
        return Strip(float(rng.integers(0, 5)) + rng.choice([0.0, 0.5]))
    s_lo = int(rng.integers(-1, 3))
    rect = Rectangle(s_lo, s_lo + int(rng.integers(2, max_sum + 2)),
                     -int(rng.integers(0, 6)), int(rng.integers(0, 6)))
    if kind == 2:
        return rect
    if kind == 3:
        return Complement(Rectangle(int(rng.integers(1, 4)), int(rng.integers(4, 7)),
                                    -int(rng.integers(0, 2)), int(rng.integers(0, 2))))
    return Intersection([Strip(float(rng.integers(1, 6))), Complement(rect)])


def run_oracle_suite(max_sum: int = 8, cases: int = 500, seed: int = 1) -> OracleReport:
    """Compare every solver against enumeration on ``cases`` random lattices."""
    rng = np.random.default_rng(seed)
    report = OracleReport(cases)
    t0 = time.perf_counter()

    def check(name, got, want, info):
        report.checks += 1
        if not _close(got, want):
            report.failures.append((name, info, got, want))

    for c in range(cases):
        field = _random_field(rng)
        ic = _random_ic(rng)
        region = _random_region(rng, max_sum)
        d = int(rng.integers(1, max_sum + 1))
        v1 = int(rng.integers(-2, d + 3))
        v = LatticePoint(v1, d - v1)
        info = dict(case=c, v=tuple(v), ic=ic.describe(), region=repr(region))

        # point-to-point from a random predecessor of v
        u = LatticePoint(v.v1 - int(rng.integers(0, 4)), v.v2 - int(rng.integers(0, 4)))
        check("point_to_point", point_to_point(field, u, v, region),
              brute_point_to_point(field, u, v, region), info)

        # line-to-point under the initial condition, with and without region
        sol = solve_forward(field, ic, v.d, apex=tuple(v), keep="all")
        check("line_to_point", sol.value_at(v), brute_line_to_point(field, ic, v), info)
        sol_r = solve_forward(field, ic, v.d, region, apex=tuple(v), keep="all")
        check("line_to_point_region", sol_r.value_at(v),
              brute_line_to_point(field, ic, v, region), info)

        # backward profile onto a lower line
        if v.d >= 2:
            r = int(rng.integers(0, (v.d - 1) // 2 + 1))
            hw = int(rng.integers(0, 4))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                prof = solve_backward(field, v, r, hw)
            for m, val in zip(prof.m, prof.values):
                check("backward", float(val),
                      brute_point_to_point(field, LatticePoint.on_line(r, int(m)), v), info)

        # exit-constrained maximum
        r = int(rng.integers(0, max_sum // 2 + 1))
        strip = float(rng.integers(0, 4))
        ehw = int(rng.integers(0, 3))
        check("exit_constrained", exit_constrained_max(field, ic, r, strip, ehw),
              brute_exit(field, ic, r, strip, ehw), info)
    report.seconds = time.perf_counter() - t0
    return report
