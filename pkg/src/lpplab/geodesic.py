"""Geodesic tracing from solver backpointers and path statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .field import DomainError, LatticePoint, as_point, is_excluded
from .passage import BackwardProfile, PassageSolution, solve_from_line


class NoPathError(DomainError):
    """The requested endpoint is not reachable."""


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Up-right lattice path stored as an (k, 2) integer array of (v1, v2)."""

    points: np.ndarray
    weight: float = float("nan")

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
        steps = np.diff(pts, axis=0)
        if steps.size and not np.all((steps.sum(axis=1) == 1) & (steps.min(axis=1) == 0)):
            raise ValueError("consecutive points must differ by (1,0) or (0,1)")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @property
    def start(self) -> LatticePoint:
        return LatticePoint(*map(int, self.points[0]))

    @property
    def end(self) -> LatticePoint:
        return LatticePoint(*map(int, self.points[-1]))

    @property
    def sums(self) -> np.ndarray:
        return self.points.sum(axis=1)

    @property
    def transverse(self) -> np.ndarray:
        return self.points[:, 0] - self.points[:, 1]

    @classmethod
    def from_sa(cls, s0: int, a: np.ndarray, weight=float("nan")) -> "GeodesicPath":
        a = np.asarray(a, dtype=np.int64)
        s = s0 + np.arange(a.shape[0], dtype=np.int64)
        return cls(np.column_stack([(s + a) // 2, (s - a) // 2]), weight)


def trace_transverse(sol: PassageSolution, s_end: int, a_end: int) -> np.ndarray:
    """Transverse coordinates of the geodesic to (s_end, a_end), one per row
    from the base row upward.  No weight check; for bulk statistics."""
    if sol.layout.index(s_end, a_end) < 0:
        raise NoPathError(f"(s={s_end}, a={a_end}) outside the solved cone")
    out = np.empty(s_end - sol.layout.s0 + 1, dtype=np.int64)
    K.trace_up(sol.bits, sol.layout.s0, sol.layout.lo, sol.layout.off, s_end, a_end, out)
    return out


def _check_weight(traced: float, value: float):
    if abs(traced - value) > 1e-9 * max(1.0, abs(value)):
        raise RuntimeError(f"traced weight {traced!r} disagrees with solver value {value!r}")


def trace_geodesic(sol: PassageSolution, endpoint) -> GeodesicPath:
    """Geodesic to ``endpoint`` following the stored backpointers."""
    v = as_point(endpoint)
    value = sol.value_at(v)
    if is_excluded(value):
        raise NoPathError(f"no admissible path reaches {tuple(v)}")
    a = trace_transverse(sol, v.d, v.a)
    path = GeodesicPath.from_sa(sol.layout.s0, a)
    pts = path.points
    start_val = sol.base_values[(a[0] - sol.layout.lo[0]) // 2]
    w = sol.field.weights_at(pts[:-1, 0], pts[:-1, 1]) if len(pts) > 1 else np.zeros(0)
    # same summation order as the sweep, so the result is bitwise equal
    traced = float(np.cumsum(np.concatenate([[start_val], w]))[-1])
    _check_weight(traced, value)
    return GeodesicPath(pts, traced)


def profile_path(profile: BackwardProfile, m: int) -> GeodesicPath:
    """Geodesic from r + (m, -m) to the profile's target via successor bits."""
    if profile.layout is None:
        raise DomainError("synthetic profiles carry no backpointers")
    value = profile.value(m)
    if is_excluded(value):
        raise NoPathError(f"m={m} cannot reach the target")
    s0, top = 2 * profile.r, profile.target.d
    out = np.empty(top - s0 + 1, dtype=np.int64)
    K.trace_down(profile.bits, profile.layout.s0, profile.layout.lo, profile.layout.off,
                 s0, 2 * m, top, out)
    path = GeodesicPath.from_sa(s0, out)
    pts = path.points
    w = profile.field.weights_at(pts[:-1, 0], pts[:-1, 1])
    traced = float(np.cumsum(np.concatenate([[0.0], w[::-1]]))[-1])
    _check_weight(traced, value)
    return GeodesicPath(pts, traced)


def line_to_point_geodesic(field, r: int, target, half_width: int) -> GeodesicPath:
    """Geodesic from the segment {r + (m, -m): |m| <= half_width} to ``target``,
    computed by an upward sweep that starts on the segment."""
    t = as_point(target)
    sol = solve_from_line(field, r, -half_width, half_width, t)
    return trace_geodesic(sol, t)


def crossing_point(path: GeodesicPath, r: int) -> LatticePoint:
    """The unique vertex of ``path`` on the line x + y = 2r."""
    s = path.sums
    k = 2 * r - int(s[0])
    if k < 0 or k >= len(path):
        raise DomainError(f"line x+y={2 * r} not crossed by the path (sums {s[0]}..{s[-1]})")
    return LatticePoint(*map(int, path.points[k]))


def transversal_fluctuation(path: GeodesicPath) -> int:
    """max |v1 - v2| over the path's vertices."""
    return int(np.abs(path.transverse).max())


def overlap(p: GeodesicPath, q: GeodesicPath, sum_range=None) -> int:
    """Number of shared vertices, optionally only those with sum in ``sum_range``
    (inclusive pair)."""
    lo = max(int(p.sums[0]), int(q.sums[0]))
    hi = min(int(p.sums[-1]), int(q.sums[-1]))
    if sum_range is not None:
        lo, hi = max(lo, int(sum_range[0])), min(hi, int(sum_range[1]))
    if hi < lo:
        return 0
    pa = p.transverse[lo - p.sums[0]: hi - p.sums[0] + 1]
    qa = q.transverse[lo - q.sums[0]: hi - q.sums[0] + 1]
    return int(np.count_nonzero(pa == qa))


def argmax_on_line(profile: BackwardProfile) -> LatticePoint:
    """Maximiser of the profile; ties go to the smaller transverse coordinate."""
    if profile.m.size == 0:
        raise DomainError("empty profile")
    i = int(np.argmax(profile.values))
    return LatticePoint.on_line(profile.r, int(profile.m[i]))
