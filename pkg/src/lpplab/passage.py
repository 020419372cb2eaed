"""Passage-time solvers: point-to-point, line-to-point, backward profiles and
region- or exit-constrained variants.

All solvers sweep anti-diagonals in ``(s, a) = (v1+v2, v1-v2)`` coordinates.  A
path's weight is the sum of the vertex weights along it except the last vertex.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels as K
from .field import (
    EXCLUDED,
    DomainError,
    FieldSpec,
    InitialCondition,
    LatticePoint,
    as_point,
    scratch,
)


class OrderingError(DomainError):
    """The start point does not precede the end point coordinatewise."""


# ----------------------------------------------------------------- regions


class Region:
    """Membership predicate on lattice points."""

    def contains(self, u) -> bool:
        u = as_point(u)
        return self._contains(u.d, u.a)

    def _contains(self, s, a) -> bool:
        raise NotImplementedError

    def _ops(self) -> list:
        raise NotImplementedError

    def bounds(self, s: np.ndarray):
        """Per-row transverse bounds (float arrays, +-inf when unbounded)."""
        return np.full(s.shape, -np.inf), np.full(s.shape, np.inf)

    @property
    def trivial(self) -> bool:
        return False


@dataclass(frozen=True)
class All(Region):
    def _contains(self, s, a):
        return True

    def _ops(self):
        return [(K.OP_ALL,)]

    @property
    def trivial(self):
        return True


@dataclass(frozen=True)
class Strip(Region):
    """Points with |v1 - v2| <= half_width."""

    half_width: float

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("strip half-width must be nonnegative")

    def _contains(self, s, a):
        return abs(a) <= self.half_width

    def _ops(self):
        return [(K.OP_STRIP, float(self.half_width))]

    def bounds(self, s):
        w = float(self.half_width)
        return np.full(s.shape, -w), np.full(s.shape, w)


@dataclass(frozen=True)
class Rectangle(Region):
    """Points with s_lo <= v1+v2 <= s_hi and a_lo <= v1-v2 <= a_hi."""

    s_lo: float
    s_hi: float
    a_lo: float
    a_hi: float

    def _contains(self, s, a):
        return self.s_lo <= s <= self.s_hi and self.a_lo <= a <= self.a_hi

    def _ops(self):
        return [(K.OP_RECT, float(self.s_lo), float(self.s_hi), float(self.a_lo), float(self.a_hi))]

    def bounds(self, s):
        inside = (s >= self.s_lo) & (s <= self.s_hi)
        return np.where(inside, float(self.a_lo), np.inf), np.where(inside, float(self.a_hi), -np.inf)


@dataclass(frozen=True)
class Complement(Region):
    inner: Region

    def _contains(self, s, a):
        return not self.inner._contains(s, a)

    def _ops(self):
        return self.inner._ops() + [(K.OP_NOT,)]


@dataclass(frozen=True)
class Intersection(Region):
    parts: tuple

    def __init__(self, parts: Iterable[Region]):
        object.__setattr__(self, "parts", tuple(parts))

    def _contains(self, s, a):
        return all(p._contains(s, a) for p in self.parts)

    def _ops(self):
        ops = []
        for p in self.parts:
            ops += p._ops()
        return ops + [(K.OP_AND, float(len(self.parts)))]

    def bounds(self, s):
        lo, hi = np.full(s.shape, -np.inf), np.full(s.shape, np.inf)
        for p in self.parts:
            plo, phi = p.bounds(s)
            lo, hi = np.maximum(lo, plo), np.minimum(hi, phi)
        return lo, hi

    @property
    def trivial(self):
        return all(p.trivial for p in self.parts)


def compile_region(region: Region):
    """Postfix opcode and parameter arrays for the numba membership test."""
    ops = region._ops()
    codes = np.array([o[0] for o in ops], dtype=np.int64)
    prm = np.zeros((len(ops), 4))
    for i, o in enumerate(ops):
        prm[i, : len(o) - 1] = o[1:]
    return codes, prm


# ----------------------------------------------------------------- layouts


@dataclass(frozen=True, eq=False)
class RowLayout:
    """Cells of consecutive rows s0, s0+1, ... with inclusive a-bounds."""

    s0: int
    lo: np.ndarray
    hi: np.ndarray
    off: np.ndarray
    count: np.ndarray
    total: int

    @classmethod
    def build(cls, s0: int, lo, hi) -> "RowLayout":
        lo = np.asarray(lo, dtype=np.int64).copy()
        hi = np.asarray(hi, dtype=np.int64).copy()
        s = s0 + np.arange(lo.shape[0], dtype=np.int64)
        lo += (lo - s) & 1
        hi -= (hi - s) & 1
        empty = hi < lo
        hi[empty] = lo[empty] - 2
        count = np.where(empty, 0, (hi - lo) // 2 + 1)
        off = np.zeros(lo.shape[0], dtype=np.int64)
        if lo.shape[0] > 1:
            np.cumsum(count[:-1], out=off[1:])
        return cls(s0, lo, hi, off, count, int(count.sum()))

    @property
    def s_top(self) -> int:
        return self.s0 + self.lo.shape[0] - 1

    def index(self, s: int, a: int) -> int:
        """Flat index of cell (s, a), or -1 when outside the layout."""
        k = s - self.s0
        if k < 0 or k >= self.lo.shape[0] or (a - s) % 2:
            return -1
        if a < self.lo[k] or a > self.hi[k]:
            return -1
        return int(self.off[k] + (a - self.lo[k]) // 2)

    def row_a(self, s: int) -> np.ndarray:
        k = s - self.s0
        return np.arange(self.lo[k], self.hi[k] + 1, 2, dtype=np.int64)


def _to_int_bounds(s, lo_f, hi_f, lo_i, hi_i):
    """Tighten integer bounds with float bounds (+-inf allowed)."""
    lo = np.minimum(np.maximum(lo_i, np.ceil(lo_f)), hi_i + 2)
    hi = np.maximum(np.minimum(hi_i, np.floor(hi_f)), lo_i - 2)
    return lo.astype(np.int64), hi.astype(np.int64)


def _cone_layout(s0, s_top, base_lo, base_hi, apex=None, spread=0, region=None):
    """Cells reachable from row-s0 cells a in [base_lo, base_hi] that can still
    reach a point of apex + {(k, -k): |k| <= spread}."""
    s = np.arange(s0, s_top + 1, dtype=np.int64)
    lo = base_lo - (s - s0)
    hi = base_hi + (s - s0)
    if apex is not None:
        t1, t2 = apex
        lo = np.maximum(lo, s - 2 * (t2 + spread))
        hi = np.minimum(hi, 2 * (t1 + spread) - s)
    if region is not None and not region.trivial:
        rlo, rhi = region.bounds(s.astype(np.float64))
        lo, hi = _to_int_bounds(s, rlo, rhi, lo, hi)
    return RowLayout.build(s0, lo, hi)


# ----------------------------------------------------------------- solutions


@dataclass(eq=False)
class PassageSolution:
    """Forward sweep result: kept rows of values, diagonal values and packed
    backpointer bits (bit 1 means the best predecessor is v - (1, 0))."""

    field: FieldSpec
    ic: InitialCondition | None
    region: Region
    layout: RowLayout
    bits: np.ndarray
    rows: dict
    diag: np.ndarray
    apex: tuple
    spread: int
    empty: bool
    base_values: np.ndarray

    @property
    def max_sum(self) -> int:
        return self.layout.s_top

    def _in_cone(self, s, a) -> bool:
        if s < self.layout.s0 or s > self.layout.s_top or (a - s) % 2:
            return False
        t1, t2 = self.apex
        return s - 2 * (t2 + self.spread) <= a <= 2 * (t1 + self.spread) - s

    def value_at(self, u) -> float:
        """X_u from the solution; EXCLUDED when u is unreachable."""
        u = as_point(u)
        s, a = u.d, u.a
        if not self._in_cone(s, a):
            raise DomainError(f"{tuple(u)} lies outside the solved cone")
        idx = self.layout.index(s, a)
        if idx < 0:
            return EXCLUDED
        if a == 0 and s >= 0 and s % 2 == 0:
            return float(self.diag[s // 2])
        if s not in self.rows:
            raise KeyError(f"row s={s} was not kept; pass keep=... to solve_forward")
        return float(self.rows[s][(a - self.layout.lo[s - self.layout.s0]) // 2])

    def row(self, s: int):
        """(a values, X values) on the kept row s."""
        if s not in self.rows:
            raise KeyError(f"row s={s} was not kept")
        return self.layout.row_a(s), self.rows[s]

    def line_profile(self, r: int):
        """(m, X) along the line x + y = 2r."""
        a, vals = self.row(2 * r)
        return a // 2, vals


def _keep_sums(keep, s0, s_top):
    if keep is None:
        return {s_top}
    if isinstance(keep, str):
        if keep == "all":
            return set(range(s0, s_top + 1))
        if keep == "last":
            return {s_top}
        raise ValueError(f"unknown keep option {keep!r}")
    sums = {int(s) for s in keep}
    bad = [s for s in sums if s < s0 or s > s_top]
    if bad:
        raise DomainError(f"kept rows {sorted(bad)} outside [{s0}, {s_top}]")
    return sums | {s_top}


def _forward(field, layout, base, region, keep_sums):
    """Run the forward kernel on a layout and wrap the result."""
    w = field.row_weights(layout.s0, layout.lo, layout.hi, layout.off, layout.total,
                          out=scratch("w", layout.total, np.float64))
    nrows = layout.lo.shape[0]
    keep_off = np.full(nrows, -1, dtype=np.int64)
    pos = 0
    kept_rows = sorted(keep_sums)
    for s in kept_rows:
        k = s - layout.s0
        keep_off[k] = pos
        pos += int(layout.count[k])
    kept = np.empty(pos)
    diag = np.full(max(layout.s_top, 0) // 2 + 1, EXCLUDED)
    bits = scratch("bits", layout.total, np.bool_)
    if region.trivial:
        mask = np.ones(1, dtype=np.bool_)
        use_mask = False
    else:
        codes, prm = compile_region(region)
        mask = scratch("mask", layout.total, np.bool_)
        K.region_mask(codes, prm, layout.s0, layout.lo, layout.hi, layout.off, mask)
        use_mask = True
    K.forward_sweep(w, layout.s0, layout.lo, layout.hi, layout.off, base, mask, use_mask,
                    bits, keep_off, kept, diag)
    packed = np.packbits(bits, bitorder="little")
    rows = {}
    for s in kept_rows:
        k = s - layout.s0
        rows[s] = kept[keep_off[k]: keep_off[k] + layout.count[k]]
    return packed, rows, diag


def _apex_of(max_sum: int):
    return ((max_sum + 1) // 2, max_sum // 2)


def solve_forward(field: FieldSpec, ic: InitialCondition, max_sum: int, region: Region = All(),
                  *, apex=None, spread: int = 0, keep=None) -> PassageSolution:
    """X^pi_v for every v in the cone below the apex, in one upward sweep.

    The apex defaults to (ceil(max_sum/2), floor(max_sum/2)); ``spread`` widens the
    cone to every point below apex + (k, -k), |k| <= spread.  Only the last row,
    the diagonal and the rows listed in ``keep`` ("all" for every row) are stored.
    """
    if max_sum < 0:
        raise DomainError("max_sum must be nonnegative")
    apex = _apex_of(max_sum) if apex is None else tuple(int(c) for c in apex)
    if apex[0] + apex[1] != max_sum:
        raise DomainError("apex must lie on the top row")
    t1, t2 = apex
    lo0, hi0 = -2 * (t2 + spread), 2 * (t1 + spread)
    sup = ic.support()
    if sup is not None:
        lo0, hi0 = max(lo0, sup[0]), min(hi0, sup[1])
    layout = _cone_layout(0, max_sum, lo0, hi0, apex, spread, region)
    a0 = layout.row_a(0)
    base = np.ascontiguousarray(ic.values(a0), dtype=np.float64)
    if not region.trivial:
        base = np.where([region._contains(0, int(a)) for a in a0], base, EXCLUDED) if a0.size else base
    empty = not np.any(base != EXCLUDED)
    packed, rows, diag = _forward(field, layout, base, region, _keep_sums(keep, 0, max_sum))
    return PassageSolution(field, ic, region, layout, packed, rows, diag, apex, spread, empty, base)


def solve_from_line(field: FieldSpec, r: int, m_lo: int, m_hi: int, target, base=None,
                    region: Region = All(), keep=None) -> PassageSolution:
    """Upward sweep from the segment {r + (m, -m): m_lo <= m <= m_hi} to ``target``.

    ``base`` gives the starting values on the segment (zeros by default).
    """
    target = as_point(target)
    s0 = 2 * r
    if target.d < s0:
        raise DomainError("target lies below the starting line")
    lo0, hi0 = 2 * m_lo, 2 * m_hi
    layout = _cone_layout(s0, target.d, lo0, hi0, tuple(target), 0, region)
    a0 = layout.row_a(s0)
    if base is None:
        vals = np.zeros(a0.shape[0])
    else:
        vals = np.asarray(base, dtype=np.float64)[(a0 - lo0) // 2]
    if not region.trivial and a0.size:
        vals = np.where([region._contains(s0, int(a)) for a in a0], vals, EXCLUDED)
    packed, rows, diag = _forward(field, layout, np.ascontiguousarray(vals), region,
                                  _keep_sums(keep, s0, target.d))
    return PassageSolution(field, None, region, layout, packed, rows, diag, tuple(target), 0,
                           not np.any(vals != EXCLUDED), vals)


def _point_solution(field, u, v, region, keep=None):
    u, v = as_point(u), as_point(v)
    layout = _cone_layout(u.d, v.d, u.a, u.a, tuple(v), 0, region)
    base = np.zeros(layout.count[0])
    if not region.trivial and layout.count[0]:
        base[:] = 0.0 if region._contains(u.d, u.a) else EXCLUDED
    packed, rows, diag = _forward(field, layout, base, region, _keep_sums(keep, u.d, v.d))
    return PassageSolution(field, None, region, layout, packed, rows, diag, tuple(v), 0,
                           not np.any(base != EXCLUDED), base)


def point_to_point(field: FieldSpec, u, v, region: Region = All()) -> float:
    """T_{u,v}: best weight of an up-right path from u to v inside the region,
    endpoint excluded; EXCLUDED when no admissible path exists."""
    u, v = as_point(u), as_point(v)
    if not u.precedes(v):
        raise OrderingError(f"{tuple(u)} does not precede {tuple(v)}")
    if not (region.contains(u) and region.contains(v)):
        return EXCLUDED
    if u == v:
        return 0.0
    return _point_solution(field, u, v, region).value_at(v)


# ----------------------------------------------------------------- backward


@dataclass(eq=False)
class BackwardProfile:
    """T_{u,target} for u = r + (m, -m) on a window of the line x + y = 2r."""

    target: LatticePoint
    r: int
    half_width: int
    m: np.ndarray
    values: np.ndarray
    field: FieldSpec | None = None
    layout: RowLayout | None = None
    bits: np.ndarray | None = None

    def value(self, m: int) -> float:
        i = int(m - self.m[0])
        if i < 0 or i >= self.m.shape[0]:
            raise DomainError(f"m={m} outside the profile window")
        return float(self.values[i])

    def window(self, lo: float, hi: float):
        """(m, values) restricted to lo <= m <= hi."""
        sel = (self.m >= lo) & (self.m <= hi)
        return self.m[sel], self.values[sel]

    @classmethod
    def synthetic(cls, r: int, m, values, target=None) -> "BackwardProfile":
        m = np.asarray(m, dtype=np.int64)
        if m.size and np.any(np.diff(m) != 1):
            raise ValueError("m must be consecutive integers")
        hw = int(np.abs(m).max()) if m.size else 0
        tgt = as_point(target) if target is not None else LatticePoint(r, r)
        return cls(tgt, r, hw, m, np.asarray(values, dtype=np.float64))


def solve_backward(field: FieldSpec, target, r: int, half_width: int) -> BackwardProfile:
    """T_{u,target} for u = r + (m, -m), |m| <= half_width, by a downward sweep."""
    t = as_point(target)
    if not 0 <= 2 * r < t.d:
        raise DomainError(f"need 0 <= 2r < d(target); got r={r}, d={t.d}")
    if half_width < 0:
        raise DomainError("half_width must be nonnegative")
    depth = t.d - 2 * r
    m_lo_sup, m_hi_sup = (t.a - depth) // 2, (t.a + depth) // 2
    m_lo, m_hi = max(-half_width, m_lo_sup), min(half_width, m_hi_sup)
    if m_lo > -half_width or m_hi < half_width:
        warnings.warn(
            f"half_width={half_width} exceeds the geometric support; clipped to m in [{m_lo}, {m_hi}]",
            stacklevel=2,
        )
    s = np.arange(2 * r, t.d + 1, dtype=np.int64)
    lo = np.maximum(t.a - (t.d - s), 2 * m_lo - (s - 2 * r))
    hi = np.minimum(t.a + (t.d - s), 2 * m_hi + (s - 2 * r))
    layout = RowLayout.build(2 * r, lo, hi)
    w = field.row_weights(layout.s0, layout.lo, layout.hi, layout.off, layout.total,
                          out=scratch("w", layout.total, np.float64))
    keep_off = np.full(layout.lo.shape[0], -1, dtype=np.int64)
    keep_off[0] = 0
    kept = np.empty(int(layout.count[0]))
    bits = scratch("bits", layout.total, np.bool_)
    K.backward_sweep(w, layout.s0, layout.lo, layout.hi, layout.off, bits, keep_off, kept)
    packed = np.packbits(bits, bitorder="little")
    m = layout.row_a(2 * r) // 2
    return BackwardProfile(t, r, max(-m_lo, m_hi), m, kept, field, layout, packed)


# ----------------------------------------------------------------- exit-constrained


def exit_constrained_max(field: FieldSpec, ic: InitialCondition, r: int, strip_half_width: float,
                         end_half_width: int) -> float:
    """Best weight of a path from x+y=0 to {r + (m, -m): |m| <= end_half_width}
    that visits some vertex with |v1 - v2| > strip_half_width."""
    if strip_half_width < 0:
        raise DomainError("strip_half_width must be nonnegative")
    if r < 0 or end_half_width < 0:
        raise DomainError("r and end_half_width must be nonnegative")
    e = 2 * int(end_half_width)
    s = np.arange(0, 2 * r + 1, dtype=np.int64)
    lo = -e - (2 * r - s)
    hi = e + (2 * r - s)
    sup = ic.support()
    if sup is not None:
        lo = np.maximum(lo, sup[0] - s)
        hi = np.minimum(hi, sup[1] + s)
    layout = RowLayout.build(0, lo, hi)
    if layout.total == 0:
        return EXCLUDED
    w = field.row_weights(0, layout.lo, layout.hi, layout.off, layout.total,
                          out=scratch("w", layout.total, np.float64))
    base = np.ascontiguousarray(ic.values(layout.row_a(0)), dtype=np.float64)
    best = K.exit_sweep(w, layout.lo, layout.hi, layout.off, base, float(strip_half_width), -e, e)
    return float(best)


def expected_passage(dv1: float, dv2: float) -> float:
    """First-order surrogate (sqrt(m) + sqrt(n))^2 for E T_{0,(m,n)}."""
    return (math.sqrt(max(dv1, 0.0)) + math.sqrt(max(dv2, 0.0))) ** 2
