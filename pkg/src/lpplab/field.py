"""Seed-addressable Exp(1) vertex weights and initial conditions on the line x+y=0.

Weights are produced by hashing ``(seed, v1, v2)`` to a uniform ``U`` in (0, 1)
and returning ``-log(U)``.  Nothing is stored, so any cell can be evaluated in
any order and replayed exactly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from . import _kernels as K

EXCLUDED = -np.inf
"""Marker for ``pi(v) = -inf`` and unreachable cells.  Kernels only compare it."""


class RegionViolation(ValueError):
    """A cell outside the region a field was declared on was requested."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


def is_excluded(x) -> bool:
    return bool(np.isneginf(x))


class LatticePoint(NamedTuple):
    v1: int
    v2: int

    @property
    def d(self) -> int:
        return self.v1 + self.v2

    @property
    def a(self) -> int:
        return self.v1 - self.v2

    def precedes(self, other) -> bool:
        """Coordinatewise order ``self <= other``."""
        return self.v1 <= other[0] and self.v2 <= other[1]

    @classmethod
    def from_sa(cls, s: int, a: int) -> "LatticePoint":
        if (s - a) % 2:
            raise DomainError(f"s={s} and a={a} have different parity")
        return cls((s + a) // 2, (s - a) // 2)

    @classmethod
    def on_line(cls, r: int, m: int) -> "LatticePoint":
        """The point r + (m, -m) of the line x + y = 2r."""
        return cls(r + m, r - m)


def as_point(u) -> LatticePoint:
    return u if isinstance(u, LatticePoint) else LatticePoint(int(u[0]), int(u[1]))


# Scratch buffers are reused per thread to avoid page-faulting fresh arrays
# on every replica.  Callers never keep references to them.
_scratch = threading.local()


def scratch(name: str, size: int, dtype) -> np.ndarray:
    store = getattr(_scratch, "store", None)
    if store is None:
        store = _scratch.store = {}
    buf = store.get(name)
    if buf is None or buf.shape[0] < size or buf.dtype != np.dtype(dtype):
        buf = np.empty(max(size, 1024), dtype=dtype)
        store[name] = buf
    return buf[:size]


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """An i.i.d. Exp(1) field.

    The optional bounds describe the region the field may be evaluated on:
    ``min_sum <= v1+v2 <= max_sum`` and ``|v1-v2| <= half_width``.  ``offset``
    shifts the field so that local point ``v`` reads the weight at ``v + offset``.
    ``table`` replaces the hash with explicit weights, ``table[i, j]`` being the
    weight at ``table_origin + (i, j)``; cells outside the table are a region
    violation.
    """

    seed: int = 0
    max_sum: int | None = None
    min_sum: int | None = None
    half_width: int | None = None
    offset: tuple[int, int] = (0, 0)
    table: np.ndarray | None = None
    table_origin: tuple[int, int] = (0, 0)
    _key: np.uint64 = dc_field(init=False, repr=False)

    def __post_init__(self):
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "_key", np.uint64(K.seed_key(np.uint64(seed))))
        if self.table is not None:
            t = np.ascontiguousarray(self.table, dtype=np.float64)
            if t.ndim != 2:
                raise ValueError("table must be two-dimensional")
            if np.any(~np.isfinite(t)) or np.any(t < 0):
                raise ValueError("table weights must be finite and nonnegative")
            object.__setattr__(self, "table", t)

    @classmethod
    def from_table(cls, table, origin=(0, 0)) -> "FieldSpec":
        return cls(seed=0, table=np.asarray(table, dtype=np.float64), table_origin=tuple(origin))

    def shifted(self, dv1: int, dv2: int) -> "FieldSpec":
        """Same weights viewed from a translated origin (region bounds are dropped)."""
        return FieldSpec(
            seed=self.seed,
            offset=(self.offset[0] + dv1, self.offset[1] + dv2),
            table=self.table,
            table_origin=self.table_origin,
        )

    def contains(self, s: int, a: int) -> bool:
        if self.max_sum is not None and s > self.max_sum:
            return False
        if self.min_sum is not None and s < self.min_sum:
            return False
        if self.half_width is not None and abs(a) > self.half_width:
            return False
        return True

    def _check_rows(self, s0, lo, hi):
        nonempty = np.nonzero(hi >= lo)[0]
        if nonempty.size == 0:
            return
        s_first, s_last = s0 + nonempty[0], s0 + nonempty[-1]
        if self.max_sum is not None and s_last > self.max_sum:
            raise RegionViolation(f"coordinate sum {s_last} exceeds max_sum={self.max_sum}")
        if self.min_sum is not None and s_first < self.min_sum:
            raise RegionViolation(f"coordinate sum {s_first} below min_sum={self.min_sum}")
        if self.half_width is not None:
            span = max(-lo[nonempty].min(), hi[nonempty].max())
            if span > self.half_width:
                raise RegionViolation(f"|v1-v2|={span} exceeds half_width={self.half_width}")

    def row_weights(self, s0, lo, hi, off, total, out=None) -> np.ndarray:
        """Weights of every cell of a row layout, in layout order."""
        self._check_rows(s0, lo, hi)
        w = np.empty(total) if out is None else out
        dv1, dv2 = self.offset
        if self.table is None:
            K.fill_uniform(self._key, s0, lo, hi, off, dv1, dv2, w)
            np.log(w, out=w)
            np.negative(w, out=w)
        else:
            bad = np.zeros(1, dtype=np.int64)
            t1, t2 = self.table_origin
            K.fill_table(self.table, t1, t2, s0, lo, hi, off, dv1, dv2, w, bad)
            if bad[0]:
                raise RegionViolation("cell outside the weight table")
        return w

    def weights_at(self, v1, v2) -> np.ndarray:
        """Vectorised ``weight_at`` over coordinate arrays."""
        v1 = np.atleast_1d(np.asarray(v1, dtype=np.int64))
        v2 = np.atleast_1d(np.asarray(v2, dtype=np.int64))
        s, a = v1 + v2, np.abs(v1 - v2)
        if v1.size and not (
            self.contains(int(s.max()), int(a.max())) and self.contains(int(s.min()), 0)
        ):
            raise RegionViolation(f"points outside field region {self._region_str()}")
        g1, g2 = v1 + self.offset[0], v2 + self.offset[1]
        if self.table is not None:
            i1, i2 = g1 - self.table_origin[0], g2 - self.table_origin[1]
            n1, n2 = self.table.shape
            if np.any((i1 < 0) | (i2 < 0) | (i1 >= n1) | (i2 >= n2)):
                raise RegionViolation("point outside the weight table")
            return self.table[i1, i2].copy()
        out = np.empty(v1.shape[0])
        K.uniform_points(self._key, g1, g2, out)
        np.log(out, out=out)
        np.negative(out, out=out)
        return out

    def _region_str(self):
        return f"(min_sum={self.min_sum}, max_sum={self.max_sum}, half_width={self.half_width})"


def weight_at(spec: FieldSpec, u) -> float:
    """The weight omega_u; a pure function of ``(spec.seed, u)``."""
    u = as_point(u)
    if not spec.contains(u.d, u.a):
        raise RegionViolation(f"{tuple(u)} outside field region {spec._region_str()}")
    return float(spec.weights_at([u.v1], [u.v2])[0])


# ---------------------------------------------------------------- initial data


class InitialCondition:
    """Values pi(u) on the line x + y = 0, indexed by ``a = v1 - v2 = 2m``."""

    def support(self):
        """Inclusive ``(a_lo, a_hi)`` bounds of the finite values, or None if unbounded."""
        return None

    def values(self, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__.lower()


@dataclass(frozen=True)
class Flat(InitialCondition):
    def values(self, a):
        return np.zeros(np.shape(a))

    def describe(self):
        return "flat"


@dataclass(frozen=True)
class Droplet(InitialCondition):
    def support(self):
        return (0, 0)

    def values(self, a):
        a = np.asarray(a)
        return np.where(a == 0, 0.0, EXCLUDED)

    def describe(self):
        return "droplet"


_STATIONARY_TAG = 0x53544154494F4E41


@dataclass(frozen=True)
class Stationary(InitialCondition):
    """Two-sided random walk with increments X_i - Y_i, X_i, Y_i ~ Exp(rate 1/2)."""

    sub_seed: int = 0

    def increments(self, lo: int, hi: int) -> np.ndarray:
        """Increments with indices lo..hi; increment i is pi(i) - pi(i-1)."""
        idx = np.arange(lo, hi + 1, dtype=np.int64)
        key = np.uint64(K.seed_key(np.uint64(K.mix_pair(np.uint64(self.sub_seed), np.uint64(_STATIONARY_TAG)))))
        ux = np.empty(idx.shape[0])
        uy = np.empty(idx.shape[0])
        K.uniform_points(key, idx, np.zeros_like(idx), ux)
        K.uniform_points(key, idx, np.ones_like(idx), uy)
        np.log(ux, out=ux)
        np.log(uy, out=uy)
        # X - Y with X = -2 log U_x and Y = -2 log U_y
        return 2.0 * (uy - ux)

    def walk(self, m_max: int) -> np.ndarray:
        """pi(m) for m = -m_max..m_max, accumulated outward from the origin."""
        if m_max == 0:
            return np.zeros(1)
        right = np.cumsum(self.increments(1, m_max))
        # pi(-k) = -(inc_0 + inc_{-1} + ... + inc_{-k+1})
        left = -np.cumsum(self.increments(-m_max + 1, 0)[::-1])
        return np.concatenate([left[::-1], [0.0], right])

    def values(self, a):
        a = np.asarray(a, dtype=np.int64)
        m = a // 2
        if m.size == 0:
            return np.zeros(0)
        m_max = int(np.abs(m).max())
        return self.walk(m_max)[m + m_max]

    def describe(self):
        return f"stationary({self.sub_seed})"


@dataclass(frozen=True)
class Table(InitialCondition):
    """Explicit values on finitely many points of x + y = 0; all others excluded."""

    m: tuple[int, ...] = ()
    vals: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.m) != len(self.vals):
            raise ValueError("m and vals must have equal length")
        if len(set(self.m)) != len(self.m):
            raise ValueError("duplicate points in table")
        if any(np.isnan(v) or v == np.inf for v in self.vals):
            raise ValueError("table values must be finite or -inf")

    @classmethod
    def from_points(cls, entries) -> "Table":
        """Build from ``(point, value)`` pairs (or a mapping) with points on x + y = 0."""
        if isinstance(entries, dict):
            entries = entries.items()
        ms, vs = [], []
        for u, val in entries:
            u = as_point(u)
            if u.d != 0:
                raise DomainError(f"{tuple(u)} is not on the line x+y=0")
            ms.append(u.v1)
            vs.append(float(val))
        return cls(tuple(ms), tuple(vs))

    def support(self):
        finite = [mm for mm, v in zip(self.m, self.vals) if v != EXCLUDED]
        if not finite:
            return (1, -1)
        return (2 * min(finite), 2 * max(finite))

    def values(self, a):
        a = np.asarray(a, dtype=np.int64)
        out = np.full(a.shape, EXCLUDED)
        lookup = dict(zip(self.m, self.vals))
        for i, ai in np.ndenumerate(a):
            if ai % 2 == 0:
                out[i] = lookup.get(int(ai) // 2, EXCLUDED)
        return out

    def describe(self):
        return f"table({len(self.m)})"


def initial_condition_at(ic: InitialCondition, u) -> float:
    """pi(u) for u on the line x + y = 0."""
    u = as_point(u)
    if u.d != 0:
        raise DomainError(f"{tuple(u)} is not on the line x+y=0")
    return float(ic.values(np.array([u.a]))[0])


def make_ic(name: str, seed: int = 0) -> InitialCondition:
    """Initial condition from a CLI-style name; stationary draws its own sub-seed."""
    name = name.lower()
    if name == "flat":
        return Flat()
    if name == "droplet":
        return Droplet()
    if name == "stationary":
        return Stationary(int(K.mix_pair(np.uint64(seed), np.uint64(_STATIONARY_TAG))))
    raise ValueError(f"unknown initial condition {name!r}")
