"""Indicators for the geometric events used in the covariance bounds.

Profiles are backward profiles T_{u,n} over u = r + (m, -m).  All thresholds
are parameters; none of the constants are known explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import EXCLUDED, DomainError, FieldSpec, Flat, LatticePoint
from .passage import (
    BackwardProfile,
    Rectangle,
    _point_solution,
    exit_constrained_max,
    expected_passage,
)
from .scaling import ScaledProfile, interpolate


class CoverageError(DomainError):
    """The profile does not cover the window an event needs."""

    def __init__(self, msg, required):
        super().__init__(f"{msg}; required half-width {required}")
        self.required = required


class ParameterError(ValueError):
    """Event parameters incompatible with the requested geometry."""


@dataclass(frozen=True)
class EventParams:
    theta: float = 0.5
    alpha: float = 0.5
    tau: float = 0.25
    phi: float = 4.0
    L: float = 1.0
    M: float = 1.0
    epsilon: float = 0.02
    window_exponent: float = 101.0
    log_power: float = 10.0
    deficit: float = 1000.0

    def __post_init__(self):
        for name in ("theta", "alpha", "phi", "L", "M", "epsilon", "window_exponent",
                     "log_power", "deficit"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be strictly positive")
        if not 0 < self.tau < 0.5:
            raise ParameterError("tau must lie in (0, 1/2)")


def _support_edge(profile: BackwardProfile):
    """Inclusive m-range of the geometric support of the profile's line."""
    t = profile.target
    depth = t.d - 2 * profile.r
    return (t.a - depth) // 2, (t.a + depth) // 2


def _covered(profile, lo, hi, what):
    s_lo, s_hi = _support_edge(profile)
    need_lo, need_hi = max(lo, s_lo), min(hi, s_hi)
    if profile.m.size == 0 or profile.m[0] > need_lo or profile.m[-1] < need_hi:
        raise CoverageError(f"profile does not cover the {what} window",
                            max(-need_lo, need_hi))


def _max_where(profile, sel):
    return float(profile.values[sel].max()) if np.any(sel) else EXCLUDED


# ----------------------------------------------------------------- E_dec


def indicator_e_dec(profile: BackwardProfile, r: int, n: int, p: EventParams) -> bool:
    """Localisation-with-decay event on the line x + y = 2r.

    H'_0: the max over |m| < r^{2/3} is attained in |m| < theta r^{2/3} and is
    below T_{r,n} + 2 alpha^{-1} r^{1/3}.  H'_j: the max over the annulus
    2^{j-1} r^{2/3} <= |m| < 2^j r^{2/3} is below the central max minus
    2 alpha 2^{j(1/2 - tau)} r^{1/3}.  Annuli stop at the support edge.
    """
    if profile.r != r:
        raise DomainError(f"profile is on line r={profile.r}, not r={r}")
    R, r13 = r ** (2.0 / 3.0), r ** (1.0 / 3.0)
    s_lo, s_hi = _support_edge(profile)
    _covered(profile, s_lo, s_hi, "support")
    am = np.abs(profile.m)
    central = _max_where(profile, am < R)
    inner = _max_where(profile, am < p.theta * R)
    if central == EXCLUDED or inner != central:
        return False
    if not central < profile.value(0) + 2.0 / p.alpha * r13:
        return False
    edge = max(-s_lo, s_hi)
    j = 1
    while 2 ** (j - 1) * R <= edge:
        ann = _max_where(profile, (am >= 2 ** (j - 1) * R) & (am < 2**j * R))
        if not ann < central - 2.0 * p.alpha * 2 ** (j * (0.5 - p.tau)) * r13:
            return False
        j += 1
    return True


# ----------------------------------------------------------------- two peaks


def indicator_two_peaks(profile: ScaledProfile, interval, p: EventParams) -> bool:
    """max over I exceeds the max over [-2M, 2M] minus sqrt(epsilon) (scaled units)."""
    x1, x2 = map(float, interval)
    if not (-p.M <= x1 <= x2 <= p.M):
        raise DomainError(f"interval [{x1}, {x2}] not inside [-M, M] with M={p.M}")
    if profile.x[0] > -2 * p.M or profile.x[-1] < 2 * p.M:
        raise CoverageError("profile does not cover [-2M, 2M]",
                            2 * p.M * (2 * profile.n) ** (2.0 / 3.0))

    def window_max(a, b):
        sel = (profile.x >= a) & (profile.x <= b)
        ends = interpolate(profile, [a, b])
        vals = np.concatenate([profile.values[sel], ends])
        return float(np.max(vals))

    return window_max(x1, x2) > window_max(-2 * p.M, 2 * p.M) - math.sqrt(p.epsilon)


# ----------------------------------------------------------------- large TF


def indicator_large_tf(field: FieldSpec, r: int, p: EventParams, threshold_c1: float,
                       ic=None) -> bool:
    """Some path from x+y=0 to the r^{2/3}-segment of x+y=2r exits the strip
    |x - y| <= phi r^{2/3} with weight >= 4r - c1 phi^2 r^{1/3}."""
    best = exit_constrained_max(field, Flat() if ic is None else ic, r,
                                p.phi * r ** (2.0 / 3.0), int(math.floor(r ** (2.0 / 3.0))))
    if best == EXCLUDED:
        return False
    return best >= 4.0 * r - threshold_c1 * p.phi**2 * r ** (1.0 / 3.0)


# ----------------------------------------------------------------- barrier


@dataclass(frozen=True)
class BarrierRegion:
    """{0 <= s < 2r, lo < a <= hi}, or its mirror {-hi <= a < -lo}."""

    r: int
    lo: float
    hi: float
    mirror: bool = False

    @classmethod
    def from_params(cls, r: int, p: EventParams, mirror: bool = False) -> "BarrierRegion":
        R = r ** (2.0 / 3.0)
        return cls(r, p.theta * R, p.phi * R, mirror)

    def a_range(self):
        a_lo, a_hi = math.floor(self.lo) + 1, math.floor(self.hi)
        return (-a_hi, -a_lo) if self.mirror else (a_lo, a_hi)

    def rectangle(self) -> Rectangle:
        a_lo, a_hi = self.a_range()
        return Rectangle(0, 2 * self.r - 1, a_lo, a_hi)


def barrier_anchors(region: BarrierRegion, p: EventParams):
    """Anchor points: slab start and middle rows times low/middle/high a."""
    r = region.r
    slabs = max(1, int(round(4 * p.L)))
    height = 2 * r / slabs
    if height < 2:
        raise ParameterError(f"slab height {height:.3g} too small for r={r}, L={p.L}")
    # built on the unmirrored span, then reflected, so the two grids are mirror images
    a_lo, a_hi = BarrierRegion(r, region.lo, region.hi).a_range()
    sign = -1 if region.mirror else 1
    anchors = []
    for i in range(slabs):
        rows = {math.ceil(i * height), math.floor((i + 0.5) * height)}
        for s in sorted(x for x in rows if 0 <= x < 2 * r):
            lo = a_lo + ((a_lo - s) & 1)
            hi = a_hi - ((a_hi - s) & 1)
            if hi < lo:
                raise ParameterError("barrier rectangle too narrow for the anchor grid")
            mid = lo + 2 * ((hi - lo) // 4)
            for a in sorted({lo, mid, hi}):
                anchors.append(LatticePoint.from_sa(s, sign * a))
    return anchors


def indicator_barrier(field: FieldSpec, region: BarrierRegion, p: EventParams,
                      penalty: float | None = None) -> bool:
    """Every anchor pair u <= u' with d(u') - d(u) >= r/L has
    T^U_{u,u'} - (sqrt(dv1) + sqrt(dv2))^2 <= -L r^{1/3}.

    ``penalty`` overrides L in the threshold only.
    """
    r = region.r
    thresh = -(p.L if penalty is None else penalty) * r ** (1.0 / 3.0)
    rect = region.rectangle()
    anchors = barrier_anchors(region, p)
    gap = r / p.L
    pairs = 0
    for u in anchors:
        targets = [v for v in anchors if v.d - u.d >= gap and u.precedes(v)]
        if not targets:
            continue
        top = max(v.d for v in targets)
        sol = _point_solution(field, u, _top_apex(u, top), rect,
                              keep={v.d for v in targets})
        for v in targets:
            pairs += 1
            t = sol.value_at(v)
            if t == EXCLUDED:
                continue
            if t - expected_passage(v.v1 - u.v1, v.v2 - u.v2) > thresh:
                return False
    if pairs == 0:
        raise ParameterError("no anchor pair is separated by r/L")
    return True


def _top_apex(u: LatticePoint, top: int):
    """A virtual apex whose backward cone contains the whole forward cone of u
    up to row ``top``; the region then trims the cells."""
    k = top - u.d
    return LatticePoint(u.v1 + k, u.v2 + k)


# ----------------------------------------------------------------- A/B/C


def window_index(m_abs: float, r: int, p: EventParams) -> int:
    """j with |m| in [j^e r^{2/3} / 2, (j+1)^e r^{2/3} / 2), e = window exponent."""
    R = r ** (2.0 / 3.0)
    j = 0
    while 0.5 * (j + 1) ** p.window_exponent * R <= m_abs:
        j += 1
    return j


def j0_index(r: int, n: int, p: EventParams) -> float:
    """j_0 solving j_0^e r^{2/3} = M n^{2/3}."""
    return (p.M * n ** (2.0 / 3.0) / r ** (2.0 / 3.0)) ** (1.0 / p.window_exponent)


def classify_a_b_c(profile: BackwardProfile, r: int, n: int, p: EventParams):
    """(j, "B" or "C") for the restricted argmax over |m| <= M n^{2/3}."""
    if profile.r != r:
        raise DomainError(f"profile is on line r={profile.r}, not r={r}")
    W = p.M * n ** (2.0 / 3.0)
    _covered(profile, -math.floor(W), math.floor(W), "M n^{2/3}")
    am = np.abs(profile.m)
    sel = am <= W
    idx = np.nonzero(sel)[0]
    i_max = int(idx[np.argmax(profile.values[sel])])
    t_res = float(profile.values[i_max])
    j = window_index(float(am[i_max]), r, p)
    lg = math.log(j + 2)
    win = lg**p.log_power * r ** (2.0 / 3.0)
    _covered(profile, -math.floor(win), math.floor(win), "log")
    wmax = _max_where(profile, am <= win)
    label = "B" if wmax < t_res - p.deficit * lg**2 * r ** (1.0 / 3.0) else "C"
    return j, label
