"""KPZ rescaling of passage-time profiles.

Height is centred by 4n and divided by 2^{4/3} n^{1/3}; the transverse lattice
offset m becomes x = m / (2n)^{2/3}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .passage import BackwardProfile

NEG = -np.inf


def height_scale(n: int) -> float:
    """2^{4/3} n^{1/3}, via a cube root so perfect cubes come out exact."""
    return float(np.cbrt(16.0 * n))


def space_scale(n: int) -> float:
    """(2n)^{2/3}."""
    return float(np.cbrt(4.0 * n * n))


@dataclass(frozen=True, eq=False)
class ScaledProfile:
    n: int
    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.x.size > 1 and not np.all(np.diff(self.x) > 0):
            raise ValueError("x grid must be strictly increasing")

    def __call__(self, x) -> np.ndarray:
        """Linear interpolation; -inf where either neighbour is -inf."""
        return interpolate(self, x)

    def raw(self) -> np.ndarray:
        """Invert the scaling back to passage times."""
        return unscale(self.values, self.n)

    def argmax(self) -> float:
        return float(self.x[int(np.argmax(self.values))])


def scale(raw, n: int):
    """2^{-4/3} n^{-1/3} (raw - 4n), with -inf kept."""
    raw = np.asarray(raw, dtype=np.float64)
    return (raw - 4.0 * n) / height_scale(n)


def unscale(values, n: int):
    values = np.asarray(values, dtype=np.float64)
    return 4.0 * n + height_scale(n) * values


def _profile(m, raw, n):
    m = np.asarray(m, dtype=np.int64)
    vals = scale(raw, n)
    vals = np.where(np.abs(m) > n, NEG, vals)
    return ScaledProfile(n, m / space_scale(n), vals)


def rescale_point_profile(raw, n: int) -> ScaledProfile:
    """Scaled point profile from a backward profile onto the line x + y = 0
    (or any ``(m, values)`` pair of arrays of T_{(m,-m),(n,n)})."""
    if isinstance(raw, BackwardProfile):
        return _profile(raw.m, raw.values, n)
    m, vals = raw
    return _profile(m, vals, n)


def rescale_flat_profile(m, values, n: int) -> ScaledProfile:
    """Scaled flat profile from X at the points (n + m, n - m)."""
    return _profile(m, values, n)


def goe_statistic(x_n, n: int):
    """2^{-2/3} n^{-1/3} (X_n - 4n) for flat line-to-point times."""
    return (np.asarray(x_n, dtype=np.float64) - 4.0 * n) / float(np.cbrt(4.0 * n))


def gue_statistic(t, n: int):
    """2^{-4/3} n^{-1/3} (T - 4n) for point-to-point times."""
    return scale(t, n)


def interpolate(profile: ScaledProfile, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    xs, vs = profile.x, profile.values
    i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, xs.size - 2)
    x0, x1 = xs[i], xs[i + 1]
    v0, v1 = vs[i], vs[i + 1]
    t = (x - x0) / (x1 - x0)
    out = np.where(t == 0, v0, np.where(t == 1, v1, NEG))
    ok = np.isfinite(v0) & np.isfinite(v1)
    with np.errstate(invalid="ignore"):
        out = np.where(ok, v0 + t * (v1 - v0), out)
    out = np.where((x < xs[0]) | (x > xs[-1]), np.nan, out)
    return out


def increment_variance(profiles, x: float, h: float):
    """Sample variance of L(x+h) - L(x) over replicas, with jackknife stderr."""
    from .estimate import covariance

    profiles = list(profiles)
    if len(profiles) < 2:
        raise ValueError("need at least 2 replicas")
    d = np.array([p(x + h)[0] - p(x)[0] for p in profiles])
    if not np.all(np.isfinite(d)):
        raise ValueError("x or x+h outside the profiles' finite range")
    rep = covariance(d, d)
    return rep.estimate, rep.stderr
