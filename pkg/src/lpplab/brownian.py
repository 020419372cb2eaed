"""Two-sided Brownian motion (diffusivity 2) and the two-peaks comparison bound.

Paths are sampled on a grid of mesh ``step`` and built outward from 0.  Batches
are drawn in fixed-size chunks, each from its own generator seeded with
``(seed, chunk index)``, so results never depend on how work is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .estimate import EstimateReport, event_probability

CHUNK = 1024


@dataclass(frozen=True, eq=False)
class BrownianPath:
    M: float
    step: float
    x: np.ndarray
    values: np.ndarray
    diffusivity: float = 2.0

    def at(self, x: float) -> float:
        return float(np.interp(x, self.x, self.values))


def _half_points(M: float, step: float) -> int:
    if not (step > 0 and M > 0 and step <= M):
        raise ValueError(f"need 0 < step <= M, got step={step}, M={M}")
    return int(round(M / step))


def grid(M: float, step: float) -> np.ndarray:
    k = _half_points(M, step)
    return step * np.arange(-k, k + 1)


def _paths(rng, count: int, k: int, step: float, diffusivity: float) -> np.ndarray:
    sd = math.sqrt(diffusivity * step)
    out = np.empty((count, 2 * k + 1))
    out[:, k] = 0.0
    out[:, k + 1:] = np.cumsum(rng.standard_normal((count, k)) * sd, axis=1)
    out[:, k - 1::-1] = np.cumsum(rng.standard_normal((count, k)) * sd, axis=1)
    return out


def sample_bm(M: float, step: float, seed: int, diffusivity: float = 2.0) -> BrownianPath:
    """One path on {-M, -M + step, ..., M}, exactly 0 at 0."""
    k = _half_points(M, step)
    vals = _paths(np.random.default_rng([seed, 0]), 1, k, step, diffusivity)[0]
    return BrownianPath(M, step, grid(M, step), vals, diffusivity)


def sample_batches(M: float, step: float, replicas: int, seed: int, diffusivity: float = 2.0):
    """Yield (x grid, block of paths) in chunks of at most CHUNK rows."""
    k = _half_points(M, step)
    x = grid(M, step)
    for c, start in enumerate(range(0, replicas, CHUNK)):
        count = min(CHUNK, replicas - start)
        yield x, _paths(np.random.default_rng([seed, c]), count, k, step, diffusivity)


def _window_max(x, block, lo, hi):
    """Row-wise max over [lo, hi], with the interval endpoints interpolated."""
    sel = (x >= lo) & (x <= hi)
    parts = [block[:, sel]]
    for e in (lo, hi):
        i = int(np.clip(np.searchsorted(x, e) - 1, 0, x.size - 2))
        t = (e - x[i]) / (x[i + 1] - x[i])
        parts.append((block[:, i] + t * (block[:, i + 1] - block[:, i]))[:, None])
    return np.concatenate(parts, axis=1).max(axis=1)


# ----------------------------------------------------------------- two peaks


def two_peak_mc(M: float, interval, eps: float, replicas: int, step: float | None = None,
                seed: int = 0) -> EstimateReport:
    """Frequency of max_I W > max_{[-2M, 2M]} W - sqrt(eps)."""
    x1, x2 = map(float, interval)
    if not (-2 * M <= x1 <= x2 <= 2 * M):
        raise ValueError(f"interval [{x1}, {x2}] outside [-2M, 2M]")
    if eps <= 0:
        raise ValueError("eps must be positive")
    step = 1e-3 * M if step is None else step
    gap = math.sqrt(eps)
    flags = []
    for x, block in sample_batches(2 * M, step, replicas, seed):
        flags.append(_window_max(x, block, x1, x2) > block.max(axis=1) - gap)
    cfg = {"M": M, "interval": [x1, x2], "eps": eps, "replicas": replicas, "step": step,
           "seed": seed}
    return event_probability(np.concatenate(flags), label="two_peak", config=cfg)


def two_peak_integrals():
    """The three m-independent integrals over (h1, h2) >= 0 (evaluated at m = 1):
    h1 h2 (h1+h2) e^{-(h1+h2)^2/4}, (h1+h2)^2 e^{-...}, (h1+h2) e^{-...}."""

    def quad(f):
        return integrate.dblquad(lambda h2, h1: f(h1, h2) * math.exp(-(h1 + h2) ** 2 / 4),
                                 0, math.inf, 0, math.inf, epsabs=1e-11, epsrel=1e-11)[0]

    return (quad(lambda a, b: a * b * (a + b)), quad(lambda a, b: (a + b) ** 2),
            quad(lambda a, b: a + b))


@lru_cache(maxsize=None)
def _integrals():
    return two_peak_integrals()


@lru_cache(maxsize=None)
def two_peak_constant(M: float) -> float:
    """C_2(M): the prefactor 1/(4 pi^{3/2} M) times the largest integral."""
    if M <= 0:
        raise ValueError("M must be positive")
    return max(_integrals()) / (4.0 * math.pi**1.5 * M)


def two_peak_bound(M: float, m: float, eps: float) -> float:
    """C_2(M) (m + sqrt(eps m) + eps)."""
    if m < 0 or eps <= 0:
        raise ValueError("need m >= 0 and eps > 0")
    return two_peak_constant(M) * (m + math.sqrt(eps * m) + eps)


# ----------------------------------------------------------------- C' event


def k_star(lam2: float) -> int:
    """Largest k with 2^k lam' <= 8."""
    return int(math.floor(math.log2(8.0 / lam2)))


def c_prime_flags(x, block, M, lam, lam2, alpha, tau):
    """Per-path (coincidence, annulus clause, central clause) booleans."""
    central = _window_max(x, block, -lam, lam)
    coincide = central >= _window_max(x, block, -M, M)
    ann = np.zeros(block.shape[0], dtype=bool)
    ax = np.abs(x)
    for k in range(1, k_star(lam2) + 1):
        sel = (ax >= 2 ** (k - 1) * lam2) & (ax <= 2**k * lam2)
        if not np.any(sel):
            continue
        margin = 2 ** (k * (0.5 - tau)) * alpha * math.sqrt(lam2)
        ann |= central <= block[:, sel].max(axis=1) + margin
    k0 = int(np.argmin(ax))
    high = central >= block[:, k0] + math.sqrt(lam2) / alpha
    return coincide, coincide & ann, coincide & high


def c_prime_event_mc(M: float, lam: float, lam2: float, alpha: float, tau: float = 0.25,
                     replicas: int = 10000, step: float = 1e-3, seed: int = 0,
                     clauses: bool = False):
    """Frequency of C' with window |x| <= M (M plays the role of sqrt(2 script-M)).

    With ``clauses`` also returns reports for the two clauses separately.
    """
    if not 0 < lam < lam2 < 1:
        raise ValueError("need 0 < lam < lam2 < 1")
    if alpha <= 0 or not 0 < tau < 0.5 or M <= lam:
        raise ValueError("need alpha > 0, 0 < tau < 1/2 and M > lam")
    extent = max(M, 2 ** k_star(lam2) * lam2)
    ann, high = [], []
    for x, block in sample_batches(extent, step, replicas, seed):
        _, a, h = c_prime_flags(x, block, M, lam, lam2, alpha, tau)
        ann.append(a)
        high.append(h)
    ann, high = np.concatenate(ann), np.concatenate(high)
    cfg = {"M": M, "lam": lam, "lam2": lam2, "alpha": alpha, "tau": tau,
           "replicas": replicas, "step": step, "seed": seed}
    rep = event_probability(ann | high, label="c_prime", config=cfg)
    if not clauses:
        return rep
    return (rep, event_probability(ann, label="c_prime_annulus", config=cfg),
            event_probability(high, label="c_prime_central", config=cfg))
