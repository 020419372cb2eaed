"""Replicated Monte Carlo engine and estimators."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field
from typing import Iterator, Sequence

import numpy as np
from scipy import stats

from . import _kernels as K
from .field import FieldSpec, make_ic
from .geodesic import trace_transverse
from .passage import Rectangle, solve_backward, solve_forward

# ----------------------------------------------------------------- reports


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    n_replicas: int
    label: str = ""
    config: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    slope_stderr: float
    r2: float
    tau: tuple
    rho: tuple
    excluded: tuple = ()

    def to_dict(self) -> dict:
        return asdict(self)


_Z95 = stats.norm.ppf(0.975)


def covariance(x, y, label: str = "", config=None) -> EstimateReport:
    """Unbiased sample covariance with a delete-1 jackknife standard error."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples")
    dx, dy = x - x.mean(), y - y.mean()
    s = float(np.dot(dx, dy))
    est = s / (n - 1)
    if n > 2:
        # leave-one-out co-moment: S - n/(n-1) dx_i dy_i
        loo = (s - n / (n - 1) * dx * dy) / (n - 2)
        se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    else:
        se = float("nan")
    half = _Z95 * se if math.isfinite(se) else float("nan")
    return EstimateReport(est, se, est - half, est + half, n, label, dict(config or {}))


def variance(x, label: str = "") -> EstimateReport:
    return covariance(x, x, label)


def event_probability(flags, label: str = "", config=None) -> EstimateReport:
    """Frequency with a Wilson 95% interval."""
    flags = np.asarray(flags, dtype=bool)
    n = flags.shape[0]
    if n < 1:
        raise ValueError("need at least 1 sample")
    k = int(flags.sum())
    p = k / n
    ci = stats.binomtest(k, n).proportion_ci(0.95, method="wilson")
    return EstimateReport(p, math.sqrt(p * (1 - p) / n), float(ci.low), float(ci.high), n, label,
                          dict(config or {}))


def loglog_fit(x, y) -> ExponentFit:
    """Least-squares slope of log y against log x; nonpositive y are dropped."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    good = (y > 0) & (x > 0) & np.isfinite(y)
    excluded = tuple(int(i) for i in np.nonzero(~good)[0])
    if good.sum() < 3:
        raise ValueError(f"need at least 3 usable points, got {int(good.sum())}")
    lx, ly = np.log(x[good]), np.log(y[good])
    res = stats.linregress(lx, ly)
    resid = ly - (res.intercept + res.slope * lx)
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst if sst > 0 else 1.0
    return ExponentFit(float(res.slope), float(res.intercept), float(res.stderr), r2,
                       tuple(map(float, x[good])), tuple(map(float, y[good])), excluded)


def exponent_fit(tau, rho) -> ExponentFit:
    """Slope of log rho against log tau, rho being Cov / n^{2/3}."""
    return loglog_fit(tau, rho)


def tail_curve(samples, thresholds):
    """Empirical (x, P(S >= x), P(S <= -x)) for each threshold x."""
    s = np.asarray(samples, dtype=np.float64)
    if s.shape[0] < 100:
        raise ValueError("need at least 100 samples")
    return [(float(x), float(np.mean(s >= x)), float(np.mean(s <= -x))) for x in thresholds]


# ----------------------------------------------------------------- replicas


def replica_seed(master: int, k: int) -> int:
    return int(K.mix_pair(np.uint64(master), np.uint64(k)))


@dataclass(frozen=True)
class ReplicaConfig:
    """One coupled Monte Carlo experiment: X_r for each r in ``rs`` and X_n from
    the same field and the same forward sweep."""

    n: int
    rs: tuple = ()
    ic: str = "flat"
    replicas: int = 1000
    seed: int = 0
    geometry: bool = True
    umax: bool = False
    constrained_j: int | None = None
    decoupled: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rs", tuple(int(r) for r in self.rs))
        if self.replicas < 1:
            raise ValueError("replicas must be at least 1")
        if self.n < 1:
            raise ValueError("n must be positive")
        if any(not 0 <= r <= self.n for r in self.rs):
            raise ValueError("each r must satisfy 0 <= r <= n")


@dataclass(frozen=True)
class ReplicaRecord:
    replica: int
    seed: int
    r: int
    x_r: float
    x_n: float
    u0_a: int = 0
    umax_a: int = 0
    tf_r: int = 0
    overlap: int = 0
    x_r_constrained: float = float("nan")


def rectangle_half_width(j: int, r: int) -> float:
    """(log(j+2))^10 r^{2/3}, the transverse half-width of U_j."""
    return math.log(j + 2) ** 10 * r ** (2.0 / 3.0)


def simulate_replica(cfg: ReplicaConfig, k: int) -> list:
    sub = replica_seed(cfg.seed, k)
    field = FieldSpec(seed=sub)
    ic = make_ic(cfg.ic, sub)
    n = cfg.n
    sol = solve_forward(field, ic, 2 * n)
    x_n = float(sol.diag[n])
    a_n = trace_transverse(sol, 2 * n, 0) if cfg.geometry else None
    out = []
    for r in cfg.rs:
        if cfg.decoupled:
            other = FieldSpec(seed=replica_seed(sub, 0x0DEC))
            x_r = float(solve_forward(other, make_ic(cfg.ic, sub), 2 * r).diag[r])
        else:
            x_r = float(sol.diag[r])
        u0 = tf = ov = umax = 0
        if cfg.geometry:
            a_r = trace_transverse(sol, 2 * r, 0)
            u0 = int(a_n[2 * r])
            tf = int(np.abs(a_r).max())
            ov = int(np.count_nonzero(a_n[: 2 * r + 1] == a_r))
        if cfg.umax and r < n:
            prof = solve_backward(field, (n, n), r, n - r)
            umax = 2 * int(prof.m[int(np.argmax(prof.values))])
        xc = float("nan")
        if cfg.constrained_j is not None:
            w = rectangle_half_width(cfg.constrained_j, r)
            xc = float(solve_forward(field, ic, 2 * r, Rectangle(0, 2 * r, -w, w)).diag[r])
        out.append(ReplicaRecord(k, sub, r, x_r, x_n, u0, umax, tf, ov, xc))
    return out


def run_replicas(cfg: ReplicaConfig, threads: int = 1, chunk: int = 64) -> Iterator[ReplicaRecord]:
    """Records in replica-index order (then r order), independent of ``threads``."""

    def work(start):
        recs = []
        for k in range(start, min(start + chunk, cfg.replicas)):
            recs.extend(simulate_replica(cfg, k))
        return recs

    starts = range(0, cfg.replicas, chunk)
    if threads <= 1:
        for s in starts:
            yield from work(s)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for recs in pool.map(work, starts):
            yield from recs


def records_by_r(records: Sequence[ReplicaRecord]) -> dict:
    """Column arrays per r: {r: {"x_r": ..., "x_n": ..., ...}}."""
    out = {}
    for rec in records:
        d = out.setdefault(rec.r, {k: [] for k in ReplicaRecord.__dataclass_fields__})
        for key in d:
            d[key].append(getattr(rec, key))
    return {r: {k: np.asarray(v) for k, v in d.items()} for r, d in out.items()}


def covariance_exponent(records: Sequence[ReplicaRecord], n: int):
    """Per-r covariance reports and the fitted exponent of Cov/n^{2/3} against r/n."""
    cols = records_by_r(records)
    reports, taus, rhos = [], [], []
    for r in sorted(cols):
        rep = covariance(cols[r]["x_r"], cols[r]["x_n"], label=f"cov r={r}",
                         config={"n": n, "r": r, "tau": r / n})
        reports.append(rep)
        taus.append(r / n)
        rhos.append(rep.estimate / n ** (2.0 / 3.0))
    return reports, exponent_fit(taus, rhos)


def tau_grid(lo: float = 0.05, hi: float = 0.3, points: int = 6) -> np.ndarray:
    """Geometric grid from lo to hi."""
    return np.geomspace(lo, hi, points)
