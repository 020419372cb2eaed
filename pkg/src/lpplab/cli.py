"""Command-line frontend.

Every artifact echoes the configuration, the master seed and the tool version.
Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .brownian import c_prime_event_mc, two_peak_bound, two_peak_constant, two_peak_mc
from .estimate import (
    ReplicaConfig,
    covariance,
    covariance_exponent,
    event_probability,
    replica_seed,
    run_replicas,
    tail_curve,
    variance,
)
from .events import (
    BarrierRegion,
    EventParams,
    ParameterError,
    classify_a_b_c,
    indicator_barrier,
    indicator_e_dec,
    indicator_large_tf,
    indicator_two_peaks,
)
from .field import FieldSpec, make_ic
from .geodesic import crossing_point, trace_geodesic, transversal_fluctuation
from .oracle import run_oracle_suite
from .passage import solve_backward, solve_forward
from .scaling import rescale_flat_profile, rescale_point_profile, space_scale

SEED_DERIVATION = "replica k uses mix_pair(master, k) (splitmix64 finaliser)"
COVARIANCE_COLUMNS = ["replica", "seed", "r", "x_r", "x_n", "u0_a", "umax_a", "tf_r", "overlap"]
_NOT_ECHOED = {"command", "config", "out", "format", "threads", "no_timing"}


class UsageError(Exception):
    """Raised for parameter combinations argparse cannot check itself."""

    def __init__(self, flag, msg):
        super().__init__(f"argument {flag}: {msg}")


# ----------------------------------------------------------------- argument types


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {v}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}")
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _list_of(kind):
    def parse(text):
        if isinstance(text, (list, tuple)):
            return list(text)
        try:
            return [kind(x) for x in str(text).split(",") if x.strip()]
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}: {exc}")

    return parse


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return v


def _interval(text):
    vals = _list_of(float)(text)
    if len(vals) != 2 or vals[0] > vals[1]:
        raise argparse.ArgumentTypeError("interval must be lo,hi with lo <= hi")
    return vals


# ----------------------------------------------------------------- parser


def _common(p, seed=True, threads=True):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--out", help="output path; format inferred from .json/.csv")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--no-timing", action="store_true", help="write runtime_seconds as null")
    if seed:
        p.add_argument("--seed", type=_seed, default=0)
    if threads:
        p.add_argument("--threads", type=_positive_int, default=1)


def _event_flags(p):
    d = EventParams()
    p.add_argument("--theta", type=_positive_float, default=d.theta)
    p.add_argument("--alpha", type=_positive_float, default=d.alpha)
    p.add_argument("--decay-tau", type=_positive_float, default=d.tau)
    p.add_argument("--phi", type=_positive_float, default=d.phi)
    p.add_argument("--L", type=_positive_float, default=d.L)
    p.add_argument("--M", type=_positive_float, default=d.M)
    p.add_argument("--epsilon", type=_positive_float, default=d.epsilon)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpplab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lpplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("covariance", help="coupled replicas of X_r and X_n")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--r", type=_list_of(_nonneg_int))
    p.add_argument("--tau", type=_list_of(_positive_float))
    p.add_argument("--ic", choices=["flat", "droplet", "stationary"], default="flat")
    p.add_argument("--replicas", type=_positive_int, default=1000)
    p.add_argument("--umax", action="store_true", help="also locate u_max by a backward sweep")
    _common(p)

    p = sub.add_parser("exponent", help="fit the temporal covariance exponent")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--tau", type=_list_of(_positive_float), required=True)
    p.add_argument("--ic", choices=["flat", "droplet", "stationary"], default="flat")
    p.add_argument("--replicas", type=_positive_int, default=1000)
    _common(p)

    p = sub.add_parser("profile", help="scaled weight profile of one replica")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--kind", choices=["point", "flat"], default="point")
    p.add_argument("--half-width", type=_nonneg_int)
    _common(p, threads=False)

    p = sub.add_parser("geodesic", help="geodesic of one replica")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--ic", choices=["flat", "droplet", "stationary"], default="flat")
    p.add_argument("--r", type=_nonneg_int, help="report the crossing of x+y=2r")
    _common(p, threads=False)

    p = sub.add_parser("events", help="event indicator frequencies")
    p.add_argument("--event", required=True,
                   choices=["e_dec", "two_peaks", "large_tf", "barrier", "abc"])
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--r", type=_positive_int)
    p.add_argument("--interval", type=_interval, default=[-0.01, 0.01])
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--penalty", type=float)
    p.add_argument("--replicas", type=_positive_int, default=100)
    _event_flags(p)
    _common(p)

    p = sub.add_parser("tails", help="one-point tails of (T - 4n) / n^{1/3}")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--ic", choices=["flat", "droplet", "stationary"], default="droplet")
    p.add_argument("--replicas", type=_positive_int, default=1000)
    p.add_argument("--thresholds", type=_list_of(_positive_float), default=[1.0, 2.0, 3.0])
    _common(p)

    p = sub.add_parser("brownian", help="Brownian two-peaks and C' estimates")
    p.add_argument("--mode", choices=["two-peak", "c-prime", "bound"], default="two-peak")
    p.add_argument("--M", type=_positive_float, default=1.0)
    p.add_argument("--interval", type=_interval)
    p.add_argument("--eps", type=_positive_float, default=0.02)
    p.add_argument("--m", type=_positive_float, help="|I| for the bound")
    p.add_argument("--lam", type=_positive_float, default=0.05)
    p.add_argument("--lam2", type=_positive_float, default=0.1)
    p.add_argument("--alpha", type=_positive_float, default=0.2)
    p.add_argument("--decay-tau", type=_positive_float, default=0.25)
    p.add_argument("--replicas", type=_positive_int, default=10000)
    p.add_argument("--step", type=_positive_float)
    _common(p, threads=False)

    p = sub.add_parser("oracle-check", help="DP against brute-force path enumeration")
    p.add_argument("--max-sum", type=_positive_int, default=8)
    p.add_argument("--cases", type=_positive_int, default=500)
    _common(p, threads=False)
    return parser


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def read_config_file(path) -> dict:
    """key=value lines; '#' comments and blank lines ignored."""
    out = {}
    for no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError("--config", f"line {no} is not key=value")
        k, v = line.split("=", 1)
        out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def _apply_config(sub, values):
    by_dest = {a.dest: a for a in sub._actions if a.option_strings}
    defaults = {}
    for key, text in values.items():
        action = by_dest.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError("--config", f"unknown key {key!r}")
        flag = action.option_strings[0]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = text.lower() in ("1", "true", "yes", "on")
            continue
        try:
            val = action.type(text) if action.type else text
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(flag, str(exc))
        if action.choices is not None and val not in action.choices:
            raise UsageError(flag, f"invalid choice {val!r}")
        defaults[key] = val
    sub.set_defaults(**defaults)
    for action in sub._actions:
        if action.dest in defaults:
            action.required = False


def parse_args(argv):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cmd = next((a for a in argv if not a.startswith("-")), None)
        try:
            sub = _subparser(parser, cmd)
        except KeyError:
            parser.parse_args(argv)
        try:
            _apply_config(sub, read_config_file(known.config))
        except OSError as exc:
            raise UsageError("--config", str(exc))
    return parser, parser.parse_args(argv)


# ----------------------------------------------------------------- output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def write_csv(args, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# lpplab {__version__}\n")
    buf.write(f"# command={args.command}\n")
    for k, v in config_echo(args).items():
        buf.write(f"# {k}={_fmt(v) if v is not None else ''}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def write_json(args, estimates, runtime, extra=None) -> str:
    doc = {
        "version": __version__,
        "command": args.command,
        "config": config_echo(args),
        "estimates": estimates,
        "seeds": {"master": getattr(args, "seed", None), "derivation": SEED_DERIVATION},
        "runtime_seconds": None if args.no_timing else runtime,
    }
    if extra:
        doc.update(extra)
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _format(args):
    if args.format:
        return args.format
    if args.out and args.out.lower().endswith(".json"):
        return "json"
    return "csv"


class Result:
    """What a command produced: table rows and/or JSON estimates."""

    def __init__(self, columns=(), rows=(), estimates=(), extra=None, ok=True):
        self.columns, self.rows = list(columns), list(rows)
        self.estimates, self.extra, self.ok = list(estimates), extra or {}, ok


# ----------------------------------------------------------------- commands


def _rs(args):
    rs = list(getattr(args, "r", None) or [])
    if args.tau:
        if any(t > 1 for t in args.tau):
            raise UsageError("--tau", "each tau must be in (0, 1]")
        rs += [max(1, int(round(t * args.n))) for t in args.tau]
    if not rs:
        raise UsageError("--r", "give --r or --tau")
    bad = [r for r in rs if r > args.n]
    if bad:
        raise UsageError("--r", f"values {bad} exceed --n {args.n}")
    return sorted(set(rs))


def cmd_covariance(args):
    rs = _rs(args)
    cfg = ReplicaConfig(args.n, tuple(rs), args.ic, args.replicas, args.seed, umax=args.umax)
    recs = list(run_replicas(cfg, threads=args.threads))
    rows = [[getattr(rec, c) for c in COVARIANCE_COLUMNS] for rec in recs]
    reports, _ = covariance_exponent(recs, args.n) if len(rs) >= 3 else (None, None)
    if reports is None:
        by = {}
        for rec in recs:
            by.setdefault(rec.r, ([], []))
            by[rec.r][0].append(rec.x_r)
            by[rec.r][1].append(rec.x_n)
        reports = [covariance(x, y, label=f"cov r={r}", config={"n": args.n, "r": r})
                   for r, (x, y) in sorted(by.items())]
    return Result(COVARIANCE_COLUMNS, rows, [r.to_dict() for r in reports])


def cmd_exponent(args):
    rs = _rs(args)
    if len(rs) < 3:
        raise UsageError("--tau", "need at least 3 distinct values of round(tau n)")
    cfg = ReplicaConfig(args.n, tuple(rs), args.ic, args.replicas, args.seed, geometry=False)
    recs = list(run_replicas(cfg, threads=args.threads))
    reports, fit = covariance_exponent(recs, args.n)
    rows = [[rep.config["tau"], rep.config["r"], rep.estimate, rep.stderr,
             rep.estimate / args.n ** (2.0 / 3.0)] for rep in reports]
    fd = fit.to_dict()
    return Result(["tau", "r", "cov", "stderr", "rho"], rows,
                  [rep.to_dict() for rep in reports] + [dict(fd, label="exponent_fit")],
                  {"slope": fit.slope, "slope_stderr": fit.slope_stderr, "r2": fit.r2})


def cmd_profile(args):
    n = args.n
    field = FieldSpec(seed=args.seed)
    hw = n if args.half_width is None else min(args.half_width, n)
    if args.kind == "point":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            prof = solve_backward(field, (n, n), 0, hw)
        sp = rescale_point_profile(prof, n)
        m, raw = prof.m, prof.values
    else:
        sol = solve_forward(field, make_ic("flat", args.seed), 2 * n)
        a, raw = sol.row(2 * n)
        m = a // 2
        keep = np.abs(m) <= hw
        m, raw = m[keep], raw[keep]
        sp = rescale_flat_profile(m, raw, n)
    rows = list(zip(m.tolist(), sp.x, raw, sp.values))
    est = [{"label": "argmax_x", "estimate": sp.argmax()},
           {"label": "space_scale", "estimate": space_scale(n)}]
    return Result(["m", "x", "raw", "scaled"], rows, est)


def cmd_geodesic(args):
    n = args.n
    field = FieldSpec(seed=args.seed)
    sol = solve_forward(field, make_ic(args.ic, args.seed), 2 * n)
    path = trace_geodesic(sol, (n, n))
    rows = [(int(s), int(a), int((s + a) // 2), int((s - a) // 2))
            for s, a in zip(path.sums, path.transverse)]
    est = [{"label": "weight", "estimate": path.weight},
           {"label": "transversal_fluctuation", "estimate": transversal_fluctuation(path)}]
    if args.r is not None:
        if args.r > n:
            raise UsageError("--r", f"must not exceed --n {n}")
        u = crossing_point(path, args.r)
        est.append({"label": "crossing_a", "estimate": u.a})
    return Result(["s", "a", "v1", "v2"], rows, est)


def _event_params(args):
    try:
        return EventParams(theta=args.theta, alpha=args.alpha, tau=args.decay_tau, phi=args.phi,
                           L=args.L, M=args.M, epsilon=args.epsilon)
    except ParameterError as exc:
        raise UsageError("--decay-tau" if "tau" in str(exc) else "--theta", str(exc))


def event_replica(event, n, r, p, seed, interval=(-0.01, 0.01), c1=1.0, penalty=None):
    """Evaluate one indicator on the field with the given replica seed."""
    field = FieldSpec(seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if event == "e_dec":
            return indicator_e_dec(solve_backward(field, (n, n), r, n - r), r, n, p)
        if event == "two_peaks":
            hw = min(n, int(math.ceil(2 * p.M * space_scale(n))) + 1)
            prof = rescale_point_profile(solve_backward(field, (n, n), 0, hw), n)
            return indicator_two_peaks(prof, interval, p)
        if event == "large_tf":
            return indicator_large_tf(field, r, p, c1)
        if event == "barrier":
            return indicator_barrier(field, BarrierRegion.from_params(r, p), p, penalty)
        if event == "abc":
            hw = min(n - r, int(math.ceil(p.M * n ** (2.0 / 3.0))) + 1)
            return classify_a_b_c(solve_backward(field, (n, n), r, hw), r, n, p)
    raise ValueError(event)


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=16))


def cmd_events(args):
    p = _event_params(args)
    n, r = args.n, args.r
    if args.event != "two_peaks":
        if r is None:
            raise UsageError("--r", f"required for event {args.event}")
        if r >= n:
            raise UsageError("--r", f"must be below --n {n}")
    seeds = [replica_seed(args.seed, k) for k in range(args.replicas)]

    def one(s):
        return event_replica(args.event, n, r or 0, p, s, args.interval, args.c1, args.penalty)

    try:
        vals = _map(one, seeds, args.threads)
    except ParameterError as exc:
        raise UsageError("--r", str(exc))
    if args.event == "abc":
        rows = [(k, s, j, lab) for k, (s, (j, lab)) in enumerate(zip(seeds, vals))]
        labels = np.array([lab for _, lab in vals])
        est = [event_probability(labels == "C", label="C").to_dict(),
               event_probability(labels == "B", label="B").to_dict()]
        return Result(["replica", "seed", "j", "label"], rows, est)
    rows = [(k, s, v) for k, (s, v) in enumerate(zip(seeds, vals))]
    return Result(["replica", "seed", "value"], rows,
                  [event_probability(vals, label=args.event).to_dict()])


def cmd_tails(args):
    n = args.n
    def one(k):
        sub = replica_seed(args.seed, k)
        sol = solve_forward(FieldSpec(seed=sub), make_ic(args.ic, sub), 2 * n)
        return sub, float(sol.diag[n])

    vals = _map(one, range(args.replicas), args.threads)
    t = np.array([v for _, v in vals])
    stat = (t - 4.0 * n) / n ** (1.0 / 3.0)
    if len(stat) < 100:
        raise UsageError("--replicas", "tails need at least 100 replicas")
    curve = tail_curve(stat, args.thresholds)
    rows = [(x, up, lo) for x, up, lo in curve]
    est = [{"label": "mean_T", "estimate": float(t.mean()),
            "stderr": float(t.std(ddof=1) / math.sqrt(len(t)))},
           variance(t, label="var_T").to_dict()]
    return Result(["x", "upper", "lower"], rows, est)


def cmd_brownian(args):
    if args.mode == "bound":
        m = args.m if args.m is not None else args.eps
        est = [{"label": "C2", "estimate": two_peak_constant(args.M)},
               {"label": "bound", "estimate": two_peak_bound(args.M, m, args.eps)}]
        return Result(["M", "m", "eps", "bound"], [(args.M, m, args.eps, est[1]["estimate"])], est)
    step = args.step if args.step is not None else 1e-3 * args.M
    if args.mode == "two-peak":
        interval = args.interval or [-args.eps / 2, args.eps / 2]
        if interval[0] < -2 * args.M or interval[1] > 2 * args.M:
            raise UsageError("--interval", "must lie inside [-2M, 2M]")
        rep = two_peak_mc(args.M, interval, args.eps, args.replicas, step, args.seed)
        m = interval[1] - interval[0]
        bound = two_peak_bound(args.M, m, args.eps)
        return Result(["estimate", "stderr", "ci_low", "ci_high", "bound"],
                      [(rep.estimate, rep.stderr, rep.ci_low, rep.ci_high, bound)],
                      [rep.to_dict(), {"label": "bound", "estimate": bound}])
    if not 0 < args.lam < args.lam2 < 1:
        raise UsageError("--lam", "need 0 < lam < lam2 < 1")
    if not args.decay_tau < 0.5:
        raise UsageError("--decay-tau", "must be below 1/2")
    reps = c_prime_event_mc(args.M, args.lam, args.lam2, args.alpha, args.decay_tau,
                            args.replicas, step, args.seed, clauses=True)
    rows = [(r.label, r.estimate, r.stderr, r.ci_low, r.ci_high) for r in reps]
    return Result(["label", "estimate", "stderr", "ci_low", "ci_high"], rows,
                  [r.to_dict() for r in reps])


def cmd_oracle(args):
    rep = run_oracle_suite(args.max_sum, args.cases, args.seed)
    rows = [(rep.cases, rep.checks, len(rep.failures), int(rep.passed))]
    est = [{"label": "checks", "estimate": rep.checks},
           {"label": "failures", "estimate": len(rep.failures)}]
    extra = {"passed": rep.passed, "failures": [str(f) for f in rep.failures[:20]]}
    return Result(["cases", "checks", "failures", "passed"], rows, est, extra, ok=rep.passed)


COMMANDS = {
    "covariance": cmd_covariance,
    "exponent": cmd_exponent,
    "profile": cmd_profile,
    "geodesic": cmd_geodesic,
    "events": cmd_events,
    "tails": cmd_tails,
    "brownian": cmd_brownian,
    "oracle-check": cmd_oracle,
}


def run_command(argv) -> int:
    argv = list(argv)
    try:
        parser, args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"lpplab: error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        res = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"lpplab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"lpplab {args.command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    runtime = time.perf_counter() - t0
    if _format(args) == "json":
        text = write_json(args, res.estimates, runtime, res.extra)
    else:
        text = write_csv(args, res.columns, res.rows)
    try:
        _emit(args, text)
    except OSError as exc:
        print(f"lpplab: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    if not res.ok:
        print(f"lpplab {args.command}: check failed", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
