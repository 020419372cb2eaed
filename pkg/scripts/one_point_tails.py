"""One-point fluctuations of the droplet passage time and their two tails.

    python scripts/one_point_tails.py --n 1000 --replicas 20000
"""

import argparse

import numpy as np

from lpplab.estimate import ReplicaConfig, loglog_fit, run_replicas, tail_curve


def endpoint(n, replicas, seed):
    cfg = ReplicaConfig(n, (n,), "droplet", replicas, seed, geometry=False)
    return np.array([rec.x_n for rec in run_replicas(cfg)])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--replicas", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=21)
    a = ap.parse_args()
    t = endpoint(a.n, a.replicas, a.seed)
    s = (t - 4 * a.n) / a.n ** (1 / 3)
    print(f"mean(T)/4n - 1 = {t.mean() / (4 * a.n) - 1:.5f}, mean S {s.mean():.3f}, sd {s.std():.3f}")
    for label, x in (("uncentred", s), ("centred", s - s.mean())):
        for thr, up, lo in tail_curve(x, [1.0, 3.0, 5.0]):
            print(f"{label:9s} x={thr}: P(S >= x) {up:.4f}  P(S <= -x) {lo:.4f}")
    ns = [a.n // 4, a.n // 2, a.n]
    var = [endpoint(n, a.replicas // 4, a.seed + n).var(ddof=1) for n in ns]
    print(f"Var slope over n={ns}: {loglog_fit(ns, var).slope:.3f}")


if __name__ == "__main__":
    main()
