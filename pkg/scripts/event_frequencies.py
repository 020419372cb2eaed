"""Empirical frequencies of the geometric events at one system size.

    python scripts/event_frequencies.py --n 1000 --replicas 300
"""

import argparse
import collections

import numpy as np

from lpplab.cli import event_replica
from lpplab.estimate import event_probability, replica_seed
from lpplab.events import EventParams


def freq(event, n, r, p, reps, seed, **kw):
    vals = [event_replica(event, n, r, p, replica_seed(seed, k), **kw) for k in range(reps)]
    return vals if event == "abc" else event_probability(vals)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--replicas", type=int, default=300)
    ap.add_argument("--seed", type=int, default=5)
    a = ap.parse_args()
    n, reps, seed = a.n, a.replicas, a.seed

    for rn in (0.1, 0.2):
        for th in (0.25, 0.5, 1.0):
            rep = freq("e_dec", n, int(rn * n), EventParams(theta=th), reps, seed)
            print(f"e_dec r/n={rn} theta={th}: {rep.estimate:.4f} "
                  f"ratio {rep.estimate / (th * rn ** (2 / 3)):.3f}")
    rep = freq("two_peaks", n, 0, EventParams(), reps, seed, interval=(-0.01, 0.01))
    print(f"two_peaks I=[-0.01,0.01]: {rep.estimate:.4f}")
    for phi in (2.0, 4.0, 8.0):
        rep = freq("large_tf", n, n // 2, EventParams(phi=phi), reps // 3, seed, c1=0.1)
        print(f"large_tf phi={phi} c1=0.1: {rep.estimate:.4f}")
    for r in (n // 5, 2 * n // 5):
        for pen in (None, 0.0):
            rep = freq("barrier", n, r, EventParams(), reps // 3, seed, penalty=pen)
            print(f"barrier r={r} penalty={pen}: {rep.estimate:.4f}")
    for deficit in (1000.0, 1.0):
        vals = freq("abc", n, n // 5, EventParams(deficit=deficit), reps, seed)
        print(f"abc deficit={deficit}:", dict(collections.Counter(lab for _, lab in vals)),
              "mean j", np.mean([j for j, _ in vals]))


if __name__ == "__main__":
    main()
