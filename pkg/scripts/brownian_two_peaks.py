"""Two-peaks probability for two-sided Brownian motion against its bound,
and the C' frequency as alpha varies.

    python scripts/brownian_two_peaks.py --replicas 100000
"""

import argparse

from lpplab.brownian import c_prime_event_mc, two_peak_bound, two_peak_constant, two_peak_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicas", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=3)
    a = ap.parse_args()
    print(f"C_2(1) = {two_peak_constant(1.0):.6f}")
    for eps in (0.04, 0.02, 0.01):
        rep = two_peak_mc(1.0, (-eps / 2, eps / 2), eps, a.replicas, seed=a.seed)
        print(f"eps={eps}: estimate {rep.estimate:.5f} +- {rep.stderr:.5f}, "
              f"bound {two_peak_bound(1.0, eps, eps):.5f}, estimate/eps {rep.estimate / eps:.3f}")
    for alpha in (0.4, 0.2, 0.1):
        full, ann, high = c_prime_event_mc(2.0, 0.05, 0.1, alpha, replicas=a.replicas // 5,
                                           seed=a.seed, clauses=True)
        print(f"alpha={alpha}: C'/lambda {full.estimate / 0.05:.3f} "
              f"(annulus {ann.estimate:.4f}, central {high.estimate:.4f})")


if __name__ == "__main__":
    main()
