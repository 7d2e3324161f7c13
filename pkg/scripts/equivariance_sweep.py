"""Sweep projective equivariance over random connections and changes alpha.

For each order k and weight mu, prints the worst relative deviation
|Q(nabla + alpha) - Q(nabla)| / max(1, |Q(nabla)|) seen over the sample.

    python scripts/equivariance_sweep.py --m 3 --orders 1 2 3 --trials 4
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from projquant.expr import Chart
from projquant.quantization import is_critical_shift, quantize
from projquant.sampling import random_alpha, random_connection, random_density, random_point, random_symbol

NAMES = ("x", "y", "z", "w", "u", "v")


def sweep(m, k, lam, mu, trials, points, rng):
    chart = Chart(NAMES[:m])
    S, f = random_symbol(chart, k, rng), random_density(chart, rng)
    pts = [random_point(m, rng) for _ in range(points)]
    worst = 0.0
    for _ in range(trials):
        conn = random_connection(chart, rng)
        changed = conn.projective_change(random_alpha(chart, rng))
        for pt in pts:
            q = quantize(conn, S, f, lam, mu, pt)
            worst = max(worst, abs(quantize(changed, S, f, lam, mu, pt) - q) / max(1.0, abs(q)))
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--orders", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--lam", type=Fraction, default=Fraction(1, 2))
    ap.add_argument("--mu", type=Fraction, nargs="+", default=[Fraction(1, 2), Fraction(1, 3)])
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--points", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'k':>2} {'mu':>6} {'max rel dev':>12} {'time':>7}")
    for k in args.orders:
        for mu in args.mu:
            if is_critical_shift(args.m, mu - args.lam):
                print(f"{k:>2} {str(mu):>6} {'critical':>12}")
                continue
            start = time.perf_counter()
            worst = sweep(args.m, k, args.lam, mu, args.trials, args.points, rng)
            print(f"{k:>2} {str(mu):>6} {worst:12.3e} {time.perf_counter() - start:6.2f}s")


if __name__ == "__main__":
    main()
