"""Print the coefficients C_{k,l} for one (m, lambda, delta) and the critical shifts.

    python scripts/coefficient_table.py --m 2 --lam 1/2 --delta 0 --kmax 4
"""

import argparse
from fractions import Fraction

from projquant.quantization import C_coeff, critical_levels, critical_pairs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--lam", type=Fraction, default=Fraction(1, 2))
    ap.add_argument("--delta", type=Fraction, default=Fraction(0))
    ap.add_argument("--kmax", type=int, default=4)
    args = ap.parse_args()
    m = args.m

    print(f"m={m} lambda={args.lam} delta={args.delta}")
    for k in range(args.kmax + 1):
        if critical_levels(m, k, args.delta):
            print(f"k={k}: undefined (gamma vanishes at l in {critical_levels(m, k, args.delta)})")
            continue
        row = "  ".join(f"l={l}: {C_coeff(m, k, l, args.lam, args.delta)}" for l in range(k + 1))
        print(f"k={k}: {row}")

    print(f"\ncritical shifts for m={m} (first few):")
    for j in range(1, 6):
        delta = Fraction(m + j, m + 1)
        pairs = [p for p in critical_pairs(m, delta) if p[0] <= args.kmax + 2]
        print(f"  delta={delta}: (k, l) = {', '.join(map(str, pairs))}")


if __name__ == "__main__":
    main()
