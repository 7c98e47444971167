"""Asymptotic fat-tail prediction against restricted exact enumeration as
N/(K+1) moves through both regimes."""
import argparse
import math

from nklfm.fattail.enumeration import enumerate_exact
from nklfm.fattail.table1 import table1_breakdown


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=100)
    ap.add_argument("--r-max", type=int, default=4)
    ap.add_argument("--samples", type=int, default=200_000)
    args = ap.parse_args()
    K = args.k
    print(f"{'N':>5} {'N/(K+1)':>8} {'row':>3} {'predicted':>11} {'enumerated':>11} {'remainder':>10}")
    for c in (1.1, 1.5, 1.9, 2.2, 2.5, 2.8, 3.3):
        N = math.ceil(c * (K + 1))
        pred = table1_breakdown(N, K, n=args.samples)
        res = enumerate_exact(N, K, r_max=args.r_max)
        print(
            f"{N:>5} {N / (K + 1):>8.3f} {pred.row:>3} {pred.value:>11.4e} "
            f"{float(res.total):>11.4e} {res.remainder_bound:>10.2e}"
        )


if __name__ == "__main__":
    main()
