"""Conditional-MC local-maximum probability for each distribution next to the
fat-tail limit, over a few (N, K)."""
import argparse

from nklfm.estimate import conditional_mc
from nklfm.fattail.enumeration import enumerate_exact
from nklfm.model import DISTRIBUTIONS, ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cases = [(6, 1), (8, 2), (10, 3), (12, 3)]
    print(f"{'N':>3} {'K':>3} {'fat (exact)':>12} " + " ".join(f"{d:>15}" for d in DISTRIBUTIONS))
    for N, K in cases:
        fat = float(enumerate_exact(N, K).total)
        cells = []
        for i, dist in enumerate(DISTRIBUTIONS):
            e = conditional_mc(ModelParams(N, K, dist), args.samples, args.seed + i)
            cells.append(f"{e.value:9.5f}±{e.stderr:.0e}")
        print(f"{N:>3} {K:>3} {fat:>12.5f} " + " ".join(f"{c:>15}" for c in cells))


if __name__ == "__main__":
    main()
