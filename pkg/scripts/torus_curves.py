"""f_r(y) on a grid of y for r = 3, 4, 5, plus the capped f_{r+1}(1)."""
import argparse

import numpy as np

from nklfm.fattail.torus import f_r_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ys = np.round(np.arange(0.1, 1.0, 0.1), 2)
    print("y     " + " ".join(f"{'r=' + str(r):>16}" for r in (3, 4, 5)))
    for i, y in enumerate(ys):
        cells = [f_r_mc(r, y, args.samples, args.seed + 10 * i + r, method="simplex") for r in (3, 4, 5)]
        print(f"{y:<5} " + " ".join(f"{e.value:>9.4f}±{e.stderr:.0e}" for e in cells))
    for r in (4, 5):
        for cap in (1e2, 1e4, None):
            e = f_r_mc(r, 1.0, args.samples, args.seed, method="simplex", eta_cap=cap)
            print(f"f_{r}(1) cap={cap}: {e.value:.4f}±{e.stderr:.0e}")


if __name__ == "__main__":
    main()
