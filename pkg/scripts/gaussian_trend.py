"""Gaussian local-maximum probability at N = 4K: conditional MC, the
integral upper bound, and the ratio log p / ((N/K)(-log K))."""
import argparse

from nklfm.estimate import conditional_mc, normal_upper_bound, scaled_log_ratio
from nklfm.model import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'K':>4} {'N':>5} {'p_hat':>11} {'stderr':>9} {'bound':>11} {'ratio':>7}")
    for K in (4, 8, 16, 32, 64):
        N = 4 * K
        e = conditional_mc(ModelParams(N, K, "normal"), args.samples, args.seed + K)
        print(
            f"{K:>4} {N:>5} {e.value:>11.4e} {e.stderr:>9.1e} {normal_upper_bound(N, K):>11.4e} "
            f"{scaled_log_ratio(e.value, N, K):>7.3f}"
        )


if __name__ == "__main__":
    main()
