"""Three routes to the K = 1 growth constant: successive ratios, Aitken
extrapolation, and the root of the Bessel-function denominator."""
import argparse
import math

from nklfm import k1exact


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=20_000)
    args = ap.parse_args()
    z0 = k1exact.find_z0(1e-10)
    print(f"z0 (root)        {z0:.12f}   -log z0 = {-math.log(z0):.10f}")
    n = 250
    while n <= args.n_max:
        rep = k1exact.growth_rate(k1exact.recursion_float(n))
        print(
            f"n={n:>6}  ratio={rep.z0_ratio:.10f}  aitken={rep.z0_aitken:.10f}  "
            f"rate={rep.rate_aitken:.10f}  |aitken-root|={abs(rep.z0_aitken - z0):.1e}"
        )
        n *= 2
    print("first terms:", ", ".join(str(p) for p in k1exact.recursion_exact(6).values))


if __name__ == "__main__":
    main()
