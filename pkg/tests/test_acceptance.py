"""Acceptance checks, one test per criterion, each printing a PASS/FAIL line.

Sample counts, tolerances and runtime limits are the stated ones.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from nklfm import k1exact
from nklfm._mc import chunk_rng, distinct_uniforms
from nklfm.estimate import conditional_mc, normal_upper_bound, scaled_log_ratio
from nklfm.fattail.algorithm import check_direct_batch, run_cover_algorithm_batch
from nklfm.fattail.enumeration import closed_form_two_windows, enumerate_exact
from nklfm.fattail.mc import mc_p_fat
from nklfm.fattail.table1 import table1_breakdown
from nklfm.fattail.torus import f_r_mc, torus_measure_mc
from nklfm.model import DISTRIBUTIONS, ModelParams, split_neighborhood

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return _report


def test_criterion_1_algorithm_equals_definition(report):
    t0 = time.perf_counter()
    parts = []
    ok = True
    for c, (N, K) in enumerate([(8, 2), (12, 3), (20, 4)]):
        u = distinct_uniforms(chunk_rng(101, c), 100_000, N * (K + 2))
        direct = check_direct_batch(*split_neighborhood(u, N, K))
        algo = np.array([o.verdict for o in run_cover_algorithm_batch(u, N, K)])
        agree = float((direct == algo).mean())
        ok &= agree == 1.0
        parts.append(f"({N},{K}) agree={agree:.6f} p={algo.mean():.4f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report(1, ok, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_criterion_2_exact_fat_tail_n4(report):
    t0 = time.perf_counter()
    r2 = enumerate_exact(4, 1, r_max=2).total
    ok = r2 == Fraction(1, 21) == closed_form_two_windows(4, 1)
    parts = [f"r<=2 total={r2}"]
    for i, N in enumerate((4, 5, 6)):
        exact = enumerate_exact(N, 1).total
        e = mc_p_fat(N, 1, 10_000_000, 200 + i)
        z = (e.value - float(exact)) / e.stderr
        ok &= abs(z) <= 4
        parts.append(f"N={N} exact={exact} mc={e.value:.6f}±{e.stderr:.1e} z={z:+.2f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    report(2, ok, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_criterion_3_closed_form_regression(report):
    ok = True
    parts = []
    for K in (10, 50):
        for j in sorted({0, 3, K // 2, K}):
            N = 2 * (K + 1) - j
            expect = Fraction(1, K + 2) * Fraction(j + 1, N - 1 + (K + 1) * (N - K - 1))
            got = enumerate_exact(N, K, r_max=2).by_r.get(2, Fraction(0))
            ok &= got == expect
            parts.append(f"K={K} j={j} {got}")
    report(3, ok, "; ".join(parts))


def test_criterion_4_k1_constants(report):
    t0 = time.perf_counter()
    seq = k1exact.recursion_float(2000)
    lv = seq.log_values
    ratio = math.exp(lv[1999] - lv[2000])
    rep = k1exact.growth_rate(seq)
    z0 = k1exact.find_z0(1e-10)
    resid = k1exact.riccati_residual(k1exact.recursion_exact(51))
    ok = (
        abs(ratio - 1.803034611) <= 5e-3
        and abs(rep.rate_aitken + 0.58947114) <= 5e-3
        and abs(z0 - 1.803034611) <= 1e-6
        and resid == 0
    )
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report(
        4,
        ok,
        f"p1999/p2000={ratio:.9f} rate_aitken={rep.rate_aitken:.9f} z0={z0:.10f} "
        f"riccati_residual={resid}; {elapsed:.1f}s",
    )


def test_criterion_5_recursion_vs_simulation(report):
    t0 = time.perf_counter()
    exact = k1exact.recursion_exact(10)
    ok = exact[1] == Fraction(1, 2) and exact[2] == Fraction(2, 7)
    parts = []
    for i, N in enumerate((1, 2, 5, 10)):
        e = k1exact.mc_h_star(N, 10_000_000, 500 + i)
        z = (e.value - float(exact[N])) / e.stderr
        ok &= abs(z) <= 4
        parts.append(f"N={N} exact={float(exact[N]):.6f} mc={e.value:.6f} z={z:+.2f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 180
    report(5, ok, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_criterion_6_normal_case(report):
    t0 = time.perf_counter()
    ub = normal_upper_bound(2, 1)
    c = conditional_mc(ModelParams(2, 1, "normal"), 1_000_000, 600)
    ok = abs(ub - 1 / 3) <= 1e-6 and abs(c.value - 1 / 3) <= 4 * c.stderr
    parts = [f"UB(2,1)={ub:.10f} cmc(2,1)={c.value:.5f}±{c.stderr:.1e}"]
    for i, K in enumerate((16, 32, 64)):
        N = 4 * K
        e = conditional_mc(ModelParams(N, K, "normal"), 1_000_000, 610 + i)
        ratio = scaled_log_ratio(e.value, N, K)
        bound = normal_upper_bound(N, K)
        ok &= 0.6 <= ratio <= 1.8 and bound >= e.value - 4 * e.stderr
        parts.append(f"K={K} p={e.value:.3e}±{e.stderr:.1e} ratio={ratio:.3f} UB={bound:.3e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    report(6, ok, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_criterion_7_fat_tail_is_infimum(report):
    t0 = time.perf_counter()
    N, K, n = 12, 3, 1_000_000
    fat = mc_p_fat(N, K, n, 700)
    ok = True
    parts = [f"fat={fat.value:.5f}±{fat.stderr:.1e} (exact {float(enumerate_exact(N, K).total):.5f})"]
    for i, dist in enumerate(DISTRIBUTIONS):
        e = conditional_mc(ModelParams(N, K, dist), n, 710 + i)
        ok &= e.value + 4 * e.stderr >= fat.value - 4 * fat.stderr
        parts.append(f"{dist}={e.value:.5f}±{e.stderr:.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    report(7, ok, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_criterion_8_torus_properties(report):
    t0 = time.perf_counter()
    zeros = [f_r_mc(r, 0.0, 1000, 800).value for r in (3, 4, 5)]
    ok = all(v == 0.0 for v in zeros)
    ys = np.arange(1, 10) / 10
    f4 = [f_r_mc(4, y, 1_000_000, 810 + i) for i, y in enumerate(ys)]
    mono = all(b.value + 4 * b.stderr >= a.value - 4 * a.stderr for a, b in zip(f4, f4[1:]))
    ok &= mono
    t = 0.01
    f3 = f_r_mc(3, 1 - t, 10_000_000, 820)
    ratio3 = f3.value / (2 * math.log(1 / t))
    ok &= 0.6 <= ratio3 <= 1.4
    m = torus_measure_mc(3, 0.1, 1_000_000, 830)
    rel = m.value / (0.1**2 / 2.9**2) - 1
    ok &= abs(rel) <= 0.15
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    report(
        8,
        ok,
        f"f_r(0)={zeros} f4 monotone={mono} ({', '.join(f'{e.value:.4f}' for e in f4)}) "
        f"f3(0.99)/(2log100)={ratio3:.3f} measure rel.err={rel:+.3f}; {elapsed:.1f}s",
    )


def test_criterion_9_table1_vs_enumeration(report):
    t0 = time.perf_counter()
    K = 200
    N = math.ceil(2.5 * (K + 1))
    res = enumerate_exact(N, K, r_max=4)
    lo = float(res.total)
    hi = lo + res.remainder_bound
    pred = table1_breakdown(N, K, seed=900)
    # the truth lies in [lo, hi]; require 30% agreement with both ends
    worst = max(abs(pred.value / lo - 1), abs(pred.value / hi - 1))
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.3 and elapsed < 600
    report(
        9,
        ok,
        f"N={N} K={K} predicted={pred.value:.4e} enumerated={lo:.4e} +remainder<={res.remainder_bound:.3e} "
        f"worst rel.dev={worst:.3f}; {elapsed:.1f}s",
    )
