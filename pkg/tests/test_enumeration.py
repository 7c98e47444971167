import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nklfm.fattail.algorithm import CoverSequence, check_direct_batch, missed_count
from nklfm.fattail.enumeration import (
    closed_form_two_windows,
    continuation_bound,
    enumerate_exact,
    first_pick_decomposition,
    q_exact,
    sequence_probability,
)
from nklfm.fattail.mc import mc_p_fat
from nklfm.model import InfeasibleSizeError, split_neighborhood


def _brute_by_r(N, K, r_max):
    """Sum sequence_probability over minimal covers found by listing all
    ordered index tuples."""
    by_r, counts = {}, {}
    for r in range(1, r_max + 1):
        tot, c = Fraction(0), 0
        for idx in itertools.permutations(range(N), r):
            seq = CoverSequence(idx, N, K)
            if seq.is_minimal_cover():
                tot += sequence_probability(seq)
                c += 1
        by_r[r], counts[r] = tot, c
    return by_r, counts


def _exhaustive_orderings(N, K):
    """p_fat as the fraction of all orderings of the N(K+2) variables."""
    n = N * (K + 2)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    hits = check_direct_batch(*split_neighborhood(perms, N, K))
    return Fraction(int(hits.sum()), len(perms))


def test_sequence_probability_examples():
    assert sequence_probability(CoverSequence((0, 2), 4, 1)) == Fraction(1, 84)
    s2 = [CoverSequence(p, 4, 1) for p in itertools.permutations(range(4), 2)]
    s2 = [s for s in s2 if s.is_minimal_cover()]
    assert len(s2) == 4
    assert all(sequence_probability(s) == Fraction(1, 84) for s in s2)
    assert sum(sequence_probability(s) for s in s2) == Fraction(1, 21)
    assert sequence_probability(CoverSequence((), 4, 1)) == 1


@pytest.mark.parametrize("N,K", [(2, 1), (3, 1)])
def test_full_matches_exhaustive_orderings(N, K):
    assert enumerate_exact(N, K).total == _exhaustive_orderings(N, K)


@pytest.mark.parametrize("N", [3, 5, 8, 12])
def test_exchangeable_value(N):
    # every window holds every base value: the best base value must beat all N(N) mutants
    assert enumerate_exact(N, N - 1).total == Fraction(1, N + 1)


@pytest.mark.parametrize("N,K", [(4, 1), (6, 2), (7, 3), (8, 2)])
def test_full_matches_brute_force(N, K):
    res = enumerate_exact(N, K)
    by_r, counts = _brute_by_r(N, K, N)
    assert res.by_r == {r: p for r, p in by_r.items() if counts[r]}
    assert res.n_sequences == {r: c for r, c in counts.items() if c}
    assert res.remainder_bound == 0


def test_n4_k1_values():
    full = enumerate_exact(4, 1)
    assert full.total == Fraction(2, 21)
    assert full.by_r[2] == Fraction(1, 21)
    assert enumerate_exact(4, 1, r_max=2).total == Fraction(1, 21)


@pytest.mark.parametrize("N,K", [(8, 2), (10, 3), (12, 3), (7, 1), (12, 5), (11, 4)])
def test_restricted_matches_full(N, K):
    full = enumerate_exact(N, K)
    for r_max in (1, 2, 3, 4):
        res = enumerate_exact(N, K, r_max)
        for r in range(1, r_max + 1):
            assert res.by_r.get(r, 0) == full.by_r.get(r, 0)
        missing = float(full.total - res.total)
        assert missing <= res.remainder_bound * (1 + 1e-12)


@pytest.mark.parametrize("N,K,r_max", [(14, 4, 3), (16, 5, 3), (13, 3, 4)])
def test_restricted_matches_brute_force_beyond_full_mode(N, K, r_max):
    res = enumerate_exact(N, K, r_max)
    by_r, counts = _brute_by_r(N, K, r_max)
    for r in range(1, r_max + 1):
        assert res.by_r.get(r, 0) == by_r[r]
        assert res.n_sequences.get(r, 0) == counts[r]


@pytest.mark.parametrize("K", [10, 50])
def test_two_window_closed_form(K):
    for j in sorted({0, 3, K // 2, K}):
        N = 2 * (K + 1) - j
        expect = Fraction(1, K + 2) * Fraction(j + 1, N - 1 + (K + 1) * (N - K - 1))
        assert enumerate_exact(N, K, r_max=2).by_r[2] == expect
        assert closed_form_two_windows(N, K) == expect


def test_two_window_k10_j0():
    assert enumerate_exact(22, 10, r_max=2).total == Fraction(1, 1704)


def test_q_exact_complete_prefix():
    assert q_exact(CoverSequence((0, 2), 4, 1)) == 1
    with pytest.raises(ValueError):
        q_exact(CoverSequence((0, 2, 1), 4, 1))


def test_q_exact_n4_prefix():
    q = q_exact(CoverSequence((0,), 4, 1))
    assert q <= Fraction(1, 2) + 1
    # P(prefix) Q(prefix) summed over the 4 first picks recovers the total
    assert 4 * sequence_probability(CoverSequence((0,), 4, 1)) * q == Fraction(2, 21)


@pytest.mark.parametrize("N", range(3, 11))
def test_continuation_bound_53(N):
    # Q(prefix) <= 1/M + 1/K, with M the missed count after the whole prefix
    for K in range(1, N - 1):
        for r in (1, 2):
            for pre in itertools.permutations(range(N), r):
                seq = CoverSequence(pre, N, K)
                if any(seq.covered_after(t).all() for t in range(r)):
                    continue
                M = missed_count(seq, r + 1)
                q = q_exact(seq)
                if M == 0:
                    assert q == 1
                else:
                    assert q <= Fraction(1, M) + Fraction(1, K)


@pytest.mark.parametrize("N,K", [(5, 1), (7, 2), (10, 3), (12, 4)])
def test_first_pick_decomposition(N, K):
    assert first_pick_decomposition(N, K) == enumerate_exact(N, K).total


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.lists(st.integers(1, 20), min_size=1, max_size=4))
def test_continuation_bound_range(K, runs):
    b = continuation_bound(runs, K)
    assert 0 < b <= 1
    assert continuation_bound(runs + [1], K) <= b


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 11), st.integers(1, 4), st.data())
def test_51_bounds_along_sequences(N, K, data):
    K = min(K, N - 2)
    idx = data.draw(st.permutations(range(N)))
    seq = CoverSequence(tuple(idx), N, K)
    for s in range(1, N + 1):
        M = missed_count(seq, s)
        assert N >= M >= N - (s - 1) * (K + 1)


def test_mc_within_partial_bracket():
    res = enumerate_exact(20, 9, r_max=3)
    e = mc_p_fat(20, 9, 200_000, 21)
    lo, hi = float(res.total), float(res.total) + res.remainder_bound
    assert lo - 4 * e.stderr <= e.value <= hi + 4 * e.stderr


def test_mc_n5_k1():
    e = mc_p_fat(5, 1, 1_000_000, 22)
    assert abs(e.value - float(enumerate_exact(5, 1).total)) <= 4 * e.stderr


def test_mc_rank_invariant():
    a = mc_p_fat(6, 2, 20_000, 23, dist="uniform01")
    for d in ("normal", "cauchy", "negexponential", "exponential"):
        assert mc_p_fat(6, 2, 20_000, 23, dist=d) == a


def test_infeasible_sizes():
    with pytest.raises(InfeasibleSizeError):
        enumerate_exact(13, 2)
    with pytest.raises(InfeasibleSizeError):
        enumerate_exact(40, 5, r_max=5)
    with pytest.raises(InfeasibleSizeError):
        enumerate_exact(2001, 5, r_max=2)
    with pytest.raises(InfeasibleSizeError):
        q_exact(CoverSequence((0,), 13, 2))


def test_as_dict_strings():
    d = enumerate_exact(4, 1, r_max=2).as_dict()
    assert d["exact"] == "1/21"
    assert math.isclose(d["decimal"], 1 / 21)
    assert d["upper_bound"] >= d["decimal"]
