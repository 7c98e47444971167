import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nklfm.fattail.algorithm import (
    CoverSequence,
    check_direct,
    check_direct_batch,
    h_prime_event,
    missed_count,
    missed_set,
    run_cover_algorithm,
    run_cover_algorithm_batch,
)
from nklfm.model import ModelParams, NeighborhoodSample, sample_neighborhood, split_neighborhood


def _reference_algorithm(sample):
    """Steps 1-5 on an explicit active collection, written independently."""
    N, K = sample.N, sample.K
    active = {("Y", j): sample.y[j] for j in range(N)}
    for j in range(N):
        for i in range(K + 1):
            active[("M", j, i)] = sample.y_mut[j, i]
    picks = []
    while any(key[0] == "M" for key in active):
        key = max(active, key=active.get)
        if key[0] == "M":
            return False, tuple(picks)
        jr = key[1]
        picks.append(jr)
        del active[key]
        for d in range(K + 1):
            for i in range(K + 1):
                active.pop(("M", (jr + d) % N, i), None)
    return True, tuple(picks)


def test_h_prime_examples():
    # N = 2, K = 1: position 1 sees y[0], y[1]
    s = NeighborhoodSample(np.array([0.9, 0.1]), np.array([[0.01, 0.02], [0.5, 0.6]]))
    assert h_prime_event(s, 1)
    s = NeighborhoodSample(np.array([0.2, 0.1]), np.array([[0.01, 0.02], [0.5, 0.6]]))
    assert not h_prime_event(s, 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10), st.integers(1, 4), st.integers(0, 2**31))
def test_rank_invariance(N, K, seed):
    K = min(K, N - 1)
    s = sample_neighborhood(ModelParams(N, K, "normal"), seed)
    t = NeighborhoodSample(np.exp(s.y), np.exp(s.y_mut))
    assert [h_prime_event(s, j) for j in range(N)] == [h_prime_event(t, j) for j in range(N)]


def test_check_direct_examples():
    N, K = 5, 2
    y = np.arange(N) + 10.0
    y_mut = np.arange(N * (K + 1), dtype=float).reshape(N, K + 1) / 10
    assert check_direct(NeighborhoodSample(y, y_mut))
    y_mut = y_mut.copy()
    y_mut[2, 1] = 100.0
    assert not check_direct(NeighborhoodSample(y, y_mut))


def test_global_max_mutant_fails_immediately():
    s = sample_neighborhood(ModelParams(6, 2, "uniform01"), 3)
    ym = s.y_mut.copy()
    ym[4, 0] = 2.0
    out = run_cover_algorithm(NeighborhoodSample(s.y, ym))
    assert not out.verdict
    assert out.sequence.indices == ()


def test_two_largest_bases_cover_n4():
    # 1-based Y_1, Y_3 are positions 0 and 2 here; with K = 1 their windows cover
    y = np.array([0.95, 0.1, 0.99, 0.2])
    y_mut = np.arange(8, dtype=float).reshape(4, 2) / 10
    out = run_cover_algorithm(NeighborhoodSample(y, y_mut))
    assert out.verdict
    assert out.sequence.indices == (2, 0)
    y[0] = 0.999
    assert run_cover_algorithm(NeighborhoodSample(y, y_mut)).sequence.indices == (0, 2)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 12), st.integers(1, 5), st.integers(0, 2**31))
def test_matches_reference_and_definition(N, K, seed):
    K = min(K, N - 1)
    s = sample_neighborhood(ModelParams(N, K, "uniform01"), seed)
    out = run_cover_algorithm(s)
    verdict, picks = _reference_algorithm(s)
    assert out.verdict == verdict == check_direct(s)
    assert out.sequence.indices == picks
    if out.verdict:
        assert out.sequence.is_minimal_cover()


@pytest.mark.parametrize("N,K", [(8, 2), (12, 3), (20, 4), (7, 6)])
def test_batch_equivalence(N, K):
    rng = np.random.default_rng(N * 100 + K)
    u = rng.random((5000, N * (K + 2)))
    verdicts = [o.verdict for o in run_cover_algorithm_batch(u, N, K)]
    np.testing.assert_array_equal(verdicts, check_direct_batch(*split_neighborhood(u, N, K)))


def test_cover_sequence_validation():
    with pytest.raises(ValueError):
        CoverSequence((1, 1), 5, 1)
    with pytest.raises(ValueError):
        CoverSequence((5,), 5, 1)
    with pytest.raises(ValueError):
        CoverSequence((0,), 2, 2)


def test_cover_predicates():
    assert CoverSequence((0, 2), 4, 1).is_minimal_cover()
    assert CoverSequence((0, 1, 2), 4, 1).is_minimal_cover()
    assert not CoverSequence((0, 2, 1), 4, 1).is_minimal_cover()
    assert not CoverSequence((0,), 4, 1).is_cover()
    assert CoverSequence((), 4, 1).covered_after(0).sum() == 0


def test_missed_count_examples():
    seq = CoverSequence((0,), 4, 1)
    assert missed_count(seq, 1) == 4
    assert missed_count(seq, 2) == 2
    np.testing.assert_array_equal(missed_set(seq, 2), [2, 3])
    with pytest.raises(ValueError):
        missed_count(seq, 3)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 30), st.integers(1, 8), st.data())
def test_missed_count_bounds(N, K, data):
    K = min(K, N - 1)
    r = data.draw(st.integers(0, min(N, 6)))
    idx = data.draw(st.permutations(range(N)))[:r]
    seq = CoverSequence(tuple(idx), N, K)
    prev = N
    for s in range(1, r + 2):
        M = missed_count(seq, s)
        assert N >= M >= N - (s - 1) * (K + 1)
        assert M <= prev
        prev = M
