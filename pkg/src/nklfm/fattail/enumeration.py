"""Exact fat-tail probabilities by enumerating cover sequences.

The cover algorithm's output splits the event "zero genome is an LFM" into
disjoint pieces, one per minimal cover sequence. After ``s - 1`` picks there
are ``N - (s - 1)`` base values and ``(K + 1) M(s)`` mutant values still
active, all exchangeable, so each sequence has a closed-form probability.

Full mode memoises over the set of picked windows (N <= 12). Restricted mode
handles large N for sequences of length <= 4: rotation fixes ``j_1 = 0``, the
last level is vectorised and the final pick is counted in closed form.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from nklfm.fattail.algorithm import CoverSequence, missed_count
from nklfm.model import InfeasibleSizeError

MAX_FULL_N = 12
MAX_RESTRICTED_R = 4
MAX_RESTRICTED_N = 2000


def sequence_probability(seq: CoverSequence) -> Fraction:
    """Probability that the algorithm's first ``len(seq)`` picks are ``seq``
    (and, for a minimal cover, that it then stops with TRUE)."""
    N, K = seq.n, seq.k
    p = Fraction(1)
    for s in range(1, len(seq) + 1):
        p /= N - (s - 1) + (K + 1) * missed_count(seq, s)
    return p


def _step_denominator(N: int, K: int, s: int, M: int) -> int:
    return N - (s - 1) + (K + 1) * M


def _prob_from_history(N: int, K: int, hist: tuple[int, ...]) -> Fraction:
    den = 1
    for s, M in enumerate(hist, start=1):
        den *= _step_denominator(N, K, s, M)
    return Fraction(1, den)


@dataclass(frozen=True)
class EnumerationResult:
    """Exact probability, split by the number ``r`` of covering windows.

    In restricted mode ``total`` sums only ``r <= r_max`` and
    ``remainder_bound`` bounds the missing mass from ``r > r_max`` (zero in
    full mode)."""

    N: int
    K: int
    r_max: int | None
    by_r: dict[int, Fraction]
    remainder_bound: float = 0.0
    n_sequences: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> Fraction:
        return sum(self.by_r.values(), Fraction(0))

    def as_dict(self) -> dict:
        t = self.total
        return {
            "N": self.N,
            "K": self.K,
            "r_max": self.r_max,
            "exact": f"{t.numerator}/{t.denominator}",
            "decimal": float(t),
            "by_r": {
                str(r): {"exact": f"{p.numerator}/{p.denominator}", "decimal": float(p)}
                for r, p in sorted(self.by_r.items())
            },
            "n_sequences": {str(r): c for r, c in sorted(self.n_sequences.items())},
            "remainder_bound": self.remainder_bound,
            "upper_bound": float(t) + self.remainder_bound,
        }


def _check_nk(N: int, K: int) -> None:
    if K < 1 or N < K + 1:
        raise ValueError(f"need 1 <= K <= N - 1, got N={N}, K={K}")


# ---------------------------------------------------------------------------
# full mode


def _windows_masks(N: int, K: int) -> list[int]:
    out = []
    for j in range(N):
        m = 0
        for d in range(K + 1):
            m |= 1 << ((j + d) % N)
        out.append(m)
    return out


def _continuation_table(N: int, K: int):
    """Memoised map ``picked-set bitmask -> {extra steps: probability of TRUE}``."""
    wins = _windows_masks(N, K)
    full = (1 << N) - 1

    @lru_cache(maxsize=None)
    def cover_of(picked: int) -> int:
        c = 0
        j = 0
        p = picked
        while p:
            if p & 1:
                c |= wins[j]
            p >>= 1
            j += 1
        return c

    @lru_cache(maxsize=None)
    def cont(picked: int) -> tuple[tuple[int, Fraction], ...]:
        cov = cover_of(picked)
        if cov == full:
            return ((0, Fraction(1)),)
        r = bin(picked).count("1")
        M = N - bin(cov).count("1")
        step = Fraction(1, _step_denominator(N, K, r + 1, M))
        acc: dict[int, Fraction] = {}
        for j in range(N):
            if picked >> j & 1:
                continue
            for d, p in cont(picked | (1 << j)):
                acc[d + 1] = acc.get(d + 1, Fraction(0)) + step * p
        return tuple(sorted(acc.items()))

    return cont, cover_of


def _full(N: int, K: int) -> EnumerationResult:
    if N > MAX_FULL_N:
        raise InfeasibleSizeError(f"full enumeration needs N <= {MAX_FULL_N}, got {N}")
    cont, _ = _continuation_table(N, K)
    by_r = dict(cont(0))
    counts = _count_minimal_covers(N, K)
    return EnumerationResult(N, K, None, by_r, 0.0, counts)


def _count_minimal_covers(N: int, K: int) -> dict[int, int]:
    wins = _windows_masks(N, K)
    full = (1 << N) - 1

    @lru_cache(maxsize=None)
    def count(picked: int, cov: int) -> tuple[tuple[int, int], ...]:
        if cov == full:
            return ((0, 1),)
        acc: Counter = Counter()
        for j in range(N):
            if not picked >> j & 1:
                for d, c in count(picked | (1 << j), cov | wins[j]):
                    acc[d + 1] += c
        return tuple(sorted(acc.items()))

    return dict(count(0, 0))


def q_exact(prefix: CoverSequence) -> Fraction:
    """Probability that the algorithm ends TRUE given that it began with ``prefix``."""
    N, K = prefix.n, prefix.k
    if N > MAX_FULL_N:
        raise InfeasibleSizeError(f"q_exact needs N <= {MAX_FULL_N}, got {N}")
    for t in range(len(prefix)):
        if prefix.covered_after(t).all():
            raise ValueError("prefix continues past a completed cover")
    cont, _ = _continuation_table(N, K)
    mask = 0
    for j in prefix.indices:
        mask |= 1 << j
    return sum((p for _, p in cont(mask)), Fraction(0))


def first_pick_decomposition(N: int, K: int) -> Fraction:
    """Total probability over the first pick: sum_j P(j_1 = j) Q((j,))."""
    total = Fraction(0)
    for j in range(N):
        seq = CoverSequence((j,), N, K)
        if seq.is_cover():
            total += sequence_probability(seq)
        else:
            total += sequence_probability(seq) * q_exact(seq)
    return total


# ---------------------------------------------------------------------------
# restricted mode


def continuation_bound(run_lengths, K: int) -> float:
    """Upper bound on the chance of finishing TRUE given the missed runs.

    A missed run of length m can only be covered if the largest of the m + K
    base values that can cover it beats its m(K+1) mutants; runs are at least
    K + 1 apart, so these events involve disjoint variables and multiply.
    """
    q = 1.0
    for m in run_lengths:
        q *= (m + K) / (m + K + m * (K + 1))
    return q


def _runs_linear(missed: np.ndarray):
    """Run starts/lengths of True stretches in rows of ``missed``; column 0 is
    always covered (it belongs to window ``j_1 = 0``), so runs never wrap."""
    rows, n = missed.shape
    pad = np.zeros((rows, 1), dtype=bool)
    ext = np.concatenate([pad, missed, pad], axis=1)
    d = np.diff(ext.astype(np.int8), axis=1)
    sr, sc = np.nonzero(d == 1)
    er, ec = np.nonzero(d == -1)
    return sr, ec - sc


def _restricted(N: int, K: int, r_max: int) -> EnumerationResult:
    if r_max > MAX_RESTRICTED_R:
        raise InfeasibleSizeError(f"restricted enumeration needs r_max <= {MAX_RESTRICTED_R}")
    if N > MAX_RESTRICTED_N:
        raise InfeasibleSizeError(f"restricted enumeration needs N <= {MAX_RESTRICTED_N}")
    if r_max < 1:
        raise ValueError("r_max must be >= 1")

    tallies: dict[int, Counter] = {r: Counter() for r in range(1, r_max + 1)}
    remainder = 0.0

    if K + 1 >= N:
        # a single window covers everything
        tallies[1][(N,)] += N
        return _assemble(N, K, r_max, tallies, 0.0, symmetric=False)

    win = np.zeros((N, N), dtype=bool)
    for j in range(N):
        win[j, (j + np.arange(K + 1)) % N] = True

    cov0 = win[0].copy()
    state = [((0,), cov0, (N, N - int(cov0.sum())))]
    last = r_max - 1  # prefix length analysed in closed form

    def analyse(picks_hist, cov, prob):
        """Closed-form next-step completions and remainder for prefixes of
        length ``last``; ``cov`` rows are their coverage masks."""
        nonlocal remainder
        hists, probs = picks_hist, prob
        missed = ~cov
        M = missed.sum(axis=1)
        rows, lengths = _runs_linear(missed)
        nruns = np.bincount(rows, minlength=cov.shape[0])
        logq = np.zeros(cov.shape[0])
        np.add.at(logq, rows, np.log((lengths + K) / (lengths + K + lengths * (K + 1))))
        single = (nruns == 1) & (M <= K + 1)
        completions = np.where(single, K + 2 - M, 0)
        den = N - last + (K + 1) * M
        exact_next = completions / den
        slack = np.exp(logq) - exact_next
        remainder += float(np.sum(probs * np.clip(slack, 0.0, None)))
        for h, m, c in zip(hists, M.tolist(), completions.tolist()):
            if c:
                tallies[last + 1][h + (m,)] += c

    if last == 0:
        # no single window covers; everything is left to the remainder
        p1 = 1.0 / _step_denominator(N, K, 1, N)
        remainder = N * p1 * continuation_bound([N - K - 1], K)
        return _assemble(N, K, r_max, tallies, remainder, symmetric=True)
    if last == 1:
        h = state[0][2]
        if h[-1] == 0:
            tallies[1][h[:-1]] += 1
        else:
            analyse([h[:-1]], cov0[None, :], np.array([1.0 / _step_denominator(N, K, 1, N)]))
        return _assemble(N, K, r_max, tallies, remainder * N, symmetric=True)

    if state[0][2][-1] == 0:
        tallies[1][(N,)] += 1
        return _assemble(N, K, r_max, tallies, 0.0, symmetric=True)

    def expand(prefixes, depth):
        # prefixes: list of (picks, cov, hist) with len(picks) == depth - 1
        for picks, cov, hist in prefixes:
            cand = np.ones(N, dtype=bool)
            cand[list(picks)] = False
            js = np.flatnonzero(cand)
            new_cov = cov[None, :] | win[js]
            M_new = N - new_cov.sum(axis=1)
            done = M_new == 0
            if done.any():
                tallies[depth][hist] += int(done.sum())
            keep = ~done
            if depth == last:
                # every child prefix of length `last` shares this probability
                p_prefix = float(_prob_from_history(N, K, hist))
                prob = np.full(int(keep.sum()), p_prefix)
                analyse([hist] * int(keep.sum()), new_cov[keep], prob)
            else:
                children = [
                    ((*picks, int(j)), c, hist + (int(m),))
                    for j, c, m in zip(js[keep], new_cov[keep], M_new[keep])
                ]
                expand(children, depth + 1)

    expand(state, 2)
    return _assemble(N, K, r_max, tallies, remainder * N, symmetric=True)


def _assemble(N, K, r_max, tallies, remainder, symmetric) -> EnumerationResult:
    mult = N if symmetric else 1
    by_r: dict[int, Fraction] = {}
    counts: dict[int, int] = {}
    for r, tally in tallies.items():
        total = Fraction(0)
        n_seq = 0
        for hist, c in tally.items():
            total += c * _prob_from_history(N, K, hist)
            n_seq += c
        by_r[r] = total * mult if symmetric else total
        counts[r] = n_seq * mult if symmetric else n_seq
    # a float remainder is rounded up so that it stays a bound
    rem = math.nextafter(remainder * (1 + 1e-12), math.inf) if remainder > 0 else 0.0
    return EnumerationResult(N, K, r_max, by_r, rem, counts)


def enumerate_exact(N: int, K: int, r_max: int | None = None) -> EnumerationResult:
    """Exact p_fat(N, K) (full mode) or its part from covers of length <= r_max."""
    _check_nk(N, K)
    if r_max is None:
        return _full(N, K)
    return _restricted(N, K, r_max)


def closed_form_two_windows(N: int, K: int) -> Fraction:
    """Probability that two windows finish the cover, for K+2 <= N <= 2(K+1)."""
    j = 2 * (K + 1) - N
    if not 0 <= j <= K:
        raise ValueError("needs K + 2 <= N <= 2(K + 1)")
    return Fraction(1, K + 2) * Fraction(j + 1, N - 1 + (K + 1) * (N - K - 1))
