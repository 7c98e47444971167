"""Order-statistics events and the greedy cover-checking algorithm.

In the fat-tail limit position ``j`` is safe when the largest base value in its
window beats the largest mutant value at ``j``. The cover algorithm repeatedly
takes the overall maximum of the active variables: a mutant means failure, a
base value ``Y_j`` covers positions ``j..j+K`` and retires their mutants.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nklfm.model import NeighborhoodSample, window_max


def h_prime_event(sample: NeighborhoodSample, j: int) -> bool:
    return bool(sample.window(j).max() >= sample.y_mut[j % sample.N].max())


def check_direct(sample: NeighborhoodSample) -> bool:
    return all(h_prime_event(sample, j) for j in range(sample.N))


def check_direct_batch(y: np.ndarray, y_mut: np.ndarray) -> np.ndarray:
    K = y_mut.shape[-1] - 1
    return (window_max(y, K) >= y_mut.max(axis=-1)).all(axis=-1)


@dataclass(frozen=True)
class CoverSequence:
    """Distinct window starts ``j_1, ..., j_r`` on the cycle of length ``n``;
    window ``j_s`` covers positions ``j_s, ..., j_s + k`` (mod ``n``)."""

    indices: tuple[int, ...]
    n: int
    k: int

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.k < 1 or self.n < self.k + 1:
            raise ValueError(f"need 1 <= k <= n - 1, got n={self.n}, k={self.k}")
        if len(set(idx)) != len(idx):
            raise ValueError(f"indices must be distinct: {idx}")
        if any(not 0 <= j < self.n for j in idx):
            raise ValueError(f"indices must lie in [0, {self.n})")

    def __len__(self) -> int:
        return len(self.indices)

    def covered_after(self, t: int) -> np.ndarray:
        """Boolean mask of positions covered by the first ``t`` windows."""
        cov = np.zeros(self.n, dtype=bool)
        for j in self.indices[:t]:
            cov[(j + np.arange(self.k + 1)) % self.n] = True
        return cov

    def is_cover(self) -> bool:
        return bool(self.covered_after(len(self)).all())

    def is_minimal_cover(self) -> bool:
        """Cover whose proper initial segments are not covers (a member of S(r))."""
        return self.is_cover() and (len(self) == 0 or not self.covered_after(len(self) - 1).all())


def missed_set(prefix: CoverSequence, s: int) -> np.ndarray:
    """Positions not covered by windows ``j_1..j_{s-1}`` (1-based ``s``)."""
    if not 1 <= s <= len(prefix) + 1:
        raise ValueError(f"s must lie in [1, {len(prefix) + 1}]")
    return np.flatnonzero(~prefix.covered_after(s - 1))


def missed_count(prefix: CoverSequence, s: int) -> int:
    return int(missed_set(prefix, s).size)


@dataclass(frozen=True)
class AlgorithmOutput:
    verdict: bool
    sequence: CoverSequence


def run_cover_algorithm(sample: NeighborhoodSample) -> AlgorithmOutput:
    N, K = sample.N, sample.K
    values = sample.all_values()
    order = np.argsort(-values, kind="stable")
    return _walk(order, N, K)


def _walk(order: np.ndarray, N: int, K: int) -> AlgorithmOutput:
    # walking the variables in decreasing order and skipping retired ones is
    # the same as repeatedly taking the maximum of the active collection
    covered = [False] * N
    n_uncovered = N
    picks: list[int] = []
    for v in order.tolist():
        if v < N:
            picks.append(v)
            for d in range(K + 1):
                p = (v + d) % N
                if not covered[p]:
                    covered[p] = True
                    n_uncovered -= 1
            if n_uncovered == 0:
                return AlgorithmOutput(True, CoverSequence(tuple(picks), N, K))
        elif not covered[(v - N) // (K + 1)]:
            return AlgorithmOutput(False, CoverSequence(tuple(picks), N, K))
    raise AssertionError("unreachable: every variable was retired")


def run_cover_algorithm_batch(values: np.ndarray, N: int, K: int) -> list[AlgorithmOutput]:
    """Run the algorithm on each row of ``values`` (layout as ``all_values``)."""
    orders = np.argsort(-values, axis=1, kind="stable")
    return [_walk(row, N, K) for row in orders]
