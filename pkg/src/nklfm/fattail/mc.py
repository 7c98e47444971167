"""Monte Carlo estimate of the fat-tail probability."""
from __future__ import annotations

from functools import partial

import numpy as np

from nklfm._mc import DEFAULT_CHUNK, Estimate, distinct_uniforms, moments_from_values, run_chunks, subbatch_rows
from nklfm.fattail.algorithm import check_direct_batch
from nklfm.model import DistributionKind, from_uniform, split_neighborhood


def _fat_kernel(N: int, K: int, dist: str, rng: np.random.Generator, count: int):
    width = N * (K + 2)
    rows = subbatch_rows(width)
    hits = []
    done = 0
    while done < count:
        m = min(rows, count - done)
        v = from_uniform(dist, distinct_uniforms(rng, m, width))
        y, y_mut = split_neighborhood(v, N, K)
        hits.append(check_direct_batch(y, y_mut))
        done += m
    return moments_from_values(np.concatenate(hits).astype(float))


def mc_p_fat(
    N: int,
    K: int,
    n: int,
    seed: int,
    *,
    dist: DistributionKind | str = DistributionKind.UNIFORM01,
    chunk_size: int = DEFAULT_CHUNK,
    jobs: int = 1,
) -> Estimate:
    """Fraction of samples where every window's best base value beats its
    best mutant. ``dist`` only relabels the same uniforms monotonically, so the
    verdicts (and the estimate) do not depend on it."""
    if K < 1 or N < K + 1:
        raise ValueError(f"need 1 <= K <= N - 1, got N={N}, K={K}")
    kernel = partial(_fat_kernel, N, K, DistributionKind(dist).value)
    return run_chunks(kernel, n, seed, "fat-direct", chunk_size, jobs)
