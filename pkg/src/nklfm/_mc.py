"""Seeded, chunked Monte Carlo plumbing shared by every estimator.

Each chunk ``c`` of a run draws from its own Philox stream keyed by
``(seed, c)``, so results depend only on ``(seed, chunk_size)`` and never on
how many workers evaluate the chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

DEFAULT_CHUNK = 100_000
# float64 values held in memory per sub-batch
_SUBBATCH_VALUES = 2_000_000


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo result.

    ``value`` is the point estimate (a probability for the p(N, K)
    estimators, a torus integral for ``f_r_mc``); ``stderr`` is the sample
    standard deviation over ``sqrt(n_samples)``.
    """

    value: float
    stderr: float
    n_samples: int
    seed: int
    method: str

    @property
    def p_hat(self) -> float:
        return self.value

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "p_hat": self.value,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "method": self.method,
        }


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def subbatch_rows(values_per_row: int) -> int:
    return max(1, _SUBBATCH_VALUES // max(1, values_per_row))


def distinct_uniforms(rng: np.random.Generator, rows: int, width: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1), pairwise distinct within each row.

    Rows containing an exact tie (or an exact 0) are redrawn from the same
    stream, which keeps the output a deterministic function of the stream.
    """
    u = rng.random((rows, width))
    while True:
        bad = (u <= 0.0).any(axis=1)
        if width > 1:
            s = np.sort(u, axis=1)
            bad |= (np.diff(s, axis=1) == 0.0).any(axis=1)
        nbad = int(bad.sum())
        if nbad == 0:
            return u
        u[bad] = rng.random((nbad, width))


@dataclass
class _Moments:
    """Running sums of a sample, scaled by ``exp(shift)`` to survive tiny values."""

    n: int = 0
    shift: float = -math.inf
    s1: float = 0.0
    s2: float = 0.0

    def merge(self, other: "_Moments") -> "_Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        shift = max(self.shift, other.shift)
        if shift == -math.inf:
            return _Moments(self.n + other.n, shift, 0.0, 0.0)
        a = math.exp(self.shift - shift) if self.shift > -math.inf else 0.0
        b = math.exp(other.shift - shift) if other.shift > -math.inf else 0.0
        return _Moments(
            self.n + other.n,
            shift,
            self.s1 * a + other.s1 * b,
            self.s2 * a * a + other.s2 * b * b,
        )


def moments_from_log(logv: np.ndarray) -> _Moments:
    """Moments of ``exp(logv)`` accumulated relative to the batch maximum."""
    n = int(logv.size)
    if n == 0:
        return _Moments()
    shift = float(np.max(logv))
    if shift == -math.inf:
        return _Moments(n, shift, 0.0, 0.0)
    w = np.exp(logv - shift)
    return _Moments(n, shift, float(w.sum()), float(np.dot(w, w)))


def moments_from_values(v: np.ndarray) -> _Moments:
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore"):
        return moments_from_log(np.log(v))


def _finish(m: _Moments, seed: int, method: str) -> Estimate:
    if m.n == 0:
        raise ValueError("no samples")
    if m.shift == -math.inf:
        return Estimate(0.0, 0.0, m.n, seed, method)
    scale = math.exp(m.shift)
    mean_s = m.s1 / m.n
    if m.n > 1:
        var_s = max(m.s2 - m.n * mean_s * mean_s, 0.0) / (m.n - 1)
    else:
        var_s = 0.0
    return Estimate(mean_s * scale, math.sqrt(var_s / m.n) * scale, m.n, seed, method)


def run_chunks(
    kernel: Callable[[np.random.Generator, int], _Moments],
    n: int,
    seed: int,
    method: str,
    chunk_size: int = DEFAULT_CHUNK,
    jobs: int = 1,
) -> Estimate:
    """Evaluate ``kernel(rng, count)`` over consecutive chunks and pool them.

    ``kernel`` must be picklable (a module-level function or a ``partial`` of
    one) when ``jobs > 1``. Chunk moments are merged in chunk order, so the
    result is bit-identical for any ``jobs``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    sizes = [min(chunk_size, n - start) for start in range(0, n, chunk_size)]
    tasks = [(kernel, seed, c, size) for c, size in enumerate(sizes)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_run_one, tasks))
    else:
        parts = [_run_one(t) for t in tasks]
    total = _Moments()
    for p in parts:
        total = total.merge(p)
    return _finish(total, seed, method)


def _run_one(task) -> _Moments:
    kernel, seed, chunk, size = task
    return kernel(chunk_rng(seed, chunk), size)
