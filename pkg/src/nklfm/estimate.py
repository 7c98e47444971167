"""Estimators of p(N, K) for a general fitness distribution, plus the
Gaussian upper-bound integral and its saddle diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr

from nklfm._mc import (
    DEFAULT_CHUNK,
    Estimate,
    distinct_uniforms,
    moments_from_log,
    moments_from_values,
    run_chunks,
    subbatch_rows,
)
from nklfm.model import (
    DistributionKind,
    ModelParams,
    from_uniform,
    logcdf_sum,
    split_neighborhood,
    window_sums,
    zero_is_lfm_batch,
)


class NumericalFailure(RuntimeError):
    """Quadrature or root finding did not reach the requested accuracy."""


def _direct_kernel(N: int, K: int, dist: str, rng: np.random.Generator, count: int):
    width = N * (K + 2)
    rows = subbatch_rows(width)
    hits = []
    done = 0
    while done < count:
        m = min(rows, count - done)
        u = distinct_uniforms(rng, m, width)
        y, y_mut = split_neighborhood(from_uniform(dist, u), N, K)
        hits.append(zero_is_lfm_batch(y, y_mut))
        done += m
    return moments_from_values(np.concatenate(hits).astype(float))


def direct_mc(
    params: ModelParams,
    n: int,
    seed: int,
    *,
    chunk_size: int = DEFAULT_CHUNK,
    jobs: int = 1,
) -> Estimate:
    """Fraction of sampled neighbourhoods in which the zero genome is an LFM."""
    kernel = partial(_direct_kernel, params.N, params.K, params.dist.value)
    return run_chunks(kernel, n, seed, "direct", chunk_size, jobs)


def _conditional_kernel(N: int, K: int, dist: str, rng: np.random.Generator, count: int):
    rows = subbatch_rows(N * (K + 2))
    logs = []
    done = 0
    while done < count:
        m = min(rows, count - done)
        # only the base values are drawn; the mutant side is integrated out
        y = from_uniform(dist, distinct_uniforms(rng, m, N))
        lp = logcdf_sum(dist, K + 1, window_sums(y, K))
        logs.append(np.sum(lp, axis=-1))
        done += m
    return moments_from_log(np.concatenate(logs))


def conditional_mc(
    params: ModelParams,
    n: int,
    seed: int,
    *,
    chunk_size: int = DEFAULT_CHUNK,
    jobs: int = 1,
) -> Estimate:
    """Average over base values of the product of per-window conditional
    probabilities ``F^{(K+1)}(window sum)``; products are formed in log space."""
    kernel = partial(_conditional_kernel, params.N, params.K, params.dist.value)
    return run_chunks(kernel, n, seed, "conditional", chunk_size, jobs)


# ---------------------------------------------------------------------------
# Gaussian upper bound


def log_integrand(x, N: int, K: int):
    """log of ``Phi(x sqrt((K+1)/N))^N phi(x)``."""
    x = np.asarray(x, dtype=float)
    return N * log_ndtr(x * math.sqrt((K + 1) / N)) - 0.5 * x * x - 0.5 * math.log(2 * math.pi)


def _check_nk(N: int, K: int) -> None:
    if K < 1 or N < K + 1:
        raise ValueError(f"need 1 <= K <= N - 1, got N={N}, K={K}")


def normal_upper_bound(N: int, K: int, tol: float = 1e-10) -> float:
    """Adaptive quadrature of ``E Phi(t sqrt((K+1)/N))^N`` for standard normal t.

    The integrand is rescaled by its maximum so that the quadrature works on
    O(1) values for any N.
    """
    _check_nk(N, K)
    if tol <= 0:
        raise ValueError("tol must be positive")
    half = 8 * math.sqrt(N / (K + 1)) + 10
    peak = normal_saddle(N, K).log_i_max if K >= 2 else float(np.max(log_integrand(np.linspace(-half, half, 4001), N, K)))

    def f(x):
        return math.exp(float(log_integrand(x, N, K)) - peak)

    val, err = integrate.quad(f, -half, half, epsabs=0.0, epsrel=tol, limit=500)
    if not np.isfinite(val) or err > max(tol * abs(val), 1e-300) * 10:
        raise NumericalFailure(f"quadrature did not converge: value={val}, error={err}")
    return val * math.exp(peak)


@dataclass(frozen=True)
class SaddleReport:
    x_max: float
    log_i_max: float
    x0: float
    log_i_x0: float

    def as_dict(self) -> dict:
        return {
            "x_max": self.x_max,
            "log_i_max": self.log_i_max,
            "x0": self.x0,
            "log_i_x0": self.log_i_x0,
        }


_GOLDEN = (math.sqrt(5) - 1) / 2


def _golden_max(f, a: float, b: float, tol: float) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def normal_saddle(N: int, K: int, tol: float = 1e-8) -> SaddleReport:
    """Maximiser and maximum of the log integrand (unimodal: log-concave)."""
    _check_nk(N, K)
    if K < 2:
        raise ValueError("normal_saddle needs K >= 2")
    x0 = math.sqrt(2 * N / (K + 1) * math.log(K + 1))

    def g(x):
        return float(log_integrand(x, N, K))

    # the maximiser is positive and log I(x) <= -x^2/2
    hi = max(2.0 * x0, 1.0) + 10.0
    x_max = _golden_max(g, 0.0, hi, tol)
    return SaddleReport(x_max, g(x_max), x0, g(x0))


def second_differences(N: int, K: int, xs) -> np.ndarray:
    """Discrete second differences of log I on an evenly spaced grid."""
    v = log_integrand(np.asarray(xs, dtype=float), N, K)
    return v[2:] - 2 * v[1:-1] + v[:-2]


def scaled_log_ratio(p_hat: float, N: int, K: int) -> float:
    """``log p / ((N/K)(-log K))``; tends to 1 for the Gaussian as K grows."""
    return math.log(p_hat) / ((N / K) * (-math.log(K)))


