"""Continuum limit of minimal covers: windows of length ``1/(r - y)`` ending at
``r`` points of the unit circle.

``T(y)`` is the set of configurations whose windows cover the circle, i.e.
every cyclic gap between consecutive sorted points is at most the window
length. ``eta`` is the continuum version of the sequence probability, and
``f_r(y)`` integrates ``eta`` over ``T(y)``.

Two samplers are provided for ``f_r``:

``uniform``
    hit-or-miss: points uniform on the torus, ``eta`` times membership.
``simplex``
    for ``y <= 1`` the gap vector of a point of ``T(y)`` is the window length
    minus a uniform point of a simplex of total mass ``y/(r - y)``, so ``T(y)``
    can be sampled exactly and its measure is ``(y/(r - y))^(r-1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from nklfm._mc import DEFAULT_CHUNK, Estimate, moments_from_values, run_chunks


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(x) % 1.0 for x in self.coords)
        if len(c) < 2:
            raise ValueError("a torus point needs at least 2 coordinates")
        object.__setattr__(self, "coords", c)

    @property
    def r(self) -> int:
        return len(self.coords)


def window_length(r: int, y: float) -> float:
    if not 0 <= y < r:
        raise ValueError(f"need 0 <= y < r, got r={r}, y={y}")
    beta = 1.0 / (r - y)
    if beta > 1.0:
        raise ValueError("window longer than the circle (y > r - 1)")
    return beta


def _cyclic_gaps(x: np.ndarray) -> np.ndarray:
    """Gap preceding each sorted point, along the last axis."""
    s = np.sort(x, axis=-1)
    prev = np.concatenate([s[..., -1:] - 1.0, s[..., :-1]], axis=-1)
    return s - prev


def member_batch(x: np.ndarray, beta: float) -> np.ndarray:
    return (_cyclic_gaps(x) <= beta).all(axis=-1)


def torus_member(x: TorusPoint, y: float) -> bool:
    beta = window_length(x.r, y)
    return bool(member_batch(np.asarray(x.coords)[None, :], beta)[0])


def eta_batch(x: np.ndarray, beta: float) -> np.ndarray:
    """Product over s of 1 / (uncovered measure before point s is placed)."""
    rows, r = x.shape
    out = np.ones(rows)
    for s in range(2, r + 1):
        # window [x - beta, x] covers min(gap before x, beta) of that gap
        covered = np.minimum(_cyclic_gaps(x[:, : s - 1]), beta).sum(axis=1)
        free = np.clip(1.0 - covered, 0.0, None)
        with np.errstate(divide="ignore"):
            out = out / free
    return out


def eta(x: TorusPoint, y: float) -> float:
    beta = window_length(x.r, y)
    return float(eta_batch(np.asarray(x.coords)[None, :], beta)[0])


def torus_measure_exact(r: int, y: float) -> float:
    """Measure of T(y) for 0 <= y <= 1."""
    if not 0 <= y <= 1:
        raise ValueError("closed form holds for 0 <= y <= 1")
    return (y / (r - y)) ** (r - 1)


def _simplex_points(rng: np.random.Generator, m: int, r: int, y: float) -> np.ndarray:
    beta = 1.0 / (r - y)
    slack = y / (r - y)
    deficit = slack * rng.dirichlet(np.ones(r), size=m)
    gaps = beta - deficit
    pos = np.cumsum(gaps, axis=1) % 1.0
    # labels are assigned to the sorted positions in uniformly random order
    perm = rng.permuted(np.tile(np.arange(r), (m, 1)), axis=1)
    return np.take_along_axis(pos, perm, axis=1)


def _fr_kernel(r, y, method, cap, rng: np.random.Generator, count: int):
    beta = 1.0 / (r - y)
    rows = max(1, 1_000_000 // r)
    vals = []
    done = 0
    while done < count:
        m = min(rows, count - done)
        if method == "uniform":
            x = rng.random((m, r))
            inside = member_batch(x, beta)
            e = np.zeros(m)
            if inside.any():
                e[inside] = eta_batch(x[inside], beta)
            weight = 1.0
        else:
            e = eta_batch(_simplex_points(rng, m, r, y), beta)
            weight = torus_measure_exact(r, y)
        if cap is not None:
            e = np.where(e > cap, 0.0, e)
        vals.append(e * weight)
        done += m
    return moments_from_values(np.concatenate(vals))


def f_r_mc(
    r: int,
    y: float,
    n: int,
    seed: int,
    *,
    method: str = "uniform",
    eta_cap: float | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    jobs: int = 1,
) -> Estimate:
    """Monte Carlo value of ``f_r(y)``, the integral of ``eta`` over ``T(min(y, 1))``.

    ``eta_cap`` drops the part of the integrand above the cap; used to probe
    the improper integral at ``y = 1``, where ``eta`` is unbounded.
    """
    if r < 3:
        raise ValueError("f_r is defined for r >= 3")
    if not 0 <= y <= 1:
        raise ValueError("y must lie in [0, 1]")
    if r == 3 and y >= 1:
        raise ValueError("f_3 diverges at y = 1")
    if method not in ("uniform", "simplex"):
        raise ValueError(f"unknown method {method!r}")
    if y == 0:
        # T(0) is the null set of evenly spaced configurations
        return Estimate(0.0, 0.0, n, seed, f"fr-{method}")
    kernel = partial(_fr_kernel, r, float(y), method, eta_cap)
    return run_chunks(kernel, n, seed, f"fr-{method}", chunk_size, jobs)


def _measure_kernel(r, y, rng: np.random.Generator, count: int):
    beta = 1.0 / (r - y)
    rows = max(1, 1_000_000 // r)
    hits = []
    done = 0
    while done < count:
        m = min(rows, count - done)
        hits.append(member_batch(rng.random((m, r)), beta))
        done += m
    return moments_from_values(np.concatenate(hits).astype(float))


def torus_measure_mc(
    r: int,
    y: float,
    n: int,
    seed: int,
    *,
    chunk_size: int = DEFAULT_CHUNK,
    jobs: int = 1,
) -> Estimate:
    window_length(r, y)
    if y == 0:
        return Estimate(0.0, 0.0, n, seed, "torus-measure")
    kernel = partial(_measure_kernel, r, float(y))
    return run_chunks(kernel, n, seed, "torus-measure", chunk_size, jobs)


def eta_limit(r: int) -> float:
    """Value of eta on evenly spaced points: r^r / r!."""
    return r**r / math.factorial(r)
