"""Random objects of the NK model around the all-zero genome.

Indices are 0-based and taken modulo ``N`` throughout. For a genome position
``j`` the window of substrings that contain it starts at ``j - K, ..., j``.

``y[j]`` is the fitness of the all-zero substring starting at ``j`` and
``y_mut[j, i]`` is the fitness of the substring starting at ``j - i`` whose only
1 sits at position ``j`` (offset ``i`` inside the substring).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special, stats

from nklfm._mc import distinct_uniforms


class InfeasibleSizeError(ValueError):
    """Requested size is outside what an exact/exhaustive routine supports."""


class DistributionKind(str, enum.Enum):
    NORMAL = "normal"
    UNIFORM01 = "uniform01"
    EXPONENTIAL = "exponential"
    NEGEXPONENTIAL = "negexponential"
    CAUCHY = "cauchy"


DISTRIBUTIONS = tuple(d.value for d in DistributionKind)


@dataclass(frozen=True)
class ModelParams:
    N: int
    K: int
    dist: DistributionKind = DistributionKind.NORMAL

    def __post_init__(self):
        object.__setattr__(self, "dist", DistributionKind(self.dist))
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.K > self.N - 1:
            raise ValueError(f"K must be <= N - 1, got N={self.N}, K={self.K}")

    @property
    def exchangeable(self) -> bool:
        """K = N - 1: every window spans the whole genome."""
        return self.K == self.N - 1

    @property
    def n_variables(self) -> int:
        return self.N * (self.K + 2)


def from_uniform(dist: DistributionKind | str, u: np.ndarray) -> np.ndarray:
    """Strictly increasing map from (0, 1) onto the support of ``dist``.

    All samplers go through this, so order-based events see the same verdicts
    whatever the distribution.
    """
    dist = DistributionKind(dist)
    if dist is DistributionKind.UNIFORM01:
        return u
    if dist is DistributionKind.NORMAL:
        return special.ndtri(u)
    if dist is DistributionKind.EXPONENTIAL:
        return -np.log1p(-u)
    if dist is DistributionKind.NEGEXPONENTIAL:
        # negative of a rate-1 exponential, written increasing in u
        return np.log(u)
    if dist is DistributionKind.CAUCHY:
        return np.tan(np.pi * (u - 0.5))
    raise ValueError(dist)


# ---------------------------------------------------------------------------
# sums of m i.i.d. picks

IRWIN_HALL_CLOSED_MAX = 25
_IH_GRID = 4096


def _irwin_hall_closed(m: int, s: np.ndarray) -> np.ndarray:
    # evaluate on the lower half only; the upper half follows by symmetry
    upper = s > m / 2
    x = np.where(upper, m - s, s)
    x = np.clip(x, 0.0, m / 2)
    out = np.zeros_like(x)
    for k in range(0, m // 2 + 1):
        out += (-1) ** k * math.comb(m, k) * np.clip(x - k, 0.0, None) ** m
    out /= math.factorial(m)
    out = np.clip(out, 0.0, 1.0)
    return np.where(upper, 1.0 - out, out)


@lru_cache(maxsize=64)
def _irwin_hall_grid(m: int) -> tuple[np.ndarray, np.ndarray]:
    h = 1.0 / _IH_GRID
    length = m * (_IH_GRID - 1) + 1
    nfft = 1 << (length - 1).bit_length()
    box = np.full(_IH_GRID, 1.0 / _IH_GRID)
    pmf = np.fft.irfft(np.fft.rfft(box, nfft) ** m, nfft)[:length]
    pmf = np.clip(pmf, 0.0, None)
    pmf /= pmf.sum()
    # atoms of the midpoint-discretised sum sit at (k + m/2) * h
    atoms = (np.arange(length) + m / 2) * h
    cdf = np.cumsum(pmf)
    # spread each atom over a cell of width h so the interpolant is continuous
    xs = np.concatenate(([0.0], atoms + h / 2))
    ys = np.concatenate(([0.0], cdf))
    xs[-1] = max(xs[-1], float(m))
    return xs, np.clip(ys, 0.0, 1.0)


def _irwin_hall(m: int, s: np.ndarray) -> np.ndarray:
    if m <= IRWIN_HALL_CLOSED_MAX:
        return _irwin_hall_closed(m, s)
    xs, ys = _irwin_hall_grid(m)
    return np.interp(s, xs, ys, left=0.0, right=1.0)


def cdf_sum(dist: DistributionKind | str, m: int, s):
    """CDF of the sum of ``m`` independent picks from ``dist`` at ``s``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    dist = DistributionKind(dist)
    s_arr = np.asarray(s, dtype=float)
    if dist is DistributionKind.NORMAL:
        out = special.ndtr(s_arr / math.sqrt(m))
    elif dist is DistributionKind.CAUCHY:
        out = stats.cauchy.cdf(s_arr / m)
    elif dist is DistributionKind.EXPONENTIAL:
        out = special.gammainc(m, np.clip(s_arr, 0.0, None))
    elif dist is DistributionKind.NEGEXPONENTIAL:
        out = special.gammaincc(m, np.clip(-s_arr, 0.0, None))
    else:
        out = _irwin_hall(m, s_arr)
    return float(out) if np.ndim(out) == 0 else out


def logcdf_sum(dist: DistributionKind | str, m: int, s):
    """Natural log of :func:`cdf_sum`, accurate in the lower tail where it matters."""
    if m < 1:
        raise ValueError("m must be >= 1")
    dist = DistributionKind(dist)
    s_arr = np.asarray(s, dtype=float)
    if dist is DistributionKind.NORMAL:
        out = special.log_ndtr(s_arr / math.sqrt(m))
    elif dist is DistributionKind.CAUCHY:
        out = stats.cauchy.logcdf(s_arr / m)
    elif dist is DistributionKind.EXPONENTIAL:
        out = stats.gamma.logcdf(s_arr, m)
    elif dist is DistributionKind.NEGEXPONENTIAL:
        out = stats.gamma.logsf(-s_arr, m)
    else:
        with np.errstate(divide="ignore"):
            out = np.log(_irwin_hall(m, s_arr))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# neighbourhood of the zero genome


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class NeighborhoodSample:
    y: np.ndarray
    y_mut: np.ndarray = field(repr=False)

    def __post_init__(self):
        y = _frozen(self.y)
        y_mut = _frozen(self.y_mut)
        if y.ndim != 1 or y_mut.shape != (y.size, y_mut.shape[1]):
            raise ValueError("y must have shape (N,) and y_mut shape (N, K+1)")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_mut", y_mut)

    @property
    def N(self) -> int:
        return self.y.size

    @property
    def K(self) -> int:
        return self.y_mut.shape[1] - 1

    def window(self, j: int) -> np.ndarray:
        """Base values of the K+1 substrings containing position ``j``."""
        idx = (j - np.arange(self.K, -1, -1)) % self.N
        return self.y[idx]

    def all_values(self) -> np.ndarray:
        return np.concatenate([self.y, self.y_mut.ravel()])


def split_neighborhood(values: np.ndarray, N: int, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Split rows of ``N*(K+2)`` values into ``y (.., N)`` and ``y_mut (.., N, K+1)``."""
    lead = values.shape[:-1]
    return values[..., :N], values[..., N:].reshape(*lead, N, K + 1)


def sample_neighborhood(params: ModelParams, seed: int) -> NeighborhoodSample:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
    u = distinct_uniforms(rng, 1, params.n_variables)[0]
    y, y_mut = split_neighborhood(from_uniform(params.dist, u), params.N, params.K)
    return NeighborhoodSample(y, y_mut)


def window_sums(y: np.ndarray, K: int) -> np.ndarray:
    """``out[..., j] = sum_{i=j-K}^{j} y[..., i]`` with cyclic indices."""
    N = y.shape[-1]
    idx = (np.arange(N)[:, None] - np.arange(K + 1)[None, :]) % N
    return y[..., idx].sum(axis=-1)


def window_max(y: np.ndarray, K: int) -> np.ndarray:
    N = y.shape[-1]
    idx = (np.arange(N)[:, None] - np.arange(K + 1)[None, :]) % N
    return y[..., idx].max(axis=-1)


def h_event(sample: NeighborhoodSample, j: int) -> bool:
    """Zero genome beats the genome with a single 1 at position ``j``."""
    return bool(sample.window(j).sum() >= sample.y_mut[j % sample.N].sum())


def zero_is_lfm(sample: NeighborhoodSample) -> bool:
    return all(h_event(sample, j) for j in range(sample.N))


def zero_is_lfm_batch(y: np.ndarray, y_mut: np.ndarray) -> np.ndarray:
    K = y_mut.shape[-1] - 1
    return (window_sums(y, K) >= y_mut.sum(axis=-1)).all(axis=-1)


# ---------------------------------------------------------------------------
# exhaustive landscapes

MAX_EXHAUSTIVE_N = 24
MAX_EXHAUSTIVE_K = 16


@dataclass(frozen=True)
class FullLandscape:
    """``table[j, s]``: fitness of the substring starting at ``j`` with bit
    pattern ``s``, where bit ``i`` of ``s`` is genome position ``j + i``."""

    table: np.ndarray

    def __post_init__(self):
        t = _frozen(self.table)
        if t.ndim != 2 or t.shape[1] & (t.shape[1] - 1):
            raise ValueError("table must be N x 2^(K+1)")
        object.__setattr__(self, "table", t)

    @property
    def N(self) -> int:
        return self.table.shape[0]

    @property
    def K(self) -> int:
        return self.table.shape[1].bit_length() - 2


def sample_landscape(params: ModelParams, seed: int, index: int = 0) -> FullLandscape:
    """Landscape number ``index`` of the stream for ``seed``."""
    _check_exhaustive(params.N, params.K)
    width = params.N << (params.K + 1)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 1, index])))
    u = distinct_uniforms(rng, 1, width)[0]
    return FullLandscape(from_uniform(params.dist, u).reshape(params.N, 1 << (params.K + 1)))


def _check_exhaustive(N: int, K: int) -> None:
    if N > MAX_EXHAUSTIVE_N or K > MAX_EXHAUSTIVE_K:
        raise InfeasibleSizeError(
            f"exhaustive landscapes need N <= {MAX_EXHAUSTIVE_N} and K <= {MAX_EXHAUSTIVE_K}"
        )


def _substring_codes(genomes: np.ndarray, N: int, K: int, j: int) -> np.ndarray:
    mask = (1 << (K + 1)) - 1
    full = (1 << N) - 1
    rot = ((genomes >> j) | (genomes << (N - j))) & full
    return rot & mask


@dataclass(frozen=True)
class Genome:
    bits: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(x) for x in self.bits)
        if any(x not in (0, 1) for x in b):
            raise ValueError("genome bits must be 0 or 1")
        object.__setattr__(self, "bits", b)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)


def _as_int(bits) -> int:
    return sum(int(b) << p for p, b in enumerate(bits))


def genome_fitness(landscape: FullLandscape, g) -> float:
    """Sum of the N substring fitnesses; ``g`` is a 0/1 sequence of length N."""
    N, K = landscape.N, landscape.K
    if len(g) != N:
        raise ValueError("genome length must equal N")
    code = np.array([_as_int(g)], dtype=np.int64)
    return float(sum(landscape.table[j, _substring_codes(code, N, K, j)[0]] for j in range(N)))


def all_fitnesses(landscape: FullLandscape) -> np.ndarray:
    N, K = landscape.N, landscape.K
    _check_exhaustive(N, K)
    genomes = np.arange(1 << N, dtype=np.int64)
    fit = np.zeros(genomes.size)
    for j in range(N):
        fit += landscape.table[j, _substring_codes(genomes, N, K, j)]
    return fit


def count_lfm(landscape: FullLandscape) -> int:
    """Number of genomes strictly fitter than all N one-bit-flip neighbours."""
    fit = all_fitnesses(landscape)
    genomes = np.arange(fit.size, dtype=np.int64)
    is_max = np.ones(fit.size, dtype=bool)
    for b in range(landscape.N):
        is_max &= fit > fit[genomes ^ (1 << b)]
    return int(is_max.sum())


def neighborhood_from_landscape(landscape: FullLandscape) -> NeighborhoodSample:
    N, K = landscape.N, landscape.K
    y = landscape.table[:, 0]
    y_mut = np.empty((N, K + 1))
    for j in range(N):
        for i in range(K + 1):
            y_mut[j, i] = landscape.table[(j - i) % N, 1 << i]
    return NeighborhoodSample(y, y_mut)
