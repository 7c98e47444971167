"""The fat-tail model with K = 1 on a sliced (non-cyclic) chain.

With an extra base value ``Y_0`` the chain has base values ``Y_0..Y_N`` and
mutant pairs ``1..N``; ``Y_j`` guards the mutant pairs ``j`` and ``j + 1``.
Conditioning on which base value is the overall maximum gives

    p_N = [N == 0] + (2 p_{N-1} + sum_{j=2}^{N} p_{j-2} p_{N-j}) / (3N + 1),

whose generating function satisfies ``f + 3 z f' = 1 + 2 z f + z^2 f^2``. The
growth rate of p_N is set by the smallest positive zero ``z0`` of a
combination of modified Bessel functions of orders 1/3 and 2/3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import partial

import mpmath
import numpy as np
from scipy import optimize

from nklfm._mc import DEFAULT_CHUNK, Estimate, distinct_uniforms, moments_from_values, run_chunks, subbatch_rows
from nklfm.estimate import NumericalFailure
from nklfm.model import InfeasibleSizeError

MAX_EXACT_N = 500
MAX_FLOAT_N = 100_000
Z0_REFERENCE = 1.803034611
RATE_REFERENCE = -0.58947114


@dataclass(frozen=True)
class RationalSeq:
    """Exact ``p_0..p_n``."""

    values: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]


def recursion_exact(n_max: int) -> RationalSeq:
    """Exact ``p_0..p_{n_max}``."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if n_max > MAX_EXACT_N:
        raise InfeasibleSizeError(f"exact recursion is capped at n_max = {MAX_EXACT_N}")
    p = [Fraction(1)]
    for N in range(1, n_max + 1):
        conv = sum((p[i] * p[N - 2 - i] for i in range(N - 1)), Fraction(0))
        p.append((2 * p[N - 1] + conv) / (3 * N + 1))
    return RationalSeq(tuple(p))


def recursion_exact_alt(n_max: int) -> RationalSeq:
    """Same sequence from the first written form, with the delta term."""
    p: list[Fraction] = []
    for N in range(0, n_max + 1):
        if N == 0:
            p.append(Fraction(1))
            continue
        conv = sum((p[j - 1] * p[N - j - 1] for j in range(1, N)), Fraction(0))
        p.append((2 * p[N - 1] + conv) / (3 * N + 1))
    return RationalSeq(tuple(p))


@dataclass(frozen=True)
class ScaledFloatSeq:
    """``log_values[n] = log p_n``."""

    log_values: np.ndarray

    def __len__(self) -> int:
        return len(self.log_values)


def recursion_float(n_max: int) -> ScaledFloatSeq:
    """``log p_n`` for ``n <= n_max`` without underflow.

    Values are stored as ``q_n = p_n exp(c n)``; whenever ``n`` reaches a power
    of two the rate ``c`` is re-estimated from the last step and the stored
    values are rescaled, which keeps ``q_n`` near 1.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if n_max > MAX_FLOAT_N:
        raise InfeasibleSizeError(f"float recursion is capped at n_max = {MAX_FLOAT_N}")
    q = np.zeros(n_max + 1)
    q[0] = 1.0
    c = 0.0
    checkpoint = 8
    for N in range(1, n_max + 1):
        conv = float(np.dot(q[: N - 1], q[N - 2 :: -1])) if N >= 2 else 0.0
        q[N] = (2.0 * q[N - 1] * math.exp(c) + conv * math.exp(2.0 * c)) / (3 * N + 1)
        if N == checkpoint:
            dc = math.log(q[N - 1] / q[N])
            q[: N + 1] *= np.exp(dc * np.arange(N + 1))
            c += dc
            checkpoint *= 2
    logs = np.log(q) - c * np.arange(n_max + 1)
    return ScaledFloatSeq(logs)


@dataclass(frozen=True)
class GrowthReport:
    rate_raw: float
    rate_aitken: float
    z0_ratio: float
    z0_aitken: float
    n: int

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "rate_raw": self.rate_raw,
            "rate_aitken": self.rate_aitken,
            "z0_ratio": self.z0_ratio,
            "z0_aitken": self.z0_aitken,
        }


def growth_rate(seq: ScaledFloatSeq) -> GrowthReport:
    """Limit of ``log p_n / n`` from the last consecutive log-ratios.

    ``a_n = log(p_n / p_{n-1})`` approaches the rate with an O(1/n) error;
    one Aitken step on ``a_{n-2}, a_{n-1}, a_n`` removes part of it.
    """
    lv = seq.log_values
    if len(lv) < 100:
        raise ValueError("need at least 100 terms")
    a = np.diff(lv[-4:])
    a0, a1, a2 = a[-3], a[-2], a[-1]
    d2 = (a2 - a1) - (a1 - a0)
    aitken = a2 - (a2 - a1) ** 2 / d2 if d2 != 0 else a2
    return GrowthReport(
        rate_raw=float(a2),
        rate_aitken=float(aitken),
        z0_ratio=float(math.exp(-a2)),
        z0_aitken=float(math.exp(-aitken)),
        n=len(lv) - 1,
    )


def riccati_residual(seq) -> Fraction:
    """Largest coefficient mismatch of ``f + 3zf' - (1 + 2zf + z^2 f^2)``.

    Orders ``0..len(seq) - 1`` are checked; the right side at order ``n`` only
    uses ``p_0..p_{n-1}``.
    """
    return max((abs(c) for c in riccati_coefficients(seq)), default=Fraction(0))


def riccati_coefficients(seq) -> list[Fraction]:
    seq = list(seq)
    out = []
    for n in range(len(seq)):
        lhs = (3 * n + 1) * seq[n]
        rhs = Fraction(1 if n == 0 else 0)
        if n >= 1:
            rhs += 2 * seq[n - 1]
        if n >= 2:
            rhs += sum((seq[i] * seq[n - 2 - i] for i in range(n - 1)), Fraction(0))
        out.append(lhs - rhs)
    return out


# ---------------------------------------------------------------------------
# modified Bessel functions

ALLOWED_ORDERS = frozenset(Fraction(v) for v in ("1/3", "-1/3", "2/3", "-2/3", "1/2", "-1/2"))
_BESSEL_DPS = 40


@dataclass(frozen=True)
class BesselEval:
    kind: str
    nu: Fraction
    x: float
    value: float


def _series_i(nu: Fraction, x) -> mpmath.mpf:
    nu_f = mpmath.mpf(nu.numerator) / nu.denominator
    half = mpmath.mpf(x) / 2
    h2 = half * half
    term = half**nu_f / mpmath.gamma(nu_f + 1)
    total = term
    m = 0
    while True:
        m += 1
        term = term * h2 / (m * (m + nu_f))
        total += term
        if abs(term) < abs(total) * mpmath.mpf(10) ** (-(_BESSEL_DPS - 5)):
            return total


def bessel_modified(kind: str, nu, x: float) -> float:
    """``I_nu(x)`` by its ascending series, ``K_nu`` from the reflection formula.

    The series is summed at 40 significant digits so that the cancellation in
    ``I_{-nu} - I_nu`` costs nothing at double precision.
    """
    nu = Fraction(nu).limit_denominator(6)
    if nu not in ALLOWED_ORDERS:
        raise ValueError(f"order {nu} not supported")
    if not 0 < x <= 10:
        raise ValueError("x must lie in (0, 10]")
    if kind not in ("I", "K"):
        raise ValueError("kind must be 'I' or 'K'")
    with mpmath.workdps(_BESSEL_DPS):
        if kind == "I":
            val = _series_i(nu, x)
        else:
            if nu.denominator == 1:
                raise ValueError("reflection formula is singular at integer order")
            s = mpmath.sin(mpmath.pi * nu.numerator / nu.denominator)
            val = mpmath.pi * (_series_i(-nu, x) - _series_i(nu, x)) / (2 * s)
        return float(val)


_A = -math.pi * math.sqrt(3) / 3


def den(z: float) -> float:
    """Denominator of the Bessel-ratio solution with the constant chosen so the
    solution is a power series; its smallest positive zero is z0."""
    a = (2.0 / 3.0) * math.sqrt(2.0 * z)
    I = partial(bessel_modified, "I")
    K = partial(bessel_modified, "K")
    sz = math.sqrt(z)
    return sz * (
        -_A * math.sqrt(2) * I(Fraction(2, 3), a)
        + _A * sz * I(Fraction(-1, 3), a)
        + math.sqrt(2) * K(Fraction(2, 3), a)
        + sz * K(Fraction(1, 3), a)
    )


def bessel_display(z: float) -> float:
    """The four-term Bessel combination in the closed form of the generating function,
    evaluated at ``z``; vanishes at z0 (it is a multiple of ``den``)."""
    a = (2.0 / 3.0) * math.sqrt(2.0 * z)
    I = partial(bessel_modified, "I")
    K = partial(bessel_modified, "K")
    return (
        math.pi * math.sqrt(6) * I(Fraction(2, 3), a)
        - math.pi * math.sqrt(3 * z) * I(Fraction(-1, 3), a)
        + 3 * math.sqrt(2) * K(Fraction(2, 3), a)
        + 3 * math.sqrt(z) * K(Fraction(1, 3), a)
    )


def find_z0(tol: float = 1e-10) -> float:
    """Smallest zero of ``den`` in (1, 3), by bisection."""
    if tol < 1e-10:
        raise ValueError("tol must be >= 1e-10")
    grid = np.linspace(1.0 + 1e-9, 3.0, 201)
    prev_z, prev_v = grid[0], den(grid[0])
    for z in grid[1:]:
        v = den(z)
        if prev_v == 0:
            return float(prev_z)
        if np.sign(v) != np.sign(prev_v):
            return float(optimize.bisect(den, prev_z, z, xtol=tol, maxiter=200))
        prev_z, prev_v = z, v
    raise NumericalFailure("no sign change of den in (1, 3)")


# ---------------------------------------------------------------------------
# direct simulation of the sliced chain


def h_star_batch(y: np.ndarray, y_mut: np.ndarray) -> np.ndarray:
    """``y``: (.., N+1) base values ``Y_0..Y_N``; ``y_mut``: (.., N, 2)."""
    guard = np.maximum(y[..., :-1], y[..., 1:])
    return (guard >= y_mut.max(axis=-1)).all(axis=-1)


def _hstar_kernel(N: int, rng: np.random.Generator, count: int):
    width = 3 * N + 1
    rows = subbatch_rows(width)
    hits = []
    done = 0
    while done < count:
        m = min(rows, count - done)
        u = distinct_uniforms(rng, m, width)
        hits.append(h_star_batch(u[:, : N + 1], u[:, N + 1 :].reshape(m, N, 2)))
        done += m
    return moments_from_values(np.concatenate(hits).astype(float))


def mc_h_star(
    N: int,
    n: int,
    seed: int,
    *,
    chunk_size: int = DEFAULT_CHUNK,
    jobs: int = 1,
) -> Estimate:
    if N < 1:
        raise ValueError("N must be >= 1")
    return run_chunks(partial(_hstar_kernel, N), n, seed, "h-star", chunk_size, jobs)
