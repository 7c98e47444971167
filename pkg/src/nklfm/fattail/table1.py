"""Leading-order prediction of p_fat(N, K) for large K with N/K bounded."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from nklfm.fattail.torus import f_r_mc

MAX_RATIO = 8.0


@dataclass(frozen=True)
class Table1Prediction:
    value: float
    row: int
    terms: dict[str, float]
    r: int | None = None
    y: float | None = None
    j: int | None = None
    # f_{r+1}(1) with eta truncated at each level; shows how much the
    # improper tail contributes
    cap_sensitivity: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "row": self.row,
            "r": self.r,
            "y": self.y,
            "j": self.j,
            "terms": self.terms,
            "cap_sensitivity": self.cap_sensitivity,
        }


def _row1(N: int, K: int) -> Table1Prediction:
    j = 2 * (K + 1) - N
    two = (1 / K) * (1 / (K + 3 - j) - 1 / K)
    # three-window term; the partial harmonic sum replaces log K so that the
    # expression stays finite up to j = K
    s = sum((1 - t / K) / t for t in range(1, K - j + 1))
    three = 2 * s / (K**3 * (1 - j / K)) if j < K else 0.0
    return Table1Prediction(two + three, 1, {"two_windows": two, "three_windows": three}, j=j)


def table1_breakdown(
    N: int,
    K: int,
    *,
    n: int = 400_000,
    seed: int = 0,
    eta_caps: tuple[float, ...] = (1e2, 1e3, 1e4),
) -> Table1Prediction:
    if K < 1 or N < K + 2:
        raise ValueError(f"needs K >= 1 and N >= K + 2, got N={N}, K={K}")
    if N / K > MAX_RATIO:
        raise ValueError(f"N/K = {N / K:.3g} exceeds {MAX_RATIO}")
    if N <= 2 * (K + 1):
        return _row1(N, K)
    r = math.ceil(N / (K + 1))
    y = r - N / (K + 1)
    lead = f_r_mc(r, y, n, seed, method="simplex").value if y > 0 else 0.0
    nxt = f_r_mc(r + 1, 1.0, n, seed + 1, method="simplex").value
    sens = {
        f"{cap:g}": f_r_mc(r + 1, 1.0, n, seed + 1, method="simplex", eta_cap=cap).value
        for cap in eta_caps
    }
    t_r = lead / K**r
    t_next = nxt / K ** (r + 1)
    return Table1Prediction(
        t_r + t_next,
        2,
        {"f_r": lead, "f_r_plus_1_at_1": nxt, "term_r": t_r, "term_r_plus_1": t_next},
        r=r,
        y=y,
        cap_sensitivity=sens,
    )


def table1_predict(N: int, K: int, *, n: int = 400_000, seed: int = 0) -> float:
    return table1_breakdown(N, K, n=n, seed=seed).value
