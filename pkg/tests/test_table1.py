import math

import pytest

from nklfm.fattail.enumeration import enumerate_exact
from nklfm.fattail.table1 import table1_breakdown, table1_predict


def test_row1_midrange_two_window_dominates():
    K = 500
    j = K // 2
    pred = table1_breakdown(2 * (K + 1) - j, K)
    assert pred.row == 1 and pred.j == j
    assert abs(pred.terms["two_windows"]) > 10 * abs(pred.terms["three_windows"])


def test_row1_small_j_three_window_dominates():
    K = 500
    pred = table1_breakdown(2 * (K + 1) - 1, K)
    assert abs(pred.terms["three_windows"]) > abs(pred.terms["two_windows"])
    # close to 2 log K / K^3
    assert pred.terms["three_windows"] == pytest.approx(2 * math.log(K) / K**3, rel=0.3)


def test_row1_j_equals_k():
    K = 60
    pred = table1_breakdown(K + 2, K)
    assert pred.terms["three_windows"] == 0.0
    assert pred.value == pred.terms["two_windows"]


def test_row1_two_window_term_matches_enumeration():
    # the two-window term is the large-K form of the exact r = 2 mass
    K, j = 500, 250
    N = 2 * (K + 1) - j
    exact = float(enumerate_exact(N, K, r_max=2).by_r[2])
    two = table1_breakdown(N, K).terms["two_windows"]
    assert two / exact == pytest.approx(1, rel=0.05)


def test_row2_fields():
    K = 200
    N = math.ceil(2.5 * (K + 1))
    pred = table1_breakdown(N, K, n=100_000, seed=3)
    assert pred.row == 2 and pred.r == 3
    assert pred.y == pytest.approx(3 - N / (K + 1))
    assert pred.value == pytest.approx(pred.terms["term_r"] + pred.terms["term_r_plus_1"])
    caps = list(pred.cap_sensitivity.values())
    assert caps == sorted(caps)
    assert caps[-1] <= pred.terms["f_r_plus_1_at_1"]


def test_row2_integer_ratio_uses_next_term_only():
    K = 99
    pred = table1_breakdown(3 * (K + 1), K, n=20_000)
    assert pred.y == 0 and pred.terms["f_r"] == 0.0
    assert pred.value == pred.terms["term_r_plus_1"] > 0


def test_rejections():
    with pytest.raises(ValueError):
        table1_breakdown(900, 100)
    with pytest.raises(ValueError):
        table1_breakdown(101, 100)


def test_predict_is_value():
    assert table1_predict(150, 80) == table1_breakdown(150, 80).value
