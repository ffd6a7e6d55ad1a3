import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardylab.core import (
    LedgerError,
    Params,
    Regime,
    a1,
    a2,
    build_ledger,
    classify,
    convexity_gap,
    envelope_bound,
    estimate_cp,
    lambda_const,
    parse_scale,
)

from _oracles import brute_cp

E = math.e


# ---------------------------------------------------------------- parameters


def test_params_rejects_bad_inputs():
    with pytest.raises(ValueError):
        Params(0.0, 1.0)  # p must exceed 1
    with pytest.raises(ValueError):
        Params(0.0, 0.5)
    with pytest.raises(ValueError):
        Params(0.0, 2.0, 2.0)  # R below e
    with pytest.raises(ValueError):
        Params(math.nan, 2.0)
    Params(0.0, 2.0, E)  # R = e itself is allowed


def test_classify_examples():
    assert classify(Params(0.0, 2.0)) is Regime.NONCRITICAL
    assert classify(Params(0.5, 2.0)) is Regime.CRITICAL_BOUNDARY
    assert classify(Params(1.0, 2.0)) is Regime.CRITICAL_INTERIOR


def test_classify_line_window():
    # detection window around alpha = 1 - 1/p is 1e-14
    assert classify(Params(0.5 + 5e-15, 2.0)) is Regime.CRITICAL_BOUNDARY
    assert classify(Params(0.5 - 5e-15, 2.0)) is Regime.CRITICAL_BOUNDARY
    assert classify(Params(0.5 + 1e-10, 2.0)) is Regime.CRITICAL_INTERIOR
    assert classify(Params(0.5 - 1e-10, 2.0)) is Regime.NONCRITICAL


def test_lambda_const_examples():
    assert lambda_const(Params(0.0, 2.0)) == 0.25
    assert lambda_const(Params(0.5, 2.0)) == 0.25  # critical branch
    for p in (1.5, 2.0, 3.0, 4.0):
        assert lambda_const(Params(-1.0 / p, p)) == 1.0
        assert lambda_const(Params(1.0 - 1.0 / p, p)) == (1.0 - 1.0 / p) ** p


@given(
    st.floats(min_value=-3.0, max_value=3.0),
    st.floats(min_value=1.05, max_value=6.0),
)
def test_lambda_is_beta_power_off_the_line(alpha, p):
    beta = 1.0 - 1.0 / p - alpha
    params = Params(alpha, p)
    if classify(params) is Regime.CRITICAL_BOUNDARY:
        assert lambda_const(params) == (1.0 - 1.0 / p) ** p
    else:
        assert lambda_const(params) == abs(beta) ** p


def test_lambda_vanishes_approaching_the_line_from_below():
    # the noncritical branch tends to 0, the stored critical value does not
    for h in (1e-4, 1e-6, 1e-8):
        val = lambda_const(Params(0.5 - h, 2.0))
        assert val == pytest.approx(h ** 2, rel=1e-9)
    assert lambda_const(Params(0.5, 2.0)) == 0.25


def test_log_weights():
    assert a1(1.0, E) == pytest.approx(1.0, abs=1e-15)
    assert a1(math.exp(-2.0), E ** 2) == pytest.approx(4.0, rel=1e-15)
    assert a2(1.0, E ** E) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        a1(0.0, E ** 2)
    with pytest.raises(ValueError):
        a2(10.0, E ** 2)  # log(R/t) < 0


def test_parse_scale():
    assert parse_scale("e") == E
    assert parse_scale("ee") == E ** E
    assert parse_scale("e2") == E ** 2
    assert parse_scale("e^3") == E ** 3
    assert parse_scale("2.5") == 2.5
    assert parse_scale(3) == 3.0
    with pytest.raises(ValueError):
        parse_scale("banana")


# ------------------------------------------------------- convexity constants


def test_estimate_cp_p2_is_one():
    # |1+X|^2 - 1 - 2X = X^2 identically
    assert abs(estimate_cp(2.0, 2.0) - 1.0) <= 1e-9


def test_estimate_cp_p4_against_brute_scan():
    oracle = brute_cp(4.0, 4.0)
    est = estimate_cp(4.0, 4.0)
    assert abs(oracle - 1.0 / 3.0) < 1e-6  # ratio at X = -3 is 27/81
    assert abs(est - oracle) < 1e-4
    # certified lower envelope: never above any sampled ratio
    assert est <= oracle + 1e-12


def test_estimate_cp_capped_mode_positive():
    # infimum of (|1+X|^p - 1 - pX) / (M^(p-2) X^2) over |X| <= M
    val = estimate_cp(1.5, mode="capped", M=1.0)
    assert 0.0 < val <= 0.375 + 1e-12  # X -> 0 limit p(p-1)/2 caps it at M=1
    val8 = estimate_cp(1.5, mode="capped", M=8.0)
    assert val8 > 0.0
    x = np.linspace(-8.0, 8.0, 400_001)
    x = x[np.abs(x) > 1e-4]
    gap = np.abs(1.0 + x) ** 1.5 - 1.0 - 1.5 * x
    assert np.all(gap >= val8 * 8.0 ** (-0.5) * x ** 2 * (1.0 - 1e-9))


def test_estimate_cp_rejects_invalid_combinations():
    with pytest.raises(ValueError):
        estimate_cp(1.5, 2.0)  # global mode needs p >= 2
    with pytest.raises(ValueError):
        estimate_cp(4.0, 5.0)  # q must stay within [2, p]
    with pytest.raises(ValueError):
        estimate_cp(1.5, mode="capped", M=0.5)


@pytest.mark.parametrize("p,q", [(2.0, 2.0), (3.0, 2.0), (4.0, 4.0), (2.5, 2.2)])
def test_cp_soundness_on_dense_grid(p, q):
    # |1+X|^p - 1 - pX >= c(p,q) |X|^q on a 1e5-point scan of [-1e6, 1e6].
    # The gap is evaluated through the cancellation-free series path (the
    # literal expression has no correct digits left near |X| ~ 1e-8, where
    # the certified margin of c is only 4e-10 wide).
    c = estimate_cp(p, q)
    mags = np.logspace(-8.0, 6.0, 50_000)
    for sign in (1.0, -1.0):
        x = sign * mags
        gap = convexity_gap(p, x)
        assert np.all(gap >= c * np.abs(x) ** q * (1.0 - 1e-12))


@given(
    st.floats(min_value=1.05, max_value=6.0),
    st.floats(min_value=-1e6, max_value=1e6),
)
def test_convexity_gap_nonnegative(p, x):
    assert convexity_gap(p, x) >= 0.0


def test_convexity_gap_matches_literal_expression_for_moderate_x():
    # series evaluation below |X| = 1/2 must join the literal branch smoothly
    for p in (1.5, 2.0, 3.7):
        for x in (-0.5 - 1e-9, -0.5 + 1e-9, 0.5 - 1e-9, 0.5 + 1e-9, 0.3, -0.2):
            literal = abs(1.0 + x) ** p - 1.0 - p * x
            assert convexity_gap(p, x) == pytest.approx(literal, rel=1e-9)
    assert convexity_gap(2.0, 0.0) == 0.0


def test_convexity_gap_series_region_is_accurate():
    # at |X| ~ 1e-8 the literal expression has no correct digits; the series
    # must return ~ p(p-1)/2 * X^2 to full precision
    for p in (1.5, 2.0, 3.0):
        x = 1e-8
        expected = 0.5 * p * (p - 1.0) * x * x
        assert convexity_gap(p, x) == pytest.approx(expected, rel=1e-6)


# ----------------------------------------------------------------- envelopes


def test_envelope_examples():
    assert envelope_bound(E ** 2, "A1sq") == pytest.approx(4.0, abs=1e-12)
    assert envelope_bound(E ** 3, "A1sq") == pytest.approx(9.0, rel=1e-15)
    assert envelope_bound(E, "A1sq") == pytest.approx(4.0 / E, rel=1e-12)
    with pytest.raises(ValueError):
        envelope_bound(2.0, "A1sq")
    with pytest.raises(ValueError):
        envelope_bound(E ** 2, "A3sq")


@pytest.mark.parametrize("kind,r_lo", [("A1sq", 1.05), ("A2sq", E + 0.05)])
def test_envelope_is_the_supremum(kind, r_lo):
    # brute grid over t in (0, 1]: the bound is attained and never exceeded
    t = np.logspace(-9, 0, 200_001)
    for log_r in np.linspace(r_lo, 9.0, 7):
        R = math.exp(log_r)
        w = np.log(R / t)
        if kind == "A2sq":
            w = np.log(w)
        vals = t * w ** 2
        bound = envelope_bound(R, kind)
        assert np.max(vals) <= bound * (1.0 + 1e-12)
        assert np.max(vals) >= bound * (1.0 - 1e-6)


def test_envelope_paper_bound_200_values():
    for R in np.exp(np.linspace(1.0 + 1e-9, 10.0, 200)):
        assert envelope_bound(float(R), "A1sq") <= 4.0 * R / E ** 2 * (1 + 1e-14)
    assert abs(envelope_bound(E ** 2, "A1sq") - 4.0) <= 1e-10


# ------------------------------------------------------------------- ledgers


def test_ledger_noncritical_frozen_chain():
    led = build_ledger(Params(0.0, 2.0, E ** 2))
    assert led["lambda"] == 0.25
    assert led["C3"] == pytest.approx(0.25, rel=1e-8)
    assert led["C4"] == pytest.approx(1.0 / 6.0, rel=1e-8)
    assert led["C0"] == pytest.approx(1.0 / 72.0, rel=1e-8)
    assert led["C1"] == pytest.approx(1.0 / 72.0, rel=1e-8)
    # formula identities hold as stored
    assert led["C4"] * (1.0 + 2.0 * led["lambda"]) == pytest.approx(
        led["C3"], rel=1e-15
    )
    assert led["C0"] == pytest.approx(led["lambda"] * led["C4"] / 3.0, rel=1e-15)
    assert led["C0"] <= led["lambda"] * math.log(E ** 2) ** 2


def test_ledger_critical_boundary_frozen():
    led = build_ledger(Params(0.5, 2.0, E ** E))
    assert led["C5"] == pytest.approx(0.25, rel=1e-8)
    assert "L" in led and led["L"] > 0.0
    assert led["C7"] <= min(led["C5"], led["lambda"] * led["C6"]) / 2.0 + 1e-15


def test_ledger_critical_boundary_needs_large_R():
    with pytest.raises(LedgerError):
        build_ledger(Params(0.5, 2.0, E))
    # between e and e^e the chain stops after the first trace constant
    led = build_ledger(Params(0.5, 2.0, E ** 2))
    assert "L5" in led
    assert "C6" not in led


def test_ledger_positivity_all_regimes():
    cases = [
        Params(0.0, 2.0, E ** 2),
        Params(-1.0, 3.0, E ** 1.3),
        Params(1.0, 2.0, E),
        Params(0.5, 2.0, E ** 3.5),
        Params(0.25, 1.5, E ** 2),  # p < 2 capped branch
        Params(2.0, 1.5, E ** 1.1),
    ]
    for params in cases:
        led = build_ledger(params)
        for name in led.entries:
            assert led[name] > 0.0, (params, name)


def test_ledger_p_below_two_records_cap():
    led = build_ledger(Params(0.25, 1.5, E ** 2))
    M = led["M"]
    assert M >= 2.0 and math.log2(M) == int(math.log2(M))
    beta = abs(1.0 - 1.0 / 1.5 - 0.25)
    logR = 2.0
    assert (1.5 / 2.0) * (beta * M) ** (1.0 - 1.5) / logR <= 0.125
    assert M ** (1.0 - 1.5) / logR <= 1e-2


def test_ledger_deterministic():
    a = build_ledger(Params(-0.3, 2.5, E ** 2.7))
    b = build_ledger(Params(-0.3, 2.5, E ** 2.7))
    assert a.to_json() == b.to_json()
    assert [a[n] for n in a.entries] == [b[n] for n in b.entries]


def test_ledger_serialization_round_trip():
    import json

    led = build_ledger(Params(0.0, 2.0, E ** 2))
    doc = json.loads(led.to_json())
    assert doc["alpha"] == 0.0 and doc["p"] == 2.0
    assert doc["regime"] == "noncritical"
    names = [row["name"] for row in doc["constants"]]
    assert "C0" in names and "L" in names
    for row in doc["constants"]:
        assert set(row) >= {"name", "value", "formula"}
