import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dwpap.limits import (
    CONVERGES,
    CONVERGES_TO_ZERO,
    DIVERGES,
    UNDECIDED,
    Schedule,
    aitken,
    decay_exponent,
    decide,
    decide_schedule,
)

TS = Schedule().Ts


def test_schedule_defaults():
    s = Schedule()
    assert s.Ts[0] == 1.0 and len(s.Ts) == 24
    assert s.T_max == pytest.approx(1.5 ** 23)


@pytest.mark.parametrize("kw", [dict(T0=0), dict(ratio=1.0), dict(count=3), dict(spread_tol=0), dict(window=2)])
def test_schedule_validation(kw):
    with pytest.raises(ValueError):
        Schedule(**kw)


def test_constant_converges():
    v = decide_schedule(TS, np.full(TS.size, 2.5))
    assert v.kind == CONVERGES and v.limit[0] == 2.5


def test_inverse_power_goes_to_zero():
    v = decide_schedule(TS, np.arctan(TS) / TS)
    assert v.kind == CONVERGES_TO_ZERO
    assert v.decay_exponent == pytest.approx(1.0, abs=0.05)


def test_min_decay_blocks_slow_curves():
    vals = 1e-4 * (1 + 0 * TS)
    assert decide_schedule(TS, vals).kind == CONVERGES_TO_ZERO
    assert decide_schedule(TS, vals, min_decay=0.5).kind != CONVERGES_TO_ZERO


def test_power_growth_diverges():
    assert decide_schedule(TS, 1 + TS ** 2 / 3).kind == DIVERGES
    assert decide_schedule(TS, np.sqrt(TS)).kind == DIVERGES


def test_exponential_growth_in_log_domain():
    log_abs = TS  # e^T overflows long before T_max
    vals = np.exp(np.minimum(TS, 709.0))
    assert decide_schedule(TS, vals, log_abs).kind == DIVERGES


def test_logarithmic_growth_is_undecided():
    assert decide_schedule(TS, np.log(TS) + 1).kind == UNDECIDED


def test_saturating_rise_is_not_divergence():
    short = Schedule(count=6)
    T = short.Ts[1:]
    assert decide(T, (T - 1) / T, window=5).kind != DIVERGES


def test_oscillating_inverse_power_converges_by_tail_rule():
    vals = 2 + 3 * np.sin(TS) / TS
    v = decide_schedule(TS, vals)
    assert v.kind == CONVERGES
    assert v.evidence["rule"] == "power-law tail"
    assert abs(v.limit[0] - 2) <= 1e-3


def test_aitken_accelerates_geometric_sequence():
    seq = 1 + 0.5 ** np.arange(12)
    acc = aitken(seq)
    assert np.allclose(acc[-3:], 1.0, atol=1e-12)


def test_extrapolation_needs_contraction():
    grow = 1 + TS
    assert decide_schedule(TS, grow, extrapolate=True).kind == DIVERGES
    slow = 1 + 1 / TS
    v = decide_schedule(TS, slow, extrapolate=True)
    assert v.kind == CONVERGES and v.limit[0] == pytest.approx(1.0, abs=1e-3)


def test_too_few_points():
    assert decide(TS[:3], np.ones(3), window=5).kind == UNDECIDED


def test_decay_exponent_of_power_law():
    assert decay_exponent(TS, -1.5 * np.log(TS)) == pytest.approx(1.5, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.8, 3.0), st.floats(0.01, 1.0))
def test_decaying_power_laws_are_zero(p, c):
    vals = c * TS ** -p
    assert decide_schedule(TS, vals).kind == CONVERGES_TO_ZERO


@settings(max_examples=100, deadline=None)
@given(st.floats(-100, 100).filter(lambda x: abs(x) > 1e-2), st.floats(0.0, 1.0))
def test_settled_sequences_converge_to_their_limit(limit, amp):
    vals = limit * (1 + amp * 1e-6 * np.cos(TS))
    v = decide_schedule(TS, vals)
    assert v.kind == CONVERGES
    assert math.isclose(v.limit[0], limit, rel_tol=1e-5)
