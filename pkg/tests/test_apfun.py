import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dwpap.apfun import (
    DimensionError,
    FunctionHandle,
    LimitNotReached,
    TrigPoly,
    add,
    bohr_mean_exact,
    bohr_spectrum_scan,
    bohr_transform,
    bohr_transform_curve,
    scale,
    sup_error,
    translate,
)
from dwpap.limits import CONVERGES_TO_ZERO

SQRT2 = math.sqrt(2.0)


def two_plus_three_cos():
    return TrigPoly.constant(2.0) + TrigPoly.cos(1.0, 3.0)


def test_eval_examples():
    p = two_plus_three_cos()
    assert p(0.0)[0] == pytest.approx(5.0)
    assert p(math.pi)[0] == pytest.approx(-1.0)
    assert TrigPoly([(1.0, SQRT2)])(0.0)[0] == pytest.approx(1.0)
    assert p(np.array([0.0, math.pi])).shape == (2, 1)


def test_construction_merges_and_drops():
    p = TrigPoly([(1.0, 1.0), (2.0, 1.0 + 1e-12), (0.0, 3.0), (1.0, -2.0), (-1.0, -2.0)])
    assert len(p) == 1
    assert p.coefficient(1.0)[0] == pytest.approx(3.0)
    assert list(p.freqs) == sorted(p.freqs)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                          st.floats(-10, 10)), max_size=6),
       st.floats(-1e3, 1e3))
def test_eval_matches_definition(terms, t):
    p = TrigPoly(terms, 1)
    expected = sum(c * np.exp(1j * lam * t) for c, lam in terms) if terms else 0.0
    assert abs(p(t)[0] - expected) <= 1e-9 * (1 + sum(abs(c) for c, _ in terms))


def test_vector_valued_coefficients():
    p = TrigPoly([(np.array([1.0, 2.0]), 0.0), (np.array([0.0, 1j]), 1.0)])
    assert p.dim == 2
    np.testing.assert_allclose(p(0.0), [1.0, 2.0 + 1j])
    with pytest.raises(DimensionError):
        p + TrigPoly.constant(1.0)


def test_bohr_means():
    assert bohr_mean_exact(two_plus_three_cos())[0] == 2.0
    assert bohr_mean_exact(TrigPoly([(1.0, SQRT2)]))[0] == 0.0
    assert bohr_mean_exact(TrigPoly.constant(-4.5))[0] == -4.5


@pytest.mark.parametrize("lam, expected", [(1.0, 1.5), (-1.0, 1.5), (0.37, 0.0), (0.0, 2.0)])
def test_exact_transform(lam, expected):
    assert bohr_transform(two_plus_three_cos(), lam)[0] == expected


@pytest.mark.parametrize("lam, expected", [(1.0, 1.5), (0.0, 2.0)])
def test_numeric_transform_agrees(lam, expected):
    a = bohr_transform(two_plus_three_cos(), lam, numeric=True)
    assert abs(a[0] - expected) <= 1e-3


def test_numeric_transform_off_spectrum_decays():
    c = bohr_transform_curve(two_plus_three_cos(), 0.37)
    assert c.verdict.kind == CONVERGES_TO_ZERO
    assert c.verdict.decay_exponent >= 0.8
    # independent check: T * |a_T| stays bounded, as for (1/2T) * (bounded integral)
    assert np.max(np.abs(c.values[:, 0]) * c.T) < 20.0


def test_numeric_transform_raises_when_unsettled():
    f = FunctionHandle.scalar(lambda t: np.sqrt(np.abs(t)), max_freq=0.0)
    with pytest.raises(LimitNotReached) as exc:
        bohr_transform(f, 0.0, numeric=True)
    assert exc.value.verdict.kind != CONVERGES_TO_ZERO


def test_spectrum_scan_exact():
    s = bohr_spectrum_scan(two_plus_three_cos(), [-2, -1, 0, 1, 2], 0.1)
    assert [(lam, float(a[0].real)) for lam, a, _ in s.entries] == [(-1.0, 1.5), (0.0, 2.0), (1.0, 1.5)]
    assert len(bohr_spectrum_scan(TrigPoly.zero(), [0, 1, 2], 0.1)) == 0


def test_spectrum_scan_numeric_irrational():
    f = FunctionHandle.from_trigpoly(TrigPoly.cos(SQRT2))
    s = bohr_spectrum_scan(f, [-SQRT2, 0.0, 1.0, SQRT2], 0.1, numeric=True)
    assert s.frequencies == [-SQRT2, SQRT2]
    for lam in (-SQRT2, SQRT2):
        assert abs(s.coefficient(lam)[0] - 0.5) <= 1e-3


def test_algebra():
    c = TrigPoly.cos(1.0)
    shifted = translate(c, math.pi)
    np.testing.assert_allclose(shifted.coefs, -c.coefs, atol=1e-15)
    p = two_plus_three_cos()
    assert add(p, TrigPoly.zero()) == p
    assert scale(p, 1) == p
    assert len(p - p) == 0
    ts = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(translate(p, 0.7)(ts), p(ts + 0.7), atol=1e-12)


def test_json_round_trip():
    p = two_plus_three_cos() + TrigPoly.sin(SQRT2, 0.5)
    assert TrigPoly.from_json(p.to_json()) == p


def test_sup_error():
    p = two_plus_three_cos()
    grid = np.linspace(-50, 50, 100001)
    assert sup_error(FunctionHandle.from_trigpoly(p), p, grid) == 0.0
    pert = FunctionHandle.from_trigpoly(p + TrigPoly.cos(5.0, 0.01))
    assert sup_error(pert, p, grid) == pytest.approx(0.01, abs=1e-6)
    lor = FunctionHandle.from_trigpoly(p) + FunctionHandle.scalar(lambda t: 1 / (1 + t * t))
    assert sup_error(lor, p, np.linspace(100, 200, 1001)) <= 1e-4


def test_handle_shift_identity():
    f = FunctionHandle.scalar(np.cos)
    assert f.shifted(0.0) is f
    assert f.shifted(1.0)(0.0)[0] == pytest.approx(math.cos(1.0))
