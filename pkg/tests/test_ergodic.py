import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from dwpap.apfun import FunctionHandle, TrigPoly
from dwpap.catalog import perturbation
from dwpap.ergodic import (
    NORM,
    RAW,
    KappaParam,
    dw_mean,
    ergodic_curve,
    limit_verdict,
    membership_pap0,
    oscillatory_decay,
    ratio_curve,
    theta,
    verify_mean_theorem,
)
from dwpap.limits import CONVERGES, CONVERGES_TO_ZERO, DIVERGES, UNDECIDED, Schedule
from dwpap.quadrature import nested_integrals, scaled_integral
from dwpap.weights import Weight

ONE = Weight.parse("1")
SQRT2 = math.sqrt(2.0)
LORENTZ = perturbation("lorentz")


def test_lorentz_curve_matches_arctan():
    c = ergodic_curve(LORENTZ, ONE, ONE)
    np.testing.assert_allclose(c.R[:, 0], np.arctan(c.T) / c.T, atol=1e-6, rtol=0)
    assert c.verdict.kind == CONVERGES_TO_ZERO


def test_lorentz_kappa_curve_matches_closed_form():
    c = ergodic_curve(LORENTZ, ONE, ONE, kappa=0.5)
    np.testing.assert_allclose(c.R[:, 0], 2 * np.arctan(c.T) / np.sqrt(2 * c.T), atol=1e-6, rtol=0)
    # R(T_max) is about 0.021, above the zero threshold, so the default schedule cannot decide
    assert c.verdict.kind == UNDECIDED
    assert c.R[-1, 0] == pytest.approx(2 * math.atan(c.T[-1]) / math.sqrt(2 * c.T[-1]), rel=1e-9)


def test_lorentz_kappa_member_on_longer_schedule():
    v = membership_pap0(LORENTZ, ONE, ONE, Schedule(ratio=2.0, count=24), kappa=KappaParam(0.5))
    assert v.kind == CONVERGES_TO_ZERO


def test_constant_curve():
    c = ergodic_curve(TrigPoly.constant(1.0), ONE, ONE)
    np.testing.assert_allclose(c.R[:, 0], 1.0, rtol=1e-12)
    assert c.verdict.kind == CONVERGES and c.verdict.limit[0] == pytest.approx(1.0)
    assert membership_pap0(TrigPoly.constant(1.0), ONE, ONE).kind != CONVERGES_TO_ZERO


def test_exponential_normalizer_in_log_domain():
    mu, nu = Weight.parse("exp(abs(x))"), Weight.parse("1+abs(x)")
    c = ratio_curve(mu, nu)
    with mpmath.workdps(40):
        exact = [float(mpmath.log(2 * T + T * T) - mpmath.log(2 * (mpmath.e ** T - 1))) for T in c.T]
    np.testing.assert_allclose(c.log_abs, exact, rtol=1e-8)


def test_shell_additivity():
    def g(t):
        return (np.cos(t) / (1 + t * t))[:, None]

    Ts = Schedule(count=10).Ts
    nest = nested_integrals(g, lambda t: np.zeros_like(t), Ts, 0.25, 1e-10)
    for T, tot in zip(Ts, nest.totals):
        direct, _ = scaled_integral(g, lambda t: np.zeros_like(t), -T, T, 0.25, 1e-10)
        ref = 2 * quad(lambda s: math.cos(s) / (1 + s * s), 0, T, limit=400, epsabs=1e-13)[0]
        assert tot.value()[0] == pytest.approx(direct.value()[0], abs=1e-11)
        assert tot.value()[0] == pytest.approx(ref, abs=1e-9)


def test_limit_verdict_examples():
    c = ergodic_curve(LORENTZ, ONE, ONE)
    v = limit_verdict(c)
    assert v.kind == CONVERGES_TO_ZERO and v.decay_exponent == pytest.approx(1.0, abs=0.05)
    strict = limit_verdict(c, zero_threshold=1e-8)
    assert strict.kind != CONVERGES_TO_ZERO
    assert ratio_curve(ONE, Weight.parse("1+x^2")).verdict.kind == DIVERGES


@pytest.mark.parametrize("mu, nu, expected", [
    ("x^2+1", "x^2+1", 1.0),
    ("exp(abs(x))", "1+abs(x)", 0.0),
    ("x^2+1", "x^2+2", 1.0),
    ("1", "2", 2.0),
])
def test_theta(mu, nu, expected):
    th = theta(Weight.parse(mu), Weight.parse(nu))
    assert th.value == pytest.approx(expected, abs=1e-3)


def test_theta_divergent():
    th = theta(ONE, Weight.parse("1+x^2"))
    assert th.value is None and th.verdict.kind == DIVERGES


def test_oscillatory_decay_closed_form():
    v = oscillatory_decay(ONE, ONE, 1.0)
    assert v.kind == CONVERGES_TO_ZERO
    c = v.curve
    np.testing.assert_allclose(c.R[:, 0], np.sin(c.T) / c.T, atol=1e-9)


@pytest.mark.parametrize("mu, nu, lam", [("exp(abs(x))", "1+abs(x)", SQRT2), ("1", "1", 10.0), ("x^2+1", "x^2+2", 3.0)])
def test_oscillatory_decay_passes(mu, nu, lam):
    v = oscillatory_decay(Weight.parse(mu), Weight.parse(nu), lam)
    assert v.kind == CONVERGES_TO_ZERO


def test_oscillatory_decay_rejects_zero_frequency():
    with pytest.raises(ValueError):
        oscillatory_decay(ONE, ONE, 0.0)


def test_dw_mean_examples():
    ex = TrigPoly.constant(1.0) + TrigPoly.cos(1.0) + TrigPoly.sin(SQRT2)
    r = dw_mean(ex, Weight.parse("exp(abs(x))"), Weight.parse("1+abs(x)"))
    assert abs(r.value[0]) <= 1e-3 and r.theta == 0.0
    r = dw_mean(TrigPoly.constant(2.0) + TrigPoly.cos(1.0, 3.0), ONE, ONE)
    assert abs(r.value[0] - 2.0) <= 1e-3 and r.theta == pytest.approx(1.0)
    q = Weight.parse("1+x^2")
    r = dw_mean(TrigPoly.constant(7.0), q, q)
    assert r.value[0] == pytest.approx(7.0, rel=1e-9)


def test_dw_mean_of_handle():
    f = FunctionHandle.from_trigpoly(TrigPoly.constant(3.0)) + LORENTZ
    r = dw_mean(f, ONE, ONE)
    assert abs(r.value[0] - 3.0) <= 1e-3
    assert r.theta is None


def test_verify_mean_theorem():
    r = verify_mean_theorem(TrigPoly.constant(2.0) + TrigPoly.cos(1.0, 3.0), ONE, ONE)
    assert r.skipped is None and r.residual <= 1e-3
    r = verify_mean_theorem(TrigPoly.cos(1.0) + TrigPoly.sin(2.5), ONE, ONE)
    assert r.residual <= 1e-3
    r = verify_mean_theorem(TrigPoly.constant(1.0) + TrigPoly.cos(1.0), Weight.parse("exp(abs(x))"),
                            Weight.parse("1+abs(x)"))
    assert r.theta == 0.0 and r.residual <= 1e-3


def test_verify_mean_theorem_skips_without_theta():
    r = verify_mean_theorem(TrigPoly.constant(1.0), ONE, Weight.parse("1+x^2"))
    assert r.skipped and "theta" in r.skipped and r.residual is None


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.3, 1.5])
def test_kappa_validation(bad):
    with pytest.raises(ValueError):
        KappaParam(bad)


def test_mode_validation():
    with pytest.raises(ValueError):
        ergodic_curve(LORENTZ, ONE, ONE, mode="mean")


def test_csv_layout():
    c = ergodic_curve(LORENTZ, ONE, ONE, Schedule(count=6))
    lines = c.to_csv().splitlines()
    assert lines[0] == "T,R_re,R_im"
    assert len(lines) == 7
    raw = ergodic_curve(TrigPoly.cos(1.0), ONE, ONE, Schedule(count=6), RAW)
    assert raw.to_csv().splitlines()[0] == "T,R_re,R_im"
    assert c.mode == NORM
