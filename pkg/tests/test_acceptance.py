"""Acceptance criteria, each checked at its stated tolerance.

Run ``pytest tests/test_acceptance.py`` to get one pass/fail line per
criterion in the terminal summary.
"""

import io
import math
import time

import mpmath
import numpy as np
import pytest

from dwpap.apfun import FunctionHandle, TrigPoly, bohr_transform, bohr_transform_curve
from dwpap.catalog import composition_examples, perturbation, random_trigpoly
from dwpap.cli import EXIT_OK, run
from dwpap.ergodic import dw_mean, ergodic_curve, theta, verify_mean_theorem
from dwpap.limits import CONVERGES_TO_ZERO, Schedule
from dwpap.suite import FAIL, PASS, run_suite
from dwpap.transforms import composition_check, conv_membership, convolve, decomposition_recovery, gauss, laplace
from dwpap.weight_dsl import classify_polynomial, parse_weight
from dwpap.weights import Weight, log_mu_QT_many

ONE = Weight.parse("1")
SQRT2 = math.sqrt(2.0)
LORENTZ = perturbation("lorentz")
SCHEDULE = Schedule()


@pytest.mark.criterion(1, "exponential/linear example: theta, weighted mean, log-domain normalizer")
def test_exponential_weight_example(record_property):
    start = time.perf_counter()
    mu, nu = Weight.parse("exp(abs(x))"), Weight.parse("1+abs(x)")
    f = TrigPoly.constant(1.0) + TrigPoly.cos(1.0) + TrigPoly.sin(SQRT2)
    th = theta(mu, nu)
    m = dw_mean(f, mu, nu)
    logs = log_mu_QT_many(mu, SCHEDULE.Ts)
    elapsed = time.perf_counter() - start
    with mpmath.workdps(40):
        exact = np.array([float(mpmath.log(2 * mpmath.expm1(T))) for T in SCHEDULE.Ts])
    rel = float(np.max(np.abs(logs - exact) / np.abs(exact)))
    record_property("theta", f"{th.value:.1e}")
    record_property("|M|", f"{abs(m.value[0]):.1e}")
    record_property("log_rel", f"{rel:.1e}")
    record_property("seconds", f"{elapsed:.2f}")
    assert th.value is not None and th.value <= 1e-3
    assert th.curve.R[-1, 0] <= 1e-3
    assert abs(m.value[0]) <= 1e-3
    assert rel <= 1e-8
    assert elapsed < 5.0


@pytest.mark.criterion(2, "weighted mean equals theta times the classical mean")
def test_mean_proportionality_random(record_property):
    rng = np.random.default_rng(2024)
    polys = [random_trigpoly(rng) for _ in range(10)]
    pairs = [(ONE, ONE), (Weight.parse("1+x^2"), Weight.parse("2+x^2"))]
    start = time.perf_counter()
    residuals = []
    for p in polys:
        for mu, nu in pairs:
            r = verify_mean_theorem(p, mu, nu)
            assert r.skipped is None, r.skipped
            residuals.append(r.residual)
    elapsed = time.perf_counter() - start
    record_property("max_residual", f"{max(residuals):.1e}")
    record_property("seconds", f"{elapsed:.2f}")
    assert all(len(p) <= 6 and np.all(np.abs(p.freqs) <= 5) for p in polys)
    assert all(np.count_nonzero(p.freqs == 0) == 1 for p in polys)
    assert max(residuals) <= 5e-3
    assert elapsed < 30.0


def _off_spectrum(p, rng):
    while True:
        lam = float(rng.uniform(-5, 5))
        if np.min(np.abs(p.freqs - lam)) >= 0.25:
            return lam


@pytest.mark.criterion(3, "Bohr coefficients exact; off-spectrum averages decay")
def test_bohr_analysis(record_property):
    rng = np.random.default_rng(7)
    exponents = []
    for _ in range(5):
        p = random_trigpoly(rng)
        for lam, a in zip(p.freqs, p.coefs):
            assert np.array_equal(bohr_transform(p, float(lam)), a)
        assert np.all(bohr_transform(p, _off_spectrum(p, rng)) == 0)
        v = bohr_transform_curve(p, _off_spectrum(p, rng)).verdict
        assert v.kind == CONVERGES_TO_ZERO
        exponents.append(v.decay_exponent)
    record_property("min_decay_exponent", f"{min(exponents):.3f}")
    # fitted log-log slope is minus the decay exponent
    assert min(exponents) >= 0.8


def _positive_poly(rng):
    factors = int(rng.integers(1, 4))
    coeffs = np.array([float(rng.integers(1, 4))])
    for _ in range(factors):
        a = int(rng.integers(-3, 4))
        b = a * a // 4 + int(rng.integers(1, 4))  # b > a^2/4 keeps x^2 + a x + b irreducible
        coeffs = np.convolve(coeffs, [b, a, 1])
    return coeffs, factors


def _rejected_poly(rng):
    if rng.random() < 0.5:
        deg = 2 * int(rng.integers(0, 4)) + 1
        coeffs = rng.integers(-5, 6, deg + 1).astype(float)
        coeffs[-1] = float(rng.integers(1, 4))
        return coeffs, "odd degree"
    coeffs, _ = _positive_poly(rng)
    r = int(rng.integers(-3, 4))
    root = [-r, 1] if rng.random() < 0.5 else [r * r, -2 * r, 1]
    coeffs = np.convolve(coeffs, root)
    if len(coeffs) % 2 == 0:  # odd degree: add a second linear factor to keep the degree even
        coeffs = np.convolve(coeffs, [-int(rng.integers(-3, 4)), 1])
    return coeffs, "real root"


def _text(coeffs):
    return "0+" + "+".join(f"({c:g})*x^{i}" if c >= 0 else f"(0-{-c:g})*x^{i}" for i, c in enumerate(coeffs))


@pytest.mark.criterion(4, "polynomial weights classified; real-root and odd-degree polynomials rejected")
def test_polynomial_weights(record_property):
    rng = np.random.default_rng(4)
    for _ in range(200):
        coeffs, nf = _positive_poly(rng)
        pc = classify_polynomial(parse_weight(_text(coeffs)))
        assert pc.is_weight, coeffs
        assert pc.degree == 2 * nf
        assert sum(m for _, _, m in pc.factors) == nf
    reasons = {"odd degree": 0, "real root": 0}
    for _ in range(200):
        coeffs, reason = _rejected_poly(rng)
        pc = classify_polynomial(parse_weight(_text(coeffs)))
        assert not pc.is_weight and pc.reason == reason, (coeffs, pc.reason)
        reasons[reason] += 1
    record_property("rejected", reasons)
    assert min(reasons.values()) > 50


@pytest.mark.criterion(5, "weight-class instance suite has zero failures")
def test_class_instance_suite(record_property):
    ids = {"ws-subset-winv", "product-ws", "sum-of-equivalent-winv"}
    rep = run_suite(only=ids)
    record_property("statuses", {e.theorem_id: e.status for e in rep.entries})
    assert {e.theorem_id for e in rep.entries} == ids
    assert all(i.status != FAIL for e in rep.entries for i in e.instances)
    assert all(e.status == PASS for e in rep.entries)


@pytest.mark.criterion(6, "ergodic curve of 1/(1+t^2) matches its closed forms")
def test_lorentz_closed_forms(record_property):
    c = ergodic_curve(LORENTZ, ONE, ONE)
    err = np.max(np.abs(c.R[:, 0] - np.arctan(c.T) / c.T))
    ck = ergodic_curve(LORENTZ, ONE, ONE, kappa=0.5)
    err_k = np.max(np.abs(ck.R[:, 0] - 2 * np.arctan(ck.T) / np.sqrt(2 * ck.T)))
    record_property("err", f"{err:.1e}")
    record_property("err_kappa", f"{err_k:.1e}")
    assert c.verdict.kind == CONVERGES_TO_ZERO
    assert err <= 1e-6 and err_k <= 1e-6


@pytest.mark.criterion(7, "convolution with laplace(1) and gauss(1)")
def test_convolution_oracle(record_property):
    cos = FunctionHandle.from_trigpoly(TrigPoly.cos(1.0))
    ts = np.linspace(-10, 10, 20)
    got = np.array([convolve(cos, laplace(1.0), t)[0] for t in ts])
    err = float(np.max(np.abs(got - np.cos(ts) / 2)))
    v = conv_membership(LORENTZ, gauss(1.0), ONE, ONE)
    record_property("err", f"{err:.1e}")
    record_property("membership", v.kind)
    assert err <= 1e-6
    assert v.kind == CONVERGES_TO_ZERO


@pytest.mark.criterion(8, "decomposition of 2+3cos t + 1/(1+t^2) recovered")
def test_decomposition(record_property):
    p = TrigPoly.constant(2.0) + TrigPoly.cos(1.0, 3.0)
    s = decomposition_recovery(FunctionHandle.from_trigpoly(p) + LORENTZ, [0.0, 1.0], p=p, phi=LORENTZ)
    ev = s.evidence
    T = SCHEDULE.T_max
    record_property("max_error", f"{ev['max_error']:.2e}")
    record_property("error_bound", f"{ev['error_bound']:.2e}")
    assert ev["max_error"] <= 5e-3
    assert ev["phi_bound"] <= math.pi / (2 * T)
    assert ev["max_error"] <= ev["error_bound"] * (1 + 1e-6)


@pytest.mark.criterion(9, "composition remainder within 1.1 times its three-term bound")
def test_composition_bound(record_property):
    ratios = {}
    for name, F, h1, h2 in composition_examples():
        r = composition_check(F, h1, h2, ONE, ONE)
        assert r.member, name
        ratios[name] = round(r.bound_ratio, 4)
    record_property("ratios", ratios)
    assert len(ratios) == 3
    assert max(ratios.values()) <= 1.1


@pytest.mark.criterion(10, "verify-suite output is byte-identical across runs")
def test_verify_suite_deterministic(record_property):
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        assert run(["verify-suite"], stdout=buf, stderr=io.StringIO()) == EXIT_OK
        outs.append(buf.getvalue().encode())
    record_property("bytes", len(outs[0]))
    assert outs[0] == outs[1]
