import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dwpap import kernels
from dwpap._pykernels import horner, romberg_refine, trig_eval

BACKENDS = kernels.backends()
compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def test_backend_names():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in BACKENDS


def test_pure_switch_selects_fallback():
    env = dict(os.environ, DWPAP_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from dwpap import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_trig_eval_definition():
    t = np.array([0.0, 1.0, 2.5])
    freqs = np.array([-1.0, 0.0, 2.0])
    coefs = np.array([[1.0], [2.0 + 1j], [0.5j]])
    expected = sum(coefs[k, 0] * np.exp(1j * freqs[k] * t) for k in range(3))
    np.testing.assert_allclose(trig_eval(t, freqs, coefs)[:, 0], expected, rtol=1e-14)


def test_horner_definition():
    np.testing.assert_allclose(horner([1.0, 0.0, 3.0], np.array([2.0, -1.0])), [13.0, 4.0])


def test_romberg_exact_on_quartics():
    # Boole's rule integrates degree-5 polynomials exactly, so the error estimate vanishes
    a, w = 0.3, 1.7
    x = a + w * np.arange(9) / 8.0
    f = (x ** 4 - 2 * x + 1)[None, :, None]
    val, err, mag = romberg_refine(f, np.array([w]))
    exact = ((a + w) ** 5 - a ** 5) / 5 - ((a + w) ** 2 - a ** 2) + w
    assert val[0, 0] == pytest.approx(exact, rel=1e-13)
    assert err[0] <= 1e-13


def test_romberg_error_estimate_is_honest():
    w = 2.0
    x = w * np.arange(9) / 8.0
    val, err, _ = romberg_refine(np.exp(3 * x)[None, :, None], np.array([w]))
    exact = (np.exp(3 * w) - 1) / 3
    assert abs(val[0, 0] - exact) <= 10 * err[0]


@compiled
@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 50), elements=st.floats(-100, 100)),
       arrays(np.float64, st.integers(0, 8), elements=st.floats(-10, 10)))
def test_trig_eval_backends_agree(t, freqs):
    rng = np.random.default_rng(len(t) + 7 * len(freqs))
    coefs = rng.normal(size=(len(freqs), 2)) + 1j * rng.normal(size=(len(freqs), 2))
    a = BACKENDS["python"].trig_eval(t, freqs, coefs)
    b = BACKENDS["cython"].trig_eval(t, freqs, coefs)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@compiled
@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 8), elements=st.floats(-5, 5)),
       arrays(np.float64, st.integers(1, 50), elements=st.floats(-3, 3)))
def test_horner_backends_agree(coeffs, x):
    np.testing.assert_allclose(BACKENDS["python"].horner(coeffs, x), BACKENDS["cython"].horner(coeffs, x),
                               rtol=1e-12, atol=1e-9)


@compiled
@pytest.mark.parametrize("dtype", [np.float64, np.complex128])
def test_romberg_backends_agree(dtype):
    rng = np.random.default_rng(3)
    F = rng.normal(size=(64, 9, 3)).astype(dtype)
    if dtype is np.complex128:
        F = F + 1j * rng.normal(size=F.shape)
    w = rng.uniform(0.01, 1, 64)
    for x, y in zip(BACKENDS["python"].romberg_refine(F, w), BACKENDS["cython"].romberg_refine(F, w)):
        np.testing.assert_allclose(x, y, rtol=1e-13, atol=1e-15)
