import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dwpap.apfun import TrigPoly
from dwpap.catalog import FunctionSpecError, parse_function, random_trigpoly

SQRT2 = math.sqrt(2.0)


def test_paper_style_example_text():
    spec = parse_function("1+cos(1*t)+sin(sqrt2*t)")
    assert spec.is_trigpoly
    expected = TrigPoly.constant(1.0) + TrigPoly.cos(1.0) + TrigPoly.sin(SQRT2)
    ts = np.linspace(-10, 10, 21)
    np.testing.assert_allclose(spec.trig(ts), expected(ts), atol=1e-14)
    assert len(spec.trig) == 5


@pytest.mark.parametrize("text, value_at_0", [
    ("2+3cos(1*t)", 5.0),
    ("2 + 3*cos(t)", 5.0),
    ("-cos(2*pi*t) + 0.5", -0.5),
    ("7", 7.0),
    ("sin(t)", 0.0),
    ("1e-1*cos(3 t)", 0.1),
])
def test_mini_syntax_values(text, value_at_0):
    assert parse_function(text).trig(0.0)[0].real == pytest.approx(value_at_0)


def test_frequency_products():
    spec = parse_function("cos(2*pi*sqrt3*t)")
    assert spec.trig.max_freq == pytest.approx(2 * math.pi * math.sqrt(3))


def test_real_specs_are_real():
    spec = parse_function("1 - 2*sin(0.3*t) + cos(sqrt5*t)")
    assert np.abs(spec.trig(np.linspace(-40, 40, 81)).imag).max() < 1e-14


def test_perturbations():
    spec = parse_function("2 + 3*cos(t) + 0.5*@lorentz")
    assert not spec.is_trigpoly
    assert spec.perturbations == [(0.5, "lorentz")]
    assert spec.handle(0.0)[0].real == pytest.approx(5.5)
    assert spec.ergodic_part(1.0)[0].real == pytest.approx(0.25)


@pytest.mark.parametrize("text, offset, words", [
    ("2+", 2, "expected"),
    ("cos t", 4, "expected ("),
    ("cos(t", 5, "expected )"),
    ("2 $ 3", 2, "unexpected character"),
    ("@nothing", 0, "unknown perturbation"),
    ("", 0, "empty"),
])
def test_errors_carry_offsets(text, offset, words):
    with pytest.raises(FunctionSpecError) as exc:
        parse_function(text)
    assert exc.value.offset == offset
    assert words in str(exc.value)


def test_json_spec_and_file(tmp_path):
    p = TrigPoly.constant(2.0) + TrigPoly.cos(1.0, 3.0)
    assert parse_function(json.dumps(p.to_json())).trig == p
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_json()))
    assert parse_function(str(path)).trig == p


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_trigpoly_shape(seed):
    p = random_trigpoly(np.random.default_rng(seed))
    assert 1 <= len(p) <= 6
    assert np.all(np.abs(p.freqs) <= 5.0)
    nonzero = p.freqs[p.freqs != 0]
    assert np.all(np.abs(nonzero) >= 0.5)
    assert 0.5 <= np.abs(p.coefficient(0.0)[0]) <= 1.2
