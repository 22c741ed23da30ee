"""Function specs for the command line and built-in instance catalogs.

A function spec is one of

* a real trigonometric polynomial ``c + a cos(lam*t) + b sin(lam*t) - ...``,
  where ``lam`` is a product of numbers, ``pi`` and ``sqrtN`` (``cos(t)``
  means frequency 1);
* that, followed by catalog perturbations ``+ 0.5*@lorentz``;
* a TrigPoly JSON object, or the path of a ``.json`` file holding one.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .apfun import FunctionHandle, TrigPoly

# perturbations: name -> (evaluator, sup bound)
PERTURBATIONS = {
    "lorentz": (lambda t: 1.0 / (1.0 + t * t), 1.0),
    "laplace": (lambda t: np.exp(-np.abs(t)), 1.0),
    "inv_abs": (lambda t: 1.0 / (1.0 + np.abs(t)), 1.0),
    "gauss": (lambda t: np.exp(-t * t), 1.0),
    "zero": (lambda t: np.zeros_like(t), 0.0),
}


class FunctionSpecError(ValueError):
    def __init__(self, text, offset, msg):
        super().__init__(f"{msg} at offset {offset} in {text!r}")
        self.text, self.offset = text, offset


def perturbation(name: str, coef: float = 1.0) -> FunctionHandle:
    if name not in PERTURBATIONS:
        raise KeyError(f"unknown perturbation @{name}; known: {', '.join(sorted(PERTURBATIONS))}")
    fn, bound = PERTURBATIONS[name]
    label = name if coef == 1.0 else f"{coef:g}*{name}"
    return FunctionHandle(lambda t: coef * fn(t)[:, None], 1, abs(coef) * bound, 0.0, label)


@dataclass
class FunctionSpec:
    text: str
    trig: TrigPoly
    perturbations: list = field(default_factory=list)  # (coef, name)

    @property
    def is_trigpoly(self) -> bool:
        return not self.perturbations

    @property
    def value(self):
        """The TrigPoly itself when unperturbed, else a function handle."""
        return self.trig if self.is_trigpoly else self.handle

    @property
    def handle(self) -> FunctionHandle:
        h = FunctionHandle.from_trigpoly(self.trig, self.text if self.is_trigpoly else "trig")
        for coef, name in self.perturbations:
            h = h + perturbation(name, coef)
        h.label = self.text
        return h

    @property
    def ergodic_part(self) -> Optional[FunctionHandle]:
        if not self.perturbations:
            return None
        hs = [perturbation(n, c) for c, n in self.perturbations]
        out = hs[0]
        for h in hs[1:]:
            out = out + h
        return out

    def to_json(self):
        return {"text": self.text, "trigpoly": self.trig.to_json(),
                "perturbations": [{"coef": c, "name": n} for c, n in self.perturbations]}


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+)|(sqrt\d+(?:\.\d+)?|pi|cos|sin|t)|(@\w+)|([-+*()]))")


def _tokens(text):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text) - len(text[pos:].lstrip())
            raise FunctionSpecError(text, bad, "unexpected character")
        kind = "num" if m.group(1) else "word" if m.group(2) else "pert" if m.group(3) else "op"
        out.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def _frequency(toks, i, text):
    """``lam*t`` / ``lam t`` / ``t`` inside cos(...) or sin(...)."""
    lam = 1.0
    seen = False
    while True:
        kind, val, off = toks[i]
        if kind == "num":
            lam *= float(val)
        elif kind == "word" and val == "pi":
            lam *= math.pi
        elif kind == "word" and val.startswith("sqrt"):
            lam *= math.sqrt(float(val[4:]))
        elif kind == "word" and val == "t":
            return lam, i + 1
        else:
            raise FunctionSpecError(text, off, "expected frequency factor or t")
        seen = True
        i += 1
        if toks[i][1] == "*":
            i += 1
        elif not seen:
            raise FunctionSpecError(text, toks[i][2], "expected *")


def parse_function(text: str) -> FunctionSpec:
    """Compile a function spec (see module docstring)."""
    s = text.strip()
    if s.startswith("{"):
        return FunctionSpec(text, TrigPoly.from_json(json.loads(s)))
    if s.endswith(".json") and os.path.exists(s):
        with open(s) as fh:
            return FunctionSpec(text, TrigPoly.from_json(json.load(fh)))
    toks = _tokens(text)
    if toks[0][0] == "end":
        raise FunctionSpecError(text, 0, "empty function spec")
    terms, perts = [], []
    i = 0
    sign = 1.0
    if toks[0][1] in "+-" and toks[0][0] == "op":
        sign = -1.0 if toks[0][1] == "-" else 1.0
        i = 1
    while True:
        coef = sign
        kind, val, off = toks[i]
        if kind == "num":
            coef *= float(val)
            i += 1
            if toks[i][1] == "*":
                i += 1
            kind, val, off = toks[i]
            has_num = True
        else:
            has_num = False
        if kind == "word" and val in ("cos", "sin"):
            if toks[i + 1][1] != "(":
                raise FunctionSpecError(text, toks[i + 1][2], "expected (")
            lam, i = _frequency(toks, i + 2, text)
            if toks[i][1] != ")":
                raise FunctionSpecError(text, toks[i][2], "expected )")
            i += 1
            terms.append(TrigPoly.cos(lam, coef) if val == "cos" else TrigPoly.sin(lam, coef))
        elif kind == "pert":
            perts.append((coef, val[1:]))
            if val[1:] not in PERTURBATIONS:
                raise FunctionSpecError(text, off, f"unknown perturbation {val}")
            i += 1
        elif has_num:
            terms.append(TrigPoly.constant(coef))
        else:
            raise FunctionSpecError(text, off, "expected number, cos, sin or @perturbation")
        kind, val, off = toks[i]
        if kind == "end":
            break
        if kind == "op" and val in "+-":
            sign = -1.0 if val == "-" else 1.0
            i += 1
            continue
        raise FunctionSpecError(text, off, "expected + or -")
    p = TrigPoly.zero(1)
    for q in terms:
        p = p + q
    return FunctionSpec(text, p, perts)


# --------------------------------------------------------------------------
# instance catalogs used by the verification suite

WEIGHT_CATALOG = (
    "1",
    "2",
    "1+abs(x)",
    "2+abs(x)",
    "x^2+1",
    "x^2+2",
    "exp(abs(x))",
    "(1+abs(x))*exp(abs(x))",
)

EQUIVALENT_PAIRS = (
    ("1+abs(x)", "2+abs(x)"),
    ("x^2+1", "x^2+2"),
    ("1", "2"),
)

PRODUCT_PAIRS = (
    ("x^2+1", "x^2+2"),
    ("exp(abs(x))", "1+abs(x)"),
    ("1+abs(x)", "2+abs(x)"),
)


def composition_examples():
    """(name, TwoVarFunction, h1, h2) triples for the composition bound."""
    from .transforms import TwoVarFunction

    lor = perturbation("lorentz")
    zero = perturbation("zero")

    def f1(t, u):
        return np.sin(u) * np.cos(t)[:, None]

    def zero2(t, u):
        return np.zeros_like(u)

    def g3(t, u):
        return u * (2.0 + np.cos(t))[:, None]

    def phi3(t, u):
        return np.exp(-np.abs(t))[:, None] * u

    def f3(t, u):
        return g3(t, u) + phi3(t, u)

    sin_cos = TwoVarFunction(f1, 1.0, f1, zero2, "sin(u)*cos(t)")
    split = TwoVarFunction(f3, 4.0, g3, phi3, "u*(2+cos(t)) + exp(-|t|)*u")
    return [
        ("sin-cos", sin_cos, TrigPoly.cos(1.0), lor),
        ("zero-perturbation", sin_cos, TrigPoly.cos(1.0), zero),
        ("split-lipschitz", split, TrigPoly.sin(1.0), lor),
    ]


def random_trigpoly(rng: np.random.Generator, max_terms: int = 6, max_freq: float = 5.0,
                    min_freq: float = 0.5) -> TrigPoly:
    """Random complex TrigPoly with one zero frequency and |coefficients| <= 1.

    Nonzero frequencies avoid (-min_freq, min_freq) so each oscillating
    term averages out within the default schedule.
    """
    k = int(rng.integers(2, max_terms + 1))
    terms = [(complex(rng.uniform(0.5, 1.0) * rng.choice([-1, 1]), rng.uniform(-0.5, 0.5)), 0.0)]
    for _ in range(k - 1):
        lam = rng.uniform(min_freq, max_freq) * rng.choice([-1, 1])
        r, a = rng.uniform(0.1, 1.0), rng.uniform(0, 2 * math.pi)
        terms.append((r * complex(math.cos(a), math.sin(a)), lam))
    return TrigPoly(terms, 1)
