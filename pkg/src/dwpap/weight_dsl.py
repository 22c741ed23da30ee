"""Weight expressions: parsing, printing, evaluation and exact analysis.

Grammar (whitespace-insensitive)::

    expr   := term { ("+"|"-") term } ;
    term   := factor { "*" factor } ;
    factor := atom [ "^" integer ] ;
    atom   := number | "x" | "abs" "(" expr ")" | "exp" "(" expr ")" | "(" expr ")" ;

Literals are kept as exact :class:`decimal.Decimal` values and only turned
into binary floats when an expression is evaluated.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from . import kernels, polyalg

DEFAULT_MAX_DEGREE = 64


# --------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Const:
    value: Decimal


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Abs:
    child: "Node"


@dataclass(frozen=True)
class Exp:
    child: "Node"


@dataclass(frozen=True)
class Sum:
    """n-ary signed sum; ``terms`` is a tuple of ``(sign, child)`` with sign in {+1, -1}."""

    terms: tuple


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError("integer powers must be >= 0")


Node = Union[Const, Var, Abs, Exp, Sum, Product, Power]
WeightExpr = Node


class WeightSyntaxError(ValueError):
    """Raised by :func:`parse_weight`; carries the byte offset and expected tokens."""

    def __init__(self, text, offset, expected, found):
        self.text = text
        self.offset = offset
        self.expected = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"syntax error at offset {offset}: expected one of {{{exp}}}, found {found!r}")


class DegreeOverflowError(ValueError):
    pass


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"(\d+(?:\.\d*)?|\.\d+)|(abs|exp|x)|([-+*^()])")
_ATOM_START = {"number", "x", "abs", "exp", "("}


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text):
    toks = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m:
            # unknown character: report what an atom or operator would need
            raise WeightSyntaxError(text, _byte_offset(text, pos), _ATOM_START | {"+", "-", "*", "^", ")"}, text[pos])
        if m.group(1):
            toks.append(_Tok("number", m.group(1), pos))
        elif m.group(2):
            toks.append(_Tok(m.group(2), m.group(2), pos))
        else:
            toks.append(_Tok(m.group(3), m.group(3), pos))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


def _byte_offset(text, pos):
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, expected):
        t = self.tok
        raise WeightSyntaxError(self.text, _byte_offset(self.text, t.offset), expected, t.text or "<end>")

    def take(self, kind):
        if self.tok.kind != kind:
            self.fail({kind})
        t = self.tok
        self.i += 1
        return t

    def expr(self):
        terms = [(1, self.term())]
        while self.tok.kind in ("+", "-"):
            sign = 1 if self.take(self.tok.kind).kind == "+" else -1
            terms.append((sign, self.term()))
        return terms[0][1] if len(terms) == 1 else Sum(tuple(terms))

    def term(self):
        factors = [self.factor()]
        while self.tok.kind == "*":
            self.i += 1
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self):
        base = self.atom()
        if self.tok.kind == "^":
            self.i += 1
            t = self.tok
            if t.kind != "number" or not t.text.isdigit():
                self.fail({"integer"})
            self.i += 1
            return Power(base, int(t.text))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.i += 1
            return Const(Decimal(t.text))
        if t.kind == "x":
            self.i += 1
            return Var()
        if t.kind in ("abs", "exp"):
            self.i += 1
            self.take("(")
            inner = self.expr()
            self.take(")")
            return Abs(inner) if t.kind == "abs" else Exp(inner)
        if t.kind == "(":
            self.i += 1
            inner = self.expr()
            self.take(")")
            return inner
        self.fail(_ATOM_START)


def parse_weight(text: str) -> Node:
    """Parse a weight expression.

    >>> parse_weight("1+abs(x)")
    Sum(terms=((1, Const(value=Decimal('1'))), (1, Abs(child=Var()))))
    """
    if not text or not text.strip():
        raise WeightSyntaxError(text or "", 0, _ATOM_START, "<end>")
    p = _Parser(text)
    tree = p.expr()
    if p.tok.kind != "end":
        p.fail({"+", "-", "*", "^", "<end>"})
    return tree


# --------------------------------------------------------------------------
# printing


def to_text(node: Node) -> str:
    """Pretty-print so that ``parse_weight(to_text(e)) == e``."""
    if isinstance(node, Const):
        return format(node.value, "f")
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Abs):
        return f"abs({to_text(node.child)})"
    if isinstance(node, Exp):
        return f"exp({to_text(node.child)})"
    if isinstance(node, Sum):
        parts = []
        for k, (sign, child) in enumerate(node.terms):
            s = to_text(child)
            if isinstance(child, Sum):
                s = f"({s})"
            if k == 0:
                parts.append(s)
            else:
                parts.append(("+ " if sign > 0 else "- ") + s)
        return " ".join(parts)
    if isinstance(node, Product):
        out = []
        for child in node.factors:
            s = to_text(child)
            if isinstance(child, (Sum, Product)):
                s = f"({s})"
            out.append(s)
        return "*".join(out)
    if isinstance(node, Power):
        s = to_text(node.base)
        if not isinstance(node.base, (Const, Var, Abs, Exp)):
            s = f"({s})"
        return f"{s}^{node.exponent}"
    raise TypeError(f"not a weight expression node: {node!r}")


# --------------------------------------------------------------------------
# evaluation


def evaluate(node: Node, x) -> np.ndarray:
    """Float evaluation on an array; may overflow to inf for steep weights."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(node, Const):
        return np.full_like(x, float(node.value))
    if isinstance(node, Var):
        return x.copy()
    if isinstance(node, Abs):
        return np.abs(evaluate(node.child, x))
    if isinstance(node, Exp):
        with np.errstate(over="ignore"):
            return np.exp(evaluate(node.child, x))
    if isinstance(node, Sum):
        out = np.zeros_like(x)
        for sign, child in node.terms:
            out = out + sign * evaluate(child, x)
        return out
    if isinstance(node, Product):
        out = np.ones_like(x)
        with np.errstate(over="ignore", invalid="ignore"):
            for child in node.factors:
                out = out * evaluate(child, x)
        return out
    if isinstance(node, Power):
        with np.errstate(over="ignore"):
            return evaluate(node.base, x) ** node.exponent
    raise TypeError(f"not a weight expression node: {node!r}")


def log_evaluate(node: Node, x):
    """Signed log-domain evaluation: returns ``(sign, log|value|)`` arrays.

    Exponentials never overflow here; sums use a signed log-sum-exp.
    """
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _log_eval(node, x)


def _log_eval(node, x):
    if isinstance(node, Const):
        v = float(node.value)
        return np.full_like(x, np.sign(v)), np.full_like(x, math.log(abs(v)) if v else -np.inf)
    if isinstance(node, Var):
        return np.sign(x), np.log(np.abs(x))
    if isinstance(node, Abs):
        s, l = _log_eval(node.child, x)
        return np.abs(s), l
    if isinstance(node, Exp):
        s, l = _log_eval(node.child, x)
        val = s * np.exp(l)
        val = np.where(s == 0, 0.0, val)
        return np.ones_like(x), val
    if isinstance(node, Sum):
        parts = [(sign * s, l) for sign, (s, l) in ((sg, _log_eval(c, x)) for sg, c in node.terms)]
        logs = np.stack([l for _, l in parts])
        m = logs.max(axis=0)
        m_safe = np.where(np.isfinite(m), m, 0.0)
        total = np.zeros_like(x)
        for s, l in parts:
            total = total + s * np.exp(l - m_safe)
        return np.sign(total), m_safe + np.log(np.abs(total))
    if isinstance(node, Product):
        s = np.ones_like(x)
        l = np.zeros_like(x)
        for child in node.factors:
            cs, cl = _log_eval(child, x)
            s = s * cs
            l = l + cl
        l = np.where(s == 0, -np.inf, l)
        return s, l
    if isinstance(node, Power):
        if node.exponent == 0:
            return np.ones_like(x), np.zeros_like(x)
        s, l = _log_eval(node.base, x)
        return s ** node.exponent, node.exponent * l
    raise TypeError(f"not a weight expression node: {node!r}")


# --------------------------------------------------------------------------
# exact expansion: sums of c * x^i * |x|^j * exp(k*|x|), j in {0, 1}


class _NotRepresentable(Exception):
    pass


def _norm_key(i, j, k):
    # |x|^2 == x^2
    return i + 2 * (j // 2), j % 2, k


def _ring_mul(p, q, max_degree):
    out = {}
    for (i1, j1, k1), c1 in p.items():
        for (i2, j2, k2), c2 in q.items():
            key = _norm_key(i1 + i2, j1 + j2, k1 + k2)
            if key[0] + key[1] > max_degree:
                raise DegreeOverflowError(f"degree exceeds {max_degree}")
            out[key] = out.get(key, 0) + c1 * c2
    return {k: v for k, v in out.items() if v != 0}


def _ring_add(p, q, sign=1):
    out = dict(p)
    for key, c in q.items():
        out[key] = out.get(key, 0) + sign * c
    return {k: v for k, v in out.items() if v != 0}


def _expand(node, max_degree):
    if isinstance(node, Const):
        v = Fraction(node.value)
        return {(0, 0, Fraction(0)): v} if v else {}
    if isinstance(node, Var):
        return {(1, 0, Fraction(0)): Fraction(1)}
    if isinstance(node, Sum):
        out = {}
        for sign, child in node.terms:
            out = _ring_add(out, _expand(child, max_degree), sign)
        return out
    if isinstance(node, Product):
        out = {(0, 0, Fraction(0)): Fraction(1)}
        for child in node.factors:
            out = _ring_mul(out, _expand(child, max_degree), max_degree)
        return out
    if isinstance(node, Power):
        base = _expand(node.base, max_degree)
        out = {(0, 0, Fraction(0)): Fraction(1)}
        for _ in range(node.exponent):
            out = _ring_mul(out, base, max_degree)
        return out
    if isinstance(node, Abs):
        inner = _expand(node.child, max_degree)
        if not inner:
            return {}
        if len(inner) != 1:
            raise _NotRepresentable("abs of a multi-term expression")
        (i, j, k), c = next(iter(inner.items()))
        # |c x^i |x|^j e^{k|x|}| = |c| |x|^{i+j} e^{k|x|}
        return {_norm_key(0, i + j, k): abs(c)}
    if isinstance(node, Exp):
        inner = _expand(node.child, max_degree)
        shift = 0
        rate = Fraction(0)
        for (i, j, k), c in inner.items():
            if (i, j, k) == (0, 0, 0):
                shift = c
            elif (i, j, k) == (0, 1, 0):
                rate = Fraction(c) if not isinstance(c, float) else c
            else:
                raise _NotRepresentable("exp argument not affine in |x|")
        coef = Fraction(1) if shift == 0 else math.exp(float(shift))
        return {(0, 0, rate): coef}
    raise TypeError(f"not a weight expression node: {node!r}")


def expand(node: Node, max_degree: int = DEFAULT_MAX_DEGREE) -> Optional[dict]:
    """Exact expansion into ``{(i, j, k): coef}`` or ``None`` if outside the catalog."""
    try:
        return _expand(node, max_degree)
    except _NotRepresentable:
        return None


def polynomial_coefficients(node: Node, max_degree: int = DEFAULT_MAX_DEGREE):
    """Rational coefficients (low to high) if ``node`` is a polynomial in x, else None."""
    ring = expand(node, max_degree)
    if ring is None:
        return None
    if any(j or k for (_, j, k) in ring):
        return None
    if any(isinstance(c, float) for c in ring.values()):
        return None
    deg = max((i for (i, _, _) in ring), default=-1)
    coeffs = [Fraction(0)] * (deg + 1)
    for (i, _, _), c in ring.items():
        coeffs[i] = c
    return polyalg.trim(coeffs)


# --------------------------------------------------------------------------
# polynomial classification


@dataclass
class PolyClassification:
    is_polynomial: bool
    degree: int = 0
    is_weight: bool = False
    leading: float = 0.0
    factors: list = field(default_factory=list)  # (a_k, b_k, m_k)
    reason: Optional[str] = None  # odd degree | real root | negative values | not polynomial
    coefficients: list = field(default_factory=list)

    @property
    def in_Ws(self) -> bool:
        # even positive polynomials have translation ratios tending to 1
        return self.is_weight

    def reconstruct(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.full_like(x, self.leading)
        for a, b, m in self.factors:
            out = out * (x * x + a * x + b) ** m
        return out

    def to_json(self):
        return {
            "is_polynomial": self.is_polynomial,
            "degree": self.degree,
            "is_weight": self.is_weight,
            "in_Ws": self.in_Ws,
            "leading": self.leading,
            "factors": [{"a": a, "b": b, "m": m} for a, b, m in self.factors],
            "reason": self.reason,
        }


def _quadratic_factors(q):
    """Split a real-rootless square-free polynomial into monic quadratics (a, b)."""
    import mpmath

    with mpmath.workdps(60):
        coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(q)]
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=200)
        upper = sorted((r for r in roots if mpmath.im(r) > 0), key=lambda r: (float(mpmath.re(r)), float(mpmath.im(r))))
        return [(float(-2 * mpmath.re(r)), float(mpmath.re(r) ** 2 + mpmath.im(r) ** 2)) for r in upper]


def classify_polynomial(expr: Node, max_degree: int = DEFAULT_MAX_DEGREE) -> PolyClassification:
    """Decide whether ``expr`` is a polynomial weight and factor it.

    Positivity is certified by Sturm sign changes on the square-free part,
    never by sampling.
    """
    ring = expand(expr, max_degree)  # DegreeOverflowError propagates
    coeffs = polynomial_coefficients(expr, max_degree) if ring is not None else None
    if coeffs is None:
        return PolyClassification(is_polynomial=False, reason="not polynomial")
    deg = polyalg.degree(coeffs)
    if deg < 0:
        return PolyClassification(True, degree=0, reason="real root", coefficients=coeffs)
    lead = coeffs[-1]
    base = dict(is_polynomial=True, degree=deg, leading=float(lead), coefficients=coeffs)
    if deg % 2:
        return PolyClassification(**base, reason="odd degree")
    if polyalg.count_real_roots(coeffs) > 0:
        return PolyClassification(**base, reason="real root")
    if lead < 0:
        return PolyClassification(**base, reason="negative values")
    factors = []
    for q, m in polyalg.square_free_decomposition(coeffs):
        for a, b in _quadratic_factors(q):
            factors.append((a, b, m))
    return PolyClassification(**base, is_weight=True, factors=factors)


# --------------------------------------------------------------------------
# closed-form cumulative integrals over [-T, T]


@dataclass
class CumulativeForm:
    """``T -> mu([-T, T])`` in closed form, with a log-domain twin.

    ``kind`` is ``"closed-form"`` or ``"unavailable"``; in the latter case
    callers integrate numerically.
    """

    kind: str
    value: Optional[Callable[[float], float]] = None
    log_value: Optional[Callable[[float], float]] = None
    terms: tuple = ()

    @property
    def available(self):
        return self.kind == "closed-form"


def _signed_logsumexp(pairs):
    pairs = [(s, l) for s, l in pairs if s != 0 and l != -math.inf]
    if not pairs:
        return 0, -math.inf
    m = max(l for _, l in pairs)
    tot = math.fsum(s * math.exp(l - m) for s, l in pairs)
    if tot == 0:
        return 0, -math.inf
    return (1 if tot > 0 else -1), m + math.log(abs(tot))


def exact_cumulative(expr: Node, max_degree: int = DEFAULT_MAX_DEGREE) -> CumulativeForm:
    """Closed form of the integral over [-T, T] for the catalog of shapes.

    Covered: polynomials in x and |x|, plus constant multiples of
    ``exp(k*|x| + b)``. Anything else is reported as unavailable.
    """
    try:
        ring = expand(expr, max_degree)
    except DegreeOverflowError:
        ring = None
    if ring is None:
        return CumulativeForm("unavailable")
    terms = []
    for (i, j, k), c in sorted(ring.items(), key=lambda kv: (kv[0][2], kv[0][0], kv[0][1])):
        if i % 2:
            continue  # odd in x: integrates to zero
        if k != 0 and i + j > 0:
            return CumulativeForm("unavailable")
        terms.append((i + j, float(k), float(c)))

    def value(T):
        total = []
        for n, k, c in terms:
            if k == 0:
                total.append(2.0 * c * T ** (n + 1) / (n + 1))
            else:
                total.append(2.0 * c * math.expm1(k * T) / k)
        return math.fsum(total)

    def log_value(T):
        pairs = []
        for n, k, c in terms:
            s = 1 if c > 0 else -1
            if k == 0:
                pairs.append((s, math.log(2.0 * abs(c) / (n + 1)) + (n + 1) * math.log(T)))
            elif k > 0:
                pairs.append((s, math.log(2.0 * abs(c) / k) + k * T + math.log(-math.expm1(-k * T))))
            else:
                pairs.append((s, math.log(2.0 * abs(c) / -k) + math.log(-math.expm1(k * T))))
        sign, lv = _signed_logsumexp(pairs)
        if sign <= 0:
            return math.nan
        return lv

    return CumulativeForm("closed-form", value, log_value, tuple(terms))
