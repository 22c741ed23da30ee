"""Trigonometric polynomials, black-box function handles and Bohr analysis.

A :class:`TrigPoly` is a finite sum ``sum_k a_k exp(i lambda_k t)`` with
vector coefficients; everything about it is exact. A :class:`FunctionHandle`
is any bounded vectorized evaluator, analysed numerically through long-time
averages ``(1 / 2T) * int_{-T}^{T} f(t) exp(-i lambda t) dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .limits import CONVERGES, CONVERGES_TO_ZERO, LimitVerdict, Schedule, decide_schedule, jsonable
from .quadrature import nested_integrals

FREQ_TOL = 1e-9
DEFAULT_MAX_FREQ = 4.0


class DimensionError(ValueError):
    pass


class LimitNotReached(RuntimeError):
    """A limit could not be established along the schedule."""

    def __init__(self, msg, verdict: LimitVerdict):
        super().__init__(f"{msg}: verdict {verdict.kind}")
        self.verdict = verdict


def _vector(c, dim=None):
    v = np.atleast_1d(np.asarray(c, dtype=np.complex128)).ravel()
    if dim is not None and v.size != dim:
        raise DimensionError(f"coefficient has dimension {v.size}, expected {dim}")
    return v


class TrigPoly:
    """``sum_k a_k exp(i lambda_k t)`` with coefficients in C^d.

    Frequencies closer than ``FREQ_TOL`` are merged by adding their
    coefficients; exactly-zero coefficients are dropped. Terms are kept
    sorted by frequency.
    """

    __slots__ = ("dim", "freqs", "coefs")

    def __init__(self, terms=(), dim: Optional[int] = None):
        items = [(float(lam), c) for c, lam in terms]
        if dim is None:
            dim = _vector(items[0][1]).size if items else 1
        self.dim = int(dim)
        items.sort(key=lambda it: it[0])
        freqs, coefs = [], []
        for lam, c in items:
            v = _vector(c, self.dim)
            if freqs and abs(lam - freqs[-1]) <= FREQ_TOL:
                coefs[-1] = coefs[-1] + v
            else:
                freqs.append(lam)
                coefs.append(v)
        keep = [i for i, v in enumerate(coefs) if np.any(v != 0)]
        self.freqs = np.array([freqs[i] for i in keep], dtype=np.float64)
        self.coefs = (np.array([coefs[i] for i in keep], dtype=np.complex128)
                      if keep else np.zeros((0, self.dim), np.complex128))

    # construction helpers
    @classmethod
    def constant(cls, c, dim=None):
        v = _vector(c, dim)
        return cls([(v, 0.0)], v.size)

    @classmethod
    def zero(cls, dim=1):
        return cls([], dim)

    @classmethod
    def cos(cls, lam, amp=1.0):
        return cls([(amp / 2, lam), (amp / 2, -lam)], 1)

    @classmethod
    def sin(cls, lam, amp=1.0):
        return cls([(amp / 2j, lam), (-amp / 2j, -lam)], 1)

    @property
    def terms(self):
        return [(self.coefs[k].copy(), float(self.freqs[k])) for k in range(self.freqs.size)]

    def __len__(self):
        return int(self.freqs.size)

    def __repr__(self):
        return f"TrigPoly(dim={self.dim}, terms={len(self)})"

    def __eq__(self, other):
        return (isinstance(other, TrigPoly) and self.dim == other.dim
                and self.freqs.shape == other.freqs.shape
                and np.array_equal(self.freqs, other.freqs) and np.array_equal(self.coefs, other.coefs))

    def __call__(self, t):
        """Values at ``t``: shape (d,) for a scalar, (n, d) for an array."""
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
        out = kernels.trig_eval(tt, self.freqs, self.coefs) if len(self) else np.zeros((tt.size, self.dim), np.complex128)
        return out[0] if scalar else out

    eval = __call__

    @property
    def max_freq(self) -> float:
        return float(np.abs(self.freqs).max()) if len(self) else 0.0

    @property
    def sup_bound(self) -> float:
        """Sum of coefficient norms, an upper bound for the sup norm."""
        return float(np.linalg.norm(self.coefs, axis=1).sum()) if len(self) else 0.0

    def coefficient(self, lam: float) -> np.ndarray:
        if len(self):
            k = int(np.argmin(np.abs(self.freqs - lam)))
            if abs(self.freqs[k] - lam) <= FREQ_TOL:
                return self.coefs[k].copy()
        return np.zeros(self.dim, np.complex128)

    def translate(self, alpha: float) -> "TrigPoly":
        """``t -> p(t + alpha)``."""
        out = TrigPoly.zero(self.dim)
        out.freqs = self.freqs.copy()
        out.coefs = self.coefs * np.exp(1j * self.freqs * alpha)[:, None]
        return out

    def scale(self, c) -> "TrigPoly":
        return TrigPoly([(c * a, lam) for a, lam in self.terms], self.dim)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError(f"cannot add dimensions {self.dim} and {other.dim}")
        return TrigPoly(self.terms + other.terms, self.dim)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def map_coefficients(self, fn) -> "TrigPoly":
        """Multiply each coefficient by ``fn(lambda_k)``."""
        return TrigPoly([(a * fn(lam), lam) for a, lam in self.terms], self.dim)

    def to_json(self):
        return {
            "dim": self.dim,
            "terms": [{"re": [float(x) for x in a.real], "im": [float(x) for x in a.imag], "lambda": lam}
                      for a, lam in self.terms],
        }

    @classmethod
    def from_json(cls, obj) -> "TrigPoly":
        dim = int(obj["dim"])
        terms = []
        for t in obj["terms"]:
            re = np.asarray(t["re"], dtype=np.float64)
            im = np.asarray(t.get("im", np.zeros_like(re)), dtype=np.float64)
            terms.append((re + 1j * im, float(t["lambda"])))
        return cls(terms, dim)


def add(p: TrigPoly, q: TrigPoly) -> TrigPoly:
    return p + q


def scale(p: TrigPoly, c) -> TrigPoly:
    return p.scale(c)


def translate(p: TrigPoly, alpha: float) -> TrigPoly:
    return p.translate(alpha)


@dataclass
class FunctionHandle:
    """A vectorized evaluator ``t (n,) -> (n, d)`` with optional metadata.

    ``bound`` is a declared sup-norm bound; ``max_freq`` bounds the fastest
    oscillation and sets quadrature steps.
    """

    func: Callable
    dim: int = 1
    bound: Optional[float] = None
    max_freq: Optional[float] = None
    label: str = "f"

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
        y = np.asarray(self.func(tt))
        if y.ndim == 1:
            y = y[:, None]
        return y[0] if scalar else y

    @classmethod
    def from_trigpoly(cls, p: TrigPoly, label="trigpoly"):
        return cls(p.__call__, p.dim, p.sup_bound, p.max_freq, label)

    @classmethod
    def scalar(cls, fn, bound=None, max_freq=None, label="f"):
        """Wrap a real or complex scalar function of a numpy array."""
        return cls(lambda t: np.asarray(fn(t))[:, None], 1, bound, max_freq, label)

    def __add__(self, other: "FunctionHandle") -> "FunctionHandle":
        other = as_handle(other)
        if other.dim != self.dim:
            raise DimensionError(f"cannot add dimensions {self.dim} and {other.dim}")
        bound = None if self.bound is None or other.bound is None else self.bound + other.bound
        mf = [m for m in (self.max_freq, other.max_freq) if m is not None]
        return FunctionHandle(lambda t: self(t) + other(t), self.dim, bound,
                              max(mf) if mf else None, f"{self.label} + {other.label}")

    def shifted(self, s: float) -> "FunctionHandle":
        """``t -> f(t + s)``; the identical handle when ``s == 0``."""
        if s == 0:
            return self
        return FunctionHandle(lambda t: self(np.asarray(t) + s), self.dim, self.bound, self.max_freq,
                              f"{self.label}(t{s:+g})")

    def norm(self) -> "FunctionHandle":
        return FunctionHandle(lambda t: np.linalg.norm(self(t), axis=1), 1, self.bound, self.max_freq,
                              f"|{self.label}|")


def as_handle(f) -> FunctionHandle:
    if isinstance(f, FunctionHandle):
        return f
    if isinstance(f, TrigPoly):
        return FunctionHandle.from_trigpoly(f)
    raise TypeError(f"expected TrigPoly or FunctionHandle, got {type(f).__name__}")


@dataclass
class SpectrumSet:
    """Grid frequencies whose Bohr coefficient magnitude exceeds ``threshold``."""

    threshold: float
    entries: list = field(default_factory=list)  # (lambda, coefficient (d,), magnitude)
    evidence: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    @property
    def frequencies(self):
        return [lam for lam, _, _ in self.entries]

    def coefficient(self, lam):
        for l, a, _ in self.entries:
            if abs(l - lam) <= FREQ_TOL:
                return a
        return None

    def to_json(self):
        return {
            "threshold": self.threshold,
            "entries": [{"lambda": lam, "re": jsonable(a.real), "im": jsonable(a.imag), "magnitude": mag}
                        for lam, a, mag in self.entries],
            "evidence": jsonable(self.evidence),
        }


def bohr_mean_exact(p: TrigPoly) -> np.ndarray:
    return p.coefficient(0.0)


def oscillation_step(max_freq: Optional[float], lam: float = 0.0) -> float:
    """Largest panel width that resolves the fastest oscillation."""
    top = (DEFAULT_MAX_FREQ if max_freq is None else max_freq) + abs(lam)
    return 0.25 if top == 0 else min(0.25, math.pi / (4.0 * top))


@dataclass
class TransformCurve:
    T: np.ndarray
    values: np.ndarray  # (n, d) complex
    log_abs: np.ndarray
    verdict: LimitVerdict


def bohr_transform_curve(f, lam: float, schedule: Schedule = Schedule()) -> TransformCurve:
    """The finite-T averages ``(1/2T) int_{Q_T} f(t) exp(-i lam t) dt``."""
    h = as_handle(f)
    Ts = schedule.Ts

    def g(t):
        return h(t) * np.exp(-1j * lam * t)[:, None]

    nest = nested_integrals(g, lambda t: np.zeros_like(t), Ts, oscillation_step(h.max_freq, lam), schedule.quad_tol)
    logD = np.log(2.0 * Ts)
    vals = np.array([s.value(ld) for s, ld in zip(nest.totals, logD)])
    log_abs = np.array([s.log_abs() for s in nest.totals]) - logD
    verdict = decide_schedule(Ts, vals, log_abs, schedule)
    return TransformCurve(Ts, vals, log_abs, verdict)


def bohr_transform(f, lam: float, schedule: Schedule = Schedule(), numeric: bool = False) -> np.ndarray:
    """Bohr coefficient ``a(f, lam)``.

    Exact for a :class:`TrigPoly` unless ``numeric`` is set; otherwise the
    limit of the finite-T averages, raising :class:`LimitNotReached` when the
    curve does not settle.
    """
    if isinstance(f, TrigPoly) and not numeric:
        return f.coefficient(lam)
    curve = bohr_transform_curve(f, lam, schedule)
    v = curve.verdict
    if v.kind == CONVERGES_TO_ZERO:
        return np.zeros(curve.values.shape[1], np.complex128)
    if v.kind == CONVERGES:
        return np.asarray(v.limit, dtype=np.complex128)
    raise LimitNotReached(f"Bohr transform at lambda={lam:g}", v)


def bohr_spectrum_scan(f, lambda_grid, threshold: float, schedule: Schedule = Schedule(),
                       numeric: bool = False) -> SpectrumSet:
    """Grid points whose coefficient estimate exceeds ``threshold`` in norm.

    For handles, an unsettled curve contributes its final-T value and the
    verdict is recorded in ``evidence``.
    """
    out = SpectrumSet(float(threshold))
    kinds = {}
    for lam in lambda_grid:
        lam = float(lam)
        if isinstance(f, TrigPoly) and not numeric:
            a = f.coefficient(lam)
            kinds[lam] = "exact"
        else:
            curve = bohr_transform_curve(f, lam, schedule)
            v = curve.verdict
            kinds[lam] = v.kind
            if v.kind == CONVERGES_TO_ZERO:
                a = np.zeros(curve.values.shape[1], np.complex128)
            elif v.kind == CONVERGES:
                a = np.asarray(v.limit, dtype=np.complex128)
            else:
                a = curve.values[-1]
        mag = float(np.linalg.norm(a))
        if mag > threshold:
            out.entries.append((lam, a, mag))
    out.evidence["verdicts"] = kinds
    return out


def sup_error(f, p: TrigPoly, grid) -> float:
    """``max_t ||f(t) - p(t)||`` over ``grid``."""
    g = np.asarray(grid, dtype=np.float64)
    return float(np.linalg.norm(as_handle(f)(g) - p(g), axis=1).max())
