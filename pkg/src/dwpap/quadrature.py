"""Adaptive composite Simpson quadrature with log-scaled accumulation.

Integrals of ``g(t) * w(t)`` are carried as ``mantissa * exp(log_scale)``
so that exponential weights never overflow, however long the horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

MAX_LEVELS = 48
MAX_EVALS = 40_000_000


class QuadratureError(RuntimeError):
    """Refinement budget exhausted; ``achieved`` is the last error estimate."""

    def __init__(self, msg, achieved):
        super().__init__(f"{msg} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


@dataclass
class Scaled:
    """The number ``mant * exp(log_scale)``; ``mant`` is a 1-d array."""

    mant: np.ndarray
    log_scale: float

    @classmethod
    def zero(cls, d=1, dtype=np.float64):
        return cls(np.zeros(d, dtype=dtype), -math.inf)

    def __add__(self, other):
        if self.log_scale == -math.inf:
            return Scaled(other.mant.copy(), other.log_scale)
        if other.log_scale == -math.inf:
            return Scaled(self.mant.copy(), self.log_scale)
        s = max(self.log_scale, other.log_scale)
        m = self.mant * math.exp(self.log_scale - s) + other.mant * math.exp(other.log_scale - s)
        return Scaled(m, s)

    def log_abs(self):
        """log of the Euclidean norm of the represented vector."""
        n = float(np.linalg.norm(self.mant))
        if n == 0.0:
            return -math.inf
        return math.log(n) + self.log_scale

    def value(self, log_divisor=0.0):
        """Represented vector divided by ``exp(log_divisor)``; underflows to 0 gracefully."""
        if self.log_scale == -math.inf:
            return np.zeros_like(self.mant)
        e = self.log_scale - log_divisor
        if e > 700.0:
            return self.mant * np.inf
        return self.mant * math.exp(e)


def _as2d(y):
    y = np.asarray(y)
    return y[:, None] if y.ndim == 1 else y


def adaptive_simpson(func, a, b, h_max, tol, abs_floor=0.0, rel_floor=1e-13):
    """Integrate a vectorized ``func`` over [a, b].

    ``func`` maps an (n,) array to (n,) or (n, d). Panels start at width
    ``<= h_max``; each panel combines composite Simpson sums on 3, 5 and 9
    points by Richardson extrapolation and is bisected breadth-first until
    its error estimate is below ``tol * max(L1, abs_floor) * width / (b - a)``,
    where L1 is the level-0 estimate of the integral of ``|func|``.
    Children reuse all five of their parent's quarter-point samples.

    Returns ``(value, l1, err_estimate)`` with ``value`` of shape (d,).
    """
    if b <= a:
        y0 = _as2d(func(np.array([a])))
        return np.zeros(y0.shape[1], dtype=y0.dtype), 0.0, 0.0
    length = b - a
    n = max(1, int(math.ceil(length / h_max)))
    edges = np.linspace(a, b, n + 1)
    left, width = edges[:-1], np.diff(edges)
    inner = (left[:, None] + width[:, None] * np.array([0.25, 0.5, 0.75])).ravel()
    fe = _as2d(func(edges))
    fi = _as2d(func(inner)).reshape(n, 3, -1)
    d = fe.shape[1]
    dtype = np.result_type(fe.dtype, fi.dtype, np.float64)
    Q = np.empty((n, 5, d), dtype=dtype)  # samples at the quarter points
    Q[:, 0], Q[:, 1:4], Q[:, 4] = fe[:-1], fi, fe[1:]

    total = np.zeros(d, dtype=dtype)
    err_total = 0.0
    l1 = 0.0
    evals = fe.shape[0] + fi.shape[0] * 3
    eighths = np.array([0.125, 0.375, 0.625, 0.875])
    tiny = 64 * np.finfo(float).eps

    for level in range(MAX_LEVELS):
        pts = (left[:, None] + width[:, None] * eighths).ravel()
        fo = _as2d(func(pts)).reshape(left.size, 4, d)
        evals += pts.size
        F = np.empty((left.size, 9, d), dtype=np.result_type(dtype, fo.dtype))
        F[:, 0::2] = Q
        F[:, 1::2] = fo
        rich, err, mag = kernels.romberg_refine(F, width)
        if level == 0:
            l1 = float(mag.sum())
        scale = max(l1, abs_floor)
        ok = err <= tol * scale * width / length + 1e-300
        # roundoff floor: panel error at working precision, or panel too narrow to split
        ok |= err <= rel_floor * mag
        ok |= width <= tiny * np.maximum(np.abs(left), np.abs(left + width))
        if ok.any():
            total = total + rich[ok].sum(axis=0)
            err_total += float(err[ok].sum())
        bad = ~ok
        if not bad.any():
            return total, l1, err_total
        if evals > MAX_EVALS or level == MAX_LEVELS - 1:
            raise QuadratureError("adaptive Simpson did not converge", err_total + float(err[bad].sum()))
        Fb = F[bad]
        half = 0.5 * width[bad]
        left = np.concatenate([left[bad], left[bad] + half])
        width = np.concatenate([half, half])
        Q = np.concatenate([Fb[:, 0:5], Fb[:, 4:9]])
        dtype = Q.dtype
    raise QuadratureError("adaptive Simpson did not converge", err_total)  # pragma: no cover


def scaled_integral(g, log_w, a, b, h_max, tol):
    """Integral of ``g(t) * exp(log_w(t))`` over [a, b] as a :class:`Scaled`.

    ``g`` may be None (integrate the weight alone). The scale is fixed from
    a coarse probe of ``log_w`` before integration.
    """
    if b <= a:
        d = 1 if g is None else _as2d(g(np.array([a]))).shape[1]
        return Scaled.zero(d), 0.0
    n = max(2, int(math.ceil((b - a) / h_max)) + 1)
    probe = np.linspace(a, b, min(n, 4097))
    shift = float(np.max(log_w(probe)))
    if not math.isfinite(shift):
        if shift == -math.inf:
            d = 1 if g is None else _as2d(g(probe[:1])).shape[1]
            return Scaled.zero(d), 0.0
        raise QuadratureError("weight overflows even in log domain", math.inf)

    if g is None:
        def func(t):
            return np.exp(log_w(t) - shift)
    else:
        def func(t):
            return _as2d(g(t)) * np.exp(log_w(t) - shift)[:, None]

    # exp(log_w - shift) carries relative noise ~ eps * |log_w|
    rel_floor = 1e-13 + 8 * np.finfo(float).eps * abs(shift)
    val, l1, err = adaptive_simpson(func, a, b, h_max, tol, rel_floor=rel_floor)
    return Scaled(np.atleast_1d(val), shift), err


@dataclass
class CumulativeIntegrals:
    """Nested integrals over [-T_j, T_j], built shell by shell."""

    T: np.ndarray
    totals: list  # Scaled, one per T
    shells: list  # (left shell, right shell) Scaled pairs; first entry is the core


SHELL_PANELS = 256


def nested_integrals(g, log_w, Ts, h_max, tol, smooth=False):
    """Integrals of ``g * w`` over each Q_T for increasing ``Ts``.

    The core [-T_0, T_0] is split at 0 (kinks of |x|-type weights); each
    later interval adds the two shells [-T_{j+1}, -T_j] and [T_j, T_{j+1}].
    With ``smooth`` (no oscillation to resolve) a wide shell starts from
    ``SHELL_PANELS`` panels instead of panels of width ``h_max``.
    """
    Ts = np.asarray(Ts, dtype=np.float64)
    if np.any(np.diff(Ts) <= 0) or Ts[0] <= 0:
        raise ValueError("T grid must be positive and strictly increasing")
    left, _ = scaled_integral(g, log_w, -Ts[0], 0.0, h_max, tol)
    right, _ = scaled_integral(g, log_w, 0.0, Ts[0], h_max, tol)
    acc = left + right
    totals = [acc]
    shells = [(left, right)]
    for lo, hi in zip(Ts[:-1], Ts[1:]):
        h = max(h_max, (hi - lo) / SHELL_PANELS) if smooth else h_max
        sl, _ = scaled_integral(g, log_w, -hi, -lo, h, tol)
        sr, _ = scaled_integral(g, log_w, lo, hi, h, tol)
        acc = acc + sl + sr
        totals.append(acc)
        shells.append((sl, sr))
    return CumulativeIntegrals(Ts, totals, shells)
