"""Convolution with integrable kernels, translation and uniqueness checks,
and the Lipschitz composition bound.

Kernels declare an integrable envelope so truncation radii are certified
rather than guessed from samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .apfun import FunctionHandle, SpectrumSet, TrigPoly, as_handle, bohr_spectrum_scan
from .ergodic import NORM, ErgodicCurve, ergodic_curve, membership_pap0, ratio_curve
from .limits import (
    CONVERGES,
    CONVERGES_TO_ZERO,
    DIVERGES,
    UNDECIDED,
    LimitVerdict,
    Schedule,
    decide_schedule,
    jsonable,
)
from .quadrature import adaptive_simpson
from .weights import ProbeConfig, Weight, check_WInv, log_mu_QT_many

MAX_RADIUS = 1e6
SMALL_T = tuple(2.0 ** -k for k in range(11))

BOUNDED = "bounded"
UNBOUNDED = "unbounded"
FINITE = "finite"
INFINITE = "infinite"
POSITIVE = "positive"
ZERO = "zero"


class ToleranceUnreachable(ValueError):
    pass


class LipschitzViolation(ValueError):
    """A probe pair whose difference quotient exceeds the declared constant."""

    def __init__(self, t, u, v, quotient, L):
        super().__init__(f"Lipschitz quotient {quotient:.6g} exceeds L={L:g} at t={t:.6g}")
        self.t, self.u, self.v, self.quotient = t, np.asarray(u), np.asarray(v), quotient


# --------------------------------------------------------------------------
# kernels


@dataclass
class Kernel:
    """An integrable kernel with a declared envelope.

    ``envelope`` is ``"exp"`` (``A e^{-rate |s|}``), ``"power"``
    (``A (1 + |s|)^{-rate}``, rate > 1) or ``"compact"`` (support in
    ``[-rate, rate]``). ``fourier(lam)`` returns ``int g(s) e^{-i lam s} ds``
    when known; ``breakpoints`` lists kinks and jumps.
    """

    func: Callable
    envelope: str
    amplitude: float
    rate: float
    mass: float
    label: str = "g"
    fourier: Optional[Callable] = None
    breakpoints: tuple = ()
    scale: float = 1.0  # feature width, bounds quadrature panels

    def __post_init__(self):
        if self.envelope not in ("exp", "power", "compact"):
            raise ValueError(f"unknown envelope {self.envelope!r}")
        if self.envelope == "power" and self.rate <= 1:
            raise ValueError("power envelope needs rate > 1")
        if self.rate <= 0 or self.amplitude < 0:
            raise ValueError("envelope parameters must be positive")

    def __call__(self, s):
        return self.func(np.asarray(s, dtype=np.float64))

    def bound(self, s):
        s = np.abs(np.asarray(s, dtype=np.float64))
        if self.envelope == "exp":
            return self.amplitude * np.exp(-self.rate * s)
        if self.envelope == "power":
            return self.amplitude * (1.0 + s) ** (-self.rate)
        return np.where(s <= self.rate, self.amplitude, 0.0)

    def tail(self, R: float) -> float:
        """Envelope mass outside [-R, R]."""
        if self.envelope == "exp":
            return 2.0 * self.amplitude * math.exp(-self.rate * R) / self.rate
        if self.envelope == "power":
            return 2.0 * self.amplitude * (1.0 + R) ** (1.0 - self.rate) / (self.rate - 1.0)
        return 0.0 if R >= self.rate else 2.0 * self.amplitude * (self.rate - R)

    def radius(self, eps: float) -> float:
        """Smallest R (closed form) with ``tail(R) <= eps``."""
        if eps <= 0:
            raise ToleranceUnreachable("tolerance must be positive")
        if self.envelope == "exp":
            R = max(0.0, math.log(2.0 * self.amplitude / (self.rate * eps)) / self.rate)
        elif self.envelope == "power":
            log_r1 = math.log(2.0 * self.amplitude / ((self.rate - 1.0) * eps)) / (self.rate - 1.0)
            R = max(0.0, math.exp(log_r1) - 1.0) if log_r1 < math.log(MAX_RADIUS + 1.0) else math.inf
        else:
            R = self.rate
        if R > MAX_RADIUS:
            raise ToleranceUnreachable(f"truncation radius {R:.3g} exceeds {MAX_RADIUS:g}")
        return R

    def to_json(self):
        return {"label": self.label, "envelope": self.envelope, "amplitude": self.amplitude,
                "rate": self.rate, "mass": self.mass}


def gauss(sigma: float, mass: float = 1.0) -> Kernel:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    c = mass / (sigma * math.sqrt(2.0 * math.pi))
    # exp(-s^2 / 2 sigma^2) <= exp(1/2 - |s| / sigma)
    return Kernel(lambda s: c * np.exp(-0.5 * (s / sigma) ** 2), "exp", c * math.exp(0.5), 1.0 / sigma, mass,
                  f"gauss({sigma:g})", lambda lam: mass * np.exp(-0.5 * (sigma * lam) ** 2), (), sigma)


def laplace(a: float, mass: float = 1.0) -> Kernel:
    if a <= 0:
        raise ValueError("a must be positive")
    c = mass * a / 2.0
    return Kernel(lambda s: c * np.exp(-a * np.abs(s)), "exp", c, a, mass, f"laplace({a:g})",
                  lambda lam: mass * a * a / (a * a + np.asarray(lam) ** 2), (0.0,), 1.0 / a)


def box(R: float, mass: float = 1.0) -> Kernel:
    if R <= 0:
        raise ValueError("R must be positive")
    c = mass / (2.0 * R)
    return Kernel(lambda s: np.where(np.abs(s) <= R, c, 0.0), "compact", c, R, mass, f"box({R:g})",
                  lambda lam: mass * np.sinc(np.asarray(lam) * R / math.pi), (-R, R), R)


KERNELS = {"gauss": gauss, "laplace": laplace, "box": box}


def kernel_from_text(text: str, mass: float = 1.0) -> Kernel:
    """``gauss(sigma)``, ``laplace(a)`` or ``box(R)``."""
    import re

    m = re.fullmatch(r"\s*(\w+)\s*\(\s*([0-9.eE+-]+)\s*\)\s*", text)
    if not m or m.group(1) not in KERNELS:
        raise ValueError(f"unknown kernel {text!r}; expected gauss(sigma), laplace(a) or box(R)")
    return KERNELS[m.group(1)](float(m.group(2)), mass)


# --------------------------------------------------------------------------
# convolution


def _segments(g: Kernel, R: float):
    cuts = sorted({-R, R, *[b for b in g.breakpoints if -R < b < R]})
    return list(zip(cuts[:-1], cuts[1:]))


def _bound_of(h: FunctionHandle) -> float:
    if h.bound is None:
        raise ValueError(f"function {h.label!r} needs a declared sup bound for certified truncation")
    return float(h.bound)


def convolve(f, g: Kernel, t: float, tol: float = 1e-8) -> np.ndarray:
    """``int f(t - s) g(s) ds`` to absolute accuracy ``tol``.

    Truncated at R with ``tail(R) * sup|f| <= tol / 2``; the rest of the
    budget goes to adaptive quadrature on [-R, R] split at the kernel's
    breakpoints.
    """
    h = as_handle(f)
    B = _bound_of(h)
    if B == 0:
        return np.zeros(h.dim, np.complex128)
    R = g.radius(tol / (2.0 * B))
    scale = B * g.mass
    step = min(g.scale / 2.0, math.pi / (4.0 * h.max_freq) if h.max_freq else g.scale / 2.0, R)
    total = 0.0
    for a, b in _segments(g, R):
        v, _, _ = adaptive_simpson(lambda s: h(t - s) * g(s)[:, None], a, b, step,
                                   tol / (2.0 * scale), abs_floor=scale)
        total = total + v
    return np.asarray(total)


class ConvolutionRule:
    """Fixed composite Gauss-Legendre rule for ``(f * g)(t)`` at many t.

    Panels are doubled until two consecutive rules agree within ``tol`` on
    calibration points; the result is a smooth function of t, which keeps
    outer adaptive quadrature efficient.
    """

    NODES = 8

    def __init__(self, f, g: Kernel, tol: float = 1e-8, calibration=None, max_panels: int = 1 << 16):
        self.h = as_handle(f)
        self.g = g
        B = _bound_of(self.h)
        self.R = g.radius(tol / (2.0 * B)) if B > 0 else 0.0
        x, w = np.polynomial.legendre.leggauss(self.NODES)
        self._x, self._w = x, w
        cal = np.linspace(-50.0, 50.0, 41) if calibration is None else np.asarray(calibration, dtype=np.float64)
        step = min(g.scale, math.pi / (2.0 * self.h.max_freq) if self.h.max_freq else g.scale)
        per_unit = max(1.0 / step, 1e-9)
        segs = _segments(g, self.R) if self.R > 0 else []
        n = [max(1, int(math.ceil((b - a) * per_unit / 4))) for a, b in segs]
        self._build(segs, n)
        prev = self.evaluate(cal)
        while True:
            n = [2 * k for k in n]
            if sum(n) > max_panels:
                raise ToleranceUnreachable("convolution rule did not settle")
            self._build(segs, n)
            cur = self.evaluate(cal)
            if np.max(np.abs(cur - prev)) <= tol / 2.0:
                break
            prev = cur
        self.panels = sum(n)

    def _build(self, segs, counts):
        nodes, weights = [], []
        for (a, b), k in zip(segs, counts):
            edges = np.linspace(a, b, k + 1)
            mid = 0.5 * (edges[:-1] + edges[1:])
            half = 0.5 * np.diff(edges)
            nodes.append((mid[:, None] + half[:, None] * self._x).ravel())
            weights.append((half[:, None] * self._w).ravel())
        self.s = np.concatenate(nodes) if nodes else np.zeros(0)
        self.ws = np.concatenate(weights) * self.g(self.s) if nodes else np.zeros(0)

    def evaluate(self, t, chunk: int = 2048):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        out = np.zeros((t.size, self.h.dim), np.complex128)
        if self.s.size == 0:
            return out
        for i in range(0, t.size, chunk):
            tt = t[i:i + chunk]
            pts = (tt[:, None] - self.s[None, :]).ravel()
            vals = self.h(pts).reshape(tt.size, self.s.size, self.h.dim)
            out[i:i + chunk] = np.einsum("tsd,s->td", vals, self.ws)
        return out

    def handle(self, label=None) -> FunctionHandle:
        B = self.h.bound * self.g.mass if self.h.bound is not None else None
        return FunctionHandle(self.evaluate, self.h.dim, B, self.h.max_freq,
                              label or f"({self.h.label})*{self.g.label}")


def convolve_grid(f, g: Kernel, ts, tol: float = 1e-8) -> np.ndarray:
    """``(f * g)(t)`` at every t in ``ts``; rows of shape (d,)."""
    ts = np.asarray(ts, dtype=np.float64)
    return ConvolutionRule(f, g, tol, calibration=ts[:: max(1, ts.size // 41)]).evaluate(ts)


def convolve_trigpoly(p: TrigPoly, g: Kernel) -> TrigPoly:
    """Exact ``p * g``: each coefficient times the kernel's Fourier value at its frequency."""
    if g.fourier is None:
        raise ValueError(f"kernel {g.label} has no closed-form Fourier transform")
    return p.map_coefficients(lambda lam: complex(g.fourier(lam)))


# --------------------------------------------------------------------------
# ratio conditions


@dataclass
class RatioCheck:
    """Outcome of a condition on ratios of cumulative weights."""

    name: str
    kind: str
    estimate: Optional[float] = None
    verdicts: dict = field(default_factory=dict)
    limits: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)
    curves: list = field(default_factory=list)

    @property
    def passed(self):
        return self.kind in (BOUNDED, FINITE, POSITIVE)

    def to_json(self):
        return {"name": self.name, "kind": self.kind, "estimate": jsonable(self.estimate),
                "verdicts": jsonable(self.verdicts), "limits": jsonable(self.limits),
                "evidence": jsonable(self.evidence)}


def _small_T_log_ratio(mu, nu, kappa):
    Ts = np.array(SMALL_T)
    k = 1.0 if kappa is None else kappa
    return Ts, log_mu_QT_many(nu, Ts) - k * log_mu_QT_many(mu, Ts)


def ratio_sup_bounded(mu: Weight, nu: Weight, schedule: Schedule = Schedule()) -> RatioCheck:
    """Whether ``sup_T nu(Q_T) / mu(Q_T)`` is finite (schedule plus small-T probes)."""
    curve = ratio_curve(mu, nu, schedule)
    Ts_small, lr_small = _small_T_log_ratio(mu, nu, None)
    logs = np.concatenate([lr_small, curve.log_abs])
    probes = np.concatenate([Ts_small, curve.T])
    k = int(np.argmax(logs))
    sup = math.exp(logs[k]) if logs[k] < 709 else math.inf
    v = curve.verdict
    kind = BOUNDED if v.kind in (CONVERGES, CONVERGES_TO_ZERO) else UNBOUNDED if v.kind == DIVERGES else UNDECIDED
    return RatioCheck("ratio-sup", kind, sup, {"tail": v.kind}, evidence={"argmax_T": float(probes[k])},
                      curves=[curve])


def _shift_ratio(mu: Weight, taus, schedule: Schedule, kappa):
    Ts = schedule.Ts
    k = 1.0 if kappa is None else float(kappa)
    name = "shift-ratio" if kappa is None else "shift-ratio-kappa"
    out = RatioCheck(name, UNDECIDED)
    parts = []
    for tau in taus:
        a = abs(float(tau))
        lr = k * log_mu_QT_many(mu, Ts + a) - log_mu_QT_many(mu, Ts)
        with np.errstate(over="ignore"):
            vals = np.exp(np.minimum(lr, 709.0))
        v = decide_schedule(Ts, vals, lr, schedule, zero=True, extrapolate=True)
        out.verdicts[float(tau)] = v.kind
        out.limits[float(tau)] = 0.0 if v.kind == CONVERGES_TO_ZERO else (
            float(v.limit[0]) if v.kind == CONVERGES else (math.inf if v.kind == DIVERGES else None))
        parts.append(v.kind)
    if any(p == DIVERGES for p in parts):
        out.kind = INFINITE
    elif all(p in (CONVERGES, CONVERGES_TO_ZERO) for p in parts):
        out.kind = FINITE
    return out


def shift_ratio_limits(mu: Weight, taus, schedule: Schedule = Schedule()) -> RatioCheck:
    """Per-tau limits of ``mu(Q_{T+|tau|}) / mu(Q_T)``."""
    return _shift_ratio(mu, taus, schedule, None)


def shift_ratio_limits_kappa(mu: Weight, taus, kappa: float, schedule: Schedule = Schedule()) -> RatioCheck:
    """Per-tau limits of ``mu(Q_{T+|tau|})**kappa / mu(Q_T)``."""
    if not (0.0 < kappa < 1.0):
        raise ValueError("kappa must lie in (0, 1)")
    return _shift_ratio(mu, taus, schedule, kappa)


@dataclass
class UniquenessCheck:
    """Infimum of ``nu(Q_T) / mu(Q_T)**kappa`` over the schedule and small-T probes."""

    estimate: float
    verdict: str
    kappa: Optional[float]
    argmin_T: float
    tail_kind: str

    @property
    def passed(self):
        return self.verdict == POSITIVE

    def to_json(self):
        return {"estimate": jsonable(self.estimate), "verdict": self.verdict, "kappa": self.kappa,
                "argmin_T": self.argmin_T, "tail": self.tail_kind}


def uniqueness_precondition(mu: Weight, nu: Weight, schedule: Schedule = Schedule(),
                            kappa: Optional[float] = None) -> UniquenessCheck:
    """Positive infimum of the (possibly kappa-powered) cumulative ratio.

    The infimum is taken over the finite probe set only; for kappa < 1 the
    ratio tends to 0 as T -> 0+, which the probes do not reach.
    """
    curve = ratio_curve(mu, nu, schedule, kappa)
    Ts_small, lr_small = _small_T_log_ratio(mu, nu, kappa)
    logs = np.concatenate([lr_small, curve.log_abs])
    probes = np.concatenate([Ts_small, curve.T])
    k = int(np.argmin(logs))
    est = math.exp(logs[k]) if logs[k] > -745 else 0.0
    tail = curve.verdict.kind
    if tail == CONVERGES_TO_ZERO or est <= schedule.zero_threshold:
        verdict = ZERO
    elif tail in (CONVERGES, DIVERGES):
        verdict = POSITIVE
    else:
        verdict = UNDECIDED
    return UniquenessCheck(est, verdict, kappa, float(probes[k]), tail)


# --------------------------------------------------------------------------
# memberships built on convolution and translation


def _decays_like_inverse_abs(h: FunctionHandle) -> bool:
    """Whether |f| decays no faster than 1/|t| along far probes."""
    t = np.array([1e2, 1e3, 1e4])
    y = np.linalg.norm(h(np.concatenate([t, -t])), axis=1)
    y = np.maximum(y[:3], y[3:])
    if np.any(y == 0):
        return False
    slope = np.polyfit(np.log(t), np.log(y), 1)[0]
    return slope > -1.5


def conv_membership(f, g: Kernel, mu: Weight, nu: Weight, schedule: Schedule = Schedule(),
                    tol: float = 1e-6, check_hypotheses: bool = True) -> LimitVerdict:
    """Membership of ``f * g`` in the doubly-weighted ergodic space.

    The ratio conditions on ``mu`` and ``nu`` are checked first and recorded
    in the verdict's evidence. Inputs decaying like ``1/|t|`` get the
    relaxed decay exponent 0.5 (their curves decay like ``log T / T``).
    """
    h = as_handle(f)
    hyp = {}
    if check_hypotheses:
        hyp["ratio_sup"] = ratio_sup_bounded(mu, nu, schedule).kind
        hyp["nu_WInv"] = check_WInv(nu, cfg=ProbeConfig(schedule=schedule)).verdict
        hyp["shift_ratio"] = shift_ratio_limits(mu, (1.0,), schedule).kind
    min_decay = 0.5 if _decays_like_inverse_abs(h) else 0.0
    rule = ConvolutionRule(h, g, tol)
    v = membership_pap0(rule.handle(), mu, nu, schedule, min_decay=min_decay)
    v.evidence = dict(v.evidence, hypotheses=hyp, min_decay=min_decay, panels=rule.panels)
    return v


def translation_invariance_check(phi, s: float, mu: Weight, nu: Weight,
                                 schedule: Schedule = Schedule()) -> LimitVerdict:
    """Membership of ``t -> phi(t + s)``, with the hypotheses recorded."""
    h = as_handle(phi)
    hyp = {
        "nu_WInv": check_WInv(nu, cfg=ProbeConfig(schedule=schedule)).verdict,
        "shift_ratio": shift_ratio_limits(mu, (abs(s),) if s else (1.0,), schedule).kind,
    }
    v = membership_pap0(h.shifted(s), mu, nu, schedule)
    v.evidence = dict(v.evidence, hypotheses=hyp, shift=s)
    return v


# --------------------------------------------------------------------------
# decomposition and composition


def _trig_truncation(p: TrigPoly, lam: float, T: float) -> float:
    """Exact ``|(1/2T) int_{Q_T} p(t) e^{-i lam t} dt - a(p, lam)|``."""
    err = np.zeros(p.dim, np.complex128)
    for a, mu in p.terms:
        x = (mu - lam) * T
        if abs(mu - lam) > 1e-9:
            err = err + a * math.sin(x) / x
    return float(np.linalg.norm(err))


def decomposition_recovery(f, lambda_grid, schedule: Schedule = Schedule(), p: Optional[TrigPoly] = None,
                           phi=None, threshold: float = 0.0) -> SpectrumSet:
    """Scan the Bohr coefficients of ``f = p + phi``.

    With ``p`` given, the evidence records the largest coefficient error and
    the exact finite-T error of ``p`` alone; with ``phi`` also given it adds
    ``(1/2T) int_{Q_T} |phi|``. Their sum ``error_bound`` bounds the error
    of a curve stopped at the last T.
    """
    h = as_handle(f)
    spec = bohr_spectrum_scan(h, lambda_grid, threshold, schedule, numeric=True)
    T = schedule.T_max
    if p is not None:
        errs = {}
        for lam in lambda_grid:
            got = spec.coefficient(float(lam))
            got = np.zeros(p.dim, np.complex128) if got is None else got
            errs[float(lam)] = float(np.linalg.norm(got - p.coefficient(float(lam))))
        spec.evidence["errors"] = errs
        spec.evidence["max_error"] = max(errs.values()) if errs else 0.0
        spec.evidence["trig_truncation"] = max((_trig_truncation(p, float(lam), T) for lam in lambda_grid),
                                               default=0.0)
    if phi is not None:
        one = Weight.parse("1")
        c = ergodic_curve(as_handle(phi), one, one, schedule, NORM)
        spec.evidence["phi_bound"] = c.final
    if p is not None:
        spec.evidence["error_bound"] = spec.evidence["trig_truncation"] + spec.evidence.get("phi_bound", 0.0)
    return spec


@dataclass
class TwoVarFunction:
    """``F(t, u)`` with declared Lipschitz constant in u and split ``F = G + Phi``.

    Evaluators take ``t`` of shape (n,) and ``u`` of shape (n, d) and return
    (n, d_out).
    """

    F: Callable
    L: float
    G: Optional[Callable] = None
    Phi: Optional[Callable] = None
    label: str = "F"


@dataclass
class CompositionResult:
    verdict: LimitVerdict
    remainder: ErgodicCurve
    h2_curve: ErgodicCurve
    phi_curve: ErgodicCurve
    lhs: float
    rhs: float
    lipschitz_max_quotient: float
    uniqueness: Optional[UniquenessCheck] = None

    @property
    def bound_ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs == 0 else math.inf)

    @property
    def member(self):
        return self.verdict.kind == CONVERGES_TO_ZERO

    def to_json(self):
        return {
            "verdict": self.verdict.to_json(),
            "remainder_final": jsonable(self.lhs),
            "bound": jsonable(self.rhs),
            "bound_ratio": jsonable(self.bound_ratio),
            "h2_final": jsonable(self.h2_curve.final),
            "phi_final": jsonable(self.phi_curve.final),
            "lipschitz_max_quotient": jsonable(self.lipschitz_max_quotient),
            "uniqueness": None if self.uniqueness is None else self.uniqueness.to_json(),
        }


def lipschitz_probe(F: TwoVarFunction, dim: int = 1, probes: int = 2000, seed: int = 0,
                    t_box: float = 50.0, u_box: float = 5.0, rtol: float = 1e-9) -> float:
    """Largest sampled quotient ``|F(t,u) - F(t,v)| / |u - v|``; raises on a violation."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(-t_box, t_box, probes)
    u = rng.uniform(-u_box, u_box, (probes, dim))
    v = rng.uniform(-u_box, u_box, (probes, dim))
    num = np.linalg.norm(np.atleast_2d(F.F(t, u) - F.F(t, v)).reshape(probes, -1), axis=1)
    den = np.linalg.norm(u - v, axis=1)
    q = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    k = int(np.argmax(q))
    if q[k] > F.L * (1.0 + rtol):
        raise LipschitzViolation(float(t[k]), u[k], v[k], float(q[k]), F.L)
    return float(q[k])


def composition_check(F: TwoVarFunction, h1: TrigPoly, h2, mu: Weight, nu: Weight,
                      schedule: Schedule = Schedule(), seed: int = 0, probes: int = 2000) -> CompositionResult:
    """Ergodic remainder of ``t -> F(t, h1 + h2)`` against the split part ``G(t, h1)``.

    The remainder ``F(t, h(t)) - G(t, h1(t))`` must vanish in mean; its
    final curve value is compared with ``L * R[h2] + R[Phi(., h1)] + spread_tol``.
    """
    if F.G is None or F.Phi is None:
        raise ValueError("composition check needs F in split form (G, Phi)")
    g2 = as_handle(h2)
    if g2.dim != h1.dim:
        raise ValueError("h1 and h2 must have the same dimension")
    qmax = lipschitz_probe(F, h1.dim, probes, seed)

    def h(t):
        return np.real(h1(t)) + np.real(g2(t))

    def rem(t):
        return np.atleast_2d(F.F(t, h(t)) - F.G(t, np.real(h1(t)))).reshape(t.size, -1)

    def phi(t):
        return np.atleast_2d(F.Phi(t, np.real(h1(t)))).reshape(t.size, -1)

    mf = max(h1.max_freq, g2.max_freq or 0.0)
    rem_h = FunctionHandle(rem, 1, None, mf, f"{F.label} remainder")
    phi_h = FunctionHandle(phi, 1, None, h1.max_freq, "Phi(t, h1)")
    rc = ergodic_curve(rem_h, mu, nu, schedule, NORM)
    hc = ergodic_curve(g2, mu, nu, schedule, NORM)
    pc = ergodic_curve(phi_h, mu, nu, schedule, NORM)
    lhs = rc.final
    rhs = F.L * hc.final + pc.final + schedule.spread_tol
    uq = uniqueness_precondition(mu, nu, schedule)
    return CompositionResult(rc.verdict, rc, hc, pc, lhs, rhs, qmax, uq)
