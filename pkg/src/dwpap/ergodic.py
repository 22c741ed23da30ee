"""Weighted long-time averages and the limits built from them.

The basic object is the curve

    R(T) = (1 / D(T)) * int_{-T}^{T} g(t) nu(t) dt,   D(T) = mu(Q_T) or mu(Q_T)**kappa,

sampled on a geometric schedule, with ``g = |f|`` (norm mode) or ``g = f``
(raw mode). Numerators are accumulated shell by shell and divided in the
log domain, so exponential weights never overflow.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .apfun import FunctionHandle, TrigPoly, as_handle, bohr_mean_exact, oscillation_step
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
from .quadrature import nested_integrals
from .weights import Weight, log_mu_QT_many

NORM = "norm"
RAW = "raw"


@dataclass(frozen=True)
class KappaParam:
    value: float

    def __post_init__(self):
        if not (0.0 < self.value < 1.0):
            raise ValueError(f"kappa must lie in (0, 1), got {self.value}")


def _kappa(kappa) -> Optional[float]:
    if kappa is None:
        return None
    return kappa.value if isinstance(kappa, KappaParam) else KappaParam(float(kappa)).value


def curve_csv(T, R) -> str:
    """Rows ``T,R_re,R_im``; vector-valued curves get one column pair per coordinate."""
    R = np.asarray(R)
    if R.ndim == 1:
        R = R[:, None]
    d = R.shape[1]
    cols = ["R_re", "R_im"] if d == 1 else [f"{c}[{k}]" for k in range(d) for c in ("R_re", "R_im")]
    buf = io.StringIO()
    buf.write("T," + ",".join(cols) + "\n")
    for t, row in zip(T, R):
        vals = []
        for x in row:
            vals += [repr(float(np.real(x))), repr(float(np.imag(x)))]
        buf.write(repr(float(t)) + "," + ",".join(vals) + "\n")
    return buf.getvalue()


@dataclass
class ErgodicCurve:
    T: np.ndarray
    R: np.ndarray  # (n, d); real in norm mode
    log_abs: np.ndarray
    label: str
    mode: str
    verdict: LimitVerdict
    kappa: Optional[float] = None
    log_denominator: Optional[np.ndarray] = None

    @property
    def final(self) -> float:
        """Norm of the last sample."""
        return float(np.linalg.norm(self.R[-1]))

    def to_csv(self) -> str:
        return curve_csv(self.T, self.R)

    def to_json(self, points=True):
        out = {"label": self.label, "mode": self.mode, "kappa": self.kappa, "verdict": self.verdict.to_json()}
        if points:
            out["T"] = jsonable(self.T)
            if np.iscomplexobj(self.R):
                out["R_re"] = jsonable(self.R.real)
                out["R_im"] = jsonable(self.R.imag)
            else:
                out["R_re"] = jsonable(self.R)
        return out


def ergodic_curve(f, mu: Weight, nu: Weight, schedule: Schedule = Schedule(), mode: str = NORM,
                  kappa=None, label: Optional[str] = None, min_decay: float = 0.0) -> ErgodicCurve:
    """Sample R(T_j) for a function handle or trigonometric polynomial."""
    if mode not in (NORM, RAW):
        raise ValueError(f"mode must be 'norm' or 'raw', got {mode!r}")
    h = as_handle(f)
    k = _kappa(kappa)
    Ts = schedule.Ts

    if mode == NORM:
        def g(t):
            return np.linalg.norm(h(t), axis=1)
    else:
        g = h

    nest = nested_integrals(g, nu.log, Ts, oscillation_step(h.max_freq), schedule.quad_tol,
                            smooth=h.max_freq == 0)
    logD = log_mu_QT_many(mu, Ts)
    if k is not None:
        logD = k * logD
    R = np.array([s.value(ld) for s, ld in zip(nest.totals, logD)])
    if mode == NORM:
        R = R.real
    log_abs = np.array([s.log_abs() for s in nest.totals]) - logD
    verdict = decide_schedule(Ts, R, log_abs, schedule, zero=True, min_decay=min_decay)
    name = label or f"{h.label} [{mode}] mu={mu.text} nu={nu.text}" + (f" kappa={k:g}" if k is not None else "")
    curve = ErgodicCurve(Ts, R, log_abs, name, mode, verdict, k, logD)
    verdict.curve = curve
    return curve


def limit_verdict(curve: ErgodicCurve, zero_threshold: Optional[float] = None, spread_tol: Optional[float] = None,
                  schedule: Schedule = Schedule(), min_decay: float = 0.0) -> LimitVerdict:
    """Re-judge a curve with other thresholds."""
    from dataclasses import replace

    sched = schedule
    if zero_threshold is not None:
        sched = replace(sched, zero_threshold=zero_threshold)
    if spread_tol is not None:
        sched = replace(sched, spread_tol=spread_tol)
    return decide_schedule(curve.T, curve.R, curve.log_abs, sched, zero=True, min_decay=min_decay)


@dataclass
class ThetaResult:
    value: Optional[float]
    verdict: LimitVerdict
    curve: ErgodicCurve

    def to_json(self, points=False):
        return {"theta": jsonable(self.value), "verdict": self.verdict.to_json(),
                "curve": self.curve.to_json(points)}


def ratio_curve(mu: Weight, nu: Weight, schedule: Schedule = Schedule(), kappa=None,
                label: Optional[str] = None) -> ErgodicCurve:
    """``nu(Q_T) / mu(Q_T)**kappa`` (kappa defaults to 1) with its verdict."""
    k = _kappa(kappa)
    Ts = schedule.Ts
    lm = log_mu_QT_many(mu, Ts)
    if k is not None:
        lm = k * lm
    lr = log_mu_QT_many(nu, Ts) - lm
    with np.errstate(over="ignore"):
        R = np.exp(np.minimum(lr, 709.0))[:, None]
    v = decide_schedule(Ts, R, lr, schedule, zero=True)
    name = label or f"nu(Q_T)/mu(Q_T) mu={mu.text} nu={nu.text}"
    curve = ErgodicCurve(Ts, R, lr, name, NORM, v, k, lm)
    v.curve = curve
    return curve


def theta(mu: Weight, nu: Weight, schedule: Schedule = Schedule()) -> ThetaResult:
    """Limit of ``nu(Q_T) / mu(Q_T)``; divergence is a verdict, not an error."""
    curve = ratio_curve(mu, nu, schedule)
    v = curve.verdict
    value = 0.0 if v.kind == CONVERGES_TO_ZERO else float(v.limit[0]) if v.kind == CONVERGES else None
    return ThetaResult(value, v, curve)


def oscillatory_decay(mu: Weight, nu: Weight, lam: float, schedule: Schedule = Schedule()) -> LimitVerdict:
    """Whether ``|(1/mu(Q_T)) int_{Q_T} exp(i lam t) nu(t) dt| -> 0``."""
    if lam == 0:
        raise ValueError("frequency must be nonzero")
    wave = FunctionHandle(lambda t: np.exp(1j * lam * t)[:, None], 1, 1.0, abs(lam), f"exp(i*{lam:g}*t)")
    return ergodic_curve(wave, mu, nu, schedule, RAW).verdict


@dataclass
class MeanResult:
    """Weighted mean estimate and, for trigonometric polynomials, the
    comparison with ``theta * (classical mean)``."""

    value: Optional[np.ndarray]
    verdict: LimitVerdict
    curve: Optional[ErgodicCurve] = None
    theta: Optional[float] = None
    theta_verdict: Optional[LimitVerdict] = None
    bohr_mean: Optional[np.ndarray] = None
    residual: Optional[float] = None
    skipped: Optional[str] = None
    checks: dict = field(default_factory=dict)

    def to_json(self, points=False):
        out = {
            "value": None if self.value is None else jsonable(np.asarray(self.value, dtype=np.complex128)),
            "verdict": self.verdict.to_json() if self.verdict is not None else None,
            "theta": jsonable(self.theta),
            "theta_verdict": None if self.theta_verdict is None else self.theta_verdict.kind,
            "bohr_mean": None if self.bohr_mean is None else jsonable(np.asarray(self.bohr_mean)),
            "residual": jsonable(self.residual),
            "skipped": self.skipped,
            "checks": jsonable(self.checks),
        }
        if self.curve is not None:
            out["curve"] = self.curve.to_json(points)
        return out


def _estimate(v: LimitVerdict, curve: ErgodicCurve):
    """Limit when the curve settled; otherwise the last sample, flagged by the verdict."""
    if v.kind == CONVERGES_TO_ZERO:
        return np.zeros(curve.R.shape[1], np.complex128)
    if v.kind == CONVERGES:
        return np.asarray(v.limit, dtype=np.complex128)
    if v.kind == UNDECIDED and np.all(np.isfinite(curve.R[-1])):
        return np.asarray(curve.R[-1], dtype=np.complex128)
    return None


def dw_mean(f, mu: Weight, nu: Weight, schedule: Schedule = Schedule()) -> MeanResult:
    """``lim (1/mu(Q_T)) int_{Q_T} f nu``; for a TrigPoly also theta, M(f) and the residual."""
    curve = ergodic_curve(f, mu, nu, schedule, RAW)
    v = curve.verdict
    res = MeanResult(_estimate(v, curve), v, curve)
    if isinstance(f, TrigPoly):
        th = theta(mu, nu, schedule)
        res.theta = th.value
        res.theta_verdict = th.verdict
        res.bohr_mean = bohr_mean_exact(f)
        if res.value is not None and th.value is not None:
            res.residual = float(np.linalg.norm(res.value - th.value * res.bohr_mean))
    return res


def membership_pap0(f, mu: Weight, nu: Weight, schedule: Schedule = Schedule(), kappa=None,
                    min_decay: float = 0.0) -> LimitVerdict:
    """Norm-mode verdict; membership means ``converges-to-zero``."""
    return ergodic_curve(f, mu, nu, schedule, NORM, kappa, min_decay=min_decay).verdict


def verify_mean_theorem(p: TrigPoly, mu: Weight, nu: Weight, schedule: Schedule = Schedule()) -> MeanResult:
    """Weighted mean against ``theta * M(p)``, after checking the hypotheses.

    Every nonzero frequency of ``p`` must pass :func:`oscillatory_decay` and
    theta must converge; otherwise the result is skipped with a reason.
    """
    checks = {}
    for lam in p.freqs:
        if lam == 0:
            continue
        v = oscillatory_decay(mu, nu, float(lam), schedule)
        checks[f"oscillatory_decay[{lam:.12g}]"] = v.kind
        if v.kind != CONVERGES_TO_ZERO:
            return MeanResult(None, v, skipped=f"oscillatory decay not established at lambda={lam:.12g} ({v.kind})",
                              checks=checks)
    th = theta(mu, nu, schedule)
    checks["theta"] = th.verdict.kind
    if th.value is None:
        return MeanResult(None, th.verdict, theta_verdict=th.verdict,
                          skipped=f"theta not convergent ({th.verdict.kind})", checks=checks)
    res = dw_mean(p, mu, nu, schedule)
    res.checks = checks
    if res.value is None:
        res.skipped = f"weighted mean not convergent ({res.verdict.kind})"
    return res


__all__ = [
    "KappaParam",
    "ErgodicCurve",
    "ThetaResult",
    "MeanResult",
    "ergodic_curve",
    "limit_verdict",
    "curve_csv",
    "ratio_curve",
    "theta",
    "oscillatory_decay",
    "dw_mean",
    "membership_pap0",
    "verify_mean_theorem",
    "NORM",
    "RAW",
    "DIVERGES",
]
