"""Weights on the real line and evidence-carrying class-membership checks.

Class names follow the usual weight sets:

``W``     bounded below by a positive constant, with divergent mass on [-T, T];
``V``     in ``W`` and bounded above;
``WInv``  in ``W`` with finite pointwise and cumulative translation ratios;
``Ws``    continuous, in ``W``, with finite pointwise translation ratios.

Every check samples finitely many points, so verdicts are ``member``,
``non-member`` or ``undecided`` together with the numbers behind them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from functools import cached_property
from typing import Optional

import numpy as np

from . import kernels
from .limits import Schedule, decide_schedule, jsonable, CONVERGES, CONVERGES_TO_ZERO, DIVERGES, UNDECIDED
from .quadrature import nested_integrals, scaled_integral
from .weight_dsl import (
    Const,
    DegreeOverflowError,
    Node,
    Product,
    Sum,
    classify_polynomial,
    evaluate,
    exact_cumulative,
    log_evaluate,
    parse_weight,
    polynomial_coefficients,
    to_text,
)

MEMBER = "member"
NON_MEMBER = "non-member"

QUAD_TOL = 1e-10
QUAD_STEP = 0.25


class Weight:
    """A positive weight given by a DSL expression.

    When a closed-form cumulative exists it answers every ``mu(Q_T)``
    query; otherwise adaptive quadrature is used.
    """

    def __init__(self, expr: Node, text: Optional[str] = None, continuous: bool = True):
        self.expr = expr
        self.text = text if text is not None else to_text(expr)
        self.cumulative = exact_cumulative(expr)
        self.continuous = continuous
        try:
            coeffs = polynomial_coefficients(expr)
        except DegreeOverflowError:
            coeffs = None
        self._poly = None if coeffs is None else np.array([float(c) for c in coeffs])

    @classmethod
    def parse(cls, text: str) -> "Weight":
        return cls(parse_weight(text), text.strip())

    def __repr__(self):
        return f"Weight({self.text!r})"

    def __call__(self, x):
        if self._poly is not None and self._poly.size:
            return kernels.horner(self._poly, np.asarray(x, dtype=np.float64))
        return evaluate(self.expr, x)

    def log_eval(self, x):
        """(sign, log|w|) without overflow."""
        return log_evaluate(self.expr, x)

    def log(self, x):
        s, l = log_evaluate(self.expr, x)
        return np.where(s > 0, l, -np.inf)

    @cached_property
    def classification(self):
        try:
            return classify_polynomial(self.expr)
        except DegreeOverflowError:
            return None


def mu_QT(w: Weight, T: float) -> float:
    """Mass of ``w`` on [-T, T]; may be ``inf`` for very steep weights (see :func:`log_mu_QT`)."""
    if T <= 0:
        raise ValueError("T must be positive")
    if w.cumulative.available:
        return w.cumulative.value(T)
    lv = log_mu_QT(w, T)
    return math.exp(lv) if lv < 709.7 else math.inf


def log_mu_QT(w: Weight, T: float) -> float:
    if T <= 0:
        raise ValueError("T must be positive")
    if w.cumulative.available:
        return w.cumulative.log_value(T)
    return float(log_mu_QT_many(w, [T])[0])


def log_mu_QT_many(w: Weight, Ts, force_quadrature: bool = False) -> np.ndarray:
    """log mu(Q_T) for each T (any order), sharing quadrature shells."""
    Ts = np.asarray(Ts, dtype=np.float64)
    if np.any(Ts <= 0):
        raise ValueError("T must be positive")
    if w.cumulative.available and not force_quadrature:
        return np.array([w.cumulative.log_value(float(T)) for T in Ts])
    uniq = np.unique(Ts)
    nest = nested_integrals(None, w.log, uniq, QUAD_STEP, QUAD_TOL)
    logs = np.array([s.log_abs() for s in nest.totals])
    return logs[np.searchsorted(uniq, Ts)]


# --------------------------------------------------------------------------
# reports


@dataclass
class ProbeConfig:
    grid_half_width: float = 50.0
    grid_step: float = 1e-2
    tail_max_exp: int = 4
    taus: tuple = (-3.0, -1.0, -0.5, 0.5, 1.0, 3.0)
    mu0_min: float = 1e-8
    schedule: Schedule = field(default_factory=Schedule)

    def grid(self):
        n = int(round(2 * self.grid_half_width / self.grid_step))
        return np.linspace(-self.grid_half_width, self.grid_half_width, n + 1)

    def tails(self):
        pos = 10.0 ** np.arange(self.tail_max_exp + 1)
        return np.concatenate([-pos[::-1], pos])


@dataclass
class ClassReport:
    class_name: str
    verdict: str
    evidence: list = field(default_factory=list)  # (name, probe, value)
    limits: dict = field(default_factory=dict)  # tau -> {"pointwise": .., "cumulative": ..}

    @property
    def member(self):
        return self.verdict == MEMBER

    def add(self, name, probe, value):
        self.evidence.append((name, probe, value))

    def to_json(self):
        return {
            "class": self.class_name,
            "verdict": self.verdict,
            "evidence": [{"name": n, "probe": jsonable(p), "value": jsonable(v)} for n, p, v in self.evidence],
            "limits": {repr(float(t)): jsonable(v) for t, v in self.limits.items()},
        }


def _combine(*verdicts):
    if any(v == NON_MEMBER for v in verdicts):
        return NON_MEMBER
    if all(v == MEMBER for v in verdicts):
        return MEMBER
    return UNDECIDED


def _tail_sequences(logf, Ts):
    """log-values at +T_j and -T_j."""
    return logf(Ts), logf(-Ts)


def _seq_verdict(Ts, logs, schedule, zero=True):
    with np.errstate(over="ignore"):
        vals = np.exp(np.minimum(logs, 709.0))
    return decide_schedule(Ts, vals, logs, schedule, zero=zero, extrapolate=True)


def check_W(w: Weight, cfg: ProbeConfig = ProbeConfig()) -> ClassReport:
    """Positive infimum and divergent cumulative mass."""
    rep = ClassReport("W", UNDECIDED)
    sched = cfg.schedule
    Ts = sched.Ts

    poly = w.classification
    if poly is not None and poly.is_polynomial:
        rep.add("symbolic_positive", None, poly.is_weight)
        if not poly.is_weight:
            rep.add("rejection", None, poly.reason)
            inf_ok = NON_MEMBER
        else:
            inf_ok = MEMBER
    else:
        xs = np.concatenate([cfg.grid(), cfg.tails()])
        sign, logv = w.log_eval(xs)
        bad = ~(sign > 0) | np.isnan(logv) | (logv == -np.inf)
        if bad.any():
            rep.add("nonpositive_at", float(xs[np.argmax(bad)]), 0.0)
            inf_ok = NON_MEMBER
        else:
            k = int(np.argmin(logv))
            rep.add("grid_infimum", float(xs[k]), math.exp(logv[k]))
            inf_ok = MEMBER if logv[k] >= math.log(cfg.mu0_min) else NON_MEMBER
        for side, seq in zip(("+", "-"), _tail_sequences(w.log, Ts)):
            v = _seq_verdict(Ts, seq, sched)
            rep.add(f"tail{side}_kind", None, v.kind)
            if v.kind == CONVERGES_TO_ZERO:
                inf_ok = NON_MEMBER

    lm = log_mu_QT_many(w, Ts)
    growth = _seq_verdict(Ts, lm, sched, zero=False)
    rep.add("mu_QT_final", float(Ts[-1]), math.exp(min(lm[-1], 709.0)) if lm[-1] < 709 else math.inf)
    rep.add("mu_QT_kind", None, growth.kind)
    if growth.kind == DIVERGES:
        grow_ok = MEMBER
    elif growth.kind == CONVERGES:
        rep.add("mu_QT_limit", None, float(growth.limit[0]))
        grow_ok = NON_MEMBER
    else:
        grow_ok = UNDECIDED
    rep.verdict = _combine(inf_ok, grow_ok)
    return rep


def _require_W(w, cfg, name):
    base = check_W(w, cfg)
    if base.verdict != MEMBER:
        rep = ClassReport(name, base.verdict)
        rep.add("W_verdict", None, base.verdict)
        return rep
    return None


def check_V(w: Weight, cfg: ProbeConfig = ProbeConfig()) -> ClassReport:
    """``W`` plus a finite supremum."""
    pre = _require_W(w, cfg, "V")
    if pre is not None:
        return pre
    rep = ClassReport("V", UNDECIDED)
    poly = w.classification
    if poly is not None and poly.is_polynomial:
        rep.add("symbolic_degree", None, poly.degree)
        rep.verdict = MEMBER if poly.degree == 0 else NON_MEMBER
        return rep
    xs = np.concatenate([cfg.grid(), cfg.tails()])
    logv = w.log(xs)
    k = int(np.argmax(logv))
    rep.add("grid_supremum", float(xs[k]), math.exp(min(logv[k], 709.0)) if logv[k] < 709 else math.inf)
    Ts = cfg.schedule.Ts
    parts = []
    for side, seq in zip(("+", "-"), _tail_sequences(w.log, Ts)):
        v = _seq_verdict(Ts, seq, cfg.schedule, zero=False)
        rep.add(f"tail{side}_kind", None, v.kind)
        parts.append(MEMBER if v.kind == CONVERGES else NON_MEMBER if v.kind == DIVERGES else UNDECIDED)
    rep.verdict = _combine(*parts)
    return rep


def _ratio_limits(w, taus, cfg, rep, cumulative=True):
    """Fill ``rep.limits`` and return a per-tau list of verdict strings."""
    sched = cfg.schedule
    Ts = sched.Ts
    lw = w.log(Ts)
    out = []
    lm_cache = None
    if cumulative:
        shifted = [Ts + t for t in taus]
        pool = np.concatenate([Ts] + [s[s > 0] for s in shifted])
        uniq = np.unique(pool)
        lm_all = log_mu_QT_many(w, uniq)
        lm_cache = dict(zip(uniq.tolist(), lm_all.tolist()))
    for tau in taus:
        entry = {}
        pw = _seq_verdict(Ts, w.log(Ts + tau) - lw, sched)
        entry["pointwise"] = _limit_value(pw)
        parts = [_finite(pw)]
        rep.add(f"pointwise_kind[tau={tau:g}]", float(tau), pw.kind)
        if cumulative:
            keep = (Ts + tau) > 0
            T_ok = Ts[keep]
            lr = np.array([lm_cache[float(T + tau)] - lm_cache[float(T)] for T in T_ok])
            cv = _seq_verdict(T_ok, lr, sched)
            entry["cumulative"] = _limit_value(cv)
            rep.add(f"cumulative_kind[tau={tau:g}]", float(tau), cv.kind)
            parts.append(_finite(cv))
        rep.limits[float(tau)] = entry
        out.append(_combine(*parts))
    return out


def _limit_value(v):
    if v.kind == CONVERGES_TO_ZERO:
        return 0.0
    if v.kind == CONVERGES:
        return float(np.real(v.limit[0]))
    if v.kind == DIVERGES:
        return math.inf
    return None


def _finite(v):
    if v.kind in (CONVERGES, CONVERGES_TO_ZERO):
        return MEMBER
    if v.kind == DIVERGES:
        return NON_MEMBER
    return UNDECIDED


def check_WInv(w: Weight, taus=None, cfg: ProbeConfig = ProbeConfig()) -> ClassReport:
    """Finite pointwise and cumulative translation-ratio limits for each tau."""
    taus = cfg.taus if taus is None else tuple(taus)
    pre = _require_W(w, cfg, "WInv")
    if pre is not None:
        return pre
    rep = ClassReport("WInv", UNDECIDED)
    rep.add("tau_sample", None, [float(t) for t in taus])
    rep.verdict = _combine(*_ratio_limits(w, taus, cfg, rep, cumulative=True))
    return rep


def check_Ws(w: Weight, taus=None, cfg: ProbeConfig = ProbeConfig()) -> ClassReport:
    """Continuous ``W`` weight with finite pointwise ratio limits.

    Also runs :func:`check_WInv` and records whether the inclusion of
    ``Ws`` in ``WInv`` holds on this instance.
    """
    taus = cfg.taus if taus is None else tuple(taus)
    pre = _require_W(w, cfg, "Ws")
    if pre is not None:
        return pre
    rep = ClassReport("Ws", UNDECIDED)
    rep.add("continuous", None, bool(w.continuous))
    parts = _ratio_limits(w, taus, cfg, rep, cumulative=False)
    poly = w.classification
    if poly is not None and poly.is_weight:
        rep.add("symbolic_polynomial_weight", None, True)
        parts = [MEMBER]
    verdict = _combine(MEMBER if w.continuous else NON_MEMBER, *parts)
    inv = check_WInv(w, taus, cfg)
    rep.add("WInv_verdict", None, inv.verdict)
    if verdict == MEMBER:
        rep.add("inclusion_holds", None, inv.verdict == MEMBER)
    rep.verdict = verdict
    rep.limits.update({t: dict(rep.limits.get(t, {}), **inv.limits.get(t, {})) for t in inv.limits})
    return rep


def equivalent(mu: Weight, nu: Weight, cfg: ProbeConfig = ProbeConfig()) -> ClassReport:
    """Whether mu/nu stays between two positive constants.

    Symmetric by construction: both mu/nu and nu/mu must have finite,
    nonzero tail limits in both directions.
    """
    rep = ClassReport("equivalence", UNDECIDED)
    xs = np.concatenate([cfg.grid(), cfg.tails()])
    lq = mu.log(xs) - nu.log(xs)
    rep.add("ratio_min", float(xs[int(np.argmin(lq))]), math.exp(min(float(lq.min()), 709.0)))
    rep.add("ratio_max", float(xs[int(np.argmax(lq))]), math.exp(min(float(lq.max()), 709.0)))
    Ts = cfg.schedule.Ts
    parts = []
    for side, xsgn in (("+", 1.0), ("-", -1.0)):
        lr = mu.log(xsgn * Ts) - nu.log(xsgn * Ts)
        for label, seq in (("mu/nu", lr), ("nu/mu", -lr)):
            v = _seq_verdict(Ts, seq, cfg.schedule)
            rep.add(f"tail{side}[{label}]_kind", None, v.kind)
            parts.append(MEMBER if v.kind == CONVERGES else NON_MEMBER if v.kind in (DIVERGES, CONVERGES_TO_ZERO) else UNDECIDED)
    rep.verdict = _combine(*parts)
    return rep


def _fold(a: Node, b: Node, op):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value if op == "+" else a.value * b.value)
    if op == "+":
        return Sum(((1, a), (1, b)))
    return Product((a, b))


def combine_sum(mu: Weight, nu: Weight) -> Weight:
    return Weight(_fold(mu.expr, nu.expr, "+"))


def combine_product(mu: Weight, nu: Weight) -> Weight:
    return Weight(_fold(mu.expr, nu.expr, "*"))


def classify_all(w: Weight, cfg: ProbeConfig = ProbeConfig()) -> dict:
    """W, V, WInv, Ws and the polynomial classification for one weight."""
    poly = w.classification
    return {
        "W": check_W(w, cfg),
        "V": check_V(w, cfg),
        "WInv": check_WInv(w, None, cfg),
        "Ws": check_Ws(w, None, cfg),
        "polynomial": poly,
    }
