"""Finite-horizon decision rule for limits as T -> infinity.

A quantity is sampled at ``T_j = T0 * r**j`` and judged from its tail:

* converges-to-zero: final magnitude below ``zero_threshold`` and the
  fitted power-law decay exponent above ``min_decay``;
* converges: the last ``window`` values have pairwise relative spread at
  most ``spread_tol``, or the successive differences decay like a power
  law ``T**-q`` (``q >= 0.5``) whose projected remainder beyond the last
  sample is within ``spread_tol``;
* diverges: the last ``window`` magnitudes increase monotonically and
  either pass ``growth_bound`` or grow like ``T**p`` with ``p >= growth_min``
  (both the fitted exponent and the last local slope);
* undecided otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

CONVERGES_TO_ZERO = "converges-to-zero"
CONVERGES = "converges"
DIVERGES = "diverges"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class Schedule:
    T0: float = 1.0
    ratio: float = 1.5
    count: int = 24
    quad_tol: float = 1e-10
    spread_tol: float = 1e-3
    window: int = 5
    zero_threshold: float = 1e-3
    growth_bound: float = 1e6
    growth_min: float = 0.5

    def __post_init__(self):
        if self.T0 <= 0:
            raise ValueError("T0 must be positive")
        if self.ratio <= 1:
            raise ValueError("ratio must exceed 1")
        if not (self.count >= self.window >= 3):
            raise ValueError("need count >= window >= 3")
        for name in ("quad_tol", "spread_tol", "zero_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def Ts(self) -> np.ndarray:
        return self.T0 * self.ratio ** np.arange(self.count, dtype=np.float64)

    @property
    def T_max(self) -> float:
        return float(self.Ts[-1])

    def to_json(self):
        return asdict(self)


def jsonable(x):
    """Floats that JSON can carry: non-finite values become strings."""
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, complex):
        return {"re": jsonable(x.real), "im": jsonable(x.imag)}
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": [jsonable(v) for v in x.real.ravel()], "im": [jsonable(v) for v in x.imag.ravel()]}
        return [jsonable(v) for v in x.ravel()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


@dataclass
class LimitVerdict:
    kind: str
    limit: Optional[np.ndarray] = None
    spread: float = math.nan
    decay_exponent: float = math.nan
    growth_exponent: float = math.nan
    final_abs: float = math.nan
    evidence: dict = field(default_factory=dict)
    curve: Optional[object] = field(default=None, repr=False, compare=False)

    @property
    def converged(self) -> bool:
        return self.kind in (CONVERGES, CONVERGES_TO_ZERO)

    @property
    def is_zero(self) -> bool:
        return self.kind == CONVERGES_TO_ZERO

    @property
    def member(self) -> bool:
        """Membership reading used by the ergodic-space checks."""
        return self.kind == CONVERGES_TO_ZERO

    def to_json(self):
        return {
            "kind": self.kind,
            "limit": None if self.limit is None else jsonable(np.asarray(self.limit)),
            "spread": jsonable(self.spread),
            "decay_exponent": jsonable(self.decay_exponent),
            "growth_exponent": jsonable(self.growth_exponent),
            "final_abs": jsonable(self.final_abs),
            "evidence": jsonable(self.evidence),
        }


def _fit_slope(logT, logv):
    keep = np.isfinite(logv)
    if keep.sum() < 2:
        return math.nan
    x, y = logT[keep], logv[keep]
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def decay_exponent(Ts, log_abs):
    """Fitted p in |R| ~ C T^-p over the tail, using the running tail maximum.

    The envelope ``max_{i >= j} |R_i|`` tames oscillating curves whose
    samples hit near-zeros.
    """
    Ts = np.asarray(Ts, dtype=np.float64)
    la = np.asarray(log_abs, dtype=np.float64)
    m = max(5, la.size // 2)
    la, lT = la[-m:], np.log(Ts[-m:])
    if np.all(la == -np.inf):
        return math.inf
    env = np.maximum.accumulate(la[::-1])[::-1]
    return -_fit_slope(lT, env)


def growth_exponent(Ts, log_abs, window):
    la = np.asarray(log_abs, dtype=np.float64)[-window:]
    return _fit_slope(np.log(np.asarray(Ts, dtype=np.float64)[-window:]), la)


def _tail_spread(tail, log_tail):
    """Relative spread, computed on rescaled rows when magnitudes overflow."""
    if np.all(np.isfinite(tail)) and np.all(log_tail < 700):
        return relative_spread(tail)
    if not np.all(np.isfinite(log_tail)):
        return math.inf
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        big = np.abs(tail).max(axis=1)
        unit = tail / big[:, None]
        unit = unit / np.linalg.norm(unit, axis=1)[:, None]
    if not np.all(np.isfinite(unit)):
        unit = np.ones_like(tail, dtype=float)
    return relative_spread(unit * np.exp(log_tail - log_tail.max())[:, None])


def relative_spread(values):
    """max pairwise ||a - b|| / max ||a|| over the rows of ``values``."""
    v = np.asarray(values)
    v = v.reshape(v.shape[0], -1)
    norms = np.linalg.norm(v, axis=1)
    top = norms.max()
    if top == 0:
        return 0.0
    if not np.all(np.isfinite(v)):
        return math.inf
    diffs = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=2)
    return float(diffs.max() / top)


def _contracting(v):
    """Successive differences shrink, so Aitken targets a limit, not an anti-limit."""
    d = np.abs(np.diff(v))
    return bool(np.all(d[1:] < d[:-1]))


def aitken(values):
    """Aitken delta-squared transform of a real or complex scalar sequence.

    Exact for errors that shrink geometrically in j, which is what a power
    law ``C * T**-p`` becomes on a geometric T grid.
    """
    v = np.asarray(values)
    d1 = v[1:-1] - v[:-2]
    d2 = v[2:] - 2 * v[1:-1] + v[:-2]
    out = v[2:].copy()
    nz = d2 != 0
    out[nz] = v[2:][nz] - (v[2:][nz] - v[1:-1][nz]) ** 2 / d2[nz]
    return out


TAIL_MIN_EXPONENT = 0.5


def _power_law_tail(Ts, vals, log_abs):
    """(q, relative remainder estimate) from the decay of successive differences.

    ``d_j = |R_{j+1} - R_j|`` over the second half of the schedule is fitted
    to ``C * T**-q`` (slope by least squares on points near the running-max
    envelope, intercept lifted so the line bounds every point). For
    oscillation about the limit, ``d_j`` reaches about twice the deviation
    envelope, so the remainder is ``C T_n**-q / 2``; one-signed differences
    add up geometrically, giving the factor ``r**q / (r**q - 1)`` instead.
    """
    if not np.all(np.isfinite(vals)) or log_abs[-1] > 700:
        return None
    steps = np.diff(vals, axis=0)
    d = np.linalg.norm(steps, axis=1)
    m = max(5, d.size // 2)
    d, T, steps = d[-m:], Ts[1:][-m:], steps[-m:]
    if np.any(d == 0):
        return None
    logd, lT = np.log(d), np.log(T)
    env = np.maximum.accumulate(logd[::-1])[::-1]
    near = logd >= env - math.log(20.0)
    slope = _fit_slope(lT[near], logd[near])
    q = -slope
    if not (q >= TAIL_MIN_EXPONENT):
        return None
    c = float(np.max(logd + q * lT))
    r = T[-1] / T[-2]
    turns = np.real(np.sum(steps[1:] * np.conj(steps[:-1]), axis=1))
    factor = 0.5 if np.any(turns < 0) else r ** q / (r ** q - 1.0)
    remainder = math.exp(c - q * lT[-1]) * factor
    top = float(np.linalg.norm(vals[-1]))
    if top == 0:
        return None
    return q, remainder / top


def decide(Ts, values, log_abs=None, *, window=5, spread_tol=1e-3, zero_threshold=None,
           min_decay=0.0, growth_bound=1e6, growth_min=0.5, extrapolate=False) -> LimitVerdict:
    """Apply the decision rule to samples ``values[j]`` taken at ``Ts[j]``.

    ``values`` is (n,) or (n, d); ``log_abs`` optionally supplies log|R_j|
    computed without underflow (it takes precedence for magnitudes). With
    ``extrapolate`` a scalar sequence whose raw tail is not yet stable may
    still converge through its Aitken-accelerated tail.
    """
    Ts = np.asarray(Ts, dtype=np.float64)
    vals = np.asarray(values)
    if vals.ndim == 1:
        vals = vals[:, None]
    if log_abs is None:
        with np.errstate(divide="ignore"):
            log_abs = np.log(np.linalg.norm(vals, axis=1))
    log_abs = np.asarray(log_abs, dtype=np.float64)
    if Ts.size < window:
        return LimitVerdict(UNDECIDED, evidence={"reason": f"need at least {window} points"})

    tail = vals[-window:]
    lt = log_abs[-window:]
    p = decay_exponent(Ts, log_abs)
    g = growth_exponent(Ts, log_abs, window)
    final_abs = float(math.exp(log_abs[-1])) if log_abs[-1] < 709 else math.inf
    spread = _tail_spread(tail, lt)
    common = dict(spread=spread, decay_exponent=p, growth_exponent=g, final_abs=final_abs)

    if zero_threshold is not None and final_abs <= zero_threshold and p > min_decay:
        return LimitVerdict(CONVERGES_TO_ZERO, np.zeros(vals.shape[1], vals.dtype), **common)
    if spread <= spread_tol:
        return LimitVerdict(CONVERGES, vals[-1].copy(), **common)
    if extrapolate and vals.shape[1] == 1 and vals.shape[0] >= window + 2 and np.all(lt < 700) \
            and _contracting(vals[-(window + 2):, 0]):
        acc = aitken(vals[:, 0])
        acc_tail = acc[-window:]
        if np.all(np.isfinite(acc_tail)):
            s2 = relative_spread(acc_tail[:, None])
            if s2 <= spread_tol:
                common["evidence"] = {"extrapolated": True, "raw_spread": spread}
                common["spread"] = s2
                return LimitVerdict(CONVERGES, acc_tail[-1:].copy(), **common)
    tail_fit = _power_law_tail(Ts, vals, log_abs)
    if tail_fit is not None and tail_fit[1] <= spread_tol:
        common["evidence"] = {"rule": "power-law tail", "tail_exponent": tail_fit[0],
                              "relative_error_estimate": tail_fit[1], "raw_spread": spread}
        return LimitVerdict(CONVERGES, vals[-1].copy(), **common)
    if np.all(np.diff(lt) > 0):
        # the last local slope guards against saturating sequences whose early rise dominates the fit
        last = (lt[-1] - lt[-2]) / math.log(Ts[-1] / Ts[-2])
        if lt[-1] >= math.log(growth_bound) or (growth_min is not None and min(g, last) >= growth_min):
            return LimitVerdict(DIVERGES, None, **common)
    return LimitVerdict(UNDECIDED, vals[-1].copy(), **common)


def decide_schedule(Ts, values, log_abs=None, schedule: Schedule = Schedule(), *, zero=True, min_decay=0.0,
                    extrapolate=False):
    return decide(Ts, values, log_abs, window=schedule.window, spread_tol=schedule.spread_tol,
                  zero_threshold=schedule.zero_threshold if zero else None, min_decay=min_decay,
                  growth_bound=schedule.growth_bound, growth_min=schedule.growth_min,
                  extrapolate=extrapolate)
