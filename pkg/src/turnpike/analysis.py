"""Turnpike diagnostics on computed extremals.

The checked estimate is

    |x(t) - x_bar| + |lam(t) - lam_bar| + |u(t) - u_bar|
        <= C1 (exp(-C2 t) + exp(-C2 (T - t)))

with ``C2`` taken from the Riccati splitting and ``C1`` fitted as the
smallest constant valid on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import Problem
from .riccati import HyperbolicSplitting
from .shooting import Extremal
from .static import StaticSolution

# Largest defect for which each registry problem is known to exhibit the
# estimate; LQ problems satisfy it globally.
DEFECT_THRESHOLDS = {"ex1": np.inf, "ex2": 2.5, "ex1-periodic": np.inf, "ex2-periodic": 2.5}


def deviation_profile(e: Extremal, s: StaticSolution) -> np.ndarray:
    return (
        np.linalg.norm(e.x - s.x_bar, axis=1)
        + np.linalg.norm(e.lam - s.lambda_bar, axis=1)
        + np.linalg.norm(e.u - s.u_bar, axis=1)
    )


def envelope(t: np.ndarray, C2: float, T: float) -> np.ndarray:
    return np.exp(-C2 * t) + np.exp(-C2 * (T - t))


def middle_third(t: np.ndarray, T: float) -> np.ndarray:
    return (t >= T / 3 - 1e-12 * T) & (t <= 2 * T / 3 + 1e-12 * T)


def fit_envelope(d: np.ndarray, t: np.ndarray, C2: float, T: float):
    """Return ``(C1_fit, envelope_ok, mid_third_max)``."""
    if not C2 > 0:
        raise ValueError("C2 must be positive")
    d = np.asarray(d, dtype=float)
    c1 = float(np.max(d / envelope(t, C2, T)))
    mid = d[middle_third(t, T)]
    return c1, bool(np.isfinite(c1)), float(mid.max()) if mid.size else 0.0


@dataclass
class Averages:
    x_avg: np.ndarray
    lam_avg: np.ndarray
    u_avg: np.ndarray
    cost_avg: float

    def to_dict(self) -> dict:
        return {
            "x_avg": self.x_avg.tolist(),
            "lambda_avg": self.lam_avg.tolist(),
            "u_avg": self.u_avg.tolist(),
            "cost_avg": self.cost_avg,
        }


def time_averages(e: Extremal, p: Problem) -> Averages:
    T = e.T
    cost = np.array([p.eval_f0(x, u) for x, u in zip(e.x, e.u)])
    avg = lambda v: np.trapezoid(v, e.t, axis=0) / T
    return Averages(avg(e.x), avg(e.lam), avg(e.u), float(avg(cost)))


def count_crossings(e: Extremal, s: StaticSolution, component: int = 1) -> int:
    """Sign changes of ``x[component] - x_bar[component]`` on ``[T/4, 3T/4]``."""
    if e.x.shape[1] < 2:
        raise ValueError("crossing count needs n >= 2")
    T = e.T
    sel = (e.t >= T / 4) & (e.t <= 3 * T / 4)
    sig = np.sign(e.x[sel, component] - s.x_bar[component])
    sig = sig[sig != 0]
    return int(np.count_nonzero(sig[1:] != sig[:-1]))


def lq_bound_profile(e: Extremal, p: Problem, s: StaticSolution, split: HyperbolicSplitting) -> dict:
    """Leading terms of the explicit LQ bounds (fixed initial point) and the
    worst ratio of the measured deviations to them."""
    aq = p.affine
    x0 = p.terminal.x0
    t, T, C2 = e.t, e.T, split.C2
    a = np.exp(-C2 * t)
    b = np.exp(-C2 * (T - t))
    dx0 = np.linalg.norm(x0 - s.x_bar)
    el = np.linalg.norm(np.linalg.solve(split.E_minus, s.lambda_bar))
    bx = dx0 * a + el * b
    blam = np.linalg.norm(split.E_plus, 2) * dx0 * a + np.linalg.norm(split.E_minus, 2) * el * b
    bu = np.linalg.norm(aq.Uinv, 2) * np.linalg.norm(aq.B, 2) * blam
    ratio = lambda meas, bound: float(np.max(meas / bound))
    return {
        "x_ratio": ratio(np.linalg.norm(e.x - s.x_bar, axis=1), bx),
        "lambda_ratio": ratio(np.linalg.norm(e.lam - s.lambda_bar, axis=1), blam),
        "u_ratio": ratio(np.linalg.norm(e.u - s.u_bar, axis=1), bu),
    }


@dataclass
class TurnpikeReport:
    deviation: np.ndarray
    C2: float
    C1_fit: float
    envelope_ok: bool
    mid_third_max: float
    averages: Averages
    crossings: Optional[int]
    defect: float
    T: float
    conservative_C1_fit: Optional[float] = None
    lq_bounds: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, include_profile: bool = False) -> dict:
        out = {
            "T": self.T,
            "C2": self.C2,
            "C1_fit": self.C1_fit,
            "envelope_ok": self.envelope_ok,
            "mid_third_max": self.mid_third_max,
            "deviation_max": float(self.deviation.max()),
            "deviation_mid": float(self.deviation[len(self.deviation) // 2]),
            "averages": self.averages.to_dict(),
            "crossings": self.crossings,
            "defect": self.defect,
        }
        if self.conservative_C1_fit is not None:
            out["conservative_C1_fit"] = self.conservative_C1_fit
        if self.lq_bounds is not None:
            out["lq_bounds"] = self.lq_bounds
        if include_profile:
            out["deviation"] = self.deviation.tolist()
        out.update(self.extra)
        return out


def verify_turnpike(
    p: Problem,
    e: Extremal,
    s: StaticSolution,
    split: HyperbolicSplitting,
    conservative: bool = False,
) -> TurnpikeReport:
    d = deviation_profile(e, s)
    c1, ok, mid = fit_envelope(d, e.t, split.C2, e.T)
    cons = fit_envelope(d, e.t, split.conservative_rate, e.T)[0] if conservative else None
    lq = None
    aq = p.affine
    if aq is not None and aq.is_linear and p.terminal.kind in ("fixed-both", "fixed-initial-free-final"):
        lq = lq_bound_profile(e, p, s, split)
    return TurnpikeReport(
        deviation=d,
        C2=split.C2,
        C1_fit=c1,
        envelope_ok=ok,
        mid_third_max=mid,
        averages=time_averages(e, p),
        crossings=count_crossings(e, s) if p.n >= 2 else None,
        defect=float(s.defect),
        T=e.T,
        conservative_C1_fit=cons,
        lq_bounds=lq,
    )
