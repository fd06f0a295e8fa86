"""End-to-end pipeline: static -> assumptions -> Riccati -> solver -> report."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import direct, shooting
from .analysis import verify_turnpike
from .errors import TurnpikeError
from .io import dumps, write_trajectory
from .model import Problem, check_assumptions, linearize
from .registry import get_problem
from .riccati import build_hamiltonian_matrix, riccati_report, solve_splitting
from .static import StaticSolution, solve_static

log = logging.getLogger(__name__)

METHODS = ("direct", "shoot-classic", "shoot-mid")


@dataclass
class RunConfig:
    problem: str
    method: str = "shoot-mid"
    T: float = 10.0
    steps: int = 1000
    anchor_fraction: float = 0.5
    guess: str = "static"
    trajectory_path: Optional[str] = None
    report_path: Optional[str] = None
    static_tol: float = 1e-10
    shoot_tol: float = 1e-9
    kkt_tol: float = 1e-8
    max_iter: Optional[int] = None

    def validate(self) -> "RunConfig":
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError("T must be positive")
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        if not 0.0 < self.anchor_fraction < 1.0:
            raise ValueError("anchor_fraction must lie in (0, 1)")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.guess not in ("static", "zero"):
            raise ValueError("guess must be 'static' or 'zero'")
        return self


@dataclass
class Setup:
    problem: Problem
    static: StaticSolution
    lin: object
    hamiltonian: object
    split: object
    assumptions: object


def prepare(problem: Problem | str, static_tol: float = 1e-10) -> Setup:
    p = get_problem(problem) if isinstance(problem, str) else problem
    s = solve_static(p, tol=static_tol)
    d = linearize(p, s)
    h = build_hamiltonian_matrix(d)
    split = solve_splitting(h, d)
    return Setup(p, s, d, h, split, check_assumptions(d, p, s))


def classic_guess(p: Problem, s: StaticSolution, kind: str):
    """Initial shooting data at t=0: known initial state when fixed, static values otherwise."""
    n = p.n
    if kind == "zero":
        z0 = np.zeros(2 * n)
        gamma = np.zeros(p.k)
    else:
        z0 = np.concatenate([s.x_bar, s.lambda_bar])
        gamma = s.gamma_bar.copy()
    if p.terminal.x0 is not None:
        z0[:n] = p.terminal.x0
    return z0, gamma


def solve_with(setup: Setup, cfg: RunConfig):
    p, s = setup.problem, setup.static
    kw = {} if cfg.max_iter is None else {"max_iter": cfg.max_iter}
    if cfg.method == "direct":
        tr = direct.transcribe(p, cfg.T, cfg.steps)
        init = direct.warm_start_from_static(tr, s) if cfg.guess == "static" else direct.zero_start(tr)
        return direct.solve_nlp(tr, init, tol=cfg.kkt_tol, **kw)
    if cfg.method == "shoot-classic":
        z0, gamma = classic_guess(p, s, cfg.guess)
        return shooting.classic_shoot(p, cfg.T, cfg.steps, z0, gamma, tol=cfg.shoot_tol, **kw)
    return shooting.midpoint_shoot(p, cfg.T, cfg.steps, s, cfg.anchor_fraction, tol=cfg.shoot_tol, **kw)


def run(cfg: RunConfig) -> dict:
    """Execute the whole pipeline and write the configured artifacts."""
    cfg.validate()
    setup = prepare(cfg.problem, cfg.static_tol)
    e = solve_with(setup, cfg)
    report = verify_turnpike(setup.problem, e, setup.static, setup.split, conservative=True)
    out = {
        "problem": setup.problem.name,
        "method": cfg.method,
        "T": cfg.T,
        "steps": cfg.steps,
        "static": setup.static.to_dict(),
        "assumptions": setup.assumptions.to_dict(),
        "riccati": riccati_report(setup.hamiltonian, setup.lin, setup.split),
        "solver": {
            "iterations": e.iterations,
            "converged": e.converged,
            "boundary_residual": e.boundary_residual,
            "Gamma": e.Gamma.tolist(),
        },
        "turnpike": report.to_dict(),
    }
    if isinstance(e, direct.DiscreteSolution):
        out["solver"].update(e.summary())
    if cfg.trajectory_path:
        write_trajectory(e, cfg.trajectory_path)
    if cfg.report_path:
        Path(cfg.report_path).write_text(dumps(out) + "\n", encoding="utf-8")
    return out


# ---------------------------------------------------------------------------
# comparisons and sweeps
# ---------------------------------------------------------------------------

def common_grid(a, b):
    """Sample both extremals on the coarser grid by picking nearest nodes."""
    if len(a.t) > len(b.t):
        sb, sa = common_grid(b, a)
        return sa, sb
    idx = np.clip(np.rint(a.t / b.t[-1] * (len(b.t) - 1)).astype(int), 0, len(b.t) - 1)
    return a.stacked(), b.stacked()[idx]


def trajectory_distance(a, b, states_only: bool = False, n: Optional[int] = None) -> float:
    if not np.isclose(a.T, b.T):
        raise ValueError("extremals have different horizons")
    sa, sb = common_grid(a, b)
    if states_only:
        n = a.x.shape[1] if n is None else n
        sa, sb = sa[:, :n], sb[:, :n]
    return float(np.max(np.abs(sa - sb)))


def _label(cfg: RunConfig) -> str:
    return f"{cfg.method}:{cfg.steps}" + (f":{cfg.guess}" if cfg.guess != "static" else "")


def compare(configs: list[RunConfig]) -> list[dict]:
    """Solve each config and tabulate pairwise sup-norm distances (full extremal
    and states only) next to the iteration count of each run.  Failed runs get
    ``converged = False`` and NaN distances."""
    if len(configs) < 2:
        raise ValueError("compare needs at least two configs")
    if len({c.problem for c in configs}) != 1 or len({c.T for c in configs}) != 1:
        raise ValueError("compare needs configs with the same problem and T")
    for c in configs:
        c.validate()
    setup = prepare(configs[0].problem, configs[0].static_tol)
    results = []
    for cfg in configs:
        try:
            results.append((cfg, solve_with(setup, cfg), ""))
        except TurnpikeError as exc:
            results.append((cfg, None, exc.message))
    rows = []
    for i, (ci, ei, erri) in enumerate(results):
        for j, (cj, ej, errj) in enumerate(results):
            if j <= i:
                continue
            ok = ei is not None and ej is not None
            rows.append({
                "a": _label(ci),
                "b": _label(cj),
                "a_converged": ei is not None,
                "b_converged": ej is not None,
                "a_iterations": ei.iterations if ei is not None else -1,
                "b_iterations": ej.iterations if ej is not None else -1,
                "distance": trajectory_distance(ei, ej) if ok else float("nan"),
                "state_distance": trajectory_distance(ei, ej, states_only=True) if ok else float("nan"),
                "note": "; ".join(x for x in (erri, errj) if x),
            })
    return rows


def sweep(problem: str, horizons: list[float], method: str, steps_per_unit: float = 100.0,
          workers: int = 4, **cfg_kw) -> list[dict]:
    """Solve and verify for each horizon; independent solves run in worker threads."""
    setup = prepare(problem)

    def one(T):
        cfg = RunConfig(problem=problem, method=method, T=T,
                        steps=max(2, int(round(steps_per_unit * T))), **cfg_kw).validate()
        row = {"T": T, "steps": cfg.steps, "method": method}
        try:
            e = solve_with(setup, cfg)
        except TurnpikeError as exc:
            row.update(converged=False, iterations=-1, C1_fit=float("nan"), mid_third_max=float("nan"),
                       deviation_mid=float("nan"), x_avg_error=float("nan"), cost_avg=float("nan"),
                       crossings=-1, note=exc.message)
            return row
        rep = verify_turnpike(setup.problem, e, setup.static, setup.split)
        row.update(
            converged=True,
            iterations=e.iterations,
            C1_fit=rep.C1_fit,
            mid_third_max=rep.mid_third_max,
            deviation_mid=float(rep.deviation[len(rep.deviation) // 2]),
            x_avg_error=float(np.linalg.norm(rep.averages.x_avg - setup.static.x_bar)),
            cost_avg=rep.averages.cost_avg,
            crossings=rep.crossings if rep.crossings is not None else -1,
            note="",
        )
        return row

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(one, horizons))
