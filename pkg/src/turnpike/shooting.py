"""Indirect methods: classical and middle-point shooting on the extremal system.

Both variants use the unknown vector ``(z_anchor, Gamma)`` of size ``2n + k``
and the residual

    [ R(x(0), x(T)),
      -lam(0) - R_x' Gamma,
       lam(T) - R_y' Gamma ]

The classical method anchors at ``t = 0``; the middle-point variant anchors
inside the horizon (``T/2`` by default), integrating backward to 0 and
forward to T, and is initialized at the static solution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import IntegrationBlowUp, ShootingError
from .flow import controls_along, integrate_extremal
from .model import Problem
from .riccati import HyperbolicSplitting
from .static import StaticSolution, transversality_residual

log = logging.getLogger(__name__)

SHOOT_TOL = 1e-9
SHOOT_MAX_ITER = 200
MAX_HALVINGS = 40


@dataclass
class Extremal:
    t: np.ndarray
    x: np.ndarray
    lam: np.ndarray
    u: np.ndarray
    Gamma: np.ndarray
    boundary_residual: float
    iterations: int = 0
    converged: bool = True
    method: str = ""
    residual_history: list = field(default_factory=list)

    @property
    def T(self) -> float:
        return float(self.t[-1])

    @property
    def steps(self) -> int:
        return len(self.t) - 1

    def stacked(self) -> np.ndarray:
        """Columns ``x, lam, u`` side by side, one row per node."""
        return np.hstack([self.x, self.lam, self.u])


@dataclass
class ShootingProblem:
    """Residual map for the shooting unknowns anchored at node ``anchor``."""

    p: Problem
    T: float
    steps: int
    anchor: int = 0

    def trajectory(self, xi: np.ndarray) -> np.ndarray:
        n = self.p.n
        z_a = xi[:2 * n]
        t_a = self.T * self.anchor / self.steps
        parts = []
        if self.anchor > 0:
            back = integrate_extremal(self.p, z_a, t_a, 0.0, self.anchor)
            parts.append(back[::-1])
        if self.anchor < self.steps:
            fwd = integrate_extremal(self.p, z_a, t_a, self.T, self.steps - self.anchor)
            parts.append(fwd[1:] if parts else fwd)
        return np.vstack(parts)

    def residual_from_path(self, path: np.ndarray, gamma: np.ndarray) -> np.ndarray:
        n = self.p.n
        x0, lam0 = path[0, :n], path[0, n:]
        xT, lamT = path[-1, :n], path[-1, n:]
        return np.concatenate([
            self.p.R(x0, xT),
            transversality_residual(self.p, x0, xT, lam0, lamT, gamma),
        ])

    def residual(self, xi: np.ndarray) -> np.ndarray:
        return self.residual_from_path(self.trajectory(xi), xi[2 * self.p.n:])


def _safe_residual(sp: ShootingProblem, xi):
    try:
        r = sp.residual(xi)
    except IntegrationBlowUp:
        return None
    return r if np.all(np.isfinite(r)) else None


def _fd_jacobian(sp: ShootingProblem, xi, r0):
    jac = np.empty((r0.size, xi.size))
    for j in range(xi.size):
        h = 1e-7 * (1.0 + abs(xi[j]))
        for sign in (1.0, -1.0):
            trial = xi.copy()
            trial[j] += sign * h
            rj = _safe_residual(sp, trial)
            if rj is not None:
                jac[:, j] = sign * (rj - r0) / h
                break
        else:
            raise ShootingError("integration blow-up while building the shooting Jacobian", column=j)
    return jac


def newton_shoot(
    sp: ShootingProblem,
    xi0: np.ndarray,
    tol: float = SHOOT_TOL,
    max_iter: int = SHOOT_MAX_ITER,
    method: str = "",
) -> Extremal:
    """Damped Newton with a forward-difference Jacobian on the shooting residual."""
    xi = np.array(xi0, dtype=float)
    r = _safe_residual(sp, xi)
    if r is None:
        raise ShootingError("integration blow-up at the initial guess", method=method, residual_history=[])
    history = [float(np.max(np.abs(r)))]
    it = 0
    while history[-1] > tol:
        if it >= max_iter:
            raise ShootingError("shooting did not converge within the iteration limit",
                                method=method, residual_history=history)
        jac = _fd_jacobian(sp, xi, r)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        norm0 = np.linalg.norm(r)
        alpha = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = xi + alpha * step
            rt = _safe_residual(sp, trial)
            if rt is not None and np.linalg.norm(rt) < (1 - 1e-4 * alpha) * norm0:
                break
            alpha *= 0.5
        else:
            raise ShootingError("shooting line search failed", method=method, residual_history=history)
        xi, r = trial, rt
        it += 1
        history.append(float(np.max(np.abs(r))))
        log.debug("%s iteration %d: residual %.3e (step %.3g)", method, it, history[-1], alpha)

    path = sp.trajectory(xi)
    n = sp.p.n
    return Extremal(
        t=np.linspace(0.0, sp.T, sp.steps + 1),
        x=path[:, :n].copy(),
        lam=path[:, n:].copy(),
        u=controls_along(sp.p, path),
        Gamma=xi[2 * n:].copy(),
        boundary_residual=history[-1],
        iterations=it,
        converged=True,
        method=method,
        residual_history=history,
    )


def _check_horizon(T, steps):
    if not T > 0:
        raise ValueError("T must be positive")
    if steps < 2:
        raise ValueError("steps must be >= 2")


def classic_shoot(
    p: Problem,
    T: float,
    steps: int,
    guess_z0,
    guess_Gamma,
    tol: float = SHOOT_TOL,
    max_iter: int = SHOOT_MAX_ITER,
) -> Extremal:
    """Shooting from ``t = 0`` with unknowns ``(z(0), Gamma)``."""
    _check_horizon(T, steps)
    sp = ShootingProblem(p, float(T), int(steps), anchor=0)
    xi0 = np.concatenate([np.asarray(guess_z0, dtype=float), np.asarray(guess_Gamma, dtype=float)])
    return newton_shoot(sp, xi0, tol, max_iter, method="shoot-classic")


def anchor_index(steps: int, anchor_fraction: float) -> int:
    if not 0.0 < anchor_fraction < 1.0:
        raise ValueError("anchor_fraction must lie in (0, 1)")
    return min(max(int(round(anchor_fraction * steps)), 1), steps - 1)


def midpoint_shoot(
    p: Problem,
    T: float,
    steps: int,
    s: StaticSolution,
    anchor_fraction: float = 0.5,
    tol: float = SHOOT_TOL,
    max_iter: int = SHOOT_MAX_ITER,
) -> Extremal:
    """Shooting anchored inside the horizon, started at ``(x_bar, lam_bar, Gamma_bar)``."""
    _check_horizon(T, steps)
    sp = ShootingProblem(p, float(T), int(steps), anchor=anchor_index(steps, anchor_fraction))
    xi0 = np.concatenate([s.x_bar, s.lambda_bar, s.gamma_bar])
    return newton_shoot(sp, xi0, tol, max_iter, method="shoot-mid")


def pontryagin_residuals(p: Problem, e: Extremal) -> dict:
    """Stationarity and adjoint-defect checks on a returned extremal.

    The adjoint defect re-integrates each grid interval with one RK4 step
    and compares with the stored next node.
    """
    n = p.n
    stat = 0.0
    for x, lam, u in zip(e.x, e.lam, e.u):
        fx, fu = p.jac_f(x, u)
        _, gu = p.grad_f0(x, u)
        stat = max(stat, float(np.max(np.abs(fu.T @ lam - gu))))
    z = np.hstack([e.x, e.lam])
    h = e.T / e.steps
    defect = 0.0
    for i in range(e.steps):
        nxt = integrate_extremal(p, z[i], e.t[i], e.t[i] + h, 1)[-1]
        defect = max(defect, float(np.max(np.abs(nxt - z[i + 1]))))
    return {"stationarity": stat, "adjoint_defect": defect}


# ---------------------------------------------------------------------------
# Well-posedness of the linearized shooting system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WellPosednessMatrix:
    Q_shoot: np.ndarray
    condition_estimate: float

    @property
    def rcond(self) -> float:
        return 1.0 / self.condition_estimate if self.condition_estimate > 0 else 0.0


def curvature_blocks(p: Problem, s: StaticSolution):
    """``N1..N4``: Gamma_bar-weighted second derivatives of ``R`` at ``(x_bar, x_bar)``."""
    n = p.n
    hess = np.tensordot(s.gamma_bar, p.hess_R(s.x_bar, s.x_bar), axes=1)
    return hess[:n, :n], hess[:n, n:], hess[n:, :n], hess[n:, n:]


def build_wellposedness_matrix(p: Problem, s: StaticSolution, split: HyperbolicSplitting) -> WellPosednessMatrix:
    n, k = p.n, p.k
    rx, ry = p.jac_R(s.x_bar, s.x_bar)
    n1, n2, n3, n4 = curvature_blocks(p, s)
    Q = np.block([
        [rx, ry, np.zeros((k, k))],
        [split.E_minus + n1, n2, rx.T],
        [n3, -split.E_plus + n4, ry.T],
    ])
    return WellPosednessMatrix(Q, float(np.linalg.cond(Q, 1)))


def schur_complement(p: Problem, s: StaticSolution, split: HyperbolicSplitting) -> np.ndarray:
    """``-R_x E_-^{-1} R_x' + R_y E_+^{-1} R_y'``, the reduced system for ``Gamma``."""
    rx, ry = p.jac_R(s.x_bar, s.x_bar)
    return -rx @ np.linalg.solve(split.E_minus, rx.T) + ry @ np.linalg.solve(split.E_plus, ry.T)
