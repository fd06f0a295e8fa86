"""The static (steady-state) optimal control problem.

Minimize ``f0(x, u)`` subject to ``f(x, u) = 0``.  With the cost multiplier
fixed to -1 its optimality system reads

    f(x, u) = 0,   dH/dx(x, lam, u) = 0,   dH/du(x, lam, u) = 0,

which is solved by damped Newton (or by one linear solve for LQ data).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ProblemSpecError, SingularSystemError, StaticSolveError
from .model import ExtremalPoint, Problem, hamiltonian_gradients

log = logging.getLogger(__name__)

STATIC_TOL = 1e-10
STATIC_MAX_ITER = 100


@dataclass(frozen=True)
class StaticSolution:
    x_bar: np.ndarray
    u_bar: np.ndarray
    lambda_bar: np.ndarray
    kkt_residual: float
    gamma_bar: Optional[np.ndarray] = None
    defect: Optional[float] = None
    iterations: int = 0

    @property
    def point(self) -> ExtremalPoint:
        return ExtremalPoint(self.x_bar, self.lambda_bar, self.u_bar)

    def to_dict(self) -> dict:
        return {
            "x_bar": self.x_bar.tolist(),
            "u_bar": self.u_bar.tolist(),
            "lambda_bar": self.lambda_bar.tolist(),
            "gamma_bar": None if self.gamma_bar is None else self.gamma_bar.tolist(),
            "kkt_residual": self.kkt_residual,
            "defect": self.defect,
        }


def static_residual(p: Problem, x, lam, u) -> np.ndarray:
    hx, hl, hu = hamiltonian_gradients(p, x, lam, u)
    return np.concatenate([hl, hx, hu])


def _static_jacobian(p: Problem, x, lam, u) -> np.ndarray:
    n, m = p.n, p.m
    fx, fu = p.jac_f(x, u)
    hh = np.tensordot(lam, p.hess_f(x, u), axes=1) - p.hess_f0(x, u)
    jac = np.zeros((2 * n + m, 2 * n + m))
    jac[:n, :n] = fx
    jac[:n, 2 * n:] = fu
    jac[n:2 * n, :n] = hh[:n, :n]
    jac[n:2 * n, n:2 * n] = fx.T
    jac[n:2 * n, 2 * n:] = hh[:n, n:]
    jac[2 * n:, :n] = hh[n:, :n]
    jac[2 * n:, n:2 * n] = fu.T
    jac[2 * n:, 2 * n:] = hh[n:, n:]
    return jac


def solve_static(
    p: Problem,
    guess: Optional[ExtremalPoint] = None,
    tol: float = STATIC_TOL,
    max_iter: int = STATIC_MAX_ITER,
) -> StaticSolution:
    """Damped Newton on the static optimality system from ``guess`` (zero by default)."""
    n, m = p.n, p.m
    if guess is None:
        guess = ExtremalPoint(np.zeros(n), np.zeros(n), np.zeros(m))
    z = np.concatenate([guess.x, guess.lam, guess.u])
    split = lambda v: (v[:n], v[n:2 * n], v[2 * n:])

    res = static_residual(p, *split(z))
    it = 0
    while np.max(np.abs(res)) > tol:
        if it >= max_iter:
            raise StaticSolveError(
                "static solve diverged", residual=float(np.max(np.abs(res))), iterations=it
            )
        jac = _static_jacobian(p, *split(z))
        try:
            if np.linalg.cond(jac) > 1e14:
                raise np.linalg.LinAlgError
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            raise SingularSystemError(
                "singular Newton matrix in static solve; try a different initial guess",
                point=z, iterations=it,
            ) from None
        merit = 0.5 * res @ res
        alpha = 1.0
        while True:
            trial = z + alpha * step
            try:
                tres = static_residual(p, *split(trial))
                ok = np.all(np.isfinite(tres)) and 0.5 * tres @ tres < merit * (1 - 1e-4 * alpha)
            except FloatingPointError:
                ok = False
            if ok or alpha < 1e-12:
                break
            alpha *= 0.5
        if alpha < 1e-12:
            raise StaticSolveError(
                "static solve diverged: line search failed", residual=float(np.max(np.abs(res))), iterations=it
            )
        z, res = trial, tres
        it += 1

    x, lam, u = split(z)
    sol = StaticSolution(x_bar=x.copy(), u_bar=u.copy(), lambda_bar=lam.copy(),
                         kkt_residual=float(np.max(np.abs(res))), iterations=it)
    log.debug("static solve converged in %d iterations", it)
    return attach_terminal_data(p, sol)


def solve_static_lq(lq: Problem) -> StaticSolution:
    """Exact static solution for linear dynamics and quadratic cost."""
    aq = lq.affine
    if aq is None or not aq.is_linear:
        raise ProblemSpecError("solve_static_lq needs a linear-quadratic problem")
    n = aq.n
    M = np.block([[aq.A, aq.B @ aq.Uinv @ aq.B.T], [aq.Q, -aq.A.T]])
    rhs = np.concatenate([-aq.B @ aq.ud - aq.c, aq.Q @ aq.xd])
    if np.linalg.cond(M) > 1e14:
        raise SingularSystemError("static LQ system singular: null(A')∩null(B') != {0}")
    sol = np.linalg.solve(M, rhs)
    x, lam = sol[:n], sol[n:]
    u = aq.control(lam)
    res = static_residual(lq, x, lam, u)
    out = StaticSolution(x_bar=x, u_bar=u, lambda_bar=lam, kkt_residual=float(np.max(np.abs(res))))
    return attach_terminal_data(lq, out)


def compute_gamma_bar(p: Problem, s: StaticSolution) -> np.ndarray:
    """Least-squares terminal multiplier making ``(-lam; lam)`` closest to
    ``sum_i gamma_i grad R^i`` at ``(x_bar, x_bar)``."""
    rx, ry = p.jac_R(s.x_bar, s.x_bar)
    gram = rx @ rx.T + ry @ ry.T
    if np.linalg.matrix_rank(np.hstack([rx, ry])) < p.k:
        raise SingularSystemError("R singular at (x_bar, x_bar)", k=p.k)
    return np.linalg.solve(gram, (-rx + ry) @ s.lambda_bar)


def transversality_residual(p: Problem, x0, xT, lam0, lamT, gamma) -> np.ndarray:
    rx, ry = p.jac_R(x0, xT)
    return np.concatenate([-lam0 - rx.T @ gamma, lamT - ry.T @ gamma])


def compute_defect(p: Problem, s: StaticSolution) -> float:
    gamma = s.gamma_bar if s.gamma_bar is not None else compute_gamma_bar(p, s)
    r = p.R(s.x_bar, s.x_bar)
    tr = transversality_residual(p, s.x_bar, s.x_bar, s.lambda_bar, s.lambda_bar, gamma)
    return float(np.linalg.norm(r) + np.linalg.norm(tr))


def attach_terminal_data(p: Problem, s: StaticSolution) -> StaticSolution:
    s = replace(s, gamma_bar=compute_gamma_bar(p, s))
    return replace(s, defect=compute_defect(p, s))
