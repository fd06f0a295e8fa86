"""Exact extremal of linear-quadratic problems via the matrix exponential.

For linear dynamics with quadratic cost under affine terminal conditions the
extremal system is ``Z' = M Z + c`` with ``Z = (x, lam)``.  Writing
``Z(t) = Z_bar + expm(M (t - T/2)) zeta`` reduces the boundary-value
problem to one ``(2n + k)`` linear solve in ``(zeta, Gamma)``.  Anchoring the
exponential at ``T/2`` keeps both ``expm(+-M T/2)`` moderately sized.

Nothing here depends on the shooting, Riccati or static solvers, so it is
used as an independent reference for them.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import ProblemSpecError
from .model import Problem


def lq_matrices(p: Problem):
    aq = p.affine
    if aq is None or not aq.is_linear:
        raise ProblemSpecError("the LQ oracle needs linear dynamics and a quadratic cost")
    S = aq.B @ aq.Uinv @ aq.B.T
    M = np.block([[aq.A, S], [aq.Q, -aq.A.T]])
    c = np.concatenate([aq.B @ aq.ud + aq.c, -aq.Q @ aq.xd])
    return M, c


def lq_bvp_solution(p: Problem, T: float, steps: int):
    """Return ``(t, x, lam, u, Gamma)`` on the uniform grid with ``steps`` intervals."""
    if p.terminal.kind not in ("fixed-both", "fixed-initial-free-final", "periodic"):
        raise ProblemSpecError("the LQ oracle supports affine terminal maps only")
    n, k = p.n, p.k
    M, c = lq_matrices(p)
    z_bar = np.linalg.solve(M, -c)
    x_bar, lam_bar = z_bar[:n], z_bar[n:]
    rx, ry = p.jac_R(x_bar, x_bar)
    r_bar = p.R(x_bar, x_bar)

    e0 = sla.expm(-M * (T / 2))
    e1 = sla.expm(M * (T / 2))
    # unknowns (zeta, Gamma): rows = terminal map, transversality at 0, at T
    K = np.zeros((k + 2 * n, 2 * n + k))
    rhs = np.zeros(k + 2 * n)
    K[:k, :2 * n] = rx @ e0[:n] + ry @ e1[:n]
    rhs[:k] = -r_bar
    K[k:k + n, :2 * n] = -e0[n:]
    K[k:k + n, 2 * n:] = -rx.T
    rhs[k:k + n] = lam_bar
    K[k + n:, :2 * n] = e1[n:]
    K[k + n:, 2 * n:] = -ry.T
    rhs[k + n:] = -lam_bar
    sol = np.linalg.solve(K, rhs)
    zeta, gamma = sol[:2 * n], sol[2 * n:]

    t = np.linspace(0.0, T, steps + 1)
    Z = np.array([z_bar + sla.expm(M * (ti - T / 2)) @ zeta for ti in t])
    aq = p.affine
    u = aq.ud + (aq.Uinv @ aq.B.T @ Z[:, n:].T).T
    return t, Z[:, :n], Z[:, n:], u, gamma
