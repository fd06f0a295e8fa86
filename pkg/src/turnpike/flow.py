"""Extremal flow integration.

Problems carrying :class:`~turnpike.model.AffineQuadratic` data are
integrated by the RK4 kernel, compiled when the extension is built and
pure numpy otherwise (set ``TURNPIKE_PURE_PYTHON=1`` to force the fallback).
Other problems go through a generic RK4 loop that solves ``dH/du = 0`` at
every stage.
"""

from __future__ import annotations

import os

import numpy as np

from . import _flow_py
from .errors import IntegrationBlowUp, ShootingError
from .model import Problem

try:
    from . import _flow as _flow_c
except ImportError:  # extension not built
    _flow_c = None

BLOWUP = 1e8

python_kernel = _flow_py.rk4_affine
compiled_kernel = None if _flow_c is None else _flow_c.rk4_affine

if compiled_kernel is not None and os.environ.get("TURNPIKE_PURE_PYTHON") != "1":
    rk4_affine = compiled_kernel
    KERNEL = "compiled"
else:
    rk4_affine = python_kernel
    KERNEL = "python"


def kernel_args(aq):
    """Flatten :class:`AffineQuadratic` data into the kernel's array arguments."""
    S = aq.B @ aq.Uinv @ aq.B.T
    c = np.ascontiguousarray
    return (
        c(aq.A, dtype=np.float64),
        c(0.5 * (S + S.T), dtype=np.float64),
        c(aq.B @ aq.ud + aq.c, dtype=np.float64),
        c(aq.Q, dtype=np.float64),
        c(aq.Q @ aq.xd, dtype=np.float64),
        c(aq.mono_out, dtype=np.int64),
        c(aq.mono_coef, dtype=np.float64),
        c(aq.mono_pow, dtype=np.int64).reshape(-1, aq.n),
    )


# ---------------------------------------------------------------------------
# pointwise extremal control
# ---------------------------------------------------------------------------

def pointwise_control(p: Problem, x, lam, warm=None, tol: float = 1e-12, max_iter: int = 50) -> np.ndarray:
    """Solve ``dH/du(x, lam, -1, u) = 0`` for ``u``.

    Closed form for affine-quadratic problems, Newton from ``warm`` otherwise.
    Newton stops on a small gradient or on a step below ``1e-10 (1 + |u|)``,
    the noise floor of finite-difference derivatives.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if p.affine is not None:
        return p.affine.control(lam)
    n = p.n
    u = np.zeros(p.m) if warm is None else np.array(warm, dtype=float)
    for _ in range(max_iter):
        _, fu = p.jac_f(x, u)
        _, gu = p.grad_f0(x, u)
        g = fu.T @ lam - gu
        if np.max(np.abs(g)) <= tol * (1 + np.max(np.abs(u))):
            break
        hh = np.tensordot(lam, p.hess_f(x, u), axes=1) - p.hess_f0(x, u)
        huu = hh[n:, n:]
        if np.linalg.eigvalsh(-0.5 * (huu + huu.T)).min() <= 0:
            raise ShootingError("H_uu not negative definite in pointwise control", x=x, lam=lam)
        step = np.linalg.solve(huu, g)
        u = u - step
        if np.max(np.abs(step)) <= 1e-10 * (1 + np.max(np.abs(u))):
            break
    else:
        raise ShootingError("pointwise control Newton failed", x=x, lam=lam)
    return u


def controls_along(p: Problem, z: np.ndarray) -> np.ndarray:
    n = p.n
    if p.affine is not None:
        aq = p.affine
        return aq.ud + (aq.Uinv @ (aq.B.T @ z[:, n:].T)).T
    out = np.empty((z.shape[0], p.m))
    u = None
    for i, row in enumerate(z):
        u = pointwise_control(p, row[:n], row[n:], u)
        out[i] = u
    return out


def extremal_rhs(p: Problem, z, warm=None):
    """``(x', lam')`` of the extremal system and the control used."""
    n = p.n
    x, lam = z[:n], z[n:]
    u = pointwise_control(p, x, lam, warm)
    fx, _ = p.jac_f(x, u)
    gx, _ = p.grad_f0(x, u)
    return np.concatenate([p.eval_f(x, u), -(fx.T @ lam) + gx]), u


def _generic_rk4(p: Problem, z0, t0, t1, steps):
    h = (t1 - t0) / steps
    path = np.empty((steps + 1, 2 * p.n))
    path[0] = z0
    z = np.array(z0, dtype=float)
    u = None
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(steps):
            k1, u = extremal_rhs(p, z, u)
            k2, _ = extremal_rhs(p, z + 0.5 * h * k1, u)
            k3, _ = extremal_rhs(p, z + 0.5 * h * k2, u)
            k4, _ = extremal_rhs(p, z + h * k3, u)
            z = z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            path[s + 1] = z
            if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > BLOWUP:
                return path, s + 1
    return path, -1


def integrate_extremal(p: Problem, z_start, t_from: float, t_to: float, steps: int) -> np.ndarray:
    """Fixed-step RK4 for ``x' = dH/dlam``, ``lam' = -dH/dx`` from ``t_from`` to ``t_to``.

    Backward integration (``t_to < t_from``) is allowed.  Returns the
    ``(steps + 1, 2n)`` path; raises :class:`IntegrationBlowUp` when the
    state leaves ``|z|_inf <= 1e8``.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t_from == t_to:
        raise ValueError("t_from and t_to must differ")
    z0 = np.ascontiguousarray(z_start, dtype=np.float64).ravel()
    if z0.shape != (2 * p.n,):
        raise ValueError(f"z_start must have length {2 * p.n}")
    if p.affine is not None:
        path, fail = rk4_affine(z0, float(t_from), float(t_to), int(steps), *kernel_args(p.affine), BLOWUP)
        path = np.asarray(path)
    else:
        path, fail = _generic_rk4(p, z0, float(t_from), float(t_to), int(steps))
    if fail >= 0:
        t_fail = t_from + (t_to - t_from) * fail / steps
        raise IntegrationBlowUp(f"integration blow-up at t={t_fail:.6g}", t=t_fail, step=int(fail))
    return path
