"""Optimal control problem definitions with their derivatives and linearization.

A :class:`Problem` bundles the dynamics ``f(x, u)``, the running cost
``f0(x, u)`` and the terminal map ``R(x(0), x(T))``.  Derivatives are taken
from analytic callables when supplied and from central finite differences
otherwise.  The cost multiplier is fixed to -1, so the Hamiltonian is

    H(x, lam, u) = <lam, f(x, u)> - f0(x, u).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import DerivativeError, DimensionError, LegendreError, ProblemSpecError

TERMINAL_KINDS = (
    "fixed-both",
    "fixed-initial-free-final",
    "constrained-final",
    "periodic",
    "general",
)

LEGENDRE_COND_MAX = 1e12


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

def fd_steps(v: np.ndarray) -> np.ndarray:
    return np.maximum(1e-6, 1e-7 * np.abs(v))


def fd_jacobian(fun: Callable, v: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian of ``fun`` at ``v``.

    Returns shape ``out.shape + (len(v),)``; a scalar ``fun`` gives the gradient.
    """
    v = np.asarray(v, dtype=float)
    h = fd_steps(v)
    cols = []
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = h[i]
        cols.append((np.asarray(fun(v + e), dtype=float) - np.asarray(fun(v - e), dtype=float)) / (2 * h[i]))
    return np.stack(cols, axis=-1)


def fd_hessian(fun: Callable, v: np.ndarray) -> np.ndarray:
    """Nested central differences with step ``sqrt(h)`` per coordinate.

    For vector-valued ``fun`` the result has shape ``out.shape + (d, d)``.
    """
    v = np.asarray(v, dtype=float)
    d = v.size
    s = np.sqrt(fd_steps(v))
    f_at = lambda w: np.asarray(fun(w), dtype=float)
    out_shape = f_at(v).shape
    hess = np.zeros(out_shape + (d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = s[i]
        for j in range(i, d):
            ej = np.zeros(d)
            ej[j] = s[j]
            val = (f_at(v + ei + ej) - f_at(v + ei - ej) - f_at(v - ei + ej) + f_at(v - ei - ej)) / (4 * s[i] * s[j])
            hess[..., i, j] = val
            hess[..., j, i] = val
    return hess


def _check_finite(name: str, arr) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = tuple(int(i) for i in np.argwhere(~np.isfinite(arr))[0])
        raise DerivativeError(f"non-finite value in {name} at entry {bad}", entry=list(bad), name=name)
    return arr


# ---------------------------------------------------------------------------
# Terminal conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Terminal:
    """Terminal constraints ``R(x(0), x(T)) = 0``.

    ``kind`` selects one of the standard forms:

    * ``fixed-both``: ``R = (x - x0, y - x1)``
    * ``fixed-initial-free-final``: ``R = x - x0``
    * ``constrained-final``: ``R = (x - x0, g(y))``
    * ``periodic``: ``R = x - y``
    * ``general``: user supplied ``R`` (with optional ``dR``, ``d2R``)
    """

    kind: str
    x0: Optional[np.ndarray] = None
    x1: Optional[np.ndarray] = None
    g: Optional[Callable] = None
    g_dim: Optional[int] = None
    R: Optional[Callable] = None
    R_dim: Optional[int] = None
    dR: Optional[Callable] = None
    d2R: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in TERMINAL_KINDS:
            raise ProblemSpecError(f"unknown terminal kind {self.kind!r}", kind=self.kind)
        for name in ("x0", "x1"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, np.asarray(val, dtype=float).ravel())
        need = {
            "fixed-both": ("x0", "x1"),
            "fixed-initial-free-final": ("x0",),
            "constrained-final": ("x0", "g", "g_dim"),
            "periodic": (),
            "general": ("R", "R_dim"),
        }[self.kind]
        missing = [name for name in need if getattr(self, name) is None]
        if missing:
            raise ProblemSpecError(f"terminal kind {self.kind!r} requires {missing}", kind=self.kind)

    def dim(self, n: int) -> int:
        return {
            "fixed-both": 2 * n,
            "fixed-initial-free-final": n,
            "constrained-final": n + (self.g_dim or 0),
            "periodic": n,
            "general": self.R_dim or 0,
        }[self.kind]

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.x0 is not None:
            out["x0"] = self.x0.tolist()
        if self.x1 is not None:
            out["x1"] = self.x1.tolist()
        return out


# ---------------------------------------------------------------------------
# Polynomial control-affine dynamics with quadratic cost
# ---------------------------------------------------------------------------

@dataclass
class AffineQuadratic:
    """Data for ``f(x,u) = A x + B u + c + P(x)`` and a quadratic running cost.

    ``P(x)`` is a sum of monomials: term ``j`` adds
    ``coef[j] * prod_l x[l]**powers[j, l]`` to component ``out[j]``.
    The running cost is ``0.5 (x-xd)' Q (x-xd) + 0.5 (u-ud)' U (u-ud)``.
    The controlled vector fields are the constant columns of ``B`` so the
    extremal control is ``u = ud + U^{-1} B' lam`` in closed form.
    """

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    U: np.ndarray
    xd: np.ndarray
    ud: np.ndarray
    c: Optional[np.ndarray] = None
    mono_out: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    mono_coef: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mono_pow: Optional[np.ndarray] = None

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.asarray(self.B, dtype=float)
        n = self.A.shape[0]
        if self.B.ndim == 1:
            self.B = self.B.reshape(n, -1)
        m = self.B.shape[1]
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        self.U = np.atleast_2d(np.asarray(self.U, dtype=float))
        self.xd = np.asarray(self.xd, dtype=float).ravel()
        self.ud = np.asarray(self.ud, dtype=float).ravel()
        self.c = np.zeros(n) if self.c is None else np.asarray(self.c, dtype=float).ravel()
        self.mono_out = np.asarray(self.mono_out, dtype=np.int64).ravel()
        self.mono_coef = np.asarray(self.mono_coef, dtype=float).ravel()
        if self.mono_pow is None:
            self.mono_pow = np.zeros((0, n), dtype=np.int64)
        self.mono_pow = np.asarray(self.mono_pow, dtype=np.int64).reshape(-1, n)
        shapes = {
            "A": (self.A.shape, (n, n)),
            "B": (self.B.shape, (n, m)),
            "Q": (self.Q.shape, (n, n)),
            "U": (self.U.shape, (m, m)),
            "xd": (self.xd.shape, (n,)),
            "ud": (self.ud.shape, (m,)),
            "c": (self.c.shape, (n,)),
        }
        for name, (got, want) in shapes.items():
            if got != want:
                raise DimensionError(f"{name} has shape {got}, expected {want}", name=name)
        if not (len(self.mono_out) == len(self.mono_coef) == self.mono_pow.shape[0]):
            raise DimensionError("monomial arrays have inconsistent lengths")
        if np.any(self.mono_pow < 0) or np.any((self.mono_out < 0) | (self.mono_out >= n)):
            raise ProblemSpecError("monomial powers must be >= 0 and outputs in range")
        for name in ("Q", "U"):
            mat = getattr(self, name)
            if not np.allclose(mat, mat.T, atol=1e-12, rtol=1e-10):
                raise ProblemSpecError(f"{name} must be symmetric", name=name)
            if np.linalg.eigvalsh(0.5 * (mat + mat.T)).min() <= 0:
                raise ProblemSpecError(f"{name} must be positive definite", name=name)
        self.Uinv = np.linalg.inv(self.U)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def is_linear(self) -> bool:
        return len(self.mono_coef) == 0 or not np.any(self.mono_pow.sum(axis=1) > 1)

    # polynomial part --------------------------------------------------------
    def _poly(self, x):
        out = np.zeros(self.n)
        for o, cf, pw in zip(self.mono_out, self.mono_coef, self.mono_pow):
            out[o] += cf * np.prod(x ** pw)
        return out

    def _poly_jac(self, x):
        jac = np.zeros((self.n, self.n))
        for o, cf, pw in zip(self.mono_out, self.mono_coef, self.mono_pow):
            for l in np.flatnonzero(pw):
                p2 = pw.copy()
                p2[l] -= 1
                jac[o, l] += cf * pw[l] * np.prod(x ** p2)
        return jac

    def _poly_hess(self, x):
        hess = np.zeros((self.n, self.n, self.n))
        for o, cf, pw in zip(self.mono_out, self.mono_coef, self.mono_pow):
            for l in np.flatnonzero(pw):
                p1 = pw.copy()
                p1[l] -= 1
                for r in np.flatnonzero(p1):
                    p2 = p1.copy()
                    p2[r] -= 1
                    hess[o, l, r] += cf * pw[l] * p1[r] * np.prod(x ** p2)
        return hess

    # problem callables ------------------------------------------------------
    def f(self, x, u):
        return self.A @ x + self.B @ u + self.c + self._poly(x)

    def f0(self, x, u):
        dx = x - self.xd
        du = u - self.ud
        return 0.5 * dx @ self.Q @ dx + 0.5 * du @ self.U @ du

    def df(self, x, u):
        return self.A + self._poly_jac(x), self.B.copy()

    def df0(self, x, u):
        return self.Q @ (x - self.xd), self.U @ (u - self.ud)

    def d2f(self, x, u):
        n, m = self.n, self.m
        out = np.zeros((n, n + m, n + m))
        out[:, :n, :n] = self._poly_hess(x)
        return out

    def d2f0(self, x, u):
        n, m = self.n, self.m
        out = np.zeros((n + m, n + m))
        out[:n, :n] = self.Q
        out[n:, n:] = self.U
        return out

    def control(self, lam):
        return self.ud + self.Uinv @ (self.B.T @ lam)

    def to_problem(self, terminal: Terminal, name: str = "affine-quadratic") -> "Problem":
        return Problem(
            n=self.n,
            m=self.m,
            f=self.f,
            f0=self.f0,
            terminal=terminal,
            df=self.df,
            df0=self.df0,
            d2f=self.d2f,
            d2f0=self.d2f0,
            affine=self,
            name=name,
        )


# ---------------------------------------------------------------------------
# Problem
# ---------------------------------------------------------------------------

@dataclass
class Problem:
    """An optimal control problem ``min int_0^T f0 dt``, ``x' = f``, ``R = 0``.

    Optional analytic derivatives (all evaluated at ``(x, u)``):

    ``df -> (f_x, f_u)``, ``df0 -> (grad_x, grad_u)``,
    ``d2f -> array (n, n+m, n+m)``, ``d2f0 -> array (n+m, n+m)``.
    """

    n: int
    m: int
    f: Callable
    f0: Callable
    terminal: Terminal
    df: Optional[Callable] = None
    df0: Optional[Callable] = None
    d2f: Optional[Callable] = None
    d2f0: Optional[Callable] = None
    affine: Optional[AffineQuadratic] = None
    name: str = "problem"

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise DimensionError("n and m must be >= 1", n=self.n, m=self.m)
        k = self.k
        if not 1 <= k <= 2 * self.n:
            raise DimensionError(f"terminal map dimension k={k} outside [1, 2n]", k=k)
        for name in ("x0", "x1"):
            val = getattr(self.terminal, name)
            if val is not None and val.shape != (self.n,):
                raise DimensionError(f"terminal {name} has shape {val.shape}", name=name)

    @property
    def k(self) -> int:
        return self.terminal.dim(self.n)

    def with_terminal(self, terminal: Terminal, name: Optional[str] = None) -> "Problem":
        from dataclasses import replace

        return replace(self, terminal=terminal, name=name or self.name)

    # argument checks ---------------------------------------------------------
    def _xu(self, x, u):
        x = np.asarray(x, dtype=float).ravel()
        u = np.asarray(u, dtype=float).ravel()
        if x.shape != (self.n,) or u.shape != (self.m,):
            raise DimensionError(
                f"expected x in R^{self.n}, u in R^{self.m}, got {x.shape}, {u.shape}",
                n=self.n, m=self.m,
            )
        return x, u

    # dynamics and cost ------------------------------------------------------
    def eval_f(self, x, u) -> np.ndarray:
        x, u = self._xu(x, u)
        return np.asarray(self.f(x, u), dtype=float)

    def eval_f0(self, x, u) -> float:
        x, u = self._xu(x, u)
        return float(self.f0(x, u))

    def jac_f(self, x, u):
        x, u = self._xu(x, u)
        if self.df is not None:
            fx, fu = self.df(x, u)
        else:
            n = self.n
            jac = fd_jacobian(lambda v: self.f(v[:n], v[n:]), np.concatenate([x, u]))
            fx, fu = jac[:, :n], jac[:, n:]
        return _check_finite("f_x", fx), _check_finite("f_u", fu)

    def grad_f0(self, x, u):
        x, u = self._xu(x, u)
        if self.df0 is not None:
            gx, gu = self.df0(x, u)
        else:
            n = self.n
            g = fd_jacobian(lambda v: self.f0(v[:n], v[n:]), np.concatenate([x, u]))
            gx, gu = g[:n], g[n:]
        return _check_finite("f0_x", gx), _check_finite("f0_u", gu)

    def hess_f(self, x, u) -> np.ndarray:
        x, u = self._xu(x, u)
        if self.d2f is not None:
            out = self.d2f(x, u)
        else:
            n = self.n
            out = fd_hessian(lambda v: self.f(v[:n], v[n:]), np.concatenate([x, u]))
        return _check_finite("d2f", out)

    def hess_f0(self, x, u) -> np.ndarray:
        x, u = self._xu(x, u)
        if self.d2f0 is not None:
            out = self.d2f0(x, u)
        else:
            n = self.n
            out = fd_hessian(lambda v: self.f0(v[:n], v[n:]), np.concatenate([x, u]))
        return _check_finite("d2f0", out)

    # terminal map -------------------------------------------------------------
    def R(self, x, y) -> np.ndarray:
        tc = self.terminal
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if tc.kind == "fixed-both":
            return np.concatenate([x - tc.x0, y - tc.x1])
        if tc.kind == "fixed-initial-free-final":
            return x - tc.x0
        if tc.kind == "constrained-final":
            return np.concatenate([x - tc.x0, np.atleast_1d(tc.g(y))])
        if tc.kind == "periodic":
            return x - y
        return np.atleast_1d(np.asarray(tc.R(x, y), dtype=float))

    def jac_R(self, x, y):
        """Return ``(R_x, R_y)``, each of shape ``(k, n)``."""
        tc = self.terminal
        n, k = self.n, self.k
        eye, zero = np.eye(n), np.zeros((n, n))
        if tc.kind == "fixed-both":
            return np.vstack([eye, zero]), np.vstack([zero, eye])
        if tc.kind == "fixed-initial-free-final":
            return eye, zero
        if tc.kind == "periodic":
            return eye, -eye
        if tc.kind == "constrained-final":
            gy = fd_jacobian(lambda v: np.atleast_1d(tc.g(v)), np.asarray(y, dtype=float)).reshape(-1, n)
            return np.vstack([eye, np.zeros((gy.shape[0], n))]), np.vstack([zero, gy])
        if tc.dR is not None:
            rx, ry = tc.dR(x, y)
        else:
            jac = fd_jacobian(lambda v: self.R(v[:n], v[n:]), np.concatenate([x, y])).reshape(k, 2 * n)
            rx, ry = jac[:, :n], jac[:, n:]
        return _check_finite("R_x", rx), _check_finite("R_y", ry)

    def hess_R(self, x, y) -> np.ndarray:
        """Second derivatives of each ``R^i`` in ``(x, y)``: shape ``(k, 2n, 2n)``."""
        tc = self.terminal
        n, k = self.n, self.k
        if tc.kind in ("fixed-both", "fixed-initial-free-final", "periodic"):
            return np.zeros((k, 2 * n, 2 * n))
        if tc.kind == "general" and tc.d2R is not None:
            return _check_finite("d2R", tc.d2R(x, y))
        v = np.concatenate([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
        out = fd_hessian(lambda w: self.R(w[:n], w[n:]), v).reshape(k, 2 * n, 2 * n)
        return _check_finite("d2R", out)


# ---------------------------------------------------------------------------
# Extremal points and the Hamiltonian
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtremalPoint:
    """A normal extremal point ``(x, lam, u)``; the cost multiplier is -1."""

    x: np.ndarray
    lam: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        for name in ("x", "lam", "u"):
            arr = np.asarray(getattr(self, name), dtype=float).ravel()
            if not np.all(np.isfinite(arr)):
                raise ProblemSpecError(f"extremal point component {name} is not finite")
            object.__setattr__(self, name, arr)


def _check_point(p: Problem, e: ExtremalPoint):
    if e.x.shape != (p.n,) or e.lam.shape != (p.n,) or e.u.shape != (p.m,):
        raise DimensionError(
            f"extremal point dims ({e.x.size}, {e.lam.size}, {e.u.size}) do not match (n={p.n}, m={p.m})",
            n=p.n, m=p.m,
        )


def eval_hamiltonian(p: Problem, e: ExtremalPoint) -> float:
    _check_point(p, e)
    return float(e.lam @ p.eval_f(e.x, e.u) - p.eval_f0(e.x, e.u))


def hamiltonian_gradients(p: Problem, x, lam, u):
    """Return ``(H_x, H_lam, H_u)`` at ``(x, lam, -1, u)``."""
    fx, fu = p.jac_f(x, u)
    gx, gu = p.grad_f0(x, u)
    return fx.T @ lam - gx, p.eval_f(x, u), fu.T @ lam - gu


@dataclass(frozen=True)
class HamiltonianBlocks:
    """Second derivatives of ``H``. ``Hxl = df/dx`` and ``Hlu = df/du``;
    ``Hxu[i, j] = d2H/dx_i du_j``."""

    Hxx: np.ndarray
    Hxl: np.ndarray
    Hxu: np.ndarray
    Hlu: np.ndarray
    Huu: np.ndarray


def hessian_blocks(p: Problem, e: ExtremalPoint) -> HamiltonianBlocks:
    _check_point(p, e)
    n = p.n
    fx, fu = p.jac_f(e.x, e.u)
    hf = p.hess_f(e.x, e.u)
    hf0 = p.hess_f0(e.x, e.u)
    hh = np.tensordot(e.lam, hf, axes=1) - hf0
    hh = 0.5 * (hh + hh.T)
    return HamiltonianBlocks(
        Hxx=hh[:n, :n], Hxl=fx, Hxu=hh[:n, n:], Hlu=fu, Huu=hh[n:, n:],
    )


@dataclass(frozen=True)
class LinearizationData:
    A: np.ndarray
    B: np.ndarray
    W: np.ndarray
    Huu: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def BHB(self) -> np.ndarray:
        """``B Huu^{-1} B'`` (negative semidefinite under the Legendre condition)."""
        return self.B @ np.linalg.solve(self.Huu, self.B.T)


def assemble_abw(b: HamiltonianBlocks) -> LinearizationData:
    huu = b.Huu
    cond = np.linalg.cond(huu)
    if not np.isfinite(cond) or cond > LEGENDRE_COND_MAX:
        raise LegendreError("strong Legendre condition violated: H_uu is singular", cond=float(cond))
    hinv_hux = np.linalg.solve(huu, b.Hxu.T)
    A = b.Hxl - b.Hlu @ hinv_hux
    W = -b.Hxx + b.Hxu @ hinv_hux
    W = 0.5 * (W + W.T)
    return LinearizationData(A=A, B=b.Hlu, W=W, Huu=huu)


def linearize(p: Problem, s) -> LinearizationData:
    """Shortcut: ``assemble_abw(hessian_blocks(...))`` at a static solution."""
    return assemble_abw(hessian_blocks(p, ExtremalPoint(s.x_bar, s.lambda_bar, s.u_bar)))


@dataclass(frozen=True)
class AssumptionReport:
    kalman_rank: int
    kalman_ok: bool
    huu_negdef: bool
    huu_min_eig: float
    w_posdef: bool
    w_min_eig: float
    r_full_rank: bool
    r_rank: int

    @property
    def all_ok(self) -> bool:
        return self.kalman_ok and self.huu_negdef and self.w_posdef and self.r_full_rank

    def to_dict(self) -> dict:
        return {
            "kalman_rank": self.kalman_rank,
            "kalman_ok": self.kalman_ok,
            "huu_negdef": self.huu_negdef,
            "huu_min_eig": self.huu_min_eig,
            "w_posdef": self.w_posdef,
            "w_min_eig": self.w_min_eig,
            "r_full_rank": self.r_full_rank,
            "r_rank": self.r_rank,
        }


def numerical_rank(mat: np.ndarray, rtol: float = 1e-10) -> int:
    if mat.size == 0:
        return 0
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def controllability_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def check_assumptions(d: LinearizationData, p: Problem, s) -> AssumptionReport:
    rank = numerical_rank(controllability_matrix(d.A, d.B))
    huu_min = float(np.linalg.eigvalsh(-0.5 * (d.Huu + d.Huu.T)).min())
    w_min = float(np.linalg.eigvalsh(d.W).min())
    rx, ry = p.jac_R(s.x_bar, s.x_bar)
    r_rank = numerical_rank(np.hstack([rx, ry]))
    return AssumptionReport(
        kalman_rank=rank,
        kalman_ok=rank == d.n,
        huu_negdef=huu_min > 0,
        huu_min_eig=huu_min,
        w_posdef=w_min > 0,
        w_min_eig=w_min,
        r_full_rank=r_rank == p.k,
        r_rank=r_rank,
    )


# ---------------------------------------------------------------------------
# LQ problem files
# ---------------------------------------------------------------------------

def _matrix(data, rows: int, cols: int, name: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1 and arr.size == rows * cols:
        arr = arr.reshape(rows, cols)
    if arr.shape != (rows, cols):
        raise ProblemSpecError(f"{name} must be {rows}x{cols} (row-major), got shape {arr.shape}", name=name)
    return arr


def terminal_from_dict(data: dict, n: int) -> Terminal:
    kind = data.get("kind")
    if kind not in ("fixed-both", "fixed-initial-free-final", "periodic"):
        raise ProblemSpecError(f"unsupported terminal kind in problem file: {kind!r}", kind=kind)
    kwargs = {}
    for name in ("x0", "x1"):
        if name in data:
            val = np.asarray(data[name], dtype=float).ravel()
            if val.shape != (n,):
                raise ProblemSpecError(f"terminal {name} must have length {n}", name=name)
            kwargs[name] = val
    return Terminal(kind, **kwargs)


def lq_from_dict(data: dict, name: str = "lq") -> Problem:
    try:
        n, m = int(data["n"]), int(data["m"])
        aq = AffineQuadratic(
            A=_matrix(data["A"], n, n, "A"),
            B=_matrix(data["B"], n, m, "B"),
            Q=_matrix(data["Q"], n, n, "Q"),
            U=_matrix(data["U"], m, m, "U"),
            xd=np.asarray(data.get("xd", np.zeros(n)), dtype=float),
            ud=np.asarray(data.get("ud", np.zeros(m)), dtype=float),
        )
        terminal = terminal_from_dict(data["terminal"], n)
    except KeyError as exc:
        raise ProblemSpecError(f"problem file is missing field {exc.args[0]!r}") from None
    except DimensionError as exc:
        raise ProblemSpecError(exc.message, **exc.details) from None
    return aq.to_problem(terminal, name=name)


def load_lq_file(path) -> Problem:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ProblemSpecError(f"cannot read problem file {path}: {exc}") from None
    return lq_from_dict(data, name=f"lq:{path}")


def lq_to_dict(p: Problem) -> dict:
    aq = p.affine
    if aq is None or not aq.is_linear or np.any(aq.c):
        raise ProblemSpecError("only linear-quadratic problems can be written to a problem file")
    return {
        "n": aq.n,
        "m": aq.m,
        "A": aq.A.ravel().tolist(),
        "B": aq.B.ravel().tolist(),
        "Q": aq.Q.ravel().tolist(),
        "U": aq.U.ravel().tolist(),
        "xd": aq.xd.tolist(),
        "ud": aq.ud.tolist(),
        "terminal": p.terminal.to_dict(),
    }
