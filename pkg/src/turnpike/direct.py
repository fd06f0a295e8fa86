"""Direct method: explicit-Euler transcription solved by a KKT Newton iteration.

Decision vector ``z = (x_0, ..., x_N, u_0, ..., u_{N-1})``; constraints are the
Euler defects ``x_{i+1} - x_i - h f(x_i, u_i)`` followed by ``R(x_0, x_N)``;
the objective is the left-endpoint sum ``sum_i h f0(x_i, u_i)``.

With the Lagrangian ``F + y' c`` the defect multiplier ``y_i`` approximates
``lam(t_{i+1})`` and the terminal multiplier equals ``-Gamma``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .errors import NLPError
from .flow import pointwise_control
from .model import Problem
from .shooting import Extremal
from .static import StaticSolution

log = logging.getLogger(__name__)

KKT_TOL = 1e-8
FEAS_TOL = 1e-9
NLP_MAX_ITER = 300
TAU0 = 1e-8
TAU_MAX = 1e8


@dataclass
class Transcription:
    p: Problem
    T: float
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if not self.T > 0:
            raise ValueError("T must be positive")

    @property
    def h(self) -> float:
        return self.T / self.N

    @property
    def n_var(self) -> int:
        return (self.N + 1) * self.p.n + self.N * self.p.m

    @property
    def n_con(self) -> int:
        return self.N * self.p.n + self.p.k

    def split(self, z: np.ndarray):
        n, m, N = self.p.n, self.p.m, self.N
        X = z[:(N + 1) * n].reshape(N + 1, n)
        U = z[(N + 1) * n:].reshape(N, m)
        return X, U

    def join(self, X, U) -> np.ndarray:
        return np.concatenate([np.asarray(X, dtype=float).ravel(), np.asarray(U, dtype=float).ravel()])

    def objective(self, z) -> float:
        X, U = self.split(z)
        return float(self.h * sum(self.p.eval_f0(X[i], U[i]) for i in range(self.N)))

    def constraints(self, z) -> np.ndarray:
        X, U = self.split(z)
        h = self.h
        F = np.array([self.p.eval_f(X[i], U[i]) for i in range(self.N)])
        defects = X[1:] - X[:-1] - h * F
        return np.concatenate([defects.ravel(), self.p.R(X[0], X[-1])])

    def _xcol(self, i):
        return i * self.p.n

    def _ucol(self, i):
        return (self.N + 1) * self.p.n + i * self.p.m

    def derivatives(self, z, y):
        """Objective gradient, constraint values, sparse Jacobian and Lagrangian Hessian."""
        p, N, h = self.p, self.N, self.h
        n, m, k = p.n, p.m, p.k
        X, U = self.split(z)
        grad = np.zeros(self.n_var)
        cons = np.empty(self.n_con)
        jr, jc, jv = [], [], []
        hr, hc, hv = [], [], []
        eye = np.eye(n)
        ar_n = np.arange(n)
        for i in range(N):
            x, u = X[i], U[i]
            fx, fu = p.jac_f(x, u)
            gx, gu = p.grad_f0(x, u)
            xc, uc, row = self._xcol(i), self._ucol(i), i * n
            grad[xc:xc + n] += h * gx
            grad[uc:uc + m] += h * gu
            cons[row:row + n] = X[i + 1] - x - h * p.eval_f(x, u)
            blocks = ((xc + n, eye), (xc, -eye - h * fx), (uc, -h * fu))
            for col0, blk in blocks:
                r, c = np.nonzero(blk)
                jr.append(row + r)
                jc.append(col0 + c)
                jv.append(blk[r, c])
            yi = y[row:row + n]
            hess = h * p.hess_f0(x, u) - h * np.tensordot(yi, p.hess_f(x, u), axes=1)
            idx = np.concatenate([xc + ar_n, uc + np.arange(m)])
            r, c = np.nonzero(hess)
            hr.append(idx[r])
            hc.append(idx[c])
            hv.append(hess[r, c])
        x0, xN = X[0], X[-1]
        row = N * n
        cons[row:] = p.R(x0, xN)
        rx, ry = p.jac_R(x0, xN)
        for col0, blk in ((self._xcol(0), rx), (self._xcol(N), ry)):
            r, c = np.nonzero(blk)
            jr.append(row + r)
            jc.append(col0 + c)
            jv.append(blk[r, c])
        yR = y[row:]
        if p.terminal.kind not in ("fixed-both", "fixed-initial-free-final", "periodic"):
            hR = np.tensordot(yR, p.hess_R(x0, xN), axes=1)
            idx = np.concatenate([self._xcol(0) + ar_n, self._xcol(N) + ar_n])
            r, c = np.nonzero(hR)
            hr.append(idx[r])
            hc.append(idx[c])
            hv.append(hR[r, c])
        cat = lambda parts, dt=float: np.concatenate(parts).astype(dt) if parts else np.zeros(0, dt)
        J = sps.csr_matrix((cat(jv), (cat(jr, int), cat(jc, int))), shape=(self.n_con, self.n_var))
        H = sps.csr_matrix((cat(hv), (cat(hr, int), cat(hc, int))), shape=(self.n_var, self.n_var))
        return grad, cons, J, H


def transcribe(p: Problem, T: float, N: int) -> Transcription:
    return Transcription(p, float(T), int(N))


def warm_start_from_static(t: Transcription, s: StaticSolution) -> np.ndarray:
    """Every state node at ``x_bar``, every control at ``u_bar``; fixed endpoints overwritten."""
    X = np.tile(s.x_bar, (t.N + 1, 1))
    U = np.tile(s.u_bar, (t.N, 1))
    tc = t.p.terminal
    if tc.x0 is not None:
        X[0] = tc.x0
    if tc.x1 is not None:
        X[-1] = tc.x1
    return t.join(X, U)


def zero_start(t: Transcription) -> np.ndarray:
    z = np.zeros(t.n_var)
    X, _ = t.split(z)
    tc = t.p.terminal
    if tc.x0 is not None:
        X[0] = tc.x0
    if tc.x1 is not None:
        X[-1] = tc.x1
    return z


@dataclass
class DiscreteSolution(Extremal):
    kkt_residual: float = np.inf
    objective: float = np.nan

    def summary(self) -> dict:
        return {"objective": self.objective, "kkt_residual": self.kkt_residual, "iterations": self.iterations}


def _least_squares_multipliers(grad, J):
    JJt = (J @ J.T).tocsc()
    try:
        return spla.splu(JJt).solve(-(J @ grad))
    except RuntimeError:
        return spla.lsqr(J.T, -grad, atol=1e-14, btol=1e-14)[0]


def _kkt_solve(H, J, grad, cons, tau):
    nv, nc = H.shape[0], J.shape[0]
    K = sps.bmat([[H + tau * sps.identity(nv), J.T], [J, None]], format="csc")
    lu = spla.splu(K)
    sol = lu.solve(-np.concatenate([grad, cons]))
    if not np.all(np.isfinite(sol)):
        raise RuntimeError("non-finite KKT solution")
    return sol[:nv], sol[nv:]


def solve_nlp(
    t: Transcription,
    init: np.ndarray,
    multipliers: np.ndarray | None = None,
    tol: float = KKT_TOL,
    max_iter: int = NLP_MAX_ITER,
) -> DiscreteSolution:
    """Newton on the KKT conditions with an l1 exact-penalty line search.

    Multipliers default to the least-squares estimate at ``init``.
    """
    z = np.array(init, dtype=float)
    if not np.all(np.isfinite(z)):
        raise NLPError("initial guess is not finite")
    y = np.zeros(t.n_con)
    grad, cons, J, H = t.derivatives(z, y)
    y = _least_squares_multipliers(grad, J) if multipliers is None else np.array(multipliers, dtype=float)
    grad, cons, J, H = t.derivatives(z, y)
    rho = 1.0
    it = 0
    tau = TAU0

    def kkt_norms(grad, cons, J, y):
        return float(np.max(np.abs(grad + J.T @ y))), float(np.max(np.abs(cons)))

    stat, feas = kkt_norms(grad, cons, J, y)
    while not (stat <= tol and feas <= FEAS_TOL):
        if it >= max_iter:
            raise NLPError("direct solve hit the iteration limit", kkt_residual=max(stat, feas), iterations=it)
        tau = TAU0
        while True:
            try:
                dz, y_new = _kkt_solve(H, J, grad, cons, tau)
            except RuntimeError:
                dz = None
            if dz is not None:
                rho = max(rho, 1.1 * float(np.max(np.abs(y_new))) + 1e-3)
                slope = grad @ dz - rho * np.sum(np.abs(cons))
                if slope < 0 or np.max(np.abs(dz)) < 1e-14:
                    break
            tau *= 10.0
            if tau > TAU_MAX:
                raise NLPError("KKT factorization failed after maximal regularization",
                               kkt_residual=max(stat, feas), iterations=it)
        merit0 = t.objective(z) + rho * np.sum(np.abs(cons))
        alpha = 1.0
        while True:
            trial = z + alpha * dz
            with np.errstate(all="ignore"):
                try:
                    merit = t.objective(trial) + rho * np.sum(np.abs(t.constraints(trial)))
                except FloatingPointError:
                    merit = np.inf
            if np.isfinite(merit) and merit <= merit0 + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
            if alpha < 1e-12:
                raise NLPError("line search failed in direct solve", kkt_residual=max(stat, feas), iterations=it)
        z = trial
        y = y + alpha * (y_new - y)
        it += 1
        grad, cons, J, H = t.derivatives(z, y)
        stat, feas = kkt_norms(grad, cons, J, y)
        log.debug("direct iteration %d: stat %.3e feas %.3e step %.3g tau %.1e", it, stat, feas, alpha, tau)

    return _to_solution(t, z, y, max(stat, feas), it)


def _to_solution(t: Transcription, z, y, kkt, it) -> DiscreteSolution:
    p, N = t.p, t.N
    n = p.n
    X, U = t.split(z)
    yR = y[N * n:]
    rx, _ = p.jac_R(X[0], X[-1])
    lam = np.empty((N + 1, n))
    lam[1:] = y[:N * n].reshape(N, n)
    lam[0] = rx.T @ yR
    u_last = pointwise_control(p, X[-1], lam[-1], U[-1])
    return DiscreteSolution(
        t=np.linspace(0.0, t.T, N + 1),
        x=X.copy(),
        lam=lam,
        u=np.vstack([U, u_last]),
        Gamma=-yR,
        boundary_residual=float(np.max(np.abs(p.R(X[0], X[-1])))),
        iterations=it,
        converged=True,
        method="direct",
        kkt_residual=kkt,
        objective=t.objective(z),
    )


def solve_direct(p: Problem, T: float, N: int, s: StaticSolution | None = None, **kw) -> DiscreteSolution:
    """Transcribe and solve, warm-started from ``s`` when given (zero start otherwise)."""
    t = transcribe(p, T, N)
    init = warm_start_from_static(t, s) if s is not None else zero_start(t)
    return solve_nlp(t, init, **kw)
