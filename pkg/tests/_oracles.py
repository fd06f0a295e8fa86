"""Independent reference computations used by the test suite.

Nothing here calls the package solvers; each helper builds its answer from
scipy primitives or a closed form.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from turnpike.model import AffineQuadratic, LinearizationData, Terminal


def random_spd(rng: np.random.Generator, k: int, floor: float = 0.2) -> np.ndarray:
    g = rng.normal(size=(k, k))
    return g @ g.T + floor * np.eye(k)


def random_controllable(rng: np.random.Generator, n: int, m: int,
                        max_cond: float = 1e4, max_gain: float = 1e2):
    """Return ``(A, B, Q, U)`` with ``(A, B)`` Kalman controllable and well scaled.

    Draws are rejected until the Kalman matrix has condition number at most
    ``max_cond`` and both scipy Riccati solutions have 2-norm at most
    ``max_gain``.  The residual floor of any Riccati solver grows like
    ``eps |M| |E|^2``, so badly scaled draws cannot meet an absolute residual
    bound in double precision whatever the algorithm.
    """
    while True:
        A = rng.normal(size=(n, n))
        B = rng.normal(size=(n, m))
        K = np.hstack([np.linalg.matrix_power(A, i) @ B for i in range(n)])
        if np.linalg.matrix_rank(K) != n or np.linalg.cond(K) > max_cond:
            continue
        Q, U = random_spd(rng, n), random_spd(rng, m)
        gains = (np.linalg.norm(sla.solve_continuous_are(A, B, Q, U), 2),
                 np.linalg.norm(sla.solve_continuous_are(-A, B, Q, U), 2))
        if max(gains) <= max_gain:
            return A, B, Q, U


def lq_linearization(A, B, Q, U) -> LinearizationData:
    """Linearized extremal data of ``x' = Ax + Bu`` with cost ``(x'Qx + u'Uu)/2``."""
    return LinearizationData(A=np.asarray(A, float), B=np.asarray(B, float),
                             W=np.asarray(Q, float), Huu=-np.asarray(U, float))


def scipy_stabilizing(A, B, Q, U) -> np.ndarray:
    """Stabilizing ARE solution from scipy; the stable graph is ``E_minus = -P``."""
    return -sla.solve_continuous_are(A, B, Q, U)


def scipy_antistabilizing(A, B, Q, U) -> np.ndarray:
    """Antistabilizing solution: ``E_plus = P`` where ``P`` stabilizes ``(-A, B)``."""
    return sla.solve_continuous_are(-A, B, Q, U)


def scalar_roots(a: float, b: float, q: float, r: float):
    """Stable and antistable graph slopes ``(E_minus, E_plus)`` in the scalar case.

    For ``x' = a x + b u`` with cost ``(q x^2 + r u^2)/2`` the graph
    ``lam = e x`` of an invariant line satisfies ``(b^2/r) e^2 + 2 a e - q = 0``.
    """
    s = np.sqrt(a * a + b * b * q / r)
    return r * (-a - s) / (b * b), r * (-a + s) / (b * b)


def random_lq_problem(rng: np.random.Generator, n: int, m: int, kind: str = "fixed-initial-free-final"):
    A, B, Q, U = random_controllable(rng, n, m)
    aq = AffineQuadratic(A=A, B=B, Q=Q, U=U, xd=rng.normal(size=n), ud=rng.normal(size=m))
    x0 = rng.normal(size=n)
    if kind == "fixed-both":
        term = Terminal(kind, x0=x0, x1=rng.normal(size=n))
    elif kind == "periodic":
        term = Terminal(kind)
    else:
        term = Terminal(kind, x0=x0)
    return aq.to_problem(term, name="random-lq")


def expm_flow(M: np.ndarray, c: np.ndarray, z0: np.ndarray, t: float) -> np.ndarray:
    """Exact solution of ``z' = M z + c`` through the augmented exponential."""
    k = len(z0)
    aug = np.zeros((k + 1, k + 1))
    aug[:k, :k] = M
    aug[:k, k] = c
    return (sla.expm(aug * t) @ np.append(z0, 1.0))[:k]
