"""Hamiltonian matrix of the linearized extremal flow and its hyperbolic splitting.

The stable and antistable invariant subspaces of

    M = [[A, -B Huu^{-1} B'], [W, -A']]

are graphs ``lam = E x`` where ``E`` solves the algebraic Riccati equation
``X A + A' X - X B Huu^{-1} B' X - W = 0``.  Both are read off an ordered
real Schur form.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import LegendreError, NonHyperbolicError, SingularSystemError
from .model import LEGENDRE_COND_MAX, LinearizationData

log = logging.getLogger(__name__)

HYPERBOLIC_TOL = 1e-8
ASYMMETRY_WARN = 1e-6


def symplectic_J(n: int) -> np.ndarray:
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


@dataclass(frozen=True)
class HamiltonianMatrix:
    M: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0] // 2

    def structure_defect(self) -> float:
        """``||J M - (J M)'||_inf``; zero for elements of sp(n)."""
        jm = symplectic_J(self.n) @ self.M
        return float(np.max(np.abs(jm - jm.T)))


def build_hamiltonian_matrix(d: LinearizationData, huu: Optional[np.ndarray] = None) -> HamiltonianMatrix:
    huu = d.Huu if huu is None else np.atleast_2d(huu)
    if np.linalg.cond(huu) > LEGENDRE_COND_MAX:
        raise LegendreError("H_uu is singular; cannot build the Hamiltonian matrix")
    bhb = d.B @ np.linalg.solve(huu, d.B.T)
    bhb = 0.5 * (bhb + bhb.T)
    return HamiltonianMatrix(np.block([[d.A, -bhb], [d.W, -d.A.T]]))


@dataclass(frozen=True)
class HyperbolicSplitting:
    E_minus: np.ndarray
    E_plus: np.ndarray
    P: np.ndarray
    Acl_minus: np.ndarray
    Acl_plus: np.ndarray
    C2: float
    asymmetry: float = 0.0

    @property
    def conservative_rate(self) -> float:
        """Half the decay rate, as used in the transient estimates."""
        return 0.5 * self.C2


def are_residual(X: np.ndarray, d: LinearizationData) -> float:
    res = X @ d.A + d.A.T @ X - X @ d.BHB @ X - d.W
    return float(np.max(np.abs(res)))


def _graph(basis: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    v1, v2 = basis[:n], basis[n:]
    if np.linalg.cond(v1) > 1e12:
        raise SingularSystemError("invariant subspace not a graph over the state coordinates")
    E = np.linalg.solve(v1.T, v2.T).T
    asym = float(np.max(np.abs(E - E.T)))
    return 0.5 * (E + E.T), asym


def _newton_refine(X: np.ndarray, d: LinearizationData) -> np.ndarray:
    """One Newton (Kleinman) step on the Riccati equation, kept only if it lowers the residual."""
    bhb = d.BHB
    res = X @ d.A + d.A.T @ X - X @ bhb @ X - d.W
    try:
        delta = sla.solve_continuous_lyapunov((d.A - bhb @ X).T, -res)
    except (np.linalg.LinAlgError, ValueError):
        return X
    cand = X + 0.5 * (delta + delta.T)
    return cand if are_residual(cand, d) < are_residual(X, d) else X


def solve_splitting(
    h: HamiltonianMatrix, d: LinearizationData, huu: Optional[np.ndarray] = None
) -> HyperbolicSplitting:
    n = h.n
    eig = np.linalg.eigvals(h.M)
    margin = float(np.min(np.abs(eig.real)))
    if margin < HYPERBOLIC_TOL:
        raise NonHyperbolicError(
            "non-hyperbolic: turnpike assumptions violated", hyperbolicity_margin=margin
        )
    _, Zs, sdim_s = sla.schur(h.M, output="real", sort="lhp")
    _, Za, sdim_a = sla.schur(h.M, output="real", sort="rhp")
    if sdim_s != n or sdim_a != n:
        raise NonHyperbolicError("stable/antistable subspaces do not split evenly", stable_dim=sdim_s)
    E_minus, asym_m = _graph(Zs[:, :n], n)
    E_plus, asym_p = _graph(Za[:, :n], n)
    asym = max(asym_m, asym_p)
    if asym > ASYMMETRY_WARN:
        warnings.warn(f"Riccati solution asymmetric by {asym:.2e} before symmetrization", RuntimeWarning)
    huu = d.Huu if huu is None else huu
    if huu is d.Huu:
        E_minus, E_plus = _newton_refine(E_minus, d), _newton_refine(E_plus, d)
    bhb = d.B @ np.linalg.solve(huu, d.B.T)
    acl_m = d.A - bhb @ E_minus
    acl_p = d.A - bhb @ E_plus
    C2 = -float(np.max(np.linalg.eigvals(acl_m).real))
    P = np.block([[np.eye(n), np.eye(n)], [E_minus, E_plus]])
    return HyperbolicSplitting(E_minus, E_plus, P, acl_m, acl_p, C2, asym)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    pairing_error: float
    hyperbolicity_margin: float
    has_complex: bool
    all_real: bool

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "pairing_error": self.pairing_error,
            "hyperbolicity_margin": self.hyperbolicity_margin,
            "has_complex": self.has_complex,
        }


def verify_spectrum(h: HamiltonianMatrix) -> SpectrumReport:
    """Pair each eigenvalue with the closest negated one and report the worst mismatch."""
    eig = np.linalg.eigvals(h.M)
    eig = eig[np.lexsort((eig.imag, eig.real))]
    neg = -eig
    unused = list(range(len(eig)))
    worst = 0.0
    for mu in eig:
        dists = [abs(mu - neg[j]) for j in unused]
        j = int(np.argmin(dists))
        worst = max(worst, dists[j])
        unused.pop(j)
    scale = max(1.0, float(np.max(np.abs(eig))))
    has_complex = bool(np.any(np.abs(eig.imag) > 1e-10 * scale))
    return SpectrumReport(
        eigenvalues=eig,
        pairing_error=float(worst),
        hyperbolicity_margin=float(np.min(np.abs(eig.real))),
        has_complex=has_complex,
        all_real=not has_complex,
    )


def diagonalization_defect(h: HamiltonianMatrix, split: HyperbolicSplitting) -> tuple[float, float]:
    """Return (off-diagonal block norm, diagonal-block mismatch) of ``P^{-1} M P``."""
    n = h.n
    D = np.linalg.solve(split.P, h.M @ split.P)
    off = max(np.max(np.abs(D[:n, n:])), np.max(np.abs(D[n:, :n])))
    diag = max(np.max(np.abs(D[:n, :n] - split.Acl_minus)), np.max(np.abs(D[n:, n:] - split.Acl_plus)))
    return float(off), float(diag)


def coupling_defect(split: HyperbolicSplitting) -> float:
    dE = split.E_plus - split.E_minus
    return float(np.max(np.abs(dE @ split.Acl_plus + split.Acl_minus.T @ dE)))


def riccati_report(h: HamiltonianMatrix, d: LinearizationData, split: HyperbolicSplitting) -> dict:
    sr = verify_spectrum(h)
    return {
        "E_minus": split.E_minus.tolist(),
        "E_plus": split.E_plus.tolist(),
        "C2": split.C2,
        "conservative_rate": split.conservative_rate,
        "spectrum": sr.to_dict()["eigenvalues"],
        "spectrum_all_real": sr.all_real,
        "hyperbolicity_margin": sr.hyperbolicity_margin,
        "are_residuals": {
            "E_minus": are_residual(split.E_minus, d),
            "E_plus": are_residual(split.E_plus, d),
        },
    }
