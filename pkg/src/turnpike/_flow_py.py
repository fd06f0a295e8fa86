"""Pure-numpy reference for the compiled RK4 kernel in ``_flow.pyx``.

Same signature and semantics; used when the extension is not built.
"""

from __future__ import annotations

import numpy as np


def _make_rhs(A, S, b0, Q, qxd, mout, mcoef, mpow):
    n = A.shape[0]
    AT = A.T
    has_poly = len(mcoef) > 0
    mask = mpow > 0
    # exponent table for d/dx_l of each monomial: powers minus e_l (clipped where unused)
    dpow = np.maximum(mpow[:, None, :] - np.eye(n, dtype=mpow.dtype)[None, :, :], 0)

    def rhs(z):
        x, lam = z[:n], z[n:]
        dx = A @ x + S @ lam + b0
        dl = Q @ x - AT @ lam - qxd
        if has_poly:
            vals = mcoef * np.prod(x ** mpow, axis=1)
            np.add.at(dx, mout, vals)
            # jac[j, l] = coef_j * p_jl * prod_r x_r ** (p_jr - delta_rl)
            jac = mcoef[:, None] * mpow * np.prod(x ** dpow, axis=2) * mask
            dl -= jac.T @ lam[mout]
        return np.concatenate([dx, dl])

    return rhs


def rk4_affine(z0, t0, t1, steps, A, S, b0, Q, qxd, mout, mcoef, mpow, blowup):
    rhs = _make_rhs(A, S, b0, Q, qxd, np.asarray(mout), np.asarray(mcoef), np.asarray(mpow))
    h = (t1 - t0) / steps
    path = np.empty((steps + 1, len(z0)))
    path[0] = z0
    z = np.array(z0, dtype=float)
    fail = -1
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(steps):
            k1 = rhs(z)
            k2 = rhs(z + 0.5 * h * k1)
            k3 = rhs(z + 0.5 * h * k2)
            k4 = rhs(z + h * k3)
            z = z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            path[s + 1] = z
            if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > blowup:
                fail = s + 1
                break
    return path, fail
