# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernel for the extremal flow of polynomial control-affine
problems with quadratic cost (see ``turnpike._flow_py`` for the reference)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()


cdef inline double _ipow(double x, long p) nogil:
    cdef double r = 1.0
    while p > 0:
        r *= x
        p -= 1
    return r


cdef void _rhs(const double* z, double* dz, Py_ssize_t n,
               const double[:, ::1] A, const double[:, ::1] S, const double[::1] b0,
               const double[:, ::1] Q, const double[::1] qxd,
               const long[::1] mout, const double[::1] mcoef, const long[:, ::1] mpow) noexcept nogil:
    cdef Py_ssize_t i, j, l, r, nm = mcoef.shape[0]
    cdef const double* x = z
    cdef const double* lam = z + n
    cdef double acc, accl, term
    for i in range(n):
        acc = b0[i]
        accl = -qxd[i]
        for j in range(n):
            acc += A[i, j] * x[j] + S[i, j] * lam[j]
            accl += Q[i, j] * x[j] - A[j, i] * lam[j]
        dz[i] = acc
        dz[n + i] = accl
    for j in range(nm):
        term = mcoef[j]
        for l in range(n):
            term *= _ipow(x[l], mpow[j, l])
        dz[mout[j]] += term
        for l in range(n):
            if mpow[j, l] == 0:
                continue
            term = mcoef[j] * mpow[j, l]
            for r in range(n):
                if r == l:
                    term *= _ipow(x[r], mpow[j, r] - 1)
                else:
                    term *= _ipow(x[r], mpow[j, r])
            dz[n + l] -= lam[mout[j]] * term


def rk4_affine(double[::1] z0, double t0, double t1, Py_ssize_t steps,
               double[:, ::1] A, double[:, ::1] S, double[::1] b0,
               double[:, ::1] Q, double[::1] qxd,
               long[::1] mout, double[::1] mcoef, long[:, ::1] mpow,
               double blowup):
    """Integrate ``z = (x, lam)`` from ``t0`` to ``t1`` in ``steps`` RK4 steps.

    Returns ``(path, fail)`` where ``path`` has shape ``(steps + 1, 2n)`` and
    ``fail`` is the first step index whose state left the finite region
    ``|z|_inf <= blowup`` (-1 if none).
    """
    cdef Py_ssize_t n = A.shape[0], d = 2 * n, s, i
    cdef double h = (t1 - t0) / steps
    path_arr = np.empty((steps + 1, d), dtype=np.float64)
    cdef double[:, ::1] path = path_arr
    cdef double[::1] k1 = np.empty(d), k2 = np.empty(d), k3 = np.empty(d), k4 = np.empty(d), tmp = np.empty(d)
    cdef Py_ssize_t fail = -1
    cdef double zmax
    for i in range(d):
        path[0, i] = z0[i]
    with nogil:
        for s in range(steps):
            _rhs(&path[s, 0], &k1[0], n, A, S, b0, Q, qxd, mout, mcoef, mpow)
            for i in range(d):
                tmp[i] = path[s, i] + 0.5 * h * k1[i]
            _rhs(&tmp[0], &k2[0], n, A, S, b0, Q, qxd, mout, mcoef, mpow)
            for i in range(d):
                tmp[i] = path[s, i] + 0.5 * h * k2[i]
            _rhs(&tmp[0], &k3[0], n, A, S, b0, Q, qxd, mout, mcoef, mpow)
            for i in range(d):
                tmp[i] = path[s, i] + h * k3[i]
            _rhs(&tmp[0], &k4[0], n, A, S, b0, Q, qxd, mout, mcoef, mpow)
            zmax = 0.0
            for i in range(d):
                path[s + 1, i] = path[s, i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not isfinite(path[s + 1, i]):
                    zmax = blowup * 2.0 + 1.0
                elif fabs(path[s + 1, i]) > zmax:
                    zmax = fabs(path[s + 1, i])
            if zmax > blowup:
                fail = s + 1
                break
    return path_arr, fail
