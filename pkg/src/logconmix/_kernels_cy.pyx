# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the weighted log-concave solver.

Mirrors ``_kernels_py`` function for function; see that module for the math
and the stability notes. Tests assert that both backends agree to float
roundoff on the same inputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, expm1, fabs, isfinite

cnp.import_array()

BACKEND_NAME = "cython"

cdef double _SERIES_RADIUS = 0.05
cdef double _VALUE_SERIES_RADIUS = 1e-5

cdef double _G2C[9]
cdef double _G3C[9]


def _init_series_coefficients():
    fact = 1.0
    for k in range(9):
        if k > 0:
            fact *= k
        _G2C[k] = 1.0 / (fact * (k + 2))
        _G3C[k] = 1.0 / (fact * (k + 3))


_init_series_coefficients()


cdef inline double _g1_c(double eps) noexcept nogil:
    if fabs(eps) < _VALUE_SERIES_RADIUS:
        return 1.0 + eps * (0.5 + eps * (1.0 / 6.0 + eps * (1.0 / 24.0)))
    return expm1(eps) / eps


cdef inline double _g2_c(double eps) noexcept nogil:
    cdef double acc
    cdef int k
    if fabs(eps) < _SERIES_RADIUS:
        acc = _G2C[8]
        for k in range(7, -1, -1):
            acc = acc * eps + _G2C[k]
        return acc
    return (eps * exp(eps) - expm1(eps)) / (eps * eps)


cdef inline double _g3_c(double eps) noexcept nogil:
    cdef double acc, ee, em
    cdef int k
    if fabs(eps) < _SERIES_RADIUS:
        acc = _G3C[8]
        for k in range(7, -1, -1):
            acc = acc * eps + _G3C[k]
        return acc
    ee = exp(eps)
    em = expm1(eps)
    return (eps * eps * ee - 2.0 * (eps * ee - em)) / (eps * eps * eps)


cdef inline double _jval_c(double a, double b) noexcept nogil:
    cdef double hi = a if a >= b else b
    return exp(hi) * _g1_c(-fabs(b - a))


cdef inline void _jfirst_c(double a, double b, double *ja, double *jb) noexcept nogil:
    cdef double hi, eps, ehi, g1, g2, near, far
    hi = a if a >= b else b
    eps = -fabs(b - a)
    ehi = exp(hi)
    g1 = _g1_c(eps)
    g2 = _g2_c(eps)
    near = ehi * (g1 - g2)
    far = ehi * g2
    if b >= a:
        ja[0] = far
        jb[0] = near
    else:
        ja[0] = near
        jb[0] = far


cdef inline void _jparts_c(double a, double b, double *ja, double *jb,
                           double *jaa, double *jab, double *jbb) noexcept nogil:
    cdef double hi, eps, ehi, g1, g2, g3, near1, far1, near2, far2
    hi = a if a >= b else b
    eps = -fabs(b - a)
    ehi = exp(hi)
    g1 = _g1_c(eps)
    g2 = _g2_c(eps)
    g3 = _g3_c(eps)
    near1 = ehi * (g1 - g2)
    far1 = ehi * g2
    near2 = ehi * (g1 - 2.0 * g2 + g3)
    far2 = ehi * g3
    jab[0] = ehi * (g2 - g3)
    if b >= a:
        ja[0] = far1
        jb[0] = near1
        jaa[0] = far2
        jbb[0] = near2
    else:
        ja[0] = near1
        jb[0] = far1
        jaa[0] = near2
        jbb[0] = far2


def j_value(double a, double b):
    return _jval_c(a, b)


def j_partials(double a, double b):
    cdef double ja, jb, jaa, jab, jbb
    _jparts_c(a, b, &ja, &jb, &jaa, &jab, &jbb)
    return ja, jb, jaa, jab, jbb


def j_values(a, b):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] aa = np.atleast_1d(np.asarray(a, dtype=np.float64)).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bb = np.atleast_1d(np.asarray(b, dtype=np.float64)).ravel()
    cdef Py_ssize_t n = aa.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    for i in range(n):
        out[i] = _jval_c(aa[i], bb[i])
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return out[0]
    return out


def j_first_partials(a, b):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] aa = np.atleast_1d(np.asarray(a, dtype=np.float64)).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bb = np.atleast_1d(np.asarray(b, dtype=np.float64)).ravel()
    cdef Py_ssize_t n = aa.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ja = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] jb = np.empty(n)
    for i in range(n):
        _jfirst_c(aa[i], bb[i], &ja[i], &jb[i])
    return ja, jb


def j_all_partials(a, b):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] aa = np.atleast_1d(np.asarray(a, dtype=np.float64)).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bb = np.atleast_1d(np.asarray(b, dtype=np.float64)).ravel()
    cdef Py_ssize_t n = aa.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ja = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] jb = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] jaa = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] jab = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] jbb = np.empty(n)
    for i in range(n):
        _jparts_c(aa[i], bb[i], &ja[i], &jb[i], &jaa[i], &jab[i], &jbb[i])
    return ja, jb, jaa, jab, jbb


def segment_integrals(dx, pa, pb):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dxx = np.ascontiguousarray(dx, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] paa = np.ascontiguousarray(pa, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pbb = np.ascontiguousarray(pb, dtype=np.float64)
    cdef Py_ssize_t n = dxx.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    for i in range(n):
        out[i] = dxx[i] * _jval_c(paa[i], pbb[i])
    return out


def knot_objective(dt, phi, weights):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dtt = np.ascontiguousarray(dt, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ph = np.ascontiguousarray(phi, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ww = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t r = ph.shape[0], i
    cdef double lin = 0.0, integral = 0.0
    for i in range(r):
        lin += ww[i] * ph[i]
    for i in range(r - 1):
        integral += dtt[i] * _jval_c(ph[i], ph[i + 1])
    return lin - integral + 1.0


def knot_grad_hess(dt, phi, weights):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dtt = np.ascontiguousarray(dt, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ph = np.ascontiguousarray(phi, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ww = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t r = ph.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad = ww.copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hd = np.zeros(r)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] he = np.empty(r - 1)
    cdef double lin = 0.0, integral = 0.0
    cdef double ja, jb, jaa, jab, jbb
    for i in range(r):
        lin += ww[i] * ph[i]
    for i in range(r - 1):
        integral += dtt[i] * _jval_c(ph[i], ph[i + 1])
        _jparts_c(ph[i], ph[i + 1], &ja, &jb, &jaa, &jab, &jbb)
        grad[i] -= dtt[i] * ja
        grad[i + 1] -= dtt[i] * jb
        hd[i] -= dtt[i] * jaa
        hd[i + 1] -= dtt[i] * jbb
        he[i] = -dtt[i] * jab
    return lin - integral + 1.0, grad, hd, he


def solve_newton_step(hess_diag, hess_off, grad):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] adiag = -np.asarray(hess_diag, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] aoff = -np.asarray(hess_off, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rhs = np.ascontiguousarray(grad, dtype=np.float64)
    cdef Py_ssize_t n = adiag.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dref = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lsub = np.empty(max(n - 1, 1))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(n)
    cdef double base = 0.0, delta = 0.0
    cdef int attempt
    cdef bint ok
    for i in range(n):
        if fabs(adiag[i]) > base:
            base = fabs(adiag[i])
    base = 1e-12 * (1.0 + base)
    for attempt in range(60):
        ok = True
        dref[0] = adiag[0] + delta
        if not (dref[0] > 0.0 and isfinite(dref[0])):
            ok = False
        if ok:
            for i in range(n - 1):
                lsub[i] = aoff[i] / dref[i]
                dref[i + 1] = adiag[i + 1] + delta - aoff[i] * lsub[i]
                if not (dref[i + 1] > 0.0 and isfinite(dref[i + 1])):
                    ok = False
                    break
        if ok:
            for i in range(n):
                y[i] = rhs[i]
            for i in range(1, n):
                y[i] -= lsub[i - 1] * y[i - 1]
            for i in range(n):
                y[i] /= dref[i]
            for i in range(n - 2, -1, -1):
                y[i] -= lsub[i] * y[i + 1]
            for i in range(n):
                if not isfinite(y[i]):
                    ok = False
                    break
        if ok:
            return y.copy()
        delta = base if delta == 0.0 else 2.0 * delta
    raise FloatingPointError("tridiagonal Newton system could not be stabilized")


def interp_to_points(x, knot_idx, phi_knots):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] kk = np.ascontiguousarray(knot_idx, dtype=np.intp)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pk = np.ascontiguousarray(phi_knots, dtype=np.float64)
    cdef Py_ssize_t m = xx.shape[0], r = kk.shape[0], i, j = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m)
    cdef double t0, t1, frac
    for i in range(m):
        while j < r - 2 and xx[i] >= xx[kk[j + 1]]:
            j += 1
        t0 = xx[kk[j]]
        t1 = xx[kk[j + 1]]
        frac = (xx[i] - t0) / (t1 - t0)
        out[i] = pk[j] + frac * (pk[j + 1] - pk[j])
    for j in range(r):
        out[kk[j]] = pk[j]
    return out


def aggregate_weights(x, w, knot_idx):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] kk = np.ascontiguousarray(knot_idx, dtype=np.intp)
    cdef Py_ssize_t m = xx.shape[0], r = kk.shape[0], i, j = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(r)
    cdef double t0, t1, frac
    for i in range(m):
        while j < r - 2 and xx[i] >= xx[kk[j + 1]]:
            j += 1
        t0 = xx[kk[j]]
        t1 = xx[kk[j + 1]]
        frac = (xx[i] - t0) / (t1 - t0)
        out[j] += ww[i] * (1.0 - frac)
        out[j + 1] += ww[i] * frac
    return out


def integral_grad_terms(x, phi_all):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ph = np.ascontiguousarray(phi_all, dtype=np.float64)
    cdef Py_ssize_t m = xx.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] terms = np.zeros(m)
    cdef double ja, jb, dx
    for i in range(m - 1):
        dx = xx[i + 1] - xx[i]
        _jfirst_c(ph[i], ph[i + 1], &ja, &jb)
        terms[i] += dx * ja
        terms[i + 1] += dx * jb
    return terms


def multipliers(x, grad_full):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gg = np.ascontiguousarray(grad_full, dtype=np.float64)
    cdef Py_ssize_t m = xx.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lam = np.empty(m)
    cdef double s = 0.0
    lam[0] = 0.0
    for i in range(m - 1):
        s += gg[i]
        lam[i + 1] = lam[i] + (xx[i + 1] - xx[i]) * s
    return lam
