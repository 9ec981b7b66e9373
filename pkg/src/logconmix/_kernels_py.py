"""Pure-numpy kernels for the weighted log-concave solver.

This module is the reference implementation; ``_kernels_cy`` mirrors it in
Cython. Everything here works on float64 arrays and is free of Python-level
branching per element.

Central object: the exponential-segment integral

    J(a, b) = integral_0^1 exp((1-t) a + t b) dt = (e^b - e^a) / (b - a)

and its first and second partial derivatives. A piecewise-linear phi on
points t_0 < ... < t_R has integral(e^phi) = sum_j (t_{j+1}-t_j) J(phi_j,
phi_{j+1}), so these six numbers per segment assemble the objective,
gradient, and (tridiagonal) Hessian of the fitting problem.

Stability notes, used identically in both backends:
- values and partials are anchored at max(a, b), so the G-functions below
  are always evaluated at eps = -|b - a| <= 0 and stay in (0, 1]; overflow
  can then only happen when exp(max(a, b)) itself overflows.
- G1(eps) = expm1(eps)/eps is cancellation-free as written.
- G2, G3 (the t- and t^2-moments of e^{t eps}) cancel at the eps^2/2 and
  eps^3/3 level, so closed forms lose ~eps_mach/|eps| relative accuracy;
  a truncated series (terms through eps^8) is used for |eps| < 0.05, which
  keeps worst-case relative error around 1e-12 across the seam.
- the value itself follows the tighter contract: series only for
  |b - a| < 1e-5, the expm1 form otherwise.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_SERIES_RADIUS = 0.05  # partials switch to series inside this |b - a|
_VALUE_SERIES_RADIUS = 1e-5


def _g1(eps):
    """integral_0^1 e^{t eps} dt, eps <= 0 array or scalar."""
    eps = np.asarray(eps, dtype=float)
    small = np.abs(eps) < _VALUE_SERIES_RADIUS
    safe = np.where(small, 1.0, eps)
    series = 1.0 + eps * (0.5 + eps * (1.0 / 6.0 + eps * (1.0 / 24.0)))
    return np.where(small, series, np.expm1(safe) / safe)


def _poly(eps, coeffs):
    """Horner evaluation of sum_k coeffs[k] eps^k."""
    out = np.zeros_like(eps) + coeffs[-1]
    for c in coeffs[-2::-1]:
        out = out * eps + c
    return out


# series coefficients: G2_k = 1/(k! (k+2)), G3_k = 1/(k! (k+3)), through k=8
_G2_COEF = []
_G3_COEF = []
_fact = 1.0
for _k in range(9):
    if _k > 0:
        _fact *= _k
    _G2_COEF.append(1.0 / (_fact * (_k + 2)))
    _G3_COEF.append(1.0 / (_fact * (_k + 3)))
del _fact, _k


def _g2(eps):
    """integral_0^1 t e^{t eps} dt."""
    eps = np.asarray(eps, dtype=float)
    small = np.abs(eps) < _SERIES_RADIUS
    safe = np.where(small, 1.0, eps)
    series = _poly(eps, _G2_COEF)
    closed = (safe * np.exp(safe) - np.expm1(safe)) / (safe * safe)
    return np.where(small, series, closed)


def _g3(eps):
    """integral_0^1 t^2 e^{t eps} dt."""
    eps = np.asarray(eps, dtype=float)
    small = np.abs(eps) < _SERIES_RADIUS
    safe = np.where(small, 1.0, eps)
    series = _poly(eps, _G3_COEF)
    ee = np.exp(safe)
    em = np.expm1(safe)
    closed = (safe * safe * ee - 2.0 * (safe * ee - em)) / (safe * safe * safe)
    return np.where(small, series, closed)


def j_values(a, b):
    """Elementwise J(a, b); symmetric in its arguments."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    hi = np.maximum(a, b)
    eps = -np.abs(b - a)
    return np.exp(hi) * _g1(eps)


def j_value(a: float, b: float) -> float:
    return float(j_values(a, b))


def j_first_partials(a, b):
    """Elementwise (dJ/da, dJ/db)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    hi = np.maximum(a, b)
    eps = -np.abs(b - a)
    ehi = np.exp(hi)
    g1 = _g1(eps)
    g2 = _g2(eps)
    near = ehi * (g1 - g2)   # partial wrt the larger argument
    far = ehi * g2           # partial wrt the smaller argument
    b_is_hi = b >= a
    ja = np.where(b_is_hi, far, near)
    jb = np.where(b_is_hi, near, far)
    return ja, jb


def j_all_partials(a, b):
    """Elementwise (dJ/da, dJ/db, d2J/da2, d2J/dadb, d2J/db2)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    hi = np.maximum(a, b)
    eps = -np.abs(b - a)
    ehi = np.exp(hi)
    g1 = _g1(eps)
    g2 = _g2(eps)
    g3 = _g3(eps)
    near1 = ehi * (g1 - g2)
    far1 = ehi * g2
    near2 = ehi * (g1 - 2.0 * g2 + g3)   # second partial, larger argument
    far2 = ehi * g3                      # second partial, smaller argument
    cross = ehi * (g2 - g3)
    b_is_hi = b >= a
    ja = np.where(b_is_hi, far1, near1)
    jb = np.where(b_is_hi, near1, far1)
    jaa = np.where(b_is_hi, far2, near2)
    jbb = np.where(b_is_hi, near2, far2)
    return ja, jb, jaa, cross, jbb


def j_partials(a: float, b: float):
    ja, jb, jaa, jab, jbb = j_all_partials(a, b)
    return float(ja), float(jb), float(jaa), float(jab), float(jbb)


def segment_integrals(dx, pa, pb):
    """Per-segment integral of e^phi: dx_j * J(pa_j, pb_j)."""
    return np.asarray(dx, dtype=float) * j_values(pa, pb)


def knot_objective(dt, phi, weights) -> float:
    """psi = sum(W phi) - integral(e^phi) + 1 on the knot grid."""
    integral = float(np.sum(segment_integrals(dt, phi[:-1], phi[1:])))
    return float(np.dot(weights, phi)) - integral + 1.0


def knot_grad_hess(dt, phi, weights):
    """Objective, gradient, and tridiagonal Hessian on the knot grid.

    Returns ``(psi, grad, hess_diag, hess_off)`` where the Hessian of psi is
    symmetric tridiagonal with diagonal ``hess_diag`` (length R) and
    off-diagonal ``hess_off`` (length R-1). It is negative definite.
    """
    dt = np.asarray(dt, dtype=float)
    phi = np.asarray(phi, dtype=float)
    weights = np.asarray(weights, dtype=float)
    pa = phi[:-1]
    pb = phi[1:]
    ja, jb, jaa, jab, jbb = j_all_partials(pa, pb)
    jval = j_values(pa, pb)
    psi = float(np.dot(weights, phi) - np.dot(dt, jval) + 1.0)

    grad = weights.copy()
    grad[:-1] -= dt * ja
    grad[1:] -= dt * jb

    hd = np.zeros_like(phi)
    hd[:-1] -= dt * jaa
    hd[1:] -= dt * jbb
    he = -dt * jab
    return psi, grad, hd, he


def solve_newton_step(hess_diag, hess_off, grad):
    """Solve (-H) d = grad for the ascent direction d.

    -H is symmetric tridiagonal and positive definite in exact arithmetic.
    If the LDL^T sweep hits a non-positive or non-finite pivot (possible when
    a segment's density mass underflows), the diagonal is regularized by
    delta = 1e-12 * (1 + max|diag|), doubling until the sweep succeeds.
    """
    adiag = -np.asarray(hess_diag, dtype=float)
    aoff = -np.asarray(hess_off, dtype=float)
    delta = 0.0
    base = 1e-12 * (1.0 + float(np.max(np.abs(adiag))))
    for _ in range(60):
        d = _ldl_tridiag_solve(adiag + delta, aoff, grad)
        if d is not None:
            return d
        delta = base if delta == 0.0 else 2.0 * delta
    raise FloatingPointError("tridiagonal Newton system could not be stabilized")


def _ldl_tridiag_solve(adiag, aoff, rhs):
    n = adiag.shape[0]
    dref = np.empty(n)
    lsub = np.empty(max(n - 1, 0))
    dref[0] = adiag[0]
    if not (dref[0] > 0.0 and np.isfinite(dref[0])):
        return None
    for i in range(n - 1):
        lsub[i] = aoff[i] / dref[i]
        dref[i + 1] = adiag[i + 1] - aoff[i] * lsub[i]
        if not (dref[i + 1] > 0.0 and np.isfinite(dref[i + 1])):
            return None
    y = np.asarray(rhs, dtype=float).copy()
    for i in range(1, n):
        y[i] -= lsub[i - 1] * y[i - 1]
    y /= dref
    for i in range(n - 2, -1, -1):
        y[i] -= lsub[i] * y[i + 1]
    if not np.all(np.isfinite(y)):
        return None
    return y


def interp_to_points(x, knot_idx, phi_knots):
    """Evaluate the piecewise-linear phi (knots at x[knot_idx]) at every x."""
    x = np.asarray(x, dtype=float)
    t = x[knot_idx]
    seg = np.clip(np.searchsorted(t, x, side="right") - 1, 0, len(t) - 2)
    dt = t[seg + 1] - t[seg]
    frac = (x - t[seg]) / dt
    out = phi_knots[seg] + frac * (phi_knots[seg + 1] - phi_knots[seg])
    out[knot_idx] = phi_knots  # knots exact, immune to lerp roundoff
    return out


def aggregate_weights(x, w, knot_idx):
    """Collapse point weights onto knots by linear interpolation shares."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    t = x[knot_idx]
    seg = np.clip(np.searchsorted(t, x, side="right") - 1, 0, len(t) - 2)
    frac = (x - t[seg]) / (t[seg + 1] - t[seg])
    out = np.zeros(len(t))
    np.add.at(out, seg, w * (1.0 - frac))
    np.add.at(out, seg + 1, w * frac)
    return out


def integral_grad_terms(x, phi_all):
    """d(integral e^phi)/d(phi_i) on the full point grid."""
    x = np.asarray(x, dtype=float)
    phi_all = np.asarray(phi_all, dtype=float)
    dx = np.diff(x)
    ja, jb = j_first_partials(phi_all[:-1], phi_all[1:])
    terms = np.zeros_like(phi_all)
    terms[:-1] += dx * ja
    terms[1:] += dx * jb
    return terms


def multipliers(x, grad_full):
    """Concavity-constraint multipliers from the full gradient.

    With constraints c_i = slope(i-1,i) - slope(i,i+1) >= 0 the KKT
    stationarity condition g = -C^T lambda inverts in closed form:
    lambda_{k+1} = lambda_k + (x_{k+1}-x_k) * sum_{j<=k} g_j, lambda_0 = 0.
    Entries at interior points are the multipliers; lambda at both endpoints
    is structurally zero (index 0 by construction, index m-1 approximately at
    a stationary point).
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(grad_full, dtype=float)
    partial = np.cumsum(g)[:-1]
    lam = np.concatenate(([0.0], np.cumsum(np.diff(x) * partial)))
    return lam
