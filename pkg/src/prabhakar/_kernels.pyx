# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_fallback`` for the reference numpy version."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log, log1p, lgamma, fabs, isfinite

cnp.import_array()

cdef double FLOOR = 1e-300


def ml_sum(double rho, double alpha, double gamma, double z,
           double rel_tol, int max_terms):
    cdef double total = 0.0, prev = 0.0, log_poch = 0.0, sign_poch = 1.0
    cdef double log_z = log(fabs(z)) if z != 0.0 else 0.0
    cdef double sign_z = -1.0 if z < 0.0 else 1.0
    cdef double sign_zk = 1.0, factor, mag, term
    cdef int k
    for k in range(max_terms):
        if k > 0:
            factor = gamma + k - 1
            if factor == 0.0 or z == 0.0:
                return total, k + 1, True
            log_poch += log(fabs(factor))
            if factor < 0.0:
                sign_poch = -sign_poch
            sign_zk *= sign_z
        mag = exp(k * log_z + log_poch - lgamma(k + 1.0) - lgamma(rho * k + alpha))
        term = sign_poch * sign_zk * mag
        total += term
        if not isfinite(total):
            return total, k + 1, False
        if k > 0 and mag <= rel_tol * (fabs(total) if fabs(total) > FLOOR else FLOOR) and mag <= prev:
            return total, k + 1, True
        prev = mag
    return total, max_terms, False


cdef int _weights(const double[::1] s, Py_ssize_t n, double rho, double alpha,
                  double gamma, double omega, double rel_tol, int max_terms,
                  double[::1] out, double[::1] logd, double[::1] D,
                  double[::1] tmp, double[::1] lpv, int* used) noexcept nogil:
    """Fill out[:n] with the operator weights at target s[n-1]; return converged flag."""
    cdef Py_ssize_t j
    cdef int k
    cdef double S = s[n - 1]
    cdef double log_abs_omega = log(fabs(omega)) if omega != 0.0 else 0.0
    cdef double sign_omega = -1.0 if omega < 0.0 else 1.0
    cdef double sign_ok = 1.0, log_poch = 0.0, sign_poch = 1.0
    cdef double factor, a, log_c, sign, mag, tot_mag, prev = 0.0
    cdef double dl, dr, A0, A1, h, left, right, lp
    for j in range(n):
        out[j] = 0.0
        if j < n - 1:
            logd[j] = log(S - s[j])
            dr = S - s[j + 1] if j + 1 < n - 1 else 0.0
            h = s[j + 1] - s[j]
            lpv[j] = log1p(h / dr) if dr >= h else 0.0
    if n < 2:
        used[0] = 0
        return 1
    for k in range(max_terms):
        if k > 0:
            factor = gamma + k - 1
            if factor == 0.0 or omega == 0.0:
                used[0] = k + 1
                return 1
            log_poch += log(fabs(factor))
            if factor < 0.0:
                sign_poch = -sign_poch
            sign_ok *= sign_omega
        a = rho * k + alpha
        log_c = k * log_abs_omega + log_poch - lgamma(k + 1.0) - lgamma(a)
        for j in range(n - 1):
            D[j] = exp(a * logd[j] + log_c)
        D[n - 1] = 0.0
        for j in range(n):
            tmp[j] = 0.0
        for j in range(n - 1):
            dl = S - s[j]
            dr = S - s[j + 1] if j + 1 < n - 1 else 0.0
            h = s[j + 1] - s[j]
            if dr >= h:
                lp = lpv[j]
                A0 = D[j + 1] * expm1(a * lp) / a
                A1 = D[j + 1] * dr * expm1((a + 1.0) * lp) / (a + 1.0)
            else:
                A0 = (D[j] - D[j + 1]) / a
                A1 = (D[j] * dl - D[j + 1] * dr) / (a + 1.0)
            left = (A1 - dr * A0) / h
            right = (dl * A0 - A1) / h
            tmp[j] += left
            tmp[j + 1] += right
        sign = sign_poch * sign_ok
        mag = 0.0
        tot_mag = 0.0
        for j in range(n):
            mag += fabs(tmp[j])
            if sign < 0.0:
                out[j] -= tmp[j]
            else:
                out[j] += tmp[j]
            tot_mag += fabs(out[j])
        if k > 0 and mag <= rel_tol * (tot_mag if tot_mag > FLOOR else FLOOR) and mag <= prev:
            used[0] = k + 1
            return 1
        prev = mag
    used[0] = max_terms
    return 0


def op_weights(s, double rho, double alpha, double gamma, double omega,
               double rel_tol, int max_terms):
    cdef double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t n = sv.shape[0]
    out = np.zeros(n)
    cdef double[::1] ov = out
    cdef double[::1] logd = np.zeros(n)
    cdef double[::1] D = np.zeros(n)
    cdef double[::1] tmp = np.zeros(n)
    cdef double[::1] lpv = np.zeros(n)
    cdef int used = 0
    cdef int ok
    with nogil:
        ok = _weights(sv, n, rho, alpha, gamma, omega, rel_tol, max_terms, ov, logd, D, tmp, lpv, &used)
    return out, used, bool(ok)


def op_matrix(s, double rho, double alpha, double gamma, double omega,
              double rel_tol, int max_terms):
    cdef double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t n = sv.shape[0]
    W = np.zeros((n, n))
    cdef double[:, ::1] Wv = W
    cdef double[::1] row = np.zeros(n)
    cdef double[::1] logd = np.zeros(n)
    cdef double[::1] D = np.zeros(n)
    cdef double[::1] tmp = np.zeros(n)
    cdef double[::1] lpv = np.zeros(n)
    cdef int used = 0, max_used = 0, ok = 1
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(1, n):
            if not _weights(sv, i + 1, rho, alpha, gamma, omega, rel_tol, max_terms, row, logd, D, tmp, lpv, &used):
                ok = 0
            if used > max_used:
                max_used = used
            for j in range(i + 1):
                Wv[i, j] = row[j]
    return W, max_used, bool(ok)


def volterra_forward(W, double lam, F, double tiny):
    cdef double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef double[::1] Fv = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = Fv.shape[0]
    u = np.zeros(n)
    cdef double[::1] uv = u
    cdef Py_ssize_t i, j
    cdef double acc, diag
    cdef Py_ssize_t bad = -1
    with nogil:
        for i in range(n):
            diag = 1.0 - lam * Wv[i, i]
            if fabs(diag) < tiny:
                bad = i
                break
            acc = 0.0
            for j in range(i):
                acc += Wv[i, j] * uv[j]
            uv[i] = (Fv[i] + lam * acc) / diag
    if bad >= 0:
        raise ZeroDivisionError(bad)
    return u
