"""Pure numpy implementation of the numerical kernels.

Used when the compiled ``_kernels`` extension is not importable. The two
modules expose the same four functions with identical signatures:

``ml_sum``
    truncated three-parameter Mittag-Leffler series at a scalar argument.
``op_weights``
    product-integration weights of the Prabhakar operator at one target.
``op_matrix``
    the same weights for every node of a grid, stacked row-wise.
``volterra_forward``
    forward substitution for a lower-triangular second-kind system.
"""

from math import exp, inf, isfinite, lgamma, log

import numpy as np

FLOOR = 1e-300


def _coef_log(k, log_abs_omega, log_poch, rho, alpha):
    """log|omega^k (gamma)_k / (k! Gamma(rho k + alpha))|."""
    a = rho * k + alpha
    return k * log_abs_omega + log_poch - lgamma(k + 1.0) - lgamma(a)


def ml_sum(rho, alpha, gamma, z, rel_tol, max_terms):
    """Return ``(value, n_terms, converged)`` for E^gamma_{rho,alpha}(z)."""
    total = 0.0
    prev = None
    log_poch = 0.0
    sign_poch = 1.0
    log_z = log(abs(z)) if z != 0.0 else 0.0
    sign_z = -1.0 if z < 0.0 else 1.0
    for k in range(max_terms):
        if k > 0:
            factor = gamma + k - 1
            if factor == 0.0 or z == 0.0:
                # every later term carries this zero factor
                return total, k + 1, True
            log_poch += log(abs(factor))
            if factor < 0.0:
                sign_poch = -sign_poch
        x = k * log_z + log_poch - lgamma(k + 1.0) - lgamma(rho * k + alpha)
        mag = exp(x) if x < 709.0 else inf
        term = sign_poch * (sign_z**k) * mag
        total += term
        if not isfinite(total):
            # overflow is a failure, not a converged value
            return total, k + 1, False
        if k > 0 and mag <= rel_tol * max(abs(total), FLOOR) and mag <= prev:
            return total, k + 1, True
        prev = mag
    return total, max_terms, False


def _term_weights(d, h, a, log_c, far, lp):
    """Weights of one series term: |c| * int (S-s)^(a-1) * hat_j(s) ds.

    Far from the target (d >= h) the moment differences are formed through
    expm1/log1p, which removes one of the two cancellations of size d/h.
    """
    with np.errstate(divide="ignore", under="ignore"):
        logd = np.log(d)
        D = np.exp(a * logd + log_c)
    D[d == 0.0] = 0.0
    dl, dr = d[:-1], d[1:]
    Dl, Dr = D[:-1], D[1:]
    A0 = (Dl - Dr) / a
    A1 = (Dl * dl - Dr * dr) / (a + 1.0)
    if lp.size:
        base = Dr[far]
        A0[far] = base * np.expm1(a * lp) / a
        A1[far] = base * dr[far] * np.expm1((a + 1.0) * lp) / (a + 1.0)
    left = (A1 - dr * A0) / h
    right = (dl * A0 - A1) / h
    w = np.zeros_like(d)
    w[:-1] += left
    w[1:] += right
    return w


def op_weights(s, rho, alpha, gamma, omega, rel_tol, max_terms):
    """Weights ``w`` with ``sum(w * f(s)) ~ E f(s[-1])`` for piecewise-linear f.

    The kernel is expanded as a series of Riemann-Liouville kernels of order
    ``rho*k + alpha``; each is integrated exactly against the hat functions.
    Returns ``(w, n_terms, converged)``.
    """
    s = np.asarray(s, dtype=float)
    n = s.shape[0]
    if n < 2:
        return np.zeros(n), 0, True
    d = s[-1] - s
    d[-1] = 0.0
    h = np.diff(s)
    far = d[1:] >= h
    lp = np.log1p(h[far] / d[1:][far])
    total = np.zeros(n)
    log_abs_omega = log(abs(omega)) if omega != 0.0 else 0.0
    sign_omega = -1.0 if omega < 0.0 else 1.0
    log_poch = 0.0
    sign_poch = 1.0
    prev = None
    for k in range(max_terms):
        if k > 0:
            factor = gamma + k - 1
            if factor == 0.0 or omega == 0.0:
                return total, k + 1, True
            log_poch += log(abs(factor))
            if factor < 0.0:
                sign_poch = -sign_poch
        a = rho * k + alpha
        log_c = _coef_log(k, log_abs_omega, log_poch, rho, alpha)
        w = _term_weights(d, h, a, log_c, far, lp)
        sign = sign_poch * (sign_omega**k)
        mag = float(np.sum(np.abs(w)))
        if sign < 0.0:
            total -= w
        else:
            total += w
        if k > 0 and mag <= rel_tol * max(float(np.sum(np.abs(total))), FLOOR) and mag <= prev:
            return total, k + 1, True
        prev = mag
    return total, max_terms, False


def op_matrix(s, rho, alpha, gamma, omega, rel_tol, max_terms):
    """Row ``i`` holds ``op_weights(s[:i+1], ...)``; returns ``(W, max_terms_used, all_converged)``."""
    s = np.asarray(s, dtype=float)
    n = s.shape[0]
    W = np.zeros((n, n))
    used = 0
    ok = True
    for i in range(1, n):
        w, k, conv = op_weights(s[: i + 1], rho, alpha, gamma, omega, rel_tol, max_terms)
        W[i, : i + 1] = w
        used = max(used, k)
        ok = ok and conv
    return W, used, ok


def volterra_forward(W, lam, F, tiny):
    """Solve ``u = F + lam * W u`` for lower-triangular ``W``.

    Raises ``ZeroDivisionError`` with the failing index when the implicit
    diagonal coefficient ``1 - lam * W[i, i]`` is below ``tiny``.
    """
    W = np.asarray(W, dtype=float)
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    u = np.zeros(n)
    for i in range(n):
        diag = 1.0 - lam * W[i, i]
        if abs(diag) < tiny:
            raise ZeroDivisionError(i)
        acc = F[i] + lam * np.dot(W[i, :i], u[:i])
        u[i] = acc / diag
    return u
