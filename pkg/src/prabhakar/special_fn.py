"""Scalar special functions: log-gamma, Pochhammer symbol, beta and the
three-parameter Mittag-Leffler function

    E^gamma_{rho,alpha}(z) = sum_k (gamma)_k z^k / (Gamma(rho k + alpha) k!).

The series is summed in log-magnitude form (log-gamma plus a running
log-Pochhammer product) so that no intermediate factorial overflows.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _backend
from .errors import ConvergenceWarning, DomainError

#: Envelope on |z| inside which the plain series is trusted.
ML_ENVELOPE = 50.0


@dataclass(frozen=True)
class MLParams:
    """Parameters (rho, alpha, gamma, omega) of a Prabhakar kernel.

    ``omega`` is only used by the operators, where the kernel argument is
    ``omega * (psi(x) - psi(t))**rho``.
    """

    rho: float
    alpha: float
    gamma: float
    omega: float = 0.0

    def __post_init__(self):
        for field in ("rho", "alpha", "gamma", "omega"):
            value = getattr(self, field)
            if not math.isfinite(value):
                raise DomainError(f"{field} must be finite, got {value!r}")
            object.__setattr__(self, field, float(value))
        if self.rho <= 0.0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if self.alpha < 0.0:
            raise DomainError(f"alpha must be non-negative, got {self.alpha}")


@dataclass(frozen=True)
class SeriesControl:
    """Truncation settings for a series, and the diagnostics it produced.

    A term stops the sum when ``|term| <= rel_tol * max(|partial|, 1e-300)``
    and it is no larger than the previous term.
    """

    rel_tol: float = 1e-14
    max_terms: int = 1000
    achieved_terms: int = 0
    converged: bool = False

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if int(self.max_terms) < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        object.__setattr__(self, "max_terms", int(self.max_terms))


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def pochhammer(gamma, k):
    """Rising factorial (gamma)_k = gamma (gamma+1) ... (gamma+k-1)."""
    k = int(k)
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    out = 1.0
    for i in range(k):
        out *= gamma + i
    return out


def beta(x, y):
    """Euler beta function B(x, y) for positive arguments."""
    if not (x > 0.0 and y > 0.0):
        raise DomainError(f"beta needs x, y > 0, got ({x}, {y})")
    return math.exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y))


def ml3(p, z, ctl=None):
    """Three-parameter Mittag-Leffler function E^gamma_{rho,alpha}(z).

    Parameters
    ----------
    p : MLParams
        ``p.alpha`` must be positive; ``p.omega`` is ignored.
    z : float
        Real argument.
    ctl : SeriesControl, optional
        Truncation settings; defaults to ``SeriesControl()``.

    Returns
    -------
    value : float
    ctl : SeriesControl
        Copy of ``ctl`` with ``achieved_terms`` and ``converged`` filled in.
        A :class:`ConvergenceWarning` is issued when ``converged`` is false.
    """
    ctl = SeriesControl() if ctl is None else ctl
    if p.alpha <= 0.0:
        raise DomainError("ml3 needs alpha > 0 (Gamma(alpha) is singular at alpha = 0)")
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"z must be finite, got {z}")
    value, n, ok = _backend.impl.ml_sum(p.rho, p.alpha, p.gamma, z, ctl.rel_tol, ctl.max_terms)
    if not ok:
        warnings.warn(
            f"Mittag-Leffler series not converged after {n} terms at z={z}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return value, replace(ctl, achieved_terms=int(n), converged=bool(ok))


def ml3_value(rho, alpha, gamma, z, ctl=None):
    """Shorthand for ``ml3(MLParams(rho, alpha, gamma), z, ctl)[0]``."""
    return ml3(MLParams(rho, alpha, gamma), z, ctl)[0]


def ml3_terms(p, z, n_terms):
    """First ``n_terms`` signed series terms (gamma)_k z^k / (Gamma(rho k+alpha) k!)."""
    out = np.zeros(n_terms)
    log_poch, sign_poch = 0.0, 1.0
    for k in range(n_terms):
        if k > 0:
            factor = p.gamma + k - 1
            if factor == 0.0 or z == 0.0:
                break
            log_poch += math.log(abs(factor))
            sign_poch *= math.copysign(1.0, factor)
        log_mag = (
            log_poch
            + (k * math.log(abs(z)) if k else 0.0)
            - math.lgamma(k + 1.0)
            - math.lgamma(p.rho * k + p.alpha)
        )
        out[k] = sign_poch * (math.copysign(1.0, z) ** k) * math.exp(log_mag)
    return out
