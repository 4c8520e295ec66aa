"""Fractional operators with respect to an increasing map psi.

All quadrature works in the variable s = psi(t). A sampled function is
reconstructed piecewise-linearly between the node images s_j = psi(x_j) and
each linear piece is integrated exactly against the weakly singular kernel
(psi(x) - s)^(a-1), so the singularity at t = x costs nothing extra. The
Prabhakar operator

    E[f](x) = int_a^x psi'(t) (psi(x)-psi(t))^(alpha-1)
              E^gamma_{rho,alpha}[omega (psi(x)-psi(t))^rho] f(t) dt

is evaluated as the series sum_k omega^k (gamma)_k / k! * I^(rho k + alpha) f
of Riemann-Liouville integrals sharing those exact moments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import _backend
from .errors import ConvergenceWarning, DomainError, EnvelopeError, GridWarning
from .psi import PsiMap, psi_eval, psi_grid
from .special_fn import ML_ENVELOPE, MLParams, SeriesControl, ml3

DEFAULT_NODES = 400
MIN_NODES = 8


@dataclass(frozen=True)
class OperatorSpec:
    """Left-sided Prabhakar operator E^{gamma;psi}_{rho,alpha,omega;a+}.

    The base point ``a`` is the left end of ``psi.domain``. ``alpha == 0``
    is accepted only together with ``gamma == 0``, where the operator is the
    identity. Right-sided operators go through :func:`prabhakar_apply_right`.
    """

    ml: MLParams
    psi: PsiMap
    side: str = "left"

    def __post_init__(self):
        if self.side != "left":
            raise DomainError("only left-sided specs; use psi.reflect for the right side")
        if self.ml.alpha <= 0.0 and not self.is_identity:
            raise DomainError("operator order alpha must be positive")

    @classmethod
    def make(cls, rho, alpha, gamma, omega, psi):
        return cls(MLParams(rho, alpha, gamma, omega), psi)

    @property
    def a(self):
        return self.psi.a

    @property
    def is_identity(self):
        return self.ml.alpha == 0.0 and self.ml.gamma == 0.0

    def with_params(self, **changes):
        return replace(self, ml=replace(self.ml, **changes))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values of a function on a strictly increasing x-grid.

    ``func`` (optional) is the analytic callable; when present it is used for
    off-node evaluation instead of interpolation.
    """

    nodes: np.ndarray
    values: np.ndarray
    func: Optional[Callable] = None

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        values = np.ascontiguousarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape:
            raise DomainError("nodes and values must be 1-d arrays of equal length")
        if nodes.size < 2 or np.any(np.diff(nodes) <= 0.0):
            raise DomainError("nodes must be strictly increasing (at least two)")
        if not np.all(np.isfinite(values)):
            raise DomainError("sampled values must be finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, func, psi, n=DEFAULT_NODES, lo=None, hi=None):
        """Sample ``func`` on ``n`` nodes uniform in psi."""
        x = psi_grid(psi, n, lo, hi)
        return cls(x, _call(func, x), func)

    def at(self, x, psi):
        """Value at ``x``: analytic if known, else linear in s = psi(x)."""
        if self.func is not None:
            return float(_call(self.func, np.array([x]))[0])
        s = psi_eval(psi, self.nodes)
        return float(np.interp(psi_eval(psi, x), s, self.values))


@dataclass(frozen=True)
class WeightedNorm:
    nu: float
    value: float

    def __post_init__(self):
        if not 0.0 <= self.nu < 1.0:
            raise DomainError(f"weight exponent nu must lie in [0, 1), got {self.nu}")


def _call(func, x):
    """Evaluate ``func`` on an array, falling back to a per-point loop."""
    x = np.asarray(x, dtype=float)
    try:
        out = np.asarray(func(x), dtype=float)
        if out.shape == x.shape:
            return out
        if out.ndim == 0:
            return np.full_like(x, float(out))
    except (TypeError, ValueError):
        pass
    return np.array([float(func(float(t))) for t in x])


def _as_sampled(f, psi, n=DEFAULT_NODES):
    if isinstance(f, SampledFunction):
        return f
    return SampledFunction.from_callable(f, psi, n)


def _check_x(psi, x):
    x = float(x)
    a, b = psi.domain
    if not a <= x <= b:
        raise DomainError(f"x={x} outside [{a}, {b}]")
    return x


def _check_envelope(ml, span):
    if ml.omega != 0.0 and abs(ml.omega) * span**ml.rho > ML_ENVELOPE:
        raise EnvelopeError(
            f"|omega|*(psi(x)-psi(a))^rho = {abs(ml.omega) * span**ml.rho:.3g} exceeds {ML_ENVELOPE}"
        )


def _segment(psi, f, x):
    """s-nodes and values of ``f`` restricted to [a, x], ending exactly at psi(x)."""
    a = psi.a
    if abs(f.nodes[0] - a) > 1e-12 * max(1.0, abs(a)):
        raise DomainError(f"sampled function must start at the base point a={a}")
    S = psi_eval(psi, x)
    s = psi_eval(psi, f.nodes)
    scale = max(1.0, abs(S))
    k = int(np.searchsorted(s, S + 1e-14 * scale, side="right"))
    if k > 0 and abs(s[k - 1] - S) <= 1e-14 * scale:
        seg_s = s[:k].copy()
        seg_s[-1] = S
        return seg_s, f.values[:k]
    return np.append(s[:k], S), np.append(f.values[:k], f.at(x, psi))


def _weights(ml, s, ctl):
    w, n, ok = _backend.impl.op_weights(s, ml.rho, ml.alpha, ml.gamma, ml.omega, ctl.rel_tol, ctl.max_terms)
    return w, replace(ctl, achieved_terms=int(n), converged=bool(ok))


def _apply(ml, psi, f, x, ctl, warn_grid=True):
    x = _check_x(psi, x)
    if x == psi.a:
        return 0.0, replace(ctl, achieved_terms=0, converged=True)
    s, v = _segment(psi, f, x)
    _check_envelope(ml, s[-1] - s[0])
    if warn_grid and s.size - 1 < MIN_NODES:
        warnings.warn(f"only {s.size - 1} grid nodes in [a, x]; result may be inaccurate", GridWarning, stacklevel=3)
    w, ctl = _weights(ml, s, ctl)
    if not ctl.converged:
        warnings.warn(f"operator series not converged after {ctl.achieved_terms} terms", ConvergenceWarning, stacklevel=3)
    return float(np.dot(w, v)), ctl


# Riemann-Liouville and Caputo ---------------------------------------------


def rl_power(alpha, delta, psi, a, x):
    """I^alpha applied to (psi(t)-psi(a))^(delta-1), in closed form."""
    if not (alpha > 0.0 and delta > 0.0):
        raise DomainError("rl_power needs alpha > 0 and delta > 0")
    span = psi_eval(psi, x) - psi_eval(psi, a)
    coef = math.exp(math.lgamma(delta) - math.lgamma(alpha + delta))
    return coef * span ** (alpha + delta - 1.0)


def rl_apply(alpha, psi, f, x):
    """Psi-Riemann-Liouville integral I^{alpha;psi}_{a+} f at x by product integration.

    ``f`` is a :class:`SampledFunction` starting at ``a = psi.a`` (a callable
    is sampled on the default grid). Exact whenever f is linear in psi.
    """
    if not alpha > 0.0:
        raise DomainError("rl_apply needs alpha > 0")
    f = _as_sampled(f, psi)
    ml = MLParams(1.0, alpha, 0.0, 0.0)
    return _apply(ml, psi, f, x, SeriesControl())[0]


def _fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative on integer offsets."""
    offsets = np.asarray(offsets, dtype=float)
    m = offsets.size
    V = np.vander(offsets, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def psi_derivative(f, psi, x, order, step=None):
    """f^{[n]}_psi = ((1/psi') d/dx)^n f, as the n-th derivative in s = psi(x).

    Second-order central differences with step ``step`` in s (default
    1e-4 * (psi(b) - psi(a))); one-sided stencils of the same order where a
    central stencil would leave the domain of psi.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s_lo, s_hi = psi_eval(psi, psi.a), psi_eval(psi, psi.b)
    hs = (s_hi - s_lo) * 1e-4 if step is None else float(step)
    half = (order + 1) // 2
    central = np.arange(-half, half + 1)
    forward = np.arange(0, order + 2)
    backward = -forward[::-1]
    stencils = {}
    for key, offs in (("c", central), ("f", forward), ("b", backward)):
        stencils[key] = (offs, _fd_weights(offs, order) / hs**order)
    s = psi_eval(psi, x)
    choice = np.where(s - half * hs < s_lo, "f", np.where(s + half * hs > s_hi, "b", "c"))
    points, owners, coefs = [], [], []
    for i, (si, key) in enumerate(zip(np.atleast_1d(s), choice)):
        offs, w = stencils[key]
        points.append(si + offs * hs)
        owners.append(np.full(offs.size, i))
        coefs.append(w)
    pts = np.clip(np.concatenate(points), s_lo, s_hi)
    vals = _call(f, psi.inverse(pts))
    out = np.bincount(np.concatenate(owners), weights=np.concatenate(coefs) * vals, minlength=x.size)
    return out


def caputo_apply(beta, psi, f, x, derivative=None, n_nodes=DEFAULT_NODES, step=None):
    """Psi-Caputo derivative of order beta (non-integer) at x.

    Computes I^{n-beta} f^{[n]}_psi with n = floor(beta) + 1, where f^{[n]}_psi
    is sampled on ``n_nodes`` nodes of [a, x] uniform in psi. Pass
    ``derivative`` (a callable of x) to supply f^{[n]}_psi analytically.
    """
    if not beta > 0.0 or float(beta).is_integer():
        raise DomainError("caputo_apply needs a positive non-integer order (use an ordinary derivative)")
    x = _check_x(psi, x)
    if x == psi.a:
        return 0.0
    n = int(math.floor(beta)) + 1
    nodes = psi_grid(psi, n_nodes, psi.a, x)
    if derivative is not None:
        vals = _call(derivative, nodes)
    else:
        vals = psi_derivative(f, psi, nodes, n, step)
    return rl_apply(n - beta, psi, SampledFunction(nodes, vals), x)


def caputo_power(beta, delta, psi, x):
    """Closed-form psi-Caputo derivative of (psi(t)-psi(a))^(delta-1)."""
    if not beta > 0.0 or float(beta).is_integer():
        raise DomainError("caputo_power needs a positive non-integer order")
    n = int(math.floor(beta)) + 1
    k = delta - 1.0
    if k.is_integer() and 0 <= k <= n - 1:
        return 0.0
    if not delta > n:
        raise DomainError("Caputo derivative of this power is not defined (needs delta > n)")
    span = psi_eval(psi, _check_x(psi, x)) - psi_eval(psi, psi.a)
    return math.exp(math.lgamma(delta) - math.lgamma(delta - beta)) * span ** (delta - beta - 1.0)


# Prabhakar operator ---------------------------------------------------------


def prabhakar_apply(spec, f, x, ctl=None, full_output=False):
    """E^{gamma;psi}_{rho,alpha,omega;a+} f at x.

    Parameters
    ----------
    spec : OperatorSpec
    f : SampledFunction or callable
        Callables are sampled on ``DEFAULT_NODES`` nodes uniform in psi.
    x : float
    ctl : SeriesControl, optional
    full_output : bool
        Also return the updated :class:`SeriesControl`.
    """
    ctl = SeriesControl() if ctl is None else ctl
    f = _as_sampled(f, spec.psi)
    if spec.is_identity:
        value = f.at(_check_x(spec.psi, x), spec.psi)
        ctl = replace(ctl, achieved_terms=0, converged=True)
    else:
        value, ctl = _apply(spec.ml, spec.psi, f, x, ctl)
    return (value, ctl) if full_output else value


def operator_matrix(spec, nodes, ctl=None):
    """Matrix W with (W @ f(nodes))[i] ~ E f(nodes[i]) for piecewise-linear f.

    Returns ``(W, ctl)``; row 0 is zero (empty integration range).
    """
    ctl = SeriesControl() if ctl is None else ctl
    nodes = np.asarray(nodes, dtype=float)
    if spec.is_identity:
        return np.eye(nodes.size), replace(ctl, achieved_terms=0, converged=True)
    s = psi_eval(spec.psi, nodes)
    _check_envelope(spec.ml, s[-1] - s[0])
    ml = spec.ml
    W, n, ok = _backend.impl.op_matrix(s, ml.rho, ml.alpha, ml.gamma, ml.omega, ctl.rel_tol, ctl.max_terms)
    if not ok:
        warnings.warn("operator series not converged on some grid rows", ConvergenceWarning, stacklevel=2)
    return W, replace(ctl, achieved_terms=int(n), converged=bool(ok))


def apply_on_nodes(spec, f, ctl=None):
    """E f at every node of the sampled function ``f``, as a new SampledFunction."""
    f = _as_sampled(f, spec.psi)
    if abs(f.nodes[0] - spec.a) > 1e-12 * max(1.0, abs(spec.a)):
        raise DomainError("sampled function must start at the base point")
    W, _ = operator_matrix(spec, f.nodes, ctl)
    return SampledFunction(f.nodes, W @ f.values)


def prabhakar_power(spec, beta, x, ctl=None):
    """Closed form of E applied to (psi(t)-psi(a))^(beta-1):

    Gamma(beta) (psi(x)-psi(a))^(alpha+beta-1) E^gamma_{rho,alpha+beta}[omega (psi(x)-psi(a))^rho].
    """
    if not beta > 0.0:
        raise DomainError("prabhakar_power needs beta > 0")
    ml = spec.ml
    span = psi_eval(spec.psi, _check_x(spec.psi, x)) - psi_eval(spec.psi, spec.a)
    return _power_closed_form(ml, beta, span, ctl)


def _power_closed_form(ml, beta, span, ctl=None):
    _check_envelope(ml, span)
    e = ml3(MLParams(ml.rho, ml.alpha + beta, ml.gamma), ml.omega * span**ml.rho, ctl)[0]
    expo = ml.alpha + beta - 1.0
    if span == 0.0:
        scale = 0.0 if expo > 0.0 else (1.0 if expo == 0.0 else math.inf)
    else:
        scale = span**expo
    return math.gamma(beta) * scale * e


def prabhakar_power_right(spec, beta, x, ctl=None):
    """Right-sided mirror: E_{b-} applied to (psi(b)-psi(t))^(beta-1), closed form."""
    if not beta > 0.0:
        raise DomainError("prabhakar_power_right needs beta > 0")
    span = psi_eval(spec.psi, spec.psi.b) - psi_eval(spec.psi, _check_x(spec.psi, x))
    return _power_closed_form(spec.ml, beta, span, ctl)


def prabhakar_apply_right(spec, f, x, ctl=None):
    """Right-sided operator E_{b-} f at x through the reflection x -> a + b - x.

    No separate quadrature: the left-sided rule is applied to the reflected
    map ``-psi(a + b - .)`` and the reflected samples.
    """
    from .psi import reflect

    psi = spec.psi
    a, b = psi.domain
    f = _as_sampled(f, psi)
    if abs(f.nodes[-1] - b) > 1e-12 * max(1.0, abs(b)):
        raise DomainError("sampled function must end at the right end point")
    func = None if f.func is None else (lambda y, g=f.func: _call(g, a + b - np.asarray(y, dtype=float)))
    g = SampledFunction((a + b - f.nodes)[::-1], f.values[::-1], func)
    mirrored = OperatorSpec(spec.ml, reflect(psi))
    return prabhakar_apply(mirrored, g, a + b - float(x), ctl)


def bound_constant(spec, b=None):
    """M = |(psi(b)-psi(a))^alpha E^gamma_{rho,alpha+1}[omega (psi(b)-psi(a))^rho]|."""
    b = spec.psi.b if b is None else float(b)
    if not b > spec.a:
        raise DomainError("bound_constant needs b > a")
    span = psi_eval(spec.psi, b) - psi_eval(spec.psi, spec.a)
    ml = spec.ml
    _check_envelope(ml, span)
    e = ml3(MLParams(ml.rho, ml.alpha + 1.0, ml.gamma), ml.omega * span**ml.rho)[0]
    return abs(span**ml.alpha * e)


def weighted_norm(f, nu, psi, a=None):
    """max_j |(psi(x_j)-psi(a))^nu f(x_j)| over the nodes of ``f``."""
    a = psi.a if a is None else float(a)
    out = WeightedNorm(float(nu), 0.0)
    span = psi_eval(psi, f.nodes) - psi_eval(psi, a)
    weight = np.power(span, nu) if nu != 0.0 else np.ones_like(span)
    return replace(out, value=float(np.max(np.abs(weight * f.values))))


def inverse_apply(spec, alpha_d, f, x, n_nodes=DEFAULT_NODES, step=None):
    """Left inverse of the operator ``spec`` (kernel order mu = spec.ml.alpha).

    Evaluates ^C D^{alpha_d} E^{-gamma}_{rho, alpha_d - mu, omega} f at x with a
    non-integer alpha_d >= mu. ``f`` may be sampled (it must then cover the
    whole psi domain) or a callable, sampled on ``n_nodes`` nodes.

    The inner operator output is only piecewise smooth on the scale of the
    sample spacing, so the finite-difference step of the Caputo stage
    defaults to two sample spacings in psi rather than the analytic default.
    Accuracy drops when f(a) != 0 and alpha_d sits well above floor(alpha_d):
    the inner function then has a derivative singularity (psi-psi(a))^(alpha_d-n)
    at the base point that a uniform grid resolves poorly.
    """
    mu = spec.ml.alpha
    if alpha_d < mu or (alpha_d == mu and spec.ml.gamma != 0.0):
        raise DomainError("inverse_apply needs alpha_d > mu")
    psi = spec.psi
    h = _as_sampled(f, psi, n_nodes)
    if step is None:
        step = 2.0 * float(np.max(np.diff(psi_eval(psi, h.nodes))))
    inner = OperatorSpec(MLParams(spec.ml.rho, alpha_d - mu, -spec.ml.gamma, spec.ml.omega), psi)
    ctl = SeriesControl()

    if inner.is_identity:
        def G(y):
            return np.array([h.at(float(t), psi) for t in np.atleast_1d(y)])
    else:
        def G(y):
            return np.array([_apply(inner.ml, psi, h, float(t), ctl, warn_grid=False)[0] for t in np.atleast_1d(y)])

    return caputo_apply(alpha_d, psi, G, x, n_nodes=n_nodes, step=step)
