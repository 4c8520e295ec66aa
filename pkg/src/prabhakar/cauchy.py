"""Cauchy problem for a Caputo derivative coupled to a Prabhakar operator.

The problem

    ^C D^{beta;psi} u = lam * E^{gamma;psi}_{rho,alpha,omega} u + f,
    u^{[i]}_psi(a) = b_i,  i = 0, ..., n-1,  n = floor(beta) + 1,

is equivalent to the second-kind Volterra equation

    u = u0 + lam * E^{gamma;psi}_{rho,alpha+beta,omega} u + I^{beta;psi} f,
    u0 = sum_i b_i (psi(x)-psi(a))^i / i!,

obtained by fusing I^beta with the operator of order alpha. This module
evaluates the double-series solution, its successive approximations and a
product-integration Volterra solve of the same equation, which serves as an
independent numerical check of the series.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import _backend
from .errors import ConvergenceWarning, DomainError, SingularStepError
from .operators import (
    DEFAULT_NODES,
    OperatorSpec,
    SampledFunction,
    _call,
    _check_envelope,
    _check_x,
    operator_matrix,
    prabhakar_apply,
    psi_derivative,
)
from .psi import psi_eval, psi_from_json, psi_grid, psi_prime
from .special_fn import MLParams, SeriesControl, ml3

DEFAULT_J_MAX = 60
VOLTERRA_NODES = 800
SINGULAR_TOL = 1e-12


# forcing terms ----------------------------------------------------------------


@dataclass(frozen=True)
class ZeroForcing:
    """f = 0."""

    def value(self, p, span):
        return np.zeros_like(np.asarray(span, dtype=float))

    def source(self, p, span):
        return np.zeros_like(np.asarray(span, dtype=float))

    def to_json(self):
        return {"type": "zero"}


@dataclass(frozen=True)
class PowerForcing:
    """f = c (psi(x)-psi(a))^(delta-1), delta > 0."""

    c: float
    delta: float

    def __post_init__(self):
        if not self.delta > 0.0:
            raise DomainError(f"power forcing needs delta > 0, got {self.delta}")

    def value(self, p, span):
        return self.c * np.power(np.asarray(span, dtype=float), self.delta - 1.0)

    def source(self, p, span):
        coef = self.c * math.exp(math.lgamma(self.delta) - math.lgamma(self.delta + p.beta))
        return coef * np.power(np.asarray(span, dtype=float), self.delta + p.beta - 1.0)

    def as_ml(self):
        # c s^(delta-1) = c Gamma(delta) s^(delta-1) E^0_{rho,delta}(.)
        return MLForcing(self.c * math.gamma(self.delta), self.delta, 0.0)

    def to_json(self):
        return {"type": "power", "c": self.c, "delta": self.delta}


@dataclass(frozen=True)
class MLForcing:
    """f = xi (psi(x)-psi(a))^(mu-1) E^sigma_{rho,mu}[omega (psi(x)-psi(a))^rho].

    ``rho`` and ``omega`` are those of the problem's operator.
    """

    xi: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.mu > 0.0:
            raise DomainError(f"ML forcing needs mu > 0, got {self.mu}")

    def _eval(self, p, span, order):
        ml = p.op.ml
        span = np.atleast_1d(np.asarray(span, dtype=float))
        out = np.empty_like(span)
        for i, s in enumerate(span):
            e = ml3(MLParams(ml.rho, order, self.sigma), ml.omega * s**ml.rho)[0]
            out[i] = self.xi * _pow(s, order - 1.0) * e
        return out

    def value(self, p, span):
        return self._eval(p, span, self.mu)

    def source(self, p, span):
        # I^beta maps the forcing onto the same family with mu -> mu + beta
        return self._eval(p, span, self.mu + p.beta)

    def as_ml(self):
        return self

    def to_json(self):
        return {"type": "ml", "xi": self.xi, "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True, eq=False)
class GenericForcing:
    """Any f, given as a callable of x or as a :class:`SampledFunction`.

    There is no closed form for I^beta f; it is computed by product integration.
    """

    f: Union[Callable, SampledFunction]

    def sampled(self, psi, n=DEFAULT_NODES):
        if isinstance(self.f, SampledFunction):
            return self.f
        return SampledFunction.from_callable(self.f, psi, n)

    def at(self, psi, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if isinstance(self.f, SampledFunction):
            return np.array([self.f.at(float(t), psi) for t in x])
        return _call(self.f, x)

    def to_json(self):
        raise DomainError("generic forcings have no JSON form")


Forcing = Union[ZeroForcing, PowerForcing, MLForcing, GenericForcing]


def _pow(s, e):
    if s == 0.0:
        return 0.0 if e > 0.0 else (1.0 if e == 0.0 else math.inf)
    return s**e


def forcing_from_json(desc):
    kind = desc.get("type")
    if kind == "zero":
        return ZeroForcing()
    if kind == "power":
        return PowerForcing(float(desc["c"]), float(desc["delta"]))
    if kind == "ml":
        return MLForcing(float(desc["xi"]), float(desc["mu"]), float(desc["sigma"]))
    raise DomainError(f"unknown forcing {desc!r}")


# problem ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CauchyProblem:
    """Order ``beta`` (non-integer), operator ``op``, coupling ``lam``,
    initial data ``b`` (n = floor(beta) + 1 values) and forcing."""

    beta: float
    op: OperatorSpec
    lam: float
    b: tuple
    forcing: Forcing = field(default_factory=ZeroForcing)

    def __post_init__(self):
        beta = float(self.beta)
        if not (beta > 0.0 and math.isfinite(beta)) or beta.is_integer():
            raise DomainError(f"beta must be positive and non-integer, got {self.beta}")
        object.__setattr__(self, "beta", beta)
        if not self.op.ml.alpha > 0.0:
            raise DomainError("the operator order alpha must be positive")
        b = tuple(float(v) for v in np.atleast_1d(self.b))
        if len(b) != self.n:
            raise DomainError(f"beta={beta} needs {self.n} initial values, got {len(b)}")
        object.__setattr__(self, "b", b)
        if not math.isfinite(self.lam):
            raise DomainError("lambda must be finite")
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n(self):
        return int(math.floor(self.beta)) + 1

    @property
    def psi(self):
        return self.op.psi

    @property
    def a(self):
        return self.op.psi.a

    @property
    def fused(self):
        """The operator of order alpha + beta acting in the Volterra form."""
        return self.op.with_params(alpha=self.op.ml.alpha + self.beta)

    def span(self, x):
        return psi_eval(self.psi, x) - psi_eval(self.psi, self.a)

    @classmethod
    def from_json(cls, desc):
        """Build from ``{"beta", "lambda", "op", "psi", "interval", "b", "forcing"}``."""
        try:
            interval = desc.get("interval")
            psi = psi_from_json(desc["psi"], interval)
            o = desc["op"]
            op = OperatorSpec.make(o["rho"], o["alpha"], o["gamma"], o.get("omega", 0.0), psi)
            forcing = forcing_from_json(desc.get("forcing", {"type": "zero"}))
            return cls(desc["beta"], op, desc["lambda"], tuple(desc["b"]), forcing)
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed problem description: {exc!r}") from exc

    def to_json(self):
        ml = self.op.ml
        return {
            "beta": self.beta,
            "lambda": self.lam,
            "op": {"rho": ml.rho, "alpha": ml.alpha, "gamma": ml.gamma, "omega": ml.omega},
            "psi": self.psi.to_json(),
            "interval": list(self.psi.domain),
            "b": list(self.b),
            "forcing": self.forcing.to_json(),
        }


def free_term(p, x):
    """u0(x) = sum_{i<n} b_i (psi(x)-psi(a))^i / i!."""
    s = np.asarray(p.span(x), dtype=float)
    out = np.zeros_like(s)
    for i, bi in enumerate(p.b):
        out = out + bi * s**i / math.factorial(i)
    return float(out) if out.ndim == 0 else out


# Volterra form ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VolterraForm:
    """u(x) = free_term(x) + int_a^x kernel(x, t) u(t) dt + source(x)."""

    problem: CauchyProblem
    free_term: Callable
    kernel: Callable
    source: Callable


def _source_on(p, nodes, mode="auto", n_nodes=DEFAULT_NODES):
    """I^beta f at the given nodes: closed form when the forcing allows it."""
    nodes = np.asarray(nodes, dtype=float)
    if mode not in ("auto", "quadrature"):
        raise DomainError(f"unknown source mode {mode!r}")
    fc = p.forcing
    if isinstance(fc, ZeroForcing):
        return np.zeros(nodes.size)
    if mode == "auto" and not isinstance(fc, GenericForcing):
        return np.asarray(fc.source(p, p.span(nodes)), dtype=float)
    rl = OperatorSpec.make(1.0, p.beta, 0.0, 0.0, p.psi)
    if isinstance(fc, GenericForcing):
        fs = fc.sampled(p.psi, n_nodes)
    else:
        fs = SampledFunction.from_callable(lambda y: fc.value(p, p.span(y)), p.psi, n_nodes)
    if _same_grid(fs.nodes, nodes):
        W, _ = operator_matrix(rl, nodes)
        return W @ fs.values
    return np.array([prabhakar_apply(rl, fs, float(t)) for t in nodes])


def _same_grid(u, v):
    return u.shape == v.shape and np.allclose(u, v, rtol=0.0, atol=1e-13 * max(1.0, float(np.max(np.abs(v)))))


def to_volterra(p):
    """Free term, kernel K(x, t) and source I^beta f of the equivalent equation.

    K(x, t) = lam psi'(t) (psi(x)-psi(t))^(alpha+beta-1)
              E^gamma_{rho,alpha+beta}[omega (psi(x)-psi(t))^rho] for t < x, else 0.
    """
    ml = p.fused.ml
    psi = p.psi

    def kernel(x, t):
        if p.lam == 0.0:
            return 0.0
        x, t = float(x), float(t)
        if t >= x:
            return 0.0
        d = psi_eval(psi, x) - psi_eval(psi, t)
        e = ml3(MLParams(ml.rho, ml.alpha, ml.gamma), ml.omega * d**ml.rho)[0]
        return p.lam * psi_prime(psi, t) * d ** (ml.alpha - 1.0) * e

    def source(x):
        out = _source_on(p, np.atleast_1d(np.asarray(x, dtype=float)))
        return float(out[0]) if np.ndim(x) == 0 else out

    return VolterraForm(p, lambda x: free_term(p, x), kernel, source)


# series solution ----------------------------------------------------------------


@dataclass(frozen=True)
class SeriesDiagnostics:
    terms: int
    last_term: float
    converged: bool
    ml_terms: int = 0


def _outer_terms(p, span, forcing_ml, ctl):
    """Yield (homogeneous, particular) contributions for j = 0, 1, ...

    ``forcing_ml`` is an MLForcing giving the particular part in closed form,
    or None when the particular part is handled elsewhere.
    """
    ml = p.op.ml
    order = ml.alpha + p.beta
    z = ml.omega * span**ml.rho
    j = 0
    while True:
        ml_used = 0
        scale = p.lam**j * _pow(span, j * order)
        hom = 0.0
        for i, bi in enumerate(p.b):
            if bi == 0.0:
                continue
            e, c = ml3(MLParams(ml.rho, j * order + i + 1.0, j * ml.gamma), z, ctl)
            ml_used = max(ml_used, c.achieved_terms)
            hom += bi * _pow(span, float(i)) * scale * e
        part = 0.0
        if forcing_ml is not None and forcing_ml.xi != 0.0:
            fm = forcing_ml
            e, c = ml3(MLParams(ml.rho, j * order + p.beta + fm.mu, j * ml.gamma + fm.sigma), z, ctl)
            ml_used = max(ml_used, c.achieved_terms)
            part = fm.xi * _pow(span, p.beta + fm.mu - 1.0) * scale * e
        yield hom, part, ml_used
        j += 1


def _sum_series(p, x, j_max, ctl, forcing_ml, generic=None, n_nodes=DEFAULT_NODES):
    ctl = SeriesControl() if ctl is None else ctl
    x = _check_x(p.psi, x)
    span = p.span(x)
    if span == 0.0:
        return p.b[0], SeriesDiagnostics(1, 0.0, True)
    _check_envelope(p.op.ml, span)
    total = 0.0
    last = 0.0
    ml_used = 0
    fs = None
    if generic is not None:
        fs = generic.sampled(p.psi, n_nodes)
    gen = _outer_terms(p, span, forcing_ml, ctl)
    for j in range(j_max + 1):
        hom, part, used = next(gen)
        ml_used = max(ml_used, used)
        if fs is not None:
            spec = OperatorSpec.make(p.op.ml.rho, j * (p.op.ml.alpha + p.beta) + p.beta, j * p.op.ml.gamma, p.op.ml.omega, p.psi)
            part += p.lam**j * prabhakar_apply(spec, fs, x, ctl)
        total += hom + part
        last = max(abs(hom), abs(part))
        bound = ctl.rel_tol * max(abs(total), 1e-300)
        if j > 0 and abs(hom) <= bound and abs(part) <= bound:
            return total, SeriesDiagnostics(j + 1, last, True, ml_used)
    warnings.warn(f"outer series not converged after {j_max + 1} terms at x={x}", ConvergenceWarning, stacklevel=3)
    return total, SeriesDiagnostics(j_max + 1, last, False, ml_used)


def solve_series(p, x, j_max=DEFAULT_J_MAX, ctl=None, n_nodes=DEFAULT_NODES, full_output=False):
    """Double-series solution at x.

    The homogeneous part is closed form. The forcing part
    sum_j lam^j E^{j gamma}_{rho, j(alpha+beta)+beta, omega} f is evaluated by
    quadrature of f sampled on ``n_nodes`` nodes (an MLForcing or PowerForcing
    is sampled from its formula; use :func:`solve_particular` for the closed
    form). The outer sum stops once both parts of a term fall below
    ``ctl.rel_tol`` times the partial sum.
    """
    fc = p.forcing
    generic = None
    if isinstance(fc, GenericForcing):
        generic = fc
    elif not isinstance(fc, ZeroForcing):
        if _singular_at_a(fc):
            raise DomainError("the forcing is unbounded at a; sample-based evaluation needs a bounded f")
        generic = GenericForcing(lambda y, fc=fc: fc.value(p, p.span(y)))
    value, diag = _sum_series(p, x, j_max, ctl, None, generic, n_nodes)
    return (value, diag) if full_output else value


def _singular_at_a(fc):
    if isinstance(fc, PowerForcing):
        return fc.delta < 1.0
    if isinstance(fc, MLForcing):
        return fc.mu < 1.0
    return False


def solve_particular(p, x, j_max=DEFAULT_J_MAX, ctl=None, full_output=False):
    """Closed-form solution for a zero, power or Mittag-Leffler forcing.

    The forcing part is
    xi s^(beta+mu-1) sum_j lam^j s^(j(alpha+beta)) E^{j gamma+sigma}_{rho, j(alpha+beta)+beta+mu}(omega s^rho)
    with s = psi(x) - psi(a); no quadrature is involved.
    """
    fc = p.forcing
    if isinstance(fc, GenericForcing):
        raise DomainError("solve_particular needs a zero, power or ML forcing")
    fm = None if isinstance(fc, ZeroForcing) else fc.as_ml()
    value, diag = _sum_series(p, x, j_max, ctl, fm)
    return (value, diag) if full_output else value


@dataclass(frozen=True, eq=False)
class SeriesSolution:
    """Truncated series solution of ``problem``; closed form when possible."""

    problem: CauchyProblem
    j_max: int = DEFAULT_J_MAX
    ctl: SeriesControl = field(default_factory=SeriesControl)
    n_nodes: int = DEFAULT_NODES

    @property
    def closed_form(self):
        return not isinstance(self.problem.forcing, GenericForcing)

    def diagnose(self, x):
        """(value, SeriesDiagnostics) at x."""
        if self.closed_form:
            return solve_particular(self.problem, x, self.j_max, self.ctl, full_output=True)
        return solve_series(self.problem, x, self.j_max, self.ctl, self.n_nodes, full_output=True)

    def evaluate(self, x):
        if np.ndim(x) == 0:
            return self.diagnose(float(x))[0]
        return np.array([self.diagnose(float(t))[0] for t in np.asarray(x, dtype=float)])

    __call__ = evaluate


# Picard iteration and the Volterra oracle ------------------------------------


def _grid(p, nodes, n_nodes, hi=None):
    if nodes is None:
        return psi_grid(p.psi, n_nodes, p.a, hi)
    nodes = np.asarray(nodes, dtype=float)
    if abs(nodes[0] - p.a) > 1e-12 * max(1.0, abs(p.a)):
        raise DomainError("the grid must start at the base point a")
    if np.any(np.diff(nodes) <= 0.0):
        raise DomainError("grid nodes must be strictly increasing")
    return nodes


def picard_grid(p, m, nodes=None, n_nodes=DEFAULT_NODES, source="auto"):
    """Iterates u_0, ..., u_m of u_k = u0 + lam E^{gamma}_{rho,alpha+beta,omega} u_{k-1} + I^beta f.

    The fused operator is applied through its product-integration matrix on
    ``nodes`` (default: ``n_nodes`` nodes uniform in psi over the domain).
    Returns a list of :class:`SampledFunction`.
    """
    if m < 0:
        raise DomainError("m must be non-negative")
    x = _grid(p, nodes, n_nodes)
    u0 = np.asarray(free_term(p, x), dtype=float)
    out = [SampledFunction(x, u0)]
    if m == 0:
        return out
    g = _source_on(p, x, source, x.size)
    W = operator_matrix(p.fused, x)[0] if p.lam != 0.0 else None
    u = u0
    for _ in range(m):
        u = u0 + g + (p.lam * (W @ u) if W is not None else 0.0)
        out.append(SampledFunction(x, u))
    return out


def picard_iterate(p, m, x, n_nodes=DEFAULT_NODES, source="auto"):
    """u_m(x), computed on ``n_nodes`` nodes of [a, x] uniform in psi."""
    x = _check_x(p.psi, x)
    if m == 0 or x == p.a:
        return free_term(p, x)
    nodes = psi_grid(p.psi, n_nodes, p.a, x)
    return float(picard_grid(p, m, nodes, source=source)[-1].values[-1])


def volterra_solve(p, nodes=None, n_nodes=VOLTERRA_NODES, source="auto"):
    """Solve the Volterra form by forward substitution on ``nodes``.

    Each node uses the exact-moment product rule for the fused kernel; the
    unknown at the node itself enters through the diagonal weight and is
    solved for directly. ``source="auto"`` takes I^beta f in closed form for
    zero, power and ML forcings and by quadrature otherwise; ``"quadrature"``
    forces quadrature.

    Raises
    ------
    SingularStepError
        If 1 - lam * W[i, i] falls below 1e-12 in magnitude at some node.
    """
    x = _grid(p, nodes, n_nodes)
    u0 = np.asarray(free_term(p, x), dtype=float)
    F = u0 + _source_on(p, x, source, x.size)
    if p.lam == 0.0:
        return SampledFunction(x, F)
    W = operator_matrix(p.fused, x)[0]
    try:
        u = _backend.impl.volterra_forward(W, p.lam, F, SINGULAR_TOL)
    except ZeroDivisionError as exc:
        i = int(exc.args[0])
        raise SingularStepError(f"singular Volterra step at node {i} (x={x[i]})") from None
    return SampledFunction(x, u)


def volterra_residual(p, u, source="auto"):
    """max |u - (u0 + lam E u + I^beta f)| / max |u| on the nodes of ``u``."""
    x = u.nodes
    rhs = np.asarray(free_term(p, x), dtype=float) + _source_on(p, x, source, x.size)
    if p.lam != 0.0:
        rhs = rhs + p.lam * (operator_matrix(p.fused, x)[0] @ u.values)
    scale = max(float(np.max(np.abs(u.values))), 1e-300)
    return float(np.max(np.abs(u.values - rhs))) / scale


def initial_derivative(p, u, order=1, step=None):
    """One-sided estimate of u^{[order]}_psi(a) from a callable or sampled u."""
    if isinstance(u, SampledFunction):
        func = lambda y, u=u: np.array([u.at(float(t), p.psi) for t in np.atleast_1d(y)])
    else:
        func = u
    return float(psi_derivative(func, p.psi, p.a, order, step)[0])


def relative_difference(u, v):
    """max |u - v| / max |u| (the scale is that of the first argument)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(u - v))) / max(float(np.max(np.abs(u))), 1e-300)
