"""Increasing maps psi with psi' > 0 on a finite interval [a, b].

Built-in families (identity, affine, log, power, exp) carry closed forms for
the value, derivative and inverse. User maps supply value and derivative;
their inverse, needed only to lay out grids uniform in psi, falls back to
bracketed root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError

_KINDS = ("identity", "affine", "log", "power", "exp", "user")


@dataclass(frozen=True)
class PsiDiagnostics:
    ok: bool
    min_prime: float
    argmin: float
    n_samples: int
    message: str = ""


@dataclass(frozen=True, eq=False)
class PsiMap:
    """An increasing map on ``domain = (a, b)``.

    Use the class constructors (:meth:`identity`, :meth:`log`, ...) rather
    than the raw initializer.
    """

    kind: str
    domain: tuple
    params: dict = field(default_factory=dict)
    value_fn: Optional[Callable] = None
    prime_fn: Optional[Callable] = None
    inverse_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown psi kind {self.kind!r}")
        a, b = (float(v) for v in self.domain)
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise DomainError(f"psi domain must be a finite interval a < b, got {self.domain}")
        object.__setattr__(self, "domain", (a, b))
        if self.kind == "log" and a <= 0.0:
            raise DomainError("log psi needs a domain inside x > 0")
        if self.kind == "power":
            if self.params.get("sigma", 0.0) <= 0.0:
                raise DomainError("power psi needs sigma > 0")
            if a < 0.0:
                raise DomainError("power psi needs a domain inside x >= 0")
        if self.kind == "affine" and self.params.get("c1", 0.0) <= 0.0:
            raise DomainError("affine psi needs slope c1 > 0")
        if self.kind == "user" and (self.value_fn is None or self.prime_fn is None):
            raise DomainError("user psi needs value and derivative callables")

    # constructors -----------------------------------------------------------

    @classmethod
    def identity(cls, a=0.0, b=1.0):
        return cls("identity", (a, b))

    @classmethod
    def affine(cls, c0, c1, a=0.0, b=1.0):
        return cls("affine", (a, b), {"c0": float(c0), "c1": float(c1)})

    @classmethod
    def log(cls, a=1.0, b=math.e):
        return cls("log", (a, b))

    @classmethod
    def power(cls, sigma, a=0.0, b=1.0):
        return cls("power", (a, b), {"sigma": float(sigma)})

    @classmethod
    def exp(cls, a=0.0, b=1.0):
        return cls("exp", (a, b))

    @classmethod
    def user(cls, value, derivative, a, b, inverse=None, name="user"):
        return cls("user", (a, b), {"name": name}, value, derivative, inverse)

    # evaluation -------------------------------------------------------------

    @property
    def a(self):
        return self.domain[0]

    @property
    def b(self):
        return self.domain[1]

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.domain
        if np.any((x < a) | (x > b)) or np.any(~np.isfinite(x)):
            raise DomainError(f"x outside psi domain [{a}, {b}]")
        return x

    def __call__(self, x):
        return psi_eval(self, x)

    def prime(self, x):
        return psi_prime(self, x)

    def inverse(self, s):
        """x with psi(x) = s, for s in [psi(a), psi(b)]."""
        s_arr = np.asarray(s, dtype=float)
        k, p = self.kind, self.params
        if k == "identity":
            out = s_arr.copy()
        elif k == "affine":
            out = (s_arr - p["c0"]) / p["c1"]
        elif k == "log":
            out = np.exp(s_arr)
        elif k == "power":
            out = np.power(s_arr, 1.0 / p["sigma"])
        elif k == "exp":
            out = np.log(s_arr)
        elif self.inverse_fn is not None:
            out = np.asarray(self.inverse_fn(s_arr), dtype=float)
        else:
            a, b = self.domain
            fa, fb = float(self.value_fn(a)), float(self.value_fn(b))

            def solve(target):
                if target <= fa:
                    return a
                if target >= fb:
                    return b
                return brentq(lambda x: float(self.value_fn(x)) - target, a, b, xtol=1e-15, rtol=1e-15)

            out = np.vectorize(solve, otypes=[float])(s_arr)
        out = np.clip(out, *self.domain)
        return float(out) if np.ndim(out) == 0 else out

    def to_json(self):
        if self.kind == "user":
            raise DomainError("user psi maps have no JSON descriptor")
        return {"kind": self.kind, **self.params}

    def __repr__(self):
        extra = "".join(f", {k}={v}" for k, v in self.params.items())
        return f"PsiMap({self.kind}{extra}, domain={self.domain})"


def psi_eval(m, x):
    """psi(x); scalar in, float out, array in, array out."""
    x = m._check(x)
    k, p = m.kind, m.params
    if k == "identity":
        out = x.copy()
    elif k == "affine":
        out = p["c0"] + p["c1"] * x
    elif k == "log":
        out = np.log(x)
    elif k == "power":
        out = np.power(x, p["sigma"])
    elif k == "exp":
        out = np.exp(x)
    else:
        out = np.asarray(m.value_fn(x), dtype=float)
    return float(out) if np.ndim(out) == 0 else out


def psi_prime(m, x):
    """psi'(x); raises DomainError if a user map reports psi' <= 0."""
    x = m._check(x)
    k, p = m.kind, m.params
    if k == "identity":
        out = np.ones_like(x)
    elif k == "affine":
        out = np.full_like(x, p["c1"])
    elif k == "log":
        out = 1.0 / x
    elif k == "power":
        with np.errstate(divide="ignore"):
            out = p["sigma"] * np.power(x, p["sigma"] - 1.0)
    elif k == "exp":
        out = np.exp(x)
    else:
        out = np.asarray(m.prime_fn(x), dtype=float)
        if np.any(~(out > 0.0)):
            raise DomainError("user psi has a non-positive derivative")
    return float(out) if np.ndim(out) == 0 else out


def chebyshev_points(a, b, n):
    """Chebyshev-Lobatto points on [a, b], endpoints included, ascending."""
    k = np.arange(n)
    x = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.pi * k / (n - 1))
    x[0], x[-1] = a, b
    return x


def validate_psi(m, n_samples=129):
    """Sample psi' at Chebyshev points; report rather than raise."""
    x = chebyshev_points(*m.domain, n_samples)
    k, p = m.kind, m.params
    if k == "user":
        d = np.asarray(m.prime_fn(x), dtype=float)
        v = np.asarray(m.value_fn(x), dtype=float)
    else:
        d = np.asarray(psi_prime(m, x), dtype=float)
        v = np.asarray(psi_eval(m, x), dtype=float)
    bad = ~np.isfinite(d) | ~np.isfinite(v)
    d_safe = np.where(np.isfinite(d), d, np.inf)
    i = int(np.argmin(d_safe))
    min_prime = float(d[i]) if np.isfinite(d[i]) else float("nan")
    msg = ""
    if np.any(bad):
        msg = f"non-finite psi or psi' at x={float(x[np.argmax(bad)])}"
    elif not d[i] > 0.0:
        msg = f"psi' = {float(d[i])} <= 0 at x={float(x[i])}"
    ok = not msg
    return PsiDiagnostics(ok, min_prime, float(x[i]), n_samples, msg)


def psi_from_json(desc, interval=None):
    """Build a built-in map from ``{"kind": ...}`` plus an interval [a, b]."""
    kind = desc.get("kind")
    if interval is None:
        interval = desc.get("interval")
    if interval is None:
        interval = {"log": (1.0, math.e)}.get(kind, (0.0, 1.0))
    a, b = (float(v) for v in interval)
    if kind == "identity":
        return PsiMap.identity(a, b)
    if kind == "affine":
        return PsiMap.affine(desc.get("c0", 0.0), desc.get("c1", 1.0), a, b)
    if kind == "log":
        return PsiMap.log(a, b)
    if kind == "power":
        return PsiMap.power(desc["sigma"], a, b)
    if kind == "exp":
        return PsiMap.exp(a, b)
    raise DomainError(f"unknown psi descriptor {desc!r}")


def reflect(m):
    """Map x -> -psi(a + b - x) on the same domain.

    Turns a right-sided operator with base point b into a left-sided one:
    E_{b-}[f](x) equals the left-sided operator for ``reflect(psi)`` applied
    to f(a + b - .) and evaluated at a + b - x.
    """
    a, b = m.domain

    def value(x):
        return -psi_eval(m, a + b - np.asarray(x, dtype=float))

    def prime(x):
        return psi_prime(m, a + b - np.asarray(x, dtype=float))

    def inverse(s):
        return a + b - np.asarray(m.inverse(-np.asarray(s, dtype=float)), dtype=float)

    return PsiMap.user(value, prime, a, b, inverse=inverse, name=f"reflected-{m.kind}")


def psi_grid(m, n, lo=None, hi=None):
    """``n`` nodes on [lo, hi] (defaults: the domain) uniform in psi."""
    lo = m.a if lo is None else float(lo)
    hi = m.b if hi is None else float(hi)
    if n < 2:
        raise DomainError("a grid needs at least two nodes")
    if not lo < hi:
        raise DomainError(f"empty grid interval [{lo}, {hi}]")
    s = np.linspace(psi_eval(m, lo), psi_eval(m, hi), n)
    x = np.asarray(m.inverse(s), dtype=float)
    x[0], x[-1] = lo, hi
    return x
