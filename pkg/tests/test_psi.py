import json
import math

import numpy as np
import pytest

from prabhakar.errors import DomainError
from prabhakar.psi import (
    PsiMap,
    chebyshev_points,
    psi_eval,
    psi_from_json,
    psi_grid,
    psi_prime,
    reflect,
    validate_psi,
)


@pytest.mark.parametrize(
    "m",
    [
        PsiMap.identity(0.0, 2.0),
        PsiMap.affine(1.0, 3.0, -1.0, 1.0),
        PsiMap.log(1.0, math.e),
        PsiMap.power(0.5, 0.2, 1.0),
        PsiMap.exp(0.0, 1.0),
    ],
    ids=lambda m: m.kind,
)
def test_builtin_maps_round_trip(m):
    x = np.linspace(m.a, m.b, 33)
    assert np.allclose(m.inverse(psi_eval(m, x)), x, atol=1e-13, rtol=0)
    assert validate_psi(m).ok
    # derivative against a central difference
    t = 0.5 * (m.a + m.b)
    h = 1e-6
    fd = (psi_eval(m, t + h) - psi_eval(m, t - h)) / (2 * h)
    assert psi_prime(m, t) == pytest.approx(fd, rel=1e-8)


def test_scalar_in_scalar_out():
    m = PsiMap.log()
    assert isinstance(psi_eval(m, 2.0), float)
    assert isinstance(psi_prime(m, 2.0), float)
    assert psi_eval(m, math.e) == pytest.approx(1.0)


def test_outside_domain_raises():
    m = PsiMap.identity(0.0, 1.0)
    with pytest.raises(DomainError):
        psi_eval(m, 1.5)
    with pytest.raises(DomainError):
        psi_prime(m, -0.1)


def test_bad_constructions():
    with pytest.raises(DomainError):
        PsiMap.log(0.0, 1.0)
    with pytest.raises(DomainError):
        PsiMap.identity(1.0, 1.0)
    with pytest.raises(DomainError):
        PsiMap.power(-1.0)
    with pytest.raises(DomainError):
        PsiMap.affine(0.0, -2.0)
    with pytest.raises(DomainError):
        PsiMap("spline", (0.0, 1.0))


def test_user_map_inverse_by_root_finding():
    m = PsiMap.user(lambda x: x + x**3, lambda x: 1 + 3 * np.asarray(x) ** 2, 0.0, 2.0)
    x = np.array([0.0, 0.3, 1.1, 2.0])
    assert np.allclose(m.inverse(psi_eval(m, x)), x, atol=1e-12)
    assert validate_psi(m).ok


def test_validate_reports_non_increasing_user_map():
    m = PsiMap.user(lambda x: np.sin(x), lambda x: np.cos(x), 0.0, 3.0)
    diag = validate_psi(m)
    assert not diag.ok
    assert diag.min_prime < 0.0
    assert "<= 0" in diag.message
    with pytest.raises(DomainError):
        psi_prime(m, 2.5)


def test_chebyshev_points():
    x = chebyshev_points(-1.0, 3.0, 9)
    assert x[0] == -1.0 and x[-1] == 3.0
    assert np.all(np.diff(x) > 0)


def test_grid_uniform_in_psi():
    m = PsiMap.log(1.0, math.e)
    x = psi_grid(m, 11)
    assert x[0] == 1.0 and x[-1] == math.e
    assert np.allclose(np.diff(psi_eval(m, x)), 0.1)
    sub = psi_grid(m, 5, 1.5, 2.0)
    assert sub[0] == 1.5 and sub[-1] == 2.0
    with pytest.raises(DomainError):
        psi_grid(m, 1)


def test_json_round_trip():
    for m in (PsiMap.identity(0, 1), PsiMap.power(2.0, 0, 3), PsiMap.affine(1, 2, 0, 1)):
        desc = json.loads(json.dumps(m.to_json()))
        back = psi_from_json(desc, m.domain)
        assert back.kind == m.kind and back.params == m.params and back.domain == m.domain
    assert psi_from_json({"kind": "log"}).domain == (1.0, math.e)
    with pytest.raises(DomainError):
        psi_from_json({"kind": "cubic"}, (0, 1))


def test_reflection():
    m = PsiMap.exp(0.0, 1.0)
    r = reflect(m)
    x = np.linspace(0.0, 1.0, 7)
    assert np.allclose(psi_eval(r, x), -np.exp(1.0 - x))
    assert np.all(psi_prime(r, x) > 0)
    assert np.allclose(r.inverse(psi_eval(r, x)), x, atol=1e-14)
