import math
import warnings

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prabhakar.errors import ConvergenceWarning, DomainError
from prabhakar.special_fn import (
    MLParams,
    SeriesControl,
    beta,
    log_gamma,
    ml3,
    ml3_terms,
    ml3_value,
    pochhammer,
)

# mpmath at 40 digits, frozen
LOG_GAMMA_7_3 = 7.1478925230222490328
ML_07_12_25_AT_09 = 9.3854132803495821112
ML_07_12_25_AT_M35 = -0.010819283528169829369


def test_log_gamma_small_integers():
    assert log_gamma(1.0) == 0.0
    assert abs(log_gamma(2.0)) < 1e-15
    assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-15)


def test_log_gamma_oracle():
    assert log_gamma(7.3) == pytest.approx(LOG_GAMMA_7_3, rel=1e-15)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_log_gamma_rejects_non_positive(x):
    with pytest.raises(DomainError):
        log_gamma(x)


def test_pochhammer_values():
    assert pochhammer(3.0, 0) == 1.0
    assert pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)
    assert pochhammer(-2.0, 3) == 0.0
    assert pochhammer(1.0, 5) == 120.0


@settings(max_examples=200, deadline=None)
@given(st.floats(-5.0, 5.0), st.integers(0, 20))
def test_pochhammer_recurrence(g, k):
    lhs = pochhammer(g, k + 1)
    rhs = pochhammer(g, k) * (g + k)
    assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0))
def test_beta_symmetry(x, y):
    assert beta(x, y) == pytest.approx(beta(y, x), rel=1e-13)


def test_beta_against_mpmath():
    assert beta(2.5, 0.7) == pytest.approx(float(mpmath.beta(2.5, 0.7)), rel=1e-14)


def test_ml_exponential_and_gamma_zero():
    assert ml3_value(1.0, 1.0, 1.0, 1.0) == pytest.approx(math.e, rel=1e-15)
    assert ml3_value(1.0, 1.0, 0.0, 10.0) == 1.0
    for a in (0.3, 1.0, 2.5):
        assert ml3_value(0.9, a, 0.0, -3.0) == pytest.approx(1.0 / math.gamma(a), rel=1e-14)


def test_ml_oracle_values():
    assert ml3_value(0.7, 1.2, 2.5, 0.9) == pytest.approx(ML_07_12_25_AT_09, rel=1e-13)
    # alternating series: cancellation costs a few digits
    assert ml3_value(0.7, 1.2, 2.5, -3.5) == pytest.approx(ML_07_12_25_AT_M35, rel=1e-9)


def test_ml_second_order_identity():
    # E^1_{2,1}(z^2) = cosh z
    for z in (0.3, 1.7, 4.0):
        assert ml3_value(2.0, 1.0, 1.0, z * z) == pytest.approx(math.cosh(z), rel=1e-14)


def test_ml_reports_terms_and_convergence():
    value, ctl = ml3(MLParams(1.0, 1.0, 1.0), 2.0)
    assert ctl.converged and 5 < ctl.achieved_terms < 60
    assert value == pytest.approx(math.exp(2.0), rel=1e-14)


def test_ml_zero_argument_is_single_term():
    value, ctl = ml3(MLParams(0.5, 1.5, 3.0), 0.0)
    assert value == pytest.approx(1.0 / math.gamma(1.5))
    assert ctl.achieved_terms == 2 and ctl.converged


def test_ml_term_cap_warns():
    with pytest.warns(ConvergenceWarning):
        _, ctl = ml3(MLParams(1.0, 1.0, 1.0), 20.0, SeriesControl(max_terms=5))
    assert not ctl.converged and ctl.achieved_terms == 5


def test_ml_rejects_alpha_zero():
    with pytest.raises(DomainError):
        ml3(MLParams(1.0, 0.0, 1.0), 0.5)


@pytest.mark.parametrize("field", ["rho", "alpha", "gamma", "omega"])
def test_params_must_be_finite(field):
    kwargs = dict(rho=1.0, alpha=1.0, gamma=1.0, omega=0.0)
    kwargs[field] = math.nan
    with pytest.raises(DomainError):
        MLParams(**kwargs)


def test_params_domain():
    with pytest.raises(DomainError):
        MLParams(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        MLParams(1.0, -0.1, 1.0)
    with pytest.raises(DomainError):
        SeriesControl(rel_tol=0.0)
    with pytest.raises(DomainError):
        SeriesControl(max_terms=0)


def test_terms_ratio_decays():
    # the ratio |c_{k+1}/c_k| tends to zero, so late terms shrink fast
    p = MLParams(0.8, 1.5, 2.0)
    t = ml3_terms(p, -0.4, 40)
    ratios = [abs(t[k + 1] / t[k]) for k in range(20, 39)]
    assert all(r2 < r1 for r1, r2 in zip(ratios, ratios[1:]))
    assert ratios[-1] < 0.03
    assert sum(t) == pytest.approx(ml3(p, -0.4)[0], rel=1e-14)


def test_large_argument_does_not_overflow():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        value, ctl = ml3(MLParams(1.0, 1.0, 1.0), 50.0)
    assert ctl.converged
    assert value == pytest.approx(math.exp(50.0), rel=1e-13)
