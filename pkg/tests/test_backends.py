import numpy as np
import pytest

from prabhakar import _backend, _fallback
from prabhakar.cauchy import CauchyProblem, MLForcing, volterra_solve
from prabhakar.operators import OperatorSpec, SampledFunction, prabhakar_apply
from prabhakar.special_fn import MLParams, ml3_terms
from prabhakar.psi import PsiMap, psi_eval, psi_grid

compiled = pytest.mark.skipif("compiled" not in _backend.available(), reason="compiled kernels not built")


def test_use_switches_and_restores():
    before = _backend.name
    previous = _backend.use("python")
    assert previous == before and _backend.impl is _fallback
    _backend.use(previous)
    assert _backend.name == before
    with pytest.raises(ValueError):
        _backend.use("fortran")


@compiled
@pytest.mark.parametrize("z", [-7.5, -0.3, 0.0, 2.0, 12.0])
@pytest.mark.parametrize("params", [(1.0, 1.0, 1.0), (0.7, 1.2, 2.5), (0.5, 0.3, -1.5), (2.0, 2.0, 0.0)])
def test_ml_sum_parity(params, z):
    from prabhakar import _kernels

    a = _fallback.ml_sum(*params, z, 1e-14, 1000)
    b = _kernels.ml_sum(*params, z, 1e-14, 1000)
    assert a[1:] == b[1:]
    # alternating sums cancel, so rounding scales with the largest term
    biggest = np.max(np.abs(ml3_terms(MLParams(*params), z, a[1])))
    assert abs(a[0] - b[0]) <= 1e-12 * max(biggest, abs(a[0]))


def test_ml_sum_overflow_is_not_converged():
    for name in _backend.available():
        prev = _backend.use(name)
        try:
            value, _, ok = _backend.impl.ml_sum(0.5, 0.3, -1.5, 40.0, 1e-14, 1000)
        finally:
            _backend.use(prev)
        assert not ok and not np.isfinite(value)


@compiled
@pytest.mark.parametrize("params", [(1.0, 0.5, 1.0, 0.3), (0.8, 1.2, 2.0, -0.3), (0.6, 0.3, -0.5, 2.0), (1.0, 0.7, 0.0, 5.0)])
def test_weight_parity(params):
    from prabhakar import _kernels

    s = psi_eval(PsiMap.log(), psi_grid(PsiMap.log(), 150))
    Wa, na, oka = _fallback.op_matrix(s, *params, 1e-14, 1000)
    Wb, nb, okb = _kernels.op_matrix(s, *params, 1e-14, 1000)
    assert oka and okb and na == nb
    assert np.max(np.abs(Wa - Wb)) <= 1e-12 * np.max(np.abs(Wa))


@compiled
def test_volterra_parity(each_backend):
    p = CauchyProblem(0.7, OperatorSpec.make(1.0, 0.5, 1.0, 0.3, PsiMap.identity()), 0.4, (1.0,), MLForcing(1.0, 1.2, 1.0))
    u = volterra_solve(p, n_nodes=200)
    assert u.values[-1] == pytest.approx(2.9555896659, rel=2e-6)


def test_singular_step_signal_from_both_kernels():
    W = np.array([[0.0, 0.0], [0.3, 0.5]])
    for name in _backend.available():
        prev = _backend.use(name)
        try:
            with pytest.raises(ZeroDivisionError) as info:
                _backend.impl.volterra_forward(W, 2.0, np.ones(2), 1e-12)
            assert info.value.args[0] == 1
        finally:
            _backend.use(prev)


def test_fallback_end_to_end(each_backend):
    spec = OperatorSpec.make(1.0, 0.5, 1.0, 0.3, PsiMap.identity())
    one = SampledFunction.from_callable(lambda x: np.ones_like(x), PsiMap.identity(), 64)
    assert prabhakar_apply(spec, one, 1.0) == pytest.approx(1.3836209334031664511, rel=1e-13)


@compiled
def test_benchmark_script_runs(capsys):
    import importlib.util
    import pathlib

    path = pathlib.Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.main(["--nodes", "40", "--repeat", "1"]) == 0
    assert "op_matrix n=40" in capsys.readouterr().out
