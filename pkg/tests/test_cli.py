import csv
import io
import json
import math

import numpy as np
import pytest

from prabhakar.cli import main, parse_grid
from prabhakar.operators import OperatorSpec, SampledFunction, prabhakar_apply, prabhakar_power
from prabhakar.psi import PsiMap

BASE_INSTANCE = {
    "beta": 0.7, "lambda": 0.4,
    "op": {"rho": 1.0, "alpha": 0.5, "gamma": 1.0, "omega": 0.3},
    "psi": {"kind": "identity"}, "interval": [0, 1], "b": [1.0],
    "forcing": {"type": "ml", "xi": 1.0, "mu": 1.2, "sigma": 1.0},
}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    r = list(csv.reader(io.StringIO(text)))
    return r[0], [list(map(_num, row)) for row in r[1:]]


def _num(v):
    return {"true": True, "false": False}.get(v, None) if v in ("true", "false") else float(v)


def test_grid_syntax():
    assert np.allclose(parse_grid("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(parse_grid("0:1:0.3"), [0, 0.3, 0.6, 0.9])
    assert np.allclose(parse_grid("0:1:0.33334"), [0, 0.33334, 0.66668, 1.00002])
    assert np.allclose(parse_grid("0.5"), [0.5])
    assert np.allclose(parse_grid("1,2,4"), [1, 2, 4])


def test_ml_command(capsys):
    code, out, _ = run(capsys, "ml", "--rho", "1", "--alpha", "1", "--gamma", "1", "--z", "0:1:0.5")
    assert code == 0
    header, data = rows(out)
    assert header == ["z", "value", "terms", "converged"]
    assert [d[1] for d in data] == pytest.approx([1.0, math.exp(0.5), math.e], rel=1e-15)
    assert all(d[3] is True for d in data)
    assert "\r" not in out


def test_ml_gamma_zero(capsys):
    code, out, _ = run(capsys, "ml", "--rho", "1", "--alpha", "1", "--gamma", "0", "--z", "0:10:1")
    assert code == 0
    assert all(d[1] == 1.0 for d in rows(out)[1])


def test_ml_round_trip_17_digits(capsys):
    from prabhakar.special_fn import ml3_value

    _, out, _ = run(capsys, "ml", "--rho", "0.7", "--alpha", "1.2", "--gamma", "2.5", "--z", "0.9")
    value = rows(out)[1][0][1]
    assert value == ml3_value(0.7, 1.2, 2.5, 0.9)


def test_ml_non_convergence_exit(capsys):
    code, _, _ = run(capsys, "ml", "--rho", "1", "--alpha", "1", "--gamma", "1", "--z", "30", "--max-terms", "5")
    assert code == 3


def test_ml_bad_parameters(capsys):
    code, _, err = run(capsys, "ml", "--rho", "-1", "--alpha", "1", "--gamma", "1", "--z", "0")
    assert code == 2 and "rho" in err
    code, _, _ = run(capsys, "ml", "--rho", "1", "--alpha", "1", "--gamma", "1", "--z", "1:0:0.1")
    assert code == 2


def test_op_power_identity(capsys):
    code, out, _ = run(capsys, "op", "--alpha", "1", "--gamma", "0", "--power", "1", "--x", "0:1:0.25")
    assert code == 0
    header, data = rows(out)
    assert header == ["x", "value"]
    assert [d[1] for d in data] == pytest.approx([d[0] for d in data], rel=1e-15)


def test_op_power_matches_closed_form(capsys):
    spec = {"op": {"rho": 0.8, "alpha": 0.5, "gamma": 2.0, "omega": -0.3}, "psi": {"kind": "log"}, "interval": [1, math.e]}
    code, out, _ = run(capsys, "op", "--spec", json.dumps(spec), "--power", "2", "--x", "1.5,2.0")
    assert code == 0
    s = OperatorSpec.make(0.8, 0.5, 2.0, -0.3, PsiMap.log(1, math.e))
    assert [d[1] for d in rows(out)[1]] == [prabhakar_power(s, 2.0, 1.5), prabhakar_power(s, 2.0, 2.0)]


def test_op_sampled_matches_library(tmp_path, capsys):
    psi = PsiMap.identity()
    x = np.linspace(0, 1, 101)
    path = tmp_path / "f.csv"
    path.write_text("x,value\n" + "".join(f"{float(a)!r},{math.cos(3 * a)!r}\n" for a in x))
    code, out, _ = run(capsys, "op", "--alpha", "0.6", "--gamma", "1.5", "--omega", "0.4", "--samples", str(path), "--x", "0.5,1")
    assert code == 0
    f = SampledFunction(x, np.array([math.cos(3 * a) for a in x]))
    spec = OperatorSpec.make(1.0, 0.6, 1.5, 0.4, psi)
    assert [d[1] for d in rows(out)[1]] == [prabhakar_apply(spec, f, 0.5), prabhakar_apply(spec, f, 1.0)]


def test_op_other_operators(capsys):
    code, out, _ = run(capsys, "op", "--operator", "rl", "--alpha", "0.5", "--func", "one", "--x", "1")
    assert code == 0 and rows(out)[1][0][1] == pytest.approx(1 / math.gamma(1.5), rel=1e-13)
    code, out, _ = run(capsys, "op", "--operator", "caputo", "--alpha", "0.5", "--func", "linear", "--x", "1")
    assert code == 0 and rows(out)[1][0][1] == pytest.approx(1 / math.gamma(1.5), rel=1e-7)


def test_op_input_errors(capsys):
    assert run(capsys, "op", "--alpha", "0.5", "--x", "0.5")[0] == 2
    assert run(capsys, "op", "--alpha", "0.5", "--func", "cos", "--x", "1.5")[0] == 2
    assert run(capsys, "op", "--spec", "missing.json", "--func", "cos")[0] == 2


def test_solve_trivial(capsys):
    prob = dict(BASE_INSTANCE, **{"lambda": 0.0, "forcing": {"type": "zero"}})
    code, out, _ = run(capsys, "solve", json.dumps(prob), "--x", "0:1:0.5")
    assert code == 0
    header, data = rows(out)
    assert header == ["x", "u_series", "u_volterra", "abs_diff"]
    assert all(d[1] == 1.0 and d[2] == 1.0 for d in data)


def test_solve_second_order_initial_data(capsys):
    prob = dict(BASE_INSTANCE, beta=1.5, b=[1.0, 2.0], forcing={"type": "zero"}, **{"lambda": 0.0})
    prob["psi"], prob["interval"] = {"kind": "log"}, [1.0, math.e]
    code, out, _ = run(capsys, "solve", json.dumps(prob), "--n-points", "5")
    assert code == 0
    for x, us, uv, _ in rows(out)[1]:
        assert us == pytest.approx(1 + 2 * math.log(x), rel=1e-14)
        assert uv == pytest.approx(1 + 2 * math.log(x), rel=1e-14)


def test_solve_base_instance(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(BASE_INSTANCE))
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "solve", str(path), "--x", "0:1:0.1", "--report", str(report))
    assert code == 0
    data = rows(out)[1]
    rel = max(d[3] for d in data) / max(abs(d[1]) for d in data)
    assert rel <= 1e-4
    rep = json.loads(report.read_text())
    assert rep["cross_check"]["max_rel_diff"] == pytest.approx(rel, rel=1e-12)
    assert rep["series"]["converged"]


def test_solve_single_method_columns(capsys):
    code, out, _ = run(capsys, "solve", json.dumps(BASE_INSTANCE), "--method", "series", "--x", "0.5")
    assert code == 0 and rows(out)[0] == ["x", "u_series"]
    code, out, _ = run(capsys, "solve", json.dumps(BASE_INSTANCE), "--method", "volterra", "--x", "0.5", "--nodes", "200")
    assert code == 0 and rows(out)[0] == ["x", "u_volterra"]


def test_solve_exit_codes(capsys):
    coarse = ["solve", json.dumps(BASE_INSTANCE), "--x", "0:1:0.5", "--nodes", "10", "--cross-tol", "1e-9"]
    assert run(capsys, *coarse)[0] == 4
    assert run(capsys, "solve", json.dumps(BASE_INSTANCE), "--x", "1", "--j-max", "2")[0] == 3
    bad = dict(BASE_INSTANCE, b=[1.0, 2.0])
    assert run(capsys, "solve", json.dumps(bad))[0] == 2
    assert run(capsys, "solve", "{not json")[0] == 2


def test_verify_command(tmp_path, capsys):
    report = tmp_path / "v.json"
    code, out, _ = run(capsys, "verify", "--suite", "semigroup", "--seed", "7", "--report", str(report))
    assert code == 0
    assert out.startswith("PASS semigroup")
    rep = json.loads(report.read_text())
    assert rep["passed"] and rep["results"][0]["measured"] < 1e-5
    assert run(capsys, "verify", "--suite", "reduction")[0] == 0


def test_verify_failure_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "boundedness")
    assert code == 1 and out.startswith("FAIL boundedness")


def test_verify_json_is_deterministic(capsys):
    _, first, _ = run(capsys, "verify", "--suite", "linearity", "--seed", "3", "--json")
    _, second, _ = run(capsys, "verify", "--suite", "linearity", "--seed", "3", "--json")
    a, b = json.loads(first), json.loads(second)
    for r in (a, b):
        r["results"][0].pop("seconds")
    assert a == b
