"""Command line entry point ``prabhakar``.

    prabhakar ml --rho 1 --alpha 1 --gamma 1 --z 0:1:0.5
    prabhakar op --rho 1 --alpha 0.5 --gamma 1 --omega 0.3 --power 2 --x 0:1:0.1
    prabhakar solve problem.json --method both --x 0:1:0.05
    prabhakar verify --suite semigroup --seed 7 --report report.json

Exit codes: 0 ok, 1 verification failure, 2 input error, 3 convergence
failure, 4 series/Volterra cross-check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings

import numpy as np

from . import __version__
from .cauchy import CauchyProblem, SeriesSolution, volterra_solve
from .errors import ConvergenceWarning, DomainError
from .operators import (
    DEFAULT_NODES,
    OperatorSpec,
    SampledFunction,
    caputo_apply,
    prabhakar_apply,
    prabhakar_power,
    rl_apply,
)
from .psi import psi_eval, psi_from_json
from .special_fn import MLParams, SeriesControl, ml3
from .verify import SUITES, run_all

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_CROSS = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def parse_grid(text):
    """``start:stop:step`` (stop included within half a step), a number, or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(v) for v in text.split(":")]
            if len(parts) != 3:
                raise InputError(f"grid {text!r} must be start:stop:step")
            start, stop, step = parts
            if step <= 0.0 or stop < start:
                raise InputError(f"grid {text!r} needs step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 0.5)) + 1
            return start + step * np.arange(count)
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise InputError(f"bad grid {text!r}: {exc}") from None


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, header, rows):
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    finally:
        if out is not sys.stdout:
            out.close()


def write_report(path, payload):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, default=float)
            fh.write("\n")


def load_json(text):
    """Inline JSON or a path to a JSON file."""
    try:
        if text.lstrip().startswith("{"):
            return json.loads(text)
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {text!r}: {exc}") from None


# commands ----------------------------------------------------------------------


def cmd_ml(args):
    p = MLParams(args.rho, args.alpha, args.gamma)
    ctl = SeriesControl(args.rel_tol, args.max_terms)
    rows, ok = [], True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for z in parse_grid(args.z):
            value, c = ml3(p, z, ctl)
            rows.append((z, value, c.achieved_terms, c.converged))
            ok = ok and c.converged
    write_csv(args.output, ["z", "value", "terms", "converged"], rows)
    write_report(args.report, {"command": "ml", "converged": ok, "points": len(rows)})
    return EXIT_OK if ok else EXIT_CONVERGENCE


_BUILTINS = {
    "one": lambda psi: (lambda x: np.ones_like(np.asarray(x, dtype=float))),
    "linear": lambda psi: (lambda x: psi_eval(psi, x) - psi_eval(psi, psi.a)),
    "cos": lambda psi: (lambda x: np.cos(psi_eval(psi, x))),
    "sin": lambda psi: (lambda x: np.sin(psi_eval(psi, x))),
    "exp": lambda psi: (lambda x: np.exp(psi_eval(psi, x))),
}


def _op_spec(args):
    desc = load_json(args.spec) if args.spec else {}
    psi_desc = desc.get("psi", {"kind": args.psi})
    interval = desc.get("interval", args.interval)
    psi = psi_from_json(psi_desc, interval)
    o = desc.get("op", desc)
    get = lambda k, dflt: o.get(k, dflt) if o.get(k) is not None else dflt
    rho = get("rho", args.rho)
    alpha = get("alpha", args.alpha)
    gamma = get("gamma", args.gamma)
    omega = get("omega", args.omega)
    if alpha is None:
        raise InputError("the operator order --alpha is required")
    return OperatorSpec.make(rho, alpha, gamma, omega, psi)


def _read_sampled(path):
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read samples from {path!r}: {exc}") from None
    return SampledFunction(data[:, 0], data[:, 1])


def cmd_op(args):
    spec = _op_spec(args)
    psi = spec.psi
    kind = args.operator
    selectors = [args.power is not None, args.samples is not None, args.func is not None]
    if sum(selectors) != 1:
        raise InputError("choose exactly one of --power, --samples, --func")
    if args.power is not None and kind != "prabhakar":
        raise InputError("--power is only available for the prabhakar operator")
    xs = parse_grid(args.x) if args.x else np.linspace(psi.a, psi.b, 11)
    if args.samples is not None:
        f = _read_sampled(args.samples)
    elif args.func is not None:
        f = SampledFunction.from_callable(_BUILTINS[args.func](psi), psi, args.nodes)
    ctl = SeriesControl(args.rel_tol, args.max_terms)
    rows, ok = [], True
    for x in _snap(xs, psi):
        x = float(x)
        if args.power is not None:
            value = prabhakar_power(spec, args.power, x, ctl)
        elif kind == "prabhakar":
            value, c = prabhakar_apply(spec, f, x, ctl, full_output=True)
            ok = ok and c.converged
        elif kind == "rl":
            value = rl_apply(spec.ml.alpha, psi, f, x)
        else:
            g = f.func if f.func is not None else (lambda y, f=f: np.array([f.at(float(t), psi) for t in np.atleast_1d(y)]))
            value = caputo_apply(spec.ml.alpha, psi, g, x, n_nodes=args.nodes)
        rows.append((x, value))
    write_csv(args.output, ["x", "value"], rows)
    write_report(args.report, {"command": "op", "operator": kind, "converged": ok, "points": len(rows)})
    return EXIT_OK if ok else EXIT_CONVERGENCE


def cmd_solve(args):
    p = CauchyProblem.from_json(load_json(args.problem))
    psi = p.psi
    if args.x:
        xs = parse_grid(args.x)
    else:
        xs = np.asarray(psi.inverse(np.linspace(psi_eval(psi, psi.a), psi_eval(psi, psi.b), args.n_points)), dtype=float)
        xs[0], xs[-1] = psi.a, psi.b
    xs = _snap(xs, psi)
    header, cols = ["x"], [xs]
    report = {"command": "solve", "method": args.method, "problem": p.to_json()}
    ok = True
    u_ser = u_vol = None
    if args.method in ("series", "both"):
        sol = SeriesSolution(p, j_max=args.j_max, ctl=SeriesControl(args.rel_tol, args.max_terms))
        vals, terms = [], 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            for x in xs:
                v, d = sol.diagnose(float(x))
                vals.append(v)
                terms = max(terms, d.terms)
                ok = ok and d.converged
        u_ser = np.array(vals)
        header.append("u_series")
        cols.append(u_ser)
        report["series"] = {"converged": ok, "max_outer_terms": terms}
    if args.method in ("volterra", "both"):
        grid = _volterra_grid(psi, xs, args.nodes)
        u = volterra_solve(p, grid)
        u_vol = np.array([u.at(float(x), psi) for x in xs])
        header.append("u_volterra")
        cols.append(u_vol)
        report["volterra"] = {"nodes": int(grid.size)}
    code = EXIT_OK if ok else EXIT_CONVERGENCE
    if args.method == "both":
        diff = np.abs(u_ser - u_vol)
        header.append("abs_diff")
        cols.append(diff)
        rel = float(np.max(diff)) / max(float(np.max(np.abs(u_ser))), 1e-300)
        report["cross_check"] = {"max_rel_diff": rel, "tolerance": args.cross_tol}
        if code == EXIT_OK and rel > args.cross_tol:
            code = EXIT_CROSS
    write_csv(args.output, header, zip(*cols))
    report["exit_code"] = code
    write_report(args.report, report)
    return code


def _snap(xs, psi):
    """Pull grid points that overshoot an end point by rounding back onto it."""
    xs = np.asarray(xs, dtype=float).copy()
    tol = 1e-12 * max(1.0, abs(psi.a), abs(psi.b))
    xs[np.abs(xs - psi.a) <= tol] = psi.a
    xs[np.abs(xs - psi.b) <= tol] = psi.b
    return xs


def _volterra_grid(psi, xs, n):
    """Nodes uniform in psi, merged with the requested output points."""
    s = np.linspace(psi_eval(psi, psi.a), psi_eval(psi, psi.b), n)
    base = np.asarray(psi.inverse(s), dtype=float)
    base[0], base[-1] = psi.a, psi.b
    grid = np.unique(np.concatenate([base, xs]))
    keep = np.concatenate([[True], np.diff(grid) > 1e-12 * max(1.0, abs(psi.b))])
    return grid[keep]


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_all(names, args.seed)
    stream = sys.stderr if args.json else sys.stdout
    for r in results:
        print(r.line(), file=stream)
    payload = {"seed": args.seed, "results": [r.to_json() for r in results], "passed": all(r.passed for r in results)}
    if args.json:
        json.dump(payload, sys.stdout, indent=2, default=float)
        sys.stdout.write("\n")
    write_report(args.report, payload)
    return EXIT_OK if payload["passed"] else EXIT_VERIFY


# parser ------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="prabhakar", description="Prabhakar-type fractional operators with respect to a function.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, series=True):
        p.add_argument("-o", "--output", default=None, help="CSV output path (default stdout)")
        p.add_argument("--report", default=None, help="write diagnostics JSON here")
        if series:
            p.add_argument("--rel-tol", type=float, default=1e-14)
            p.add_argument("--max-terms", type=int, default=1000)

    p = sub.add_parser("ml", help="three-parameter Mittag-Leffler function on a grid")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--z", required=True, help="start:stop:step, a number, or a comma list")
    common(p)
    p.set_defaults(func_cmd=cmd_ml)

    p = sub.add_parser("op", help="apply an operator to a function")
    p.add_argument("--spec", default=None, help="JSON (inline or path) with op/psi/interval fields")
    p.add_argument("--operator", choices=("prabhakar", "rl", "caputo"), default="prabhakar")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--psi", default="identity", choices=("identity", "log", "exp"))
    p.add_argument("--interval", type=float, nargs=2, default=None)
    p.add_argument("--power", type=float, default=None, help="f = (psi - psi(a))^(delta-1), closed form")
    p.add_argument("--samples", default=None, help="CSV with header and columns x,value")
    p.add_argument("--func", choices=sorted(_BUILTINS), default=None)
    p.add_argument("--nodes", type=int, default=DEFAULT_NODES)
    p.add_argument("--x", default=None)
    common(p)
    p.set_defaults(func_cmd=cmd_op)

    p = sub.add_parser("solve", help="solve a Cauchy problem given as JSON")
    p.add_argument("problem", help="problem JSON (inline or path)")
    p.add_argument("--method", choices=("series", "volterra", "both"), default="both")
    p.add_argument("--x", default=None)
    p.add_argument("--n-points", type=int, default=21)
    p.add_argument("--nodes", type=int, default=800, help="Volterra grid size")
    p.add_argument("--j-max", type=int, default=60)
    p.add_argument("--cross-tol", type=float, default=1e-3)
    common(p)
    p.set_defaults(func_cmd=cmd_solve)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--suite", default="all", choices=["all", *SUITES])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="print the JSON report on stdout")
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.set_defaults(func_cmd=cmd_verify)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "n_points", 2) < 2:
        print("error: --n-points must be >= 2", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func_cmd(args)
    except (InputError, DomainError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
