"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--nodes 800] [--repeat 3]

Prints one line per kernel with the best-of-``repeat`` time for each backend,
the speedup, and the largest difference between the two outputs.
"""

import argparse
import time

import numpy as np

from prabhakar import _backend, _fallback
from prabhakar.psi import PsiMap, psi_eval, psi_grid


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(n):
    s = np.ascontiguousarray(psi_eval(PsiMap.log(), psi_grid(PsiMap.log(), n)))
    z = np.linspace(-5.0, 5.0, 2001)

    def ml(mod):
        return lambda: np.array([mod.ml_sum(0.7, 1.2, 2.5, t, 1e-14, 1000)[0] for t in z])

    def weights(mod):
        return lambda: mod.op_weights(s, 1.0, 0.5, 1.0, 0.3, 1e-14, 1000)[0]

    def matrix(mod):
        return lambda: mod.op_matrix(s, 1.0, 0.5, 1.0, 0.3, 1e-14, 1000)[0]

    W = _fallback.op_matrix(s, 1.0, 0.5, 1.0, 0.3, 1e-14, 1000)[0]
    F = np.ones(n)

    def forward(mod):
        return lambda: mod.volterra_forward(W, 0.4, F, 1e-12)

    return [
        (f"ml_sum x {z.size}", ml),
        (f"op_weights n={n}", weights),
        (f"op_matrix n={n}", matrix),
        (f"volterra_forward n={n}", forward),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=800)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if "compiled" not in _backend.available():
        print("compiled kernels are not built; only the fallback is available")
        return 1
    from prabhakar import _kernels

    print(f"{'kernel':<26}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}{'max diff':>12}")
    for label, make in cases(args.nodes):
        tc, oc = best_of(make(_kernels), args.repeat)
        tp, op = best_of(make(_fallback), args.repeat)
        diff = float(np.max(np.abs(np.asarray(oc) - np.asarray(op))))
        print(f"{label:<26}{tc:>14.4f}{tp:>14.4f}{tp / tc:>10.1f}{diff:>12.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
