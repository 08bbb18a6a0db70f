#!/usr/bin/env python3
"""Compare the compiled pair-quadrature kernel with the numpy fallback.

The backend is fixed at import time, so each measurement runs in a child
interpreter: once with the default selection and once with
MIXNEU_PURE_PYTHON=1.  Reported times are best-of-3 for a full stiffness
assembly (alpha = beta = 1, s = 0.6) on a collared unit interval.

    python3 benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time

SIZES = (32, 64, 128, 256)
REPEATS = 3


def time_assembly(n_in):
    from mixneu import OperatorParams, PiecewiseField, assemble, build_mesh
    from mixneu._kernels import backend_name

    mesh = build_mesh(0.0, 1.0, n_in, 1.0, max(4, n_in // 4))
    weight = PiecewiseField(0.0, 1.0, (0.25,), (1.0, -1.0), role="weight")
    params = OperatorParams(alpha=1.0, beta=1.0, s=0.6)
    assemble(params, mesh, weight)  # warm-up, excluded from timing
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        assemble(params, mesh, weight)
        best = min(best, time.perf_counter() - t0)
    return backend_name(), best


def inner():
    times = {}
    backend = None
    for n in SIZES:
        backend, t = time_assembly(n)
        times[str(n)] = t
    json.dump({"backend": backend, "times": times}, sys.stdout)


def main():
    results = {}
    for force_python in (False, True):
        env = dict(os.environ)
        env.pop("MIXNEU_PURE_PYTHON", None)
        if force_python:
            env["MIXNEU_PURE_PYTHON"] = "1"
        proc = subprocess.run([sys.executable, __file__, "--inner"],
                              env=env, capture_output=True, text=True,
                              check=True)
        data = json.loads(proc.stdout)
        results[data["backend"]] = data["times"]

    if "compiled" not in results:
        print("compiled kernel not built; both runs used the numpy fallback")

    print(f"{'n_in':>6}  {'python [s]':>12}  {'compiled [s]':>13}  "
          f"{'speedup':>8}")
    for n in SIZES:
        py = results["python"][str(n)]
        if "compiled" in results:
            cc = results["compiled"][str(n)]
            print(f"{n:>6}  {py:>12.4f}  {cc:>13.4f}  {py / cc:>7.1f}x")
        else:
            print(f"{n:>6}  {py:>12.4f}  {'-':>13}  {'-':>8}")


if __name__ == "__main__":
    if "--inner" in sys.argv[1:]:
        inner()
    else:
        main()
