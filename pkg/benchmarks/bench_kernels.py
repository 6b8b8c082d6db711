#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallbacks.

Run:  python benchmarks/bench_kernels.py [--quick]

Covers the three hot loops (nonuniform Fourier sums, the rough-variance
Volterra recursion, the Euler variance core) plus one end-to-end path
(simulate + contaminate + sample + estimate) under each lane.
"""

import argparse
import os
import time

import numpy as np


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(quick: bool):
    from fourierspot import _kernels_py, kernels

    if not kernels.HAVE_COMPILED:
        print("compiled extension not available; nothing to compare")
        return

    rng = np.random.default_rng(0)
    rows = []

    n, n_freq = (2340, 168) if not quick else (600, 60)
    tau = rng.uniform(0, 2 * np.pi, n)
    dx = rng.normal(size=n) * 0.01
    rows.append(("nudft_coeffs  (n=%d, N=%d)" % (n, n_freq),
                 timeit(lambda: kernels.nudft_coeffs(tau, dx, n_freq), 5),
                 timeit(lambda: _kernels_py.nudft_coeffs(tau, dx, n_freq), 5)))

    nv = 11700 if not quick else 2000
    dt = 1.0 / nv
    kvec = 0.672 * (dt * np.arange(1, nv + 1)) ** (-0.4)
    dz = rng.normal(size=nv) * np.sqrt(dt) * 0.2
    rows.append(("volterra_variance (n=%d)" % nv,
                 timeit(lambda: kernels.volterra_variance(kvec, dt, 0.2, 0.3, 0.2, 0.667, dz), 3),
                 timeit(lambda: _kernels_py.volterra_variance(kvec, dt, 0.2, 0.3, 0.2, 0.667, dz), 1)))

    dw = rng.normal(size=nv) * np.sqrt(dt)
    dzh = rng.normal(size=nv) * np.sqrt(dt)
    args = (dw, dzh, dt, 0.0002, 0.0198, 0.1, 0.002, 0.1)
    rows.append(("heston_core (n=%d)" % nv,
                 timeit(lambda: kernels.heston_core(*args), 5),
                 timeit(lambda: _kernels_py.heston_core(*args), 2)))

    print(f"{'kernel':40s} {'compiled':>12s} {'pure':>12s} {'speedup':>9s}")
    for name, fast, slow in rows:
        print(f"{name:40s} {fast * 1e3:10.2f}ms {slow * 1e3:10.2f}ms {slow / fast:8.1f}x")


def bench_pipeline(quick: bool):
    # one full Monte Carlo path per lane; lanes are selected at import, so
    # the fallback timing runs in a subprocess
    import subprocess
    import sys

    code = (
        "import time, os\n"
        "import numpy as np\n"
        "t0 = time.perf_counter()\n"
        "from fourierspot import kernels\n"
        "from fourierspot.harness import ScenarioConfig, run_scenario\n"
        "from fourierspot.path_sim import RoughHestonParams\n"
        "cfg = ScenarioConfig(model=RoughHestonParams(), d={d}, n_paths={k}, master_seed=1)\n"
        "t0 = time.perf_counter()\n"
        "rep, _ = run_scenario(cfg, workers=1)\n"
        "print(f'lane compiled={{kernels.HAVE_COMPILED}}: "
        "{{time.perf_counter() - t0:.2f}}s for {k} paths (MISE {{rep.mise:.3e}})')\n"
    ).format(d=2 if quick else 5, k=2 if quick else 10)
    for pure in ("0", "1"):
        env = dict(os.environ, FOURIERSPOT_PURE_PYTHON=pure)
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller sizes")
    args = ap.parse_args()
    bench_kernels(args.quick)
    print()
    bench_pipeline(args.quick)


if __name__ == "__main__":
    main()
