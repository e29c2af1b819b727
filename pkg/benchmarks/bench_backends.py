"""Benchmark the compiled kernel extension against the pure-Python fallback.

Times the raw special-function kernels and a full simulation replication
under both backends. Run from the repository root:

    python benchmarks/bench_backends.py
"""

import importlib
import os
import sys
import time

import numpy as np


def _reload_expfdr(backend: str):
    os.environ["EXPFDR_BACKEND"] = backend
    for name in [n for n in list(sys.modules) if n.startswith("expfdr")]:
        del sys.modules[name]
    return importlib.import_module("expfdr")


def _time(fn, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(backend: str) -> dict:
    ef = _reload_expfdr(backend)
    from expfdr._backend import kernels
    from expfdr.simulation import SimConfig, run_replication

    results = {"backend": ef.backend_name()}

    x = np.linspace(0.01, 300.0, 100_000)
    results["gammainc_p_vec 1e5"] = _time(lambda: kernels.gammainc_p_vec(50.0, x))
    y = np.linspace(1e-6, 1 - 1e-6, 100_000)
    results["betainc_vec 1e5"] = _time(lambda: kernels.betainc_reg_vec(25.0, 25.0, y))

    scalar_grid = np.linspace(0.5, 200.0, 2000)
    results["gammainc_p scalar x2000"] = _time(
        lambda: [kernels.gammainc_p(50.0, float(v)) for v in scalar_grid])

    cfg = SimConfig(m=100, n=50, pi0=0.5, n_reps=1, seed=1)
    run_replication(cfg, 0)  # warm the quantile caches
    results["simulation replication (m=100, n=50)"] = _time(
        lambda: run_replication(cfg, 1), repeat=3)
    return results


def main():
    rows = [bench("python"), bench("compiled")]
    keys = [k for k in rows[0] if k != "backend"]
    width = max(len(k) for k in keys) + 2
    print(f"{'kernel':<{width}} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for k in keys:
        py, cy = rows[0][k], rows[1][k]
        print(f"{k:<{width}} {py * 1e3:>10.2f}ms {cy * 1e3:>10.2f}ms {py / cy:>8.1f}x")


if __name__ == "__main__":
    main()
