#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the three hot kernels at the sizes the pipeline actually uses
(30-point series, <= 50 training rows, 19-value rho grids), then an
end-to-end rho sweep per backend in subprocesses, since the backend is
chosen at import time.

Usage: python3 benchmarks/bench_kernels.py [--trials 200]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from glanceauth import _kernels_py

try:
    from glanceauth import _kernels
except ImportError:
    _kernels = None

END_TO_END = """
import time
import glanceauth.backend as backend
from glanceauth.synth import SynthConfig, synth_generate
from glanceauth.evaluate import TrialConfig, roc_sweep

dataset = synth_generate(SynthConfig(users=10, samples_per_type=70, seed=42))
cfg = TrialConfig(n=10, combination="TFBD", seed=7, trials={trials}, threads=1)
started = time.perf_counter()
report = roc_sweep(dataset, cfg)
elapsed = time.perf_counter() - started
print(f"{{backend.BACKEND}}: {{elapsed:.2f}}s for a {{len(report.roc)}}-point sweep "
      f"of {cfg_trials} trials (eer={{report.eer:.4f}})")
"""


def time_call(fn, *args, repeat=2000):
    best = float("inf")
    for _ in range(5):
        started = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - started) / repeat)
    return best


def bench_kernels():
    rng = np.random.default_rng(0)
    times = np.sort(rng.uniform(0, 0.25, 12))
    times[0] = 0.0
    values = rng.standard_normal(12)
    rows = np.ascontiguousarray(rng.standard_normal((50, 30)))
    devs = np.abs(rng.standard_normal(31))
    sigmas = np.abs(rng.standard_normal(31)) + 0.1
    rhos = np.ascontiguousarray(np.linspace(1.0, 0.1, 19))

    small_rows = np.ascontiguousarray(rng.standard_normal((10, 30)))
    cases = [
        ("resample_grid (12 pts -> 30)", (times, values, 30, 0.01), "resample_grid"),
        ("moments (10 x 30)", (small_rows,), "moments"),
        ("moments (50 x 30)", (rows,), "moments"),
        ("sweep_bits (31 x 19)", (devs, sigmas, 10.0, rhos), "sweep_bits"),
    ]
    print(f"{'kernel':<30} {'numpy':>12} {'compiled':>12} {'speedup':>9}", flush=True)
    for name, args, attr in cases:
        slow = time_call(getattr(_kernels_py, attr), *args)
        if _kernels is None:
            print(f"{name:<30} {slow * 1e6:>10.1f}us {'n/a':>12} {'n/a':>9}", flush=True)
            continue
        fast = time_call(getattr(_kernels, attr), *args)
        print(
            f"{name:<30} {slow * 1e6:>10.1f}us {fast * 1e6:>10.1f}us "
            f"{slow / fast:>8.1f}x",
            flush=True,
        )


def bench_end_to_end(trials):
    code = END_TO_END.format(trials=trials, cfg_trials=trials)
    for name, env_value in (("compiled", "0"), ("python fallback", "1")):
        if name == "compiled" and _kernels is None:
            print("compiled: extension not built, skipped")
            continue
        env = dict(os.environ, GLANCEAUTH_FORCE_PYTHON=env_value)
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200, help="sweep trials per backend")
    args = parser.parse_args()
    print("== kernel micro-benchmarks ==", flush=True)
    bench_kernels()
    print(flush=True)
    print("== end-to-end rho sweep (TFBD, n=10), one process per backend ==", flush=True)
    bench_end_to_end(args.trials)


if __name__ == "__main__":
    main()
