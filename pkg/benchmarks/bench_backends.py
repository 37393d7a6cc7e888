#!/usr/bin/env python3
"""Benchmark the compiled simulation kernel against the pure-Python fallback.

Runs the three hot loops (noise-free braking, noisy braking, lateral
step) through both backends and prints steps/second and the speedup.

Usage: python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time

import pedbrake._kernel as kernel_pkg
from pedbrake._kernel import loop_py
from pedbrake.scenarios import (
    LateralScenarioConfig,
    ScenarioConfig,
    run_braking_scenario,
    run_lateral_scenario,
)
from pedbrake.sensing import DetectionNoiseModel

try:
    from pedbrake._kernel import _loop_cy
except ImportError:
    _loop_cy = None

CASES = [
    ("braking noise-free", run_braking_scenario, ScenarioConfig()),
    ("braking noisy", run_braking_scenario,
     ScenarioConfig(noise=DetectionNoiseModel(), seed=1)),
    ("lateral step", run_lateral_scenario, LateralScenarioConfig()),
]


def _time_case(impl, runner, config, repeats):
    kernel_pkg.run_braking_loop = impl.run_braking_loop
    kernel_pkg.run_lateral_loop = impl.run_lateral_loop
    runner(config)  # warm up
    best = float("inf")
    steps = 0
    for _ in range(repeats):
        start = time.perf_counter()
        log = runner(config)
        best = min(best, time.perf_counter() - start)
        steps = len(log)
    return best, steps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = [("python", loop_py)]
    if _loop_cy is not None:
        backends.append(("compiled", _loop_cy))
    else:
        print("note: compiled kernel not built; showing pure Python only\n")

    print(f"{'case':<22}{'backend':<10}{'time/run':>12}{'steps/s':>14}{'speedup':>10}")
    saved = (kernel_pkg.run_braking_loop, kernel_pkg.run_lateral_loop)
    try:
        for name, runner, config in CASES:
            base_time = None
            for backend_name, impl in backends:
                elapsed, steps = _time_case(impl, runner, config, args.repeats)
                if base_time is None:
                    base_time = elapsed
                speedup = base_time / elapsed
                print(f"{name:<22}{backend_name:<10}{elapsed * 1e3:>10.2f} ms"
                      f"{steps / elapsed:>14.0f}{speedup:>9.1f}x")
    finally:
        kernel_pkg.run_braking_loop, kernel_pkg.run_lateral_loop = saved


if __name__ == "__main__":
    main()
