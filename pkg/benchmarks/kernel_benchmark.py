#!/usr/bin/env python3
"""Benchmark the compiled stepping kernels against the pure-Python fallback.

Runs the subarea and LID-unit loops over a two-day storm series (60 s
steps) for a batch of subareas, well beyond the bundled example's size, so
the inner-loop cost dominates.

    python3 benchmarks/kernel_benchmark.py [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from lidscore import _reservoir_py

try:
    from lidscore import _reservoir
except ImportError:
    _reservoir = None


def synthetic_storm(n_steps: int, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = np.arange(n_steps)
    bursts = np.zeros(n_steps)
    for center in rng.integers(0, n_steps, 12):
        width = rng.integers(5, 40)          # burst width in 60 s steps
        peak = rng.uniform(0.002, 0.02)      # mm/s (7..72 mm/hr)
        bursts += peak * np.exp(-0.5 * ((t - center) / width) ** 2)
    return bursts


def run_subarea(impl, intensity, fcap, n_areas: int) -> float:
    coef = 100 * math.sqrt(0.01) / (10_000 * 0.15) * 1000 ** (-2 / 3)
    start = time.perf_counter()
    for k in range(n_areas):
        impl.step_subarea(intensity, fcap, coef * (1 + 0.01 * k), 2.5,
                          60.0, 0.01, 0.0)
    return time.perf_counter() - start


def run_lid(impl, inflow, n_units: int) -> float:
    start = time.perf_counter()
    for k in range(n_units):
        impl.step_lid_unit(inflow, 25 / 3600, 2 / 3600, 300.0, 60.0, 0.0)
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--steps", type=int, default=2_880,
                        help="series length (60 s steps)")
    parser.add_argument("--areas", type=int, default=24)
    args = parser.parse_args()

    intensity = synthetic_storm(args.steps)
    fcap = np.full(args.steps, 10 / 3600.0)
    inflow = intensity * 60 * 5.0  # mm per step onto the unit

    backends = [("python", _reservoir_py)]
    if _reservoir is not None:
        backends.append(("cython", _reservoir))
    else:
        print("compiled extension not built; benchmarking fallback only")

    results = {}
    for name, impl in backends:
        sub = min(run_subarea(impl, intensity, fcap, args.areas)
                  for _ in range(args.repeat))
        lid = min(run_lid(impl, inflow, args.areas)
                  for _ in range(args.repeat))
        results[name] = (sub, lid)
        print(f"{name:>7}: subarea {sub:8.3f} s   lid unit {lid:8.3f} s "
              f"({args.areas} x {args.steps} steps)")

    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        print(f"speedup: subarea x{py[0] / cy[0]:.1f}, "
              f"lid unit x{py[1] / cy[1]:.1f}")

    # both paths must agree bit for bit
    if _reservoir is not None:
        a = _reservoir_py.step_subarea(intensity[:2000], fcap[:2000],
                                       1e-4, 2.5, 60.0, 0.01, 0.0)
        b = _reservoir.step_subarea(intensity[:2000], fcap[:2000],
                                    1e-4, 2.5, 60.0, 0.01, 0.0)
        assert np.array_equal(a[0], b[0]) and a[2] == b[2]
        print("parity check: identical results")


if __name__ == "__main__":
    main()
