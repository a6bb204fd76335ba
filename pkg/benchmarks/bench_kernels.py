#!/usr/bin/env python3
"""Benchmark the compiled scan kernels against the pure-Python fallback.

The workload mirrors calibration's hot loop: for every record, one scan per
grid point (top-p cutoff, eta count, adaptive entropy scan) plus one Zipf
estimate per record. Run after an editable install:

    python3 benchmarks/bench_kernels.py --records 100 --tokens 2048 --grid 200
"""

import argparse
import time

import numpy as np

from cptrie.kernels import available_backends


def make_probs(rng, n):
    p = np.sort(rng.dirichlet(np.ones(n)))[::-1]
    p = np.clip(p, 1e-300, None)
    return np.ascontiguousarray(p / p.sum())


def run_workload(impl, records, p_grid, eta_grid, delta_grid):
    sink = 0
    for probs in records:
        sink += impl.zipf_s_hat(probs, 100) > 1.0
        for p in p_grid:
            sink += impl.top_p_cut(probs, p)
        for eta in eta_grid:
            sink += impl.count_above(probs, eta)
        for d in delta_grid:
            sink += impl.adaptive_cut(probs, d)
    return sink


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--records", type=int, default=100)
    parser.add_argument("--tokens", type=int, default=2048)
    parser.add_argument("--grid", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(12345)
    records = [make_probs(rng, args.tokens) for _ in range(args.records)]
    p_grid = np.linspace(0.05, 1.0, args.grid)
    eta_grid = np.geomspace(1e-6, 0.5, args.grid)
    delta_grid = np.geomspace(1e-6, 0.5, args.grid)

    scans = args.records * args.grid * 3
    print(
        f"workload: {args.records} records x {args.tokens} tokens, "
        f"{args.grid}-point grid per method ({scans} scans/run)"
    )

    timings = {}
    for name, impl in sorted(available_backends().items()):
        best = float("inf")
        checksum = None
        for _ in range(args.repeats):
            start = time.perf_counter()
            checksum = run_workload(impl, records, p_grid, eta_grid, delta_grid)
            best = min(best, time.perf_counter() - start)
        timings[name] = best
        print(f"  {name:<8} {best:8.3f} s   ({scans / best:,.0f} scans/s)  checksum={checksum}")

    if {"python", "cython"} <= timings.keys():
        print(f"  speedup: {timings['python'] / timings['cython']:.1f}x")
    else:
        print("  compiled backend unavailable; only the fallback was timed")


if __name__ == "__main__":
    main()
