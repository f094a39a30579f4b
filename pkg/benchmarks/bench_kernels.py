#!/usr/bin/env python3
"""Benchmark the compiled window-distance kernel against the NumPy fallback.

The workload mirrors one window size of a motif sweep: a candidate set scanned
against every sequence of both groups.

Usage:
    python3 benchmarks/bench_kernels.py [--windows 100] [--seqs 2000] [--w 4]
                                        [--jobs 1 4] [--repeats 5]
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from teammotif.kernels import available_backends


def make_workload(n_windows: int, n_seqs: int, w: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    windows = rng.integers(0, 6, size=(n_windows, w)).astype(np.int8)
    seqs = [
        rng.integers(0, 6, size=int(rng.integers(20, 61))).astype(np.int8)
        for _ in range(n_seqs)
    ]
    return windows, seqs


def bench(impl, windows, seqs, n_jobs: int, repeats: int) -> list[float]:
    impl.distance_matrix(windows, seqs[: min(64, len(seqs))], n_jobs=n_jobs)  # warm-up
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        impl.distance_matrix(windows, seqs, n_jobs=n_jobs)
        times.append(time.perf_counter() - start)
    return times


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--windows", type=int, default=100)
    parser.add_argument("--seqs", type=int, default=2000)
    parser.add_argument("--w", type=int, default=4)
    parser.add_argument("--jobs", type=int, nargs="+", default=[1, 4])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    import os

    windows, seqs = make_workload(args.windows, args.seqs, args.w)
    cells = args.windows * args.seqs
    print(
        f"workload: {args.windows} windows (w={args.w}) x {args.seqs} sequences "
        f"(lengths 20-60), {args.repeats} repeats, {os.cpu_count()} cpu(s)"
    )

    backends = available_backends()
    if "cython" not in backends:
        print("note: compiled backend not built; run `pip install -e . --no-build-isolation`")
    reference = None
    baseline = None
    for name, impl in sorted(backends.items()):
        for n_jobs in args.jobs:
            times = bench(impl, windows, seqs, n_jobs, args.repeats)
            best = min(times)
            med = statistics.median(times)
            out = impl.distance_matrix(windows, seqs, n_jobs=n_jobs)
            if reference is None:
                reference = out
                baseline = best
            else:
                assert np.array_equal(reference, out), "backends disagree"
            speedup = baseline / best if baseline else 1.0
            print(
                f"{name:7s} n_jobs={n_jobs}: best {best * 1e3:8.1f} ms  "
                f"median {med * 1e3:8.1f} ms  {cells / best / 1e6:7.2f} Mcell/s  "
                f"x{speedup:5.1f} vs first row"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
