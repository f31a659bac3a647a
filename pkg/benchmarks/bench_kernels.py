#!/usr/bin/env python3
"""Benchmark the numba and numpy kernel backends against each other.

Times the two hot pairwise kernels (perpendicular-kernel velocity and
Gaussian field reconstruction) on a synthetic blob set shaped like the
demo simulation (quadrant blobs plus three image blocks), and checks that
the backends agree to roundoff.

    python benchmarks/bench_kernels.py [--targets 3072] [--sources 12288]
    EULERMOC_USE_NUMBA=0 python benchmarks/bench_kernels.py   # numpy only
"""

import argparse
import time

import numpy as np

from eulermoc import kernels


def synthetic_cloud(n_targets, n_sources, seed=7):
    rng = np.random.default_rng(seed)
    quadrant = rng.uniform(0.01, 2.0, size=(n_sources // 4, 2))
    gammas = rng.uniform(0.0, 1e-3, size=n_sources // 4)
    sources = np.concatenate([quadrant,
                              quadrant * np.array([-1.0, 1.0]),
                              quadrant * np.array([1.0, -1.0]),
                              -quadrant])
    weights = np.concatenate([gammas, -gammas, -gammas, gammas])
    targets = quadrant[:n_targets].copy()
    return targets, sources, weights


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--targets", type=int, default=3072)
    ap.add_argument("--sources", type=int, default=12288)
    ap.add_argument("--delta", type=float, default=0.336)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    targets, sources, weights = synthetic_cloud(args.targets, args.sources)
    backends = ["numpy"]
    if kernels.numba_available():
        backends.insert(0, "numba")
        # trigger JIT compilation outside the timed region
        kernels.velocity_sum(targets[:2], sources, weights, args.delta,
                             backend="numba")
        kernels.gaussian_field_sum(targets[:2], sources, weights, args.delta,
                                   backend="numba")
    else:
        print("numba not importable; benchmarking numpy only")

    pairs = args.targets * args.sources
    results = {}
    print(f"{args.targets} targets x {args.sources} sources "
          f"({pairs / 1e6:.1f}M pairs), delta = {args.delta}")
    for backend in backends:
        tv, uv = timeit(lambda: kernels.velocity_sum(
            targets, sources, weights, args.delta, backend=backend),
            args.repeats)
        tg, wg = timeit(lambda: kernels.gaussian_field_sum(
            targets, sources, weights, args.delta, backend=backend),
            args.repeats)
        results[backend] = (uv, wg)
        print(f"  {backend:>5}: velocity {tv:7.3f} s ({pairs / tv / 1e6:7.1f} "
              f"Mpairs/s) | field {tg:7.3f} s ({pairs / tg / 1e6:7.1f} Mpairs/s)")

    if len(results) == 2:
        du = np.max(np.abs(results["numba"][0] - results["numpy"][0]))
        dw = np.max(np.abs(results["numba"][1] - results["numpy"][1]))
        scale = max(np.max(np.abs(results["numpy"][0])), 1e-300)
        print(f"  backend agreement: velocity {du / scale:.2e} rel, "
              f"field {dw / max(np.max(np.abs(results['numpy'][1])), 1e-300):.2e} rel")
        assert du <= 1e-11 * scale, "backends disagree beyond roundoff"


if __name__ == "__main__":
    main()
