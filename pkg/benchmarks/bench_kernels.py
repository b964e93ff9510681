#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from mpilab._kernels import _fallback

try:
    from mpilab._kernels import _native
except ImportError:
    _native = None


def timeit(fn, repeats):
    fn()  # warm up
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def cases(rng):
    img = rng.random((512, 512, 4))
    hom = np.array([[0.98, 0.02, 3.1], [-0.01, 1.01, -2.4], [1e-5, -2e-5, 1.0]])
    xs = rng.uniform(0, 511, (512, 512))
    ys = rng.uniform(0, 511, (512, 512))
    eligible = (rng.random((256, 256)) < 0.05).astype(np.uint8)
    needs = (rng.random((256, 256)) < 0.4).astype(np.uint8)
    return [
        ("warp 512x512x4", lambda m: m.warp_bilinear(img, hom, 512, 512, False)),
        ("warp periodic", lambda m: m.warp_bilinear(img, hom, 512, 512, True)),
        ("gather 512x512x4", lambda m: m.gather_bilinear(img, xs, ys)),
        ("donor search r=12", lambda m: m.donor_search(eligible, needs, 12)),
    ]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rows = []
    for name, call in cases(rng):
        numpy_time = timeit(lambda: call(_fallback), args.repeats)
        if _native is not None:
            native_time = timeit(lambda: call(_native), args.repeats)
            rows.append((name, numpy_time, native_time, numpy_time / native_time))
        else:
            rows.append((name, numpy_time, None, None))

    header = f"{'kernel':<20} {'numpy':>10} {'native':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, numpy_time, native_time, speedup in rows:
        if native_time is None:
            print(f"{name:<20} {numpy_time * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>9}")
        else:
            print(
                f"{name:<20} {numpy_time * 1e3:>8.2f}ms {native_time * 1e3:>8.2f}ms "
                f"{speedup:>8.1f}x"
            )
    if _native is None:
        print("\ncompiled backend unavailable; only the fallback was timed")


if __name__ == "__main__":
    main()
