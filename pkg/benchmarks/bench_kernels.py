#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the convolution and pooling primitives at the shapes the default
model actually runs (one row per block), plus the backward passes.
Usage:

    python3 benchmarks/bench_kernels.py [--batch 8] [--repeats 5] [--dtype f32]

The compiled backend is skipped with a note if the extension is not built.
"""

import argparse
import time

import numpy as np

from ferlite.kernels import _numpy

try:
    from ferlite.kernels import _cykernels
except ImportError:
    _cykernels = None

# (label, in_channels, out_channels, spatial) per block of the default model
BLOCKS = [
    ("block1", 1, 64, 48),
    ("block2", 64, 128, 24),
    ("block3", 128, 512, 12),
    ("block4", 512, 512, 6),
]


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def conv_cases(batch, dtype, rng):
    for label, cin, cout, size in BLOCKS:
        x = rng.standard_normal((batch, cin, size, size)).astype(dtype)
        w = rng.standard_normal((cout, cin, 3, 3)).astype(dtype)
        b = rng.standard_normal(cout).astype(dtype)
        gy = rng.standard_normal((batch, cout, size, size)).astype(dtype)
        shape = f"{label} [{batch},{cin},{size},{size}]->{cout}ch"
        yield f"conv2d forward  {shape}", lambda m, a=(x, w, b): m.conv2d_forward(*a)
        yield f"conv2d backward {shape}", lambda m, a=(x, w, gy): m.conv2d_backward(*a)


def pool_cases(batch, dtype, rng):
    for label, cin, cout, size in BLOCKS:
        x = rng.standard_normal((batch, cout, size, size)).astype(dtype)
        shape = f"{label} [{batch},{cout},{size},{size}]"
        yield f"maxpool forward  {shape}", lambda m, a=(x,): m.maxpool2_forward(*a)
        _, idx = _numpy.maxpool2_forward(x)
        gy = rng.standard_normal((batch, cout, size // 2, size // 2)).astype(dtype)
        yield f"maxpool backward {shape}", lambda m, a=(idx, gy): m.maxpool2_backward(*a)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--dtype", choices=("f32", "f64"), default="f32")
    args = parser.parse_args()

    dtype = np.float32 if args.dtype == "f32" else np.float64
    rng = np.random.default_rng(0)
    cases = list(conv_cases(args.batch, dtype, rng))
    cases += list(pool_cases(args.batch, dtype, rng))

    if _cykernels is None:
        print("compiled extension not built; timing the numpy backend only\n")

    width = max(len(name) for name, _ in cases)
    header = f"{'kernel':<{width}}  {'numpy':>10}  {'cython':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, run in cases:
        t_np = best_of(lambda: run(_numpy), args.repeats)
        if _cykernels is None:
            print(f"{name:<{width}}  {t_np * 1e3:>8.2f}ms  {'-':>10}  {'-':>8}")
            continue
        t_cy = best_of(lambda: run(_cykernels), args.repeats)
        print(f"{name:<{width}}  {t_np * 1e3:>8.2f}ms  {t_cy * 1e3:>8.2f}ms"
              f"  {t_np / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
