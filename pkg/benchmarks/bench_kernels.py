#!/usr/bin/env python3
"""Benchmark the numba-jitted metric kernels against the pure-numpy fallback.

Times SSIM and PSNR-HVS-M accumulation on synthetic images of a few sizes
and prints a comparison table plus the relative deviation between backends
(should be at floating-point noise level).

Usage: python benchmarks/bench_kernels.py [--repeats 5] [--sizes 128,512,1024]
"""

import argparse
import time

import numpy as np

from rainbench.metrics import SsimParams, _DCT_MAT
from rainbench.metrics.backend import get_backend
from rainbench.metrics.tables import CSF_WEIGHTS, MASKING_NORMALIZER, MASKING_WEIGHTS
from rainbench.rng import SplitMix64


def synthetic_pair(seed: int, size: int):
    gen = SplitMix64(seed)
    base = np.array([gen.below(256) for _ in range(size * size)], dtype=np.float64)
    noise = np.array([gen.below(41) - 20 for _ in range(size * size)], dtype=np.float64)
    a = base.reshape(size, size)
    b = np.clip(a + noise.reshape(size, size), 0, 255)
    return a, b


def time_call(fn, *args, repeats: int) -> tuple[float, float]:
    fn(*args)  # warmup (JIT compile / cache load)
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--sizes", default="128,512,1024")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = {name: get_backend(name) for name in ("numpy", "numba")}
    params = SsimParams()
    kernel = params.kernel()

    print(f"{'kernel':<12}{'size':>6}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}  rel.dev")
    for size in sizes:
        a, b = synthetic_pair(size, size)
        times = {}
        values = {}
        for name, impl in backends.items():
            times[name], values[name] = time_call(
                impl.ssim_mean, a, b, kernel, params.c1, params.c2, repeats=args.repeats
            )
        dev = abs(values["numpy"] - values["numba"]) / max(abs(values["numpy"]), 1e-30)
        print(
            f"{'ssim':<12}{size:>6}  {times['numpy'] * 1e3:>8.2f}ms  "
            f"{times['numba'] * 1e3:>8.2f}ms  {times['numpy'] / times['numba']:>7.2f}x  {dev:.2e}"
        )

        for name, impl in backends.items():
            times[name], values[name] = time_call(
                impl.hvs_accumulate, a, b, _DCT_MAT, CSF_WEIGHTS, MASKING_WEIGHTS,
                MASKING_NORMALIZER, repeats=args.repeats,
            )
        dev = abs(values["numpy"][0] - values["numba"][0]) / max(abs(values["numpy"][0]), 1e-30)
        print(
            f"{'psnr-hvs-m':<12}{size:>6}  {times['numpy'] * 1e3:>8.2f}ms  "
            f"{times['numba'] * 1e3:>8.2f}ms  {times['numpy'] / times['numba']:>7.2f}x  {dev:.2e}"
        )


if __name__ == "__main__":
    main()
