#!/usr/bin/env python3
"""Benchmark the jitted kernels against their pure-numpy fallbacks.

The FFT pair inside a Floquet step always runs in scipy and dominates the
step; this script shows what the surrounding kernels cost under each
backend, plus the classical-map iteration where the jit matters most.

Usage:
    python benchmarks/benchmark_backends.py [--members N] [--n-max N] [--steps N]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np
import scipy.fft as sfft

from rotorlab.kernels import IMPLEMENTATIONS
from rotorlab.propagator import grid_size_for, kick_phases, kinetic_phases


def time_call(fn, *args, repeats: int = 20) -> float:
    fn(*args)  # warm-up (and jit compile)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def bench_backend(name: str, impl: dict, members: int, n_max: int,
                  steps: int) -> dict[str, float]:
    width = 2 * n_max + 1
    grid = grid_size_for(n_max)
    rng = np.random.default_rng(0)
    amps = rng.normal(size=(members, width)) + 1j * rng.normal(size=(members, width))
    amps /= np.linalg.norm(amps, axis=1, keepdims=True)
    kin = np.array([kinetic_phases(2 * math.pi + 0.01, b, n_max)
                    for b in np.linspace(0.4, 0.6, members)])
    kick = kick_phases(0.8 * math.pi, grid)
    buf = np.zeros((members, grid), dtype=np.complex128)
    out = np.empty_like(amps)

    results = {
        "embed_kinetic": time_call(impl["embed_kinetic"], amps, kin, buf),
        "multiply_rows": time_call(impl["multiply_rows"], buf, kick),
        "extract_state": time_call(impl["extract_state"], buf, out, 16),
        "row_overlaps": time_call(impl["row_overlaps"], amps, out),
        "compensated_sum": time_call(impl["compensated_complex_sum"],
                                     amps[:, n_max].copy()),
        "map_orbit_1k_seeds": time_call(
            impl["map_orbit"], rng.uniform(0, 2 * math.pi, 1000),
            rng.uniform(-1, 1, 1000), 0.025, math.pi * 2.1, steps, repeats=3),
        # a single long orbit is purely sequential: the jit's best case
        "map_orbit_single_100k": time_call(
            impl["map_orbit"], np.array([1.0]), np.array([0.0]),
            0.025, math.pi * 2.1, 100_000, repeats=3),
    }

    def full_step():
        impl["embed_kinetic"](amps, kin, buf)
        psi = sfft.ifft(buf, axis=1, overwrite_x=True)
        impl["multiply_rows"](psi, kick)
        back = sfft.fft(psi, axis=1, overwrite_x=True)
        buf[:] = back
        impl["extract_state"](buf, out, 16)

    results["full_floquet_step"] = time_call(full_step)
    return results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--members", type=int, default=512)
    parser.add_argument("--n-max", type=int, default=128)
    parser.add_argument("--steps", type=int, default=1000,
                        help="map iterations per seed")
    args = parser.parse_args()

    print(f"members={args.members} n_max={args.n_max} "
          f"grid={grid_size_for(args.n_max)} map_steps={args.steps}")
    timings = {name: bench_backend(name, impl, args.members, args.n_max, args.steps)
               for name, impl in IMPLEMENTATIONS.items()}

    names = list(next(iter(timings.values())))
    backends = list(timings)
    header = f"{'kernel':24s}" + "".join(f"{b:>14s}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for kernel in names:
        row = f"{kernel:24s}"
        for b in backends:
            row += f"{timings[b][kernel] * 1e3:11.3f} ms"
        if len(backends) == 2:
            ratio = timings["numpy"][kernel] / timings["numba"][kernel]
            row += f"{ratio:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
