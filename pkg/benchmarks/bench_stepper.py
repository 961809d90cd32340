"""Compare the compiled and pure-Python stage marchers.

Usage: python3 benchmarks/bench_stepper.py [--sizes 128 256] [--repeat 3]

Times a single mapping stage, a full-cycle kernel build (one batched stage
per impulse set) and checks that both backends give the same kernel.
"""

import argparse
import time

import numpy as np

from tripod_memory import BACKENDS, PhysicalParams, full_cycle_kernel, run_mapping_stage
from tripod_memory.checks import gaussian_envelope
from tripod_memory.model import Grid


def best_of(repeat, func):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        func()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[128, 256])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    params = PhysicalParams()
    print(f"backends: {', '.join(BACKENDS)}")
    print(f"{'n':>5} {'backend':>9} {'stage [ms]':>11} {'kernel [s]':>11}")
    for n in args.sizes:
        grid = Grid(10.0, 3.0, n, n)
        pulse = gaussian_envelope(grid)
        kernels = {}
        for name in BACKENDS:
            stage = best_of(args.repeat, lambda: run_mapping_stage(params, grid, 1.0, pulse, backend=name))
            build = best_of(max(1, args.repeat // 2),
                            lambda: kernels.__setitem__(name, full_cycle_kernel(params, grid, backend=name,
                                                                                workers=1)))
            print(f"{n:>5} {name:>9} {1e3 * stage:>11.2f} {build:>11.3f}")
        if len(kernels) == 2:
            a, b = kernels["compiled"].entries, kernels["python"].entries
            gap = np.max(np.abs(a - b)) / np.max(np.abs(b))
            print(f"{n:>5} {'':>9} max relative kernel difference {gap:.1e}")


if __name__ == "__main__":
    main()
