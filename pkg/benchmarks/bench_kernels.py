"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-N wall time for each
available backend and the speed-up of the compiled one.
"""
import argparse
import timeit

import numpy as np

from scifuse import kernels
from scifuse.oracle import SeededRng, sample_admissible_joints

FIG1_PA = np.array([[16.0, 8.0], [8.0, 9.0]])
FIG1_PB = np.array([[1.0, 1.0], [1.0, 4.0]])


def cases():
    omegas = np.linspace(0.0, 1.0 - 1e-9, 100_000)
    pa_t, pb_t, cross = sample_admissible_joints(SeededRng(0).stream(0), FIG1_PA, FIG1_PB,
                                                 20_000, verify=False)
    w, u = np.array([-0.83, -0.41]), np.array([-1.0, 0.0])
    return {
        "trace_cost_grid (1e5 omegas)":
            lambda m: m.trace_cost_grid(omegas, 25.0, 16.0, 1.0, 1.0, 0.8),
        "det_cost_grid (1e5 omegas)":
            lambda m: m.det_cost_grid(omegas, 80.0, 2, 16.0, 1.0, 1.0),
        "golden_cost x1000":
            lambda m: [m.golden_cost(0, 0.0, 1.0 - 1e-9, 1e-10, 25.0, 2, 16.0, 1.0, 1.0, 0.8)
                       for _ in range(1000)],
        "mse_batch (2e4 joints, n=2)":
            lambda m: m.mse_batch(pa_t, pb_t, cross, w, u, 1.0),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    impls = kernels.backends()
    names = sorted(impls)
    print(f"backends: {', '.join(names)}")
    for label, fn in cases().items():
        times = {name: min(timeit.repeat(lambda: fn(impls[name]), number=1, repeat=args.repeat))
                 for name in names}
        cols = "  ".join(f"{name} {t * 1e3:9.3f} ms" for name, t in times.items())
        speedup = (f"  x{times['python'] / times['cython']:.1f}"
                   if "cython" in times else "")
        print(f"{label:32s} {cols}{speedup}")


if __name__ == "__main__":
    main()
