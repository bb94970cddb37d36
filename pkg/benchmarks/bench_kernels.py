"""Time the numba kernels against their NumPy twins.

Run ``python3 benchmarks/bench_kernels.py [--level 14] [--paths 64] [--repeat 5]``.
The first numba call (compilation or cache load) is excluded from the timings.
"""
import argparse
import timeit

import numpy as np

from wwbridge import kernels
from wwbridge.model import frac_indices


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--level", type=int, default=14)
    ap.add_argument("--paths", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    n, b = args.level, 2
    size = b**n + 1
    bridge = rng.normal(size=(args.paths, size))
    table = frac_indices(n, b)
    weights = 0.5 ** np.arange(n)
    paths = np.cumsum(bridge, axis=1) * size**-0.5
    levels = np.arange(1, n + 1, dtype=np.int64)
    row = np.ascontiguousarray(paths[0])

    cases = {
        "superpose": lambda k: k(bridge, weights, table),
        "level_power_sums": lambda k: k(paths, b, n, 2.0, levels),
        "column_box_counts": lambda k: k(paths, b, n, n // 2),
        "window_oscillation": lambda k: k(row, 2 ** (n // 2)),
    }
    print(f"level {n}, {args.paths} paths, best of {args.repeat}")
    print(f"{'kernel':<20}{'numpy s':>12}{'numba s':>12}{'speedup':>10}")
    for name, call in cases.items():
        k_np = getattr(kernels, f"{name}_np")
        k_nb = getattr(kernels, f"{name}_nb")
        call(k_nb)  # compile / load cache
        t_np = best_of(lambda: call(k_np), args.repeat)
        t_nb = best_of(lambda: call(k_nb), args.repeat)
        print(f"{name:<20}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
