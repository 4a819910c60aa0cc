"""Compare the compiled and numpy kernel backends on operator assembly.

Usage::

    python benchmarks/bench_kernels.py [--N 129] [--repeat 3]

Prints the best wall time per backend and checks that both backends
produce the same matrix.
"""
import argparse
import time

import numpy as np

from lsfm import kernels
from lsfm.assembly import build_system
from lsfm.grid import make_grid
from lsfm.phantom import PhantomSpec, make_phantom


def best_time(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--N", type=int, default=129)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    grid = make_grid(args.N)
    maps, mask = make_phantom(PhantomSpec(lambda_bg=1.1), grid)
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    results = {}
    for name in backends:
        t, op = best_time(lambda: build_system(maps, mask, grid, backend=name), args.repeat)
        results[name] = (t, op)
        print(f"{name:>7}: {t:8.3f} s  nnz={op.nnz}")
    if len(results) == 2:
        a = results["python"][1].matrix
        b = results["cython"][1].matrix
        diff = abs(a - b).max() / max(abs(a).max(), 1e-300)
        print(f"speedup: {results['python'][0] / results['cython'][0]:.1f}x  max rel diff: {diff:.2e}")
    else:
        print("compiled backend not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
