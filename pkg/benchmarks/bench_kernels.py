"""Time the numba and pure-numpy forms of each hot kernel.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call of each kernel (compilation, or loading from the on-disk
cache) is excluded by a warm-up call. Results are reported as the best of
``--repeat`` runs together with the largest absolute difference between the
two backends.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from latticewalk import _accel, kernels
from latticewalk.lattice import LatticeSpec
from latticewalk.spectral import build_basis


def cases():
    basis = build_basis(LatticeSpec.cylinder(30, 30))
    classes = basis.classes
    Q = basis.vectors
    small = build_basis(LatticeSpec.torus(5, 4))
    C = small.vectors * np.conj(small.vectors[0])[None, :]
    lx = basis.chain_x.eigenvalues
    ly = basis.chain_y.eigenvalues
    big = build_basis(LatticeSpec.rectangle(60, 60))
    xs = np.linspace(0.0, 40.0, 401)
    return {
        "class_sums (30x30 cylinder)": lambda: kernels.class_sums(Q, 0, classes.order, classes.starts),
        "resonant_quadruples (60x60 open)": lambda: kernels.resonant_quadruples(
            big.chain_x.eigenvalues, big.chain_y.eigenvalues, 1e-9),
        "resonant_quadruples (30x30 cylinder)": lambda: kernels.resonant_quadruples(lx, ly, 1e-9),
        "time_average (5x4 torus, T=1e3)": lambda: kernels.time_average(small.eigenvalues, C, 1e3, 0.01),
        "bessel_table (n<=60, 401 args)": lambda: kernels.bessel_table(60, xs),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
    backends = ["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"]
    print(f"{'kernel':40s} " + " ".join(f"{b:>10s}" for b in backends) + f" {'speedup':>8s} {'max diff':>9s}")
    for name, fn in cases().items():
        timings, results = {}, {}
        for b in backends:
            with _accel.backend(b):
                results[b] = fn()  # warm-up, and the value to compare
                timings[b] = best_of(fn, args.repeat)
        line = f"{name:40s} " + " ".join(f"{timings[b] * 1e3:8.2f}ms" for b in backends)
        if len(backends) == 2:
            a, c = results["numba"], results["numpy"]
            diff = np.abs(a - c).max() if a.shape == c.shape else float("nan")
            line += f" {timings['numpy'] / timings['numba']:7.1f}x {diff:9.1e}"
        print(line)


if __name__ == "__main__":
    main()
