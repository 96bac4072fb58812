"""Compare the numba and numpy kernel backends.

Runs the resolvent-grid and perturbed-eigenvalue kernels on the dissipative
9x9 evolution matrix and prints the best-of-N wall time for each backend.

    python3 benchmarks/bench_kernels.py --grid 200 --samples 400 --repeat 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from phason_stab import _accel
from phason_stab._kernels import perturbed_eigvals, smin_grid
from phason_stab.model import GPA, assemble_system, quasicrystal_params
from phason_stab.pseudospectra import default_grid


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=200, help="grid nodes per axis")
    ap.add_argument("--samples", type=int, default=400, help="perturbed matrices")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args(argv)

    A = assemble_system("dissipative", quasicrystal_params(chi=0.1 * GPA, phi=19)).A
    spec = default_grid(A, args.grid, args.grid)
    zs = (spec.re[:, None] + 1j * spec.im[None, :]).ravel()
    rng = np.random.default_rng(0)
    E = rng.standard_normal((args.samples, 9, 9)) * 1e-3

    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    results = {}
    previous = _accel.backend()
    try:
        for name in backends:
            _accel.set_backend(name)
            # warm-up triggers compilation so it is not timed
            smin_grid(A, zs[:4])
            perturbed_eigvals(A, E[:2])
            results[name] = (
                best_of(lambda: smin_grid(A, zs, args.jobs), args.repeat),
                best_of(lambda: perturbed_eigvals(A, E, args.jobs), args.repeat),
            )
    finally:
        _accel.set_backend(previous)

    print(f"{'backend':<8} {'smin_grid [s]':>14} {'eigvals [s]':>12}")
    for name, (t_grid, t_eig) in results.items():
        print(f"{name:<8} {t_grid:>14.4f} {t_eig:>12.4f}")
    if len(results) == 2:
        g = results["numpy"][0] / results["numba"][0]
        e = results["numpy"][1] / results["numba"][1]
        print(f"speed-up numba/numpy: grid {g:.2f}x, eigvals {e:.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
