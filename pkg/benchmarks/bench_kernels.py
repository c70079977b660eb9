"""Compare the numba and numpy paths of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json]

Each kernel is warmed up once (numba compiles on first call) and the best of
``--repeat`` timings is reported.
"""

import argparse
import json
import math
import time

import numpy as np

from fluxcantilever import _kernels
from fluxcantilever.model import derive, reference_device
from fluxcantilever.potential import _newton, analytic_candidates


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(size):
    p = reference_device()
    dq = derive(p)
    args = (dq.flux_scale, p.L, dq.E_j, dq.flux_quantum, p.I_m * p.omega_i**2, p.theta_0)
    spacing = dq.flux_quantum / dq.flux_scale
    phi = np.linspace(-2 * dq.flux_quantum, 2 * dq.flux_quantum, size)
    theta = np.linspace(math.pi / 2 - 3 * spacing, math.pi / 2 + 3 * spacing, size)

    lattice = p.replace(omega_i=0.0)
    P, T = analytic_candidates(lattice, dq)
    # start every lattice point slightly off so Newton has work to do
    P0 = P + 0.05 * dq.flux_quantum
    T0 = T + 0.05 * spacing

    v = np.random.default_rng(0).random(size * size)
    return {
        f"potential_grid {size}x{size}": lambda nb: _kernels.potential_grid(phi, theta, *args, numba=nb),
        f"newton_refine {P.size} points": lambda nb: _newton(P0, T0, lattice, dq, numba=nb),
        f"stencil {size}x{size}": lambda nb: _kernels.stencil(size, size, 1.3, 0.7, v, numba=nb),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    rows = []
    for name, fn in cases(args.size).items():
        t_np = best_of(lambda: fn(False), args.repeat)
        t_nb = best_of(lambda: fn(True), args.repeat) if _kernels.HAVE_NUMBA else math.nan
        rows.append({"kernel": name, "numpy_s": t_np, "numba_s": t_nb, "speedup": t_np / t_nb})

    if args.json:
        print(json.dumps({"numba_available": _kernels.HAVE_NUMBA, "rows": rows}, indent=2))
        return
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or FLUXCANTILEVER_DISABLE_NUMBA set): numba column is NaN")
    print(f"{'kernel':<32}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>10}")
    for r in rows:
        print(f"{r['kernel']:<32}{r['numpy_s'] * 1e3:>12.2f}{r['numba_s'] * 1e3:>12.2f}{r['speedup']:>10.1f}")


if __name__ == "__main__":
    main()
