"""Time the jitted kernels against their pure-numpy fallbacks.

Run as ``python benchmarks/bench_kernels.py``.  Set ``DRESSEDGF_NO_NUMBA=1``
to confirm the fallback path is the one being exercised (the table then
shows a speedup of 1 since both columns run the same code).
"""

import argparse
import time

import numpy as np

from dressedgf import _kernels as k


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def scalar_loop(fn, weights, energies, zs):
    for z in zs:
        fn(weights, energies, z)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--modes", type=int, default=4000, help="bath modes per sum")
    parser.add_argument("--grid", type=int, default=2000, help="evaluation points")
    parser.add_argument("--repeats", type=int, default=5, help="best-of repeats")
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    weights = rng.uniform(0.0, 1.0, args.modes)
    cweights = weights.astype(np.complex128)
    energies = np.sort(rng.uniform(-2.0, 2.0, args.modes))
    zs = rng.uniform(-2.5, 2.5, args.grid) + 1j * rng.uniform(0.1, 1.0, args.grid)
    omegas = np.linspace(energies[-1] + 0.1, energies[-1] + 2.0, args.grid)
    scalar_zs = zs[:200]
    bracket = (energies[-1] + 1e-9, energies[-1] + 50.0)

    cases = [
        ("resolvent_sum x200",
         (k.resolvent_sum_numpy, cweights, energies, scalar_zs),
         (k.resolvent_sum, cweights, energies, scalar_zs)),
        ("resolvent_sum_grid",
         (k.resolvent_sum_grid_numpy, cweights, energies, zs),
         (k.resolvent_sum_grid, cweights, energies, zs)),
        ("pole_function_grid",
         (k.pole_function_grid_numpy, weights, energies, omegas, 0.0, -1.0),
         (k.pole_function_grid, weights, energies, omegas, 0.0, -1.0)),
        ("bisect_pole_function",
         (k.bisect_pole_function_numpy, weights, energies, 0.0, -1.0, *bracket, 1e-13, 200),
         (k.bisect_pole_function, weights, energies, 0.0, -1.0, *bracket, 1e-13, 200)),
    ]

    print(f"modes={args.modes} grid={args.grid} repeats={args.repeats} "
          f"numba={'on' if k.NUMBA_ENABLED else 'off'}")
    print(f"{'kernel':<22} {'numpy [ms]':>12} {'active [ms]':>12} {'speedup':>9}")
    for name, numpy_call, active_call in cases:
        run_numpy = (scalar_loop, *numpy_call) if name.startswith("resolvent_sum x") \
            else numpy_call
        run_active = (scalar_loop, *active_call) if name.startswith("resolvent_sum x") \
            else active_call
        run_active[0](*run_active[1:])   # warm-up pays the jit compile once
        t_numpy = best_of(args.repeats, run_numpy[0], *run_numpy[1:])
        t_active = best_of(args.repeats, run_active[0], *run_active[1:])
        print(f"{name:<22} {t_numpy * 1e3:>12.3f} {t_active * 1e3:>12.3f} "
              f"{t_numpy / t_active:>9.2f}")


if __name__ == "__main__":
    main()
