"""Time the compiled and numpy kernel backends on the reference initial data.

    python benchmarks/bench_kernels.py --n-cells 2000 --repeat 5

Each backend advances the same state by a fixed number of steps at the
CFL step size. The final states are compared so a speed-up never hides a
divergence between backends.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from degenvac import kernels
from degenvac.model import IsolatedMassGroupSpec, Parameters
from degenvac.runner import Setup
from degenvac.scheme import SchemeConfig, cfl_dt


def _advance(backend, state, dt, n_steps, params):
    rho, mom, u = state.rho.copy(), state.mom.copy(), state.u.copy()
    for _ in range(n_steps):
        rho, mom, u, *_ = backend.ssprk2_step(rho, mom, u, dt, state.dx, params.gamma, params.delta,
                                              state.rho_vac)
    return rho, mom, u


def _time_points(backend, state, dt, params, n_points, n_steps):
    y = np.linspace(state.grid.x_min + 1.0, state.grid.x_max - 1.0, n_points)
    start = time.perf_counter()
    for _ in range(n_steps):
        y = backend.advance_points(y, state.u, state.u, dt, state.grid.x_min, state.dx)
    return time.perf_counter() - start


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-cells", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    params = Parameters(2.0, 2.0)
    setup = Setup(params, IsolatedMassGroupSpec(c=1.0, k1=3.0, k2=1.0), args.n_cells, t_final=1.0)
    state = setup.initial_state()
    dt = cfl_dt(state, SchemeConfig(rho_vac=state.rho_vac), params)

    names = kernels.available_backends()
    timings, finals = {}, {}
    for name in names:
        backend = kernels.get_backend(name)
        _advance(backend, state, dt, 2, params)  # warm-up
        runs = []
        for _ in range(args.repeat):
            start = time.perf_counter()
            finals[name] = _advance(backend, state, dt, args.steps, params)
            runs.append(time.perf_counter() - start)
        timings[name] = statistics.median(runs)
        tracer = _time_points(backend, state, dt, params, 18, args.steps)
        print(f"{name:>7}: {1e6 * timings[name] / args.steps:9.1f} us/step   "
              f"tracers {1e6 * tracer / args.steps:7.1f} us/step")

    if len(names) == 2:
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(finals["cython"], finals["python"]))
        print(f"speed-up cython/python: {timings['python'] / timings['cython']:.1f}x  "
              f"(max state difference after {args.steps} steps: {diff:.2e})")
    else:
        print("compiled backend not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
