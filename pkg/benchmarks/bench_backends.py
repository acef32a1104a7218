"""Benchmark the compiled stepping kernels against the numpy fallback.

Runs the 1-D reference configuration for a shortened horizon with each
backend and reports wall time per step and the speedup.  Usage:

    python benchmarks/bench_backends.py [--steps N]
"""

import argparse
import time
import warnings

import numpy as np

import fdrelax as fx
from fdrelax import backend


def time_run(name: str, p, u0, v0) -> float:
    backend.use(name)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = fx.run(p, u0, v0)
    elapsed = time.perf_counter() - t0
    iters = sum(res.newton_iterations)
    print(f"  {name:8s}: {elapsed:7.3f} s  "
          f"({elapsed / p.time.n_steps * 1e3:6.3f} ms/step, "
          f"{iters} Newton iterations)")
    return elapsed


def time_fde(name: str, p, z0) -> float:
    backend.use(name)
    law = p.law
    z = z0.copy()
    aprev = np.asarray(fx.alpha(z, law))
    t0 = time.perf_counter()
    for _ in range(p.time.n_steps):
        z = fx.step_fde(z, aprev, p)
        aprev = np.asarray(fx.alpha(z, law))
    elapsed = time.perf_counter() - t0
    print(f"  {name:8s}: {elapsed:7.3f} s "
          f"({elapsed / p.time.n_steps * 1e3:6.3f} ms/step)")
    return elapsed


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=2000,
                        help="number of time steps to run (default 2000)")
    args = parser.parse_args()

    if not backend.has_compiled():
        raise SystemExit("compiled kernels are not built; run pip install -e .")

    law = fx.PowerLaw(2.5)
    grid = fx.Grid(1, 1.0, 1e-2)
    fine = fx.Grid(1, 1.0, 1e-3)
    profile = fx.solve_lane_emden(fine, law)
    sol = fx.exact_solution(profile, grid)
    u0, v0 = fx.initial_uv(sol.profile.z0, 0.5, law)
    p = fx.RunParameters(law=law, mu=0.5, eps=1e-3, xi=1e-3,
                         time=fx.TimeGrid(1e-4, args.steps * 1e-4), grid=grid)

    print(f"coupled implicit scheme, 1-D grid with {grid.size} nodes, "
          f"{p.time.n_steps} steps:")
    t_compiled = time_run("compiled", p, u0, v0)
    t_python = time_run("python", p, u0, v0)
    print(f"  speedup : {t_python / t_compiled:.1f}x")

    print(f"direct fast-diffusion scheme, same grid:")
    f_compiled = time_fde("compiled", p, sol.profile.z0)
    f_python = time_fde("python", p, sol.profile.z0)
    print(f"  speedup : {f_python / f_compiled:.1f}x")

    backend.use("auto")


if __name__ == "__main__":
    main()
