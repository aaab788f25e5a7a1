"""Time the compiled and the numpy time loops on the equilibrium test case.

Usage::

    python benchmarks/bench_kernels.py [--cells 40 400 4000] [--steps 20000]

Both backends run the same number of fixed-size steps from the same state
and the script checks that the final states agree bitwise.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from wbflux import kernels
from wbflux.experiments import discretize, preset
from wbflux.grid import project_initial, project_topography


def setup(n_cells: int, steps: int, scheme: int) -> dict:
    p = preset("tc1")
    disc = discretize(p, 4.0 / n_cells)
    topo = project_topography(p.problem.topo, disc)
    u = project_initial(p.problem, disc).interior.copy()
    dt = 0.4 * disc.dx / 3.0
    return dict(
        u=u,
        ghost_left=np.full(steps, 2.0),
        ghost_right=np.full(steps, 2.0),
        z_ext=np.array(topo.cell_values),
        slopes=np.array(topo.slopes),
        lam=dt / disc.dx,
        dt=dt,
        flux_kind=kernels.FLUX_BURGERS,
        speed=0.0,
        b0=0.0,
        b1=1.0,
        scheme=scheme,
        blowup=1e6,
        max_abs=np.zeros(steps),
    )


def time_backend(fn, args: dict, repeats: int) -> tuple[float, np.ndarray]:
    best = np.inf
    for _ in range(repeats):
        a = {k: (v.copy() if isinstance(v, np.ndarray) else v) for k, v in args.items()}
        start = time.perf_counter()
        fn(**a)
        best = min(best, time.perf_counter() - start)
    return best, a["u"]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cells", type=int, nargs="+", default=[40, 400, 4000])
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if kernels.compiled_advance is None:
        print("compiled extension not available; build it with `pip install -e . --no-build-isolation`")
        return

    print(f"{'scheme':<14}{'cells':>7}{'steps':>8}{'cython s':>11}{'numpy s':>10}{'speedup':>9}  Mcell-steps/s (cython)")
    for name, scheme in (("well_balanced", kernels.SCHEME_WELL_BALANCED), ("standard", kernels.SCHEME_STANDARD)):
        for n in args.cells:
            bench = setup(n, args.steps, scheme)
            t_c, u_c = time_backend(kernels.compiled_advance, bench, args.repeats)
            t_p, u_p = time_backend(kernels.python_advance, bench, args.repeats)
            if not np.array_equal(u_c, u_p):
                raise SystemExit(f"backends disagree for {name} with {n} cells")
            rate = n * args.steps / t_c / 1e6
            print(f"{name:<14}{n:>7}{args.steps:>8}{t_c:>11.4f}{t_p:>10.4f}{t_p / t_c:>9.1f}  {rate:.1f}")


if __name__ == "__main__":
    main()
