"""Time the numpy and numba kernel builds against each other.

    python benchmarks/bench_kernels.py [--sizes 400 4000 40000] [--repeat 20]

Compilation is triggered once before timing. Reports the best of
``--repeat`` calls for each kernel, plus one full ``advance`` step.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from nstraffic import ModelParams, RoadField, SolverConfig, advance
from nstraffic._kernels import BACKENDS, get_backend


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[400, 4000, 40000])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    p = ModelParams()
    prm = (p.alpha, p.tau, p.w_c, p.rho_c, p.rho_0, p.v_0, p.a)
    rng = np.random.default_rng(0)
    print(f"backends: {', '.join(BACKENDS)}")
    print(f"{'cells':>7} {'backend':>15} {'flux us':>10} {'source us':>10} {'step us':>10} {'speedup':>8}")
    for n in args.sizes:
        rho = rng.uniform(0.005, 0.19, n)
        q = rho * rng.uniform(0.5, 30.0, n)
        field = RoadField(rho, q, 50.0)
        base = None
        for name in BACKENDS:
            k = get_backend(name)
            cfg = SolverConfig(backend=name)
            # warm-up compiles the numba builds
            k.interface_flux(rho, q, p.alpha)
            k.momentum_source(rho, q, 50.0, prm, np.inf)
            advance(field, 0.5, p, cfg)
            t_flux = best_of(lambda: k.interface_flux(rho, q, p.alpha), args.repeat)
            t_src = best_of(lambda: k.momentum_source(rho, q, 50.0, prm, 1.0), args.repeat)
            t_step = best_of(lambda: advance(field, 0.5, p, cfg), args.repeat)
            base = base or t_step
            print(f"{n:>7} {name:>15} {t_flux * 1e6:>10.1f} {t_src * 1e6:>10.1f} {t_step * 1e6:>10.1f} {base / t_step:>7.2f}x")


if __name__ == "__main__":
    main()
