"""Time the numba kernels against their numpy twins.

Usage: ``python benchmarks/bench_backends.py [--repeat 3] [--quick]``.
The backend is switched through ``BARRIER_LAB_BACKEND`` between runs; the
first numba call of each kernel is a warm-up (compilation is cached on disk).
"""

import argparse
import os
import time

import numpy as np

from barrier_lab import membrane, pde2d, sdepath, spectral
from barrier_lab._backend import ENV_BACKEND
from barrier_lab.coefficients import CutoffProfile, ModelParams
from barrier_lab.hitting import MembraneParams

FIG1 = (ModelParams(eps=0.1, kappa_eps=0.004, kappa_T=0.1), CutoffProfile.arctan_example(eps=0.2))


def case_snob(n):
    spec = membrane.ProcessSpec("snob", MembraneParams(1.0, 1.0))
    return membrane.mc_exit_probability(spec, -1.0, 1.0, "+0", n, 1e-3).estimate


def case_sde(n):
    P, prof = FIG1
    return sdepath.mc_exit_left(P, prof, 0.5, n, 1e-3, tilde=True).estimate


def case_pde(nx):
    P, prof = FIG1
    g = pde2d.assemble(P, prof, nx, 16)
    return float(pde2d.solve_steady(g).values[nx // 2, 0])


def case_spectral(N):
    P = ModelParams.scaling_law(0.05)
    s = spectral.build_index_set(N)
    return float(spectral.covariance_diagonal(s, P, CutoffProfile.arctan_example(), 0.3, 1.0).q_bar[1, 1])


def timed(fn, arg, repeat):
    best, val = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        val = fn(arg)
        best = min(best, time.perf_counter() - t0)
    return best, val


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true")
    a = ap.parse_args()
    scale = 0.2 if a.quick else 1.0
    cases = [("snob MC", case_snob, int(4000 * scale)), ("sde MC", case_sde, int(4000 * scale)),
             ("pde steady", case_pde, 256), ("spectral sum", case_spectral, 64)]
    old = os.environ.get(ENV_BACKEND)
    print(f"{'case':<14}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}  agree")
    try:
        for name, fn, arg in cases:
            os.environ[ENV_BACKEND] = "numba"
            fn(max(4, arg // 100) if name != "pde steady" else 16)  # warm-up
            tn, vn = timed(fn, arg, a.repeat)
            os.environ[ENV_BACKEND] = "numpy"
            tp, vp = timed(fn, arg, a.repeat)
            print(f"{name:<14}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}  {abs(vn - vp) <= 1e-9 * max(1.0, abs(vn))}")
    finally:
        if old is None:
            os.environ.pop(ENV_BACKEND, None)
        else:
            os.environ[ENV_BACKEND] = old


if __name__ == "__main__":
    main()
