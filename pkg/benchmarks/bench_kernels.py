"""Numba vs numpy kernels: agreement and timing.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--end-to-end]

The kernel table calls both backends on identical inputs.  ``--end-to-end``
also times a small verification workload in two subprocesses, one per value
of ``FROBWHIT_NUMBA``.
"""
import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from frobwhit import _kernels as K

WORKLOAD = (
    "from frobwhit.suites import Context, run_suites;"
    "run_suites([Context(m, n, 1) for m, n in ((1, 1), (2, 1), (2, 2))], 'all')"
)


def inputs(rng, n=64):
    def z(size):
        return (rng.normal(size=size) + 1j * rng.normal(size=size)) * 0.6 ** np.arange(size)

    a = z(n)
    a[0] = 1.0
    f = z(n)
    f[0], f[1] = 0.0, 1.0
    A = rng.normal(size=(32, 40)) + 1j * rng.normal(size=(32, 40))
    B = rng.normal(size=(32, 24)) + 1j * rng.normal(size=(32, 24))
    return {
        "conv": (a, z(n)),
        "ps_mul": (a, z(n), n),
        "ps_inv": (a, n),
        "ps_powint": (a, 5, n),
        "ps_root": (a, 3, n),
        "ps_revert": (f, 40),
        "conv_rows": (A, B),
    }


def kernel_table(repeat):
    if "numba" not in K.BACKENDS:
        print("numba is not importable; only the numpy backend exists")
        return
    args = inputs(np.random.default_rng(0))
    nb, npy = K.BACKENDS["numba"], K.BACKENDS["numpy"]
    print(f"{'kernel':<12}{'numba us':>12}{'numpy us':>12}{'speedup':>10}{'rel diff':>12}")
    for name, a in args.items():
        nb[name](*a)  # compile outside the timing
        x, y = nb[name](*a), npy[name](*a)
        diff = float(np.max(np.abs(x - y)) / max(np.max(np.abs(x)), 1.0))
        t_nb = min(timeit.repeat(lambda: nb[name](*a), number=20, repeat=repeat)) / 20
        t_np = min(timeit.repeat(lambda: npy[name](*a), number=20, repeat=repeat)) / 20
        print(f"{name:<12}{t_nb * 1e6:12.1f}{t_np * 1e6:12.1f}{t_np / t_nb:10.1f}{diff:12.1e}")


def end_to_end():
    for flag in ("1", "0"):
        env = dict(os.environ, FROBWHIT_NUMBA=flag)
        subprocess.run([sys.executable, "-c", WORKLOAD], env=env, check=True)  # warm the numba cache
        t0 = time.perf_counter()
        subprocess.run([sys.executable, "-c", WORKLOAD], env=env, check=True)
        print(f"verify workload, FROBWHIT_NUMBA={flag}: {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    kernel_table(args.repeat)
    if args.end_to_end:
        end_to_end()
