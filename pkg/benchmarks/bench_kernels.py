"""Compare the numba and numpy paths of the residual-scan kernels.

Run with ``python3 benchmarks/bench_kernels.py [--sizes 8:4 16:8 32:32] [--repeats 5]``.
Both paths are called directly (``*_nb`` / ``*_np``), so the
``NSRES_DISABLE_NUMBA`` flag only matters for which one the library uses.
"""
import argparse
import time

import numpy as np

from nsres import _kernels as K
from nsres.harness import EnsembleConfig, generate_instance


def best_of(func, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_args(n, m, seed=0):
    inst = generate_instance(EnsembleConfig(n=n, m=m, trials=1, seed=seed), 0)
    P = K.as_kernel_input(inst.X.partials)
    F = K.as_kernel_input(np.conj(np.swapaxes(P, -1, -2)) @ P)
    zero = np.zeros((1, n, n), dtype=np.complex128)
    P0 = np.ascontiguousarray(np.concatenate([zero, P]))
    F0 = np.ascontiguousarray(np.concatenate([zero, F]))
    idx = np.arange(m)
    target = np.minimum.outer(idx, idx)
    xi = inst.probes[0]
    V = K.as_kernel_input(inst.X.increments @ xi)
    W = np.ascontiguousarray(np.concatenate([np.zeros((1, n)), np.cumsum(V, axis=0)]))
    lam = np.ascontiguousarray(inst.X.jumps)
    return {
        "pair_product_residuals": (P, target),
        "f_pair_residuals": (P, F),
        "three_case_residuals": (P0, F0),
        "cross_term_gap": (V, W, lam),
    }


def parse_size(s):
    n, m = s.split(":")
    return int(n), int(m)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", nargs="+", type=parse_size,
                   default=[(8, 4), (16, 8), (32, 8), (32, 32)], help="n:m pairs")
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()

    print(f"library backend: {K.BACKEND}")
    if not K.NUMBA_AVAILABLE:
        print("numba path unavailable; timing the numpy path only")
    print(f"{'kernel':<24}{'n':>4}{'m':>4}{'numpy ms':>12}{'numba ms':>12}{'speedup':>9}")
    for n, m in args.sizes:
        for name, a in kernel_args(n, m).items():
            f_np = getattr(K, name + "_np")
            t_np = best_of(f_np, a, args.repeats)
            if K.NUMBA_AVAILABLE:
                f_nb = getattr(K, name + "_nb")
                f_nb(*a)  # compile (or load from cache) outside the timing
                t_nb = best_of(f_nb, a, args.repeats)
                print(f"{name:<24}{n:>4}{m:>4}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}"
                      f"{t_np / t_nb:>8.1f}x")
            else:
                print(f"{name:<24}{n:>4}{m:>4}{t_np * 1e3:>12.3f}{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main()
