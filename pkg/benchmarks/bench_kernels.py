"""Numba kernels vs. their pure-numpy twins.

Run with ``python benchmarks/bench_kernels.py``. Each kernel is warmed up
once (so JIT compilation is excluded), outputs are checked to agree, and the
best of several repeats is reported.
"""
import argparse
import timeit

import numpy as np

from isofield import kernels
from isofield._accel import HAVE_NUMBA
from isofield.rng import permutations
from isofield.stat_tests import double_centered_distances


def _cases(n, n_perm, lmax):
    gen = np.random.default_rng(0)
    x = np.cos(np.linspace(0.01, np.pi - 0.01, 4 * lmax))
    X, Y = gen.standard_normal((n, 2)), gen.standard_normal((n, 2))
    A, B = double_centered_distances(X), double_centered_distances(Y)
    perms = permutations(0, n, n_perm)
    return {
        f"legendre_table(lmax={lmax}, {x.size} pts)": (
            kernels.legendre_table_nb, kernels.legendre_table_np, (lmax, x)),
        f"wigner_d_table(lmax={lmax})": (
            kernels.wigner_d_table_nb, kernels.wigner_d_table_np, (lmax, 1.234)),
        f"dcov_perm_stats(n={n}, n_perm={n_perm})": (
            kernels.dcov_perm_stats_nb, kernels.dcov_perm_stats_np, (A, B, perms)),
    }


def best_time(f, args, repeat):
    return min(timeit.repeat(lambda: f(*args), number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1000, help="sample size for dCov")
    p.add_argument("--n-perm", type=int, default=99)
    p.add_argument("--lmax", type=int, default=32)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return
    print(f"{'kernel':<44}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, (f_nb, f_np, fargs) in _cases(args.n, args.n_perm, args.lmax).items():
        np.testing.assert_allclose(f_nb(*fargs), f_np(*fargs), rtol=1e-10, atol=1e-12)
        t_nb = best_time(f_nb, fargs, args.repeat)
        t_np = best_time(f_np, fargs, args.repeat)
        print(f"{name:<44}{t_nb:>12.4g}{t_np:>12.4g}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
