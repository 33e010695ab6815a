"""Compare the numba kernels with their pure-numpy fallbacks.

Times the per-sample logistic kernels (dense and CSR) and the batch moment
reduction on batches of growing size.  The first numba call is a warm-up
and is excluded from timing.  Without numba only the numpy column is shown.

Run:

    python3 benchmarks/bench_kernels.py [--repeats 7] [--d 50]
"""

import argparse
import statistics
import time

import numpy as np
from scipy import sparse

from adasample import _kernels as K


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times), statistics.median(times)


def cases(n, d, density, rng):
    X = rng.standard_normal((n, d))
    A = sparse.random(n, d, density=density, format="csr", random_state=rng)
    z = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    x = rng.standard_normal(d)
    lam = 1.0 / n
    for m in (64, 1024, n):
        idx = np.sort(rng.choice(n, m, replace=False))
        G = X[idx] * rng.random((m, 1))
        piv = G.mean(axis=0)
        yield f"logistic_dense m={m}", (K._np_logistic_dense, getattr(K, "_nb_logistic_dense", None)), \
            (X, z, idx, x, lam, True)
        yield f"logistic_csr   m={m}", (K._np_logistic_csr, getattr(K, "_nb_logistic_csr", None)), \
            (A.data, A.indices, A.indptr, d, z, idx, x, lam, True)
        yield f"moment_sums    m={m}", (K._np_moment_sums, getattr(K, "_nb_moment_sums", None)), \
            (G, piv, piv)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=7000)
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--density", type=float, default=0.2)
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    if not K.HAVE_NUMBA:
        print("numba not installed; timing the numpy path only")
    print(f"{'kernel':<26}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for label, (np_fn, nb_fn), fargs in cases(args.n, args.d, args.density, rng):
        t_np, _ = best_of(lambda: np_fn(*fargs), args.repeats)
        if nb_fn is None:
            print(f"{label:<26}{t_np * 1e3:>12.3f}{'-':>12}{'-':>10}")
            continue
        nb_fn(*fargs)  # compile
        t_nb, _ = best_of(lambda: nb_fn(*fargs), args.repeats)
        print(f"{label:<26}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>10.2f}")


if __name__ == "__main__":
    main()
