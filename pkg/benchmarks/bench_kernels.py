"""Benchmark the numba kernels against their pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from percept._kernels import (
    _bt_mm_core,
    _bt_mm_numpy,
    _lmm_collapse_core,
    _lmm_collapse_numpy,
)

try:
    from numba import njit

    bt_jit = njit(cache=True)(_bt_mm_core)
    lmm_jit = njit(cache=True)(_lmm_collapse_core)
except ImportError:
    bt_jit = None
    lmm_jit = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_bt(n_docs=200, seed=0):
    rng = np.random.default_rng(seed)
    wins = rng.uniform(0, 5, size=(n_docs, n_docs))
    wins[rng.random((n_docs, n_docs)) < 0.6] = 0.0
    np.fill_diagonal(wins, 0.0)
    wins += 0.1 * (wins + wins.T > 0)
    totals = np.ascontiguousarray(wins + wins.T)
    wins = np.ascontiguousarray(wins)

    t_numpy = timeit(_bt_mm_numpy, wins, totals, 1000, 1e-8)
    print(f"paired-comparison MM  n={n_docs}: numpy {t_numpy * 1e3:8.2f} ms", end="")
    if bt_jit is not None:
        bt_jit(wins, totals, 10, 1e-8)  # compile
        t_jit = timeit(bt_jit, wins, totals, 1000, 1e-8)
        print(f" | numba {t_jit * 1e3:8.2f} ms | speedup {t_numpy / t_jit:5.2f}x")
    else:
        print(" | numba unavailable")


def bench_lmm(groups=1500, rows=4, p=20, evals=100, seed=0):
    rng = np.random.default_rng(seed)
    n = groups * rows
    X = rng.normal(size=(n, p))
    y = rng.normal(size=n)
    codes = np.repeat(np.arange(groups), rows)
    XtX, Xty, yty = X.T @ X, X.T @ y, float(y @ y)
    gx = np.zeros((groups, p)); np.add.at(gx, codes, X)
    gy = np.bincount(codes, weights=y, minlength=groups)
    ng = np.bincount(codes, minlength=groups).astype(float)
    lams = np.exp(rng.uniform(np.log(1e-8), np.log(1e3), size=evals))

    def run(fn):
        for lam in lams:
            fn(float(lam), XtX, Xty, yty, gx, gy, ng)

    t_numpy = timeit(run, _lmm_collapse_numpy, repeat=3)
    print(f"LMM collapse x{evals}  G={groups} p={p}: numpy {t_numpy * 1e3:8.2f} ms", end="")
    if lmm_jit is not None:
        lmm_jit(1.0, XtX, Xty, yty, gx, gy, ng)  # compile
        t_jit = timeit(run, lmm_jit, repeat=3)
        print(f" | numba {t_jit * 1e3:8.2f} ms | speedup {t_numpy / t_jit:5.2f}x")
    else:
        print(" | numba unavailable")


if __name__ == "__main__":
    bench_bt(n_docs=100)
    bench_bt(n_docs=300)
    bench_lmm(groups=400, rows=5, p=5)
    bench_lmm(groups=1500, rows=4, p=20)
