"""Numerical parity between the numba kernels and their numpy fallbacks."""

import subprocess
import sys

import numpy as np
import pytest

from percept._kernels import (
    _bt_mm_core,
    _bt_mm_numpy,
    _lmm_collapse_core,
    _lmm_collapse_numpy,
    active_backend,
    bt_mm,
)


def _random_wins(rng, n):
    wins = rng.uniform(0, 5, size=(n, n))
    wins[rng.random((n, n)) < 0.3] = 0.0
    np.fill_diagonal(wins, 0.0)
    wins += 0.1 * (wins + wins.T > 0)  # keep every row alive
    return wins


def test_bt_paths_agree():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(3, 12))
        wins = _random_wins(rng, n)
        totals = wins + wins.T
        p1, it1, conv1 = _bt_mm_core(wins.copy(), totals.copy(), 1000, 1e-10)
        p2, it2, conv2 = _bt_mm_numpy(wins.copy(), totals.copy(), 1000, 1e-10)
        assert conv1 and conv2
        np.testing.assert_allclose(p1, p2, rtol=1e-8)


def test_lmm_collapse_paths_agree():
    rng = np.random.default_rng(1)
    for _ in range(10):
        G = int(rng.integers(3, 40))
        p = int(rng.integers(1, 6))
        n = G * 3
        X = rng.normal(size=(n, p))
        y = rng.normal(size=n)
        codes = rng.integers(0, G, size=n)
        XtX, Xty, yty = X.T @ X, X.T @ y, float(y @ y)
        gx = np.zeros((G, p)); np.add.at(gx, codes, X)
        gy = np.bincount(codes, weights=y, minlength=G)
        ng = np.bincount(codes, minlength=G).astype(float)
        for lam in (1e-8, 0.3, 7.0, 900.0):
            A1, b1, c1, d1 = _lmm_collapse_core(lam, XtX, Xty, yty, gx, gy, ng)
            A2, b2, c2, d2 = _lmm_collapse_numpy(lam, XtX, Xty, yty, gx, gy, ng)
            np.testing.assert_allclose(A1, A2, rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(b1, b2, rtol=1e-10, atol=1e-12)
            assert c1 == pytest.approx(c2, rel=1e-10)
            assert d1 == pytest.approx(d2, rel=1e-10)


def test_env_flag_selects_numpy_path():
    code = (
        "import os; os.environ['PERCEPT_NUMBA'] = '0'; "
        "from percept._kernels import active_backend, NUMBA_ACTIVE; "
        "assert active_backend() == 'numpy' and not NUMBA_ACTIVE; print('ok')"
    )
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "ok"


def test_selected_backend_runs():
    rng = np.random.default_rng(2)
    wins = _random_wins(rng, 6)
    totals = wins + wins.T
    p, iterations, converged = bt_mm(np.ascontiguousarray(wins), np.ascontiguousarray(totals),
                                     1000, 1e-8)
    assert converged and np.all(p > 0)
    assert active_backend() in ("numba", "numpy")
