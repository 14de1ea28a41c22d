"""Hot numeric kernels: paired-comparison MM updates and the mixed-model
profiled-likelihood collapse.

Each kernel ships in two equivalent implementations: a numba ``@njit`` loop
version and a vectorized pure-numpy fallback. Selection happens once at
import time; set ``PERCEPT_NUMBA=0`` to force the numpy path (the numba path
is used by default whenever numba imports). ``benchmarks/bench_kernels.py``
compares the two.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_requested() -> bool:
    flag = os.environ.get("PERCEPT_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


# ---------------------------------------------------------------------------
# Paired-comparison worth fitting (majorization-minimization updates)
# ---------------------------------------------------------------------------

def _bt_mm_core(wins, totals, max_iter, tol):
    """MM iteration for paired-comparison worths.

    wins[i, j] = (possibly fractional) number of wins of i over j; ties enter
    as half a win to each side. totals = wins + wins.T. Every item must have
    total wins > 0 (callers smooth the counts to guarantee this). Worths are
    renormalized each step so the mean log-worth is 0; iteration stops when
    the max abs log-worth change drops below tol.
    """
    n = wins.shape[0]
    p = np.ones(n)
    total_wins = np.zeros(n)
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += wins[i, j]
        total_wins[i] = s

    iterations = 0
    converged = False
    for _ in range(max_iter):
        iterations += 1
        p_new = np.empty(n)
        for i in range(n):
            denom = 0.0
            for j in range(n):
                if totals[i, j] > 0.0:
                    denom += totals[i, j] / (p[i] + p[j])
            p_new[i] = total_wins[i] / denom

        logp = np.log(p_new)
        logp = logp - logp.mean()
        p_new = np.exp(logp)

        delta = 0.0
        for i in range(n):
            d = abs(logp[i] - np.log(p[i]))
            if d > delta:
                delta = d
        p = p_new
        if delta < tol:
            converged = True
            break
    return p, iterations, converged


def _bt_mm_numpy(wins, totals, max_iter, tol):
    """Vectorized fallback for _bt_mm_core (same contract)."""
    n = wins.shape[0]
    p = np.ones(n)
    total_wins = wins.sum(axis=1)
    active = totals > 0.0

    iterations = 0
    converged = False
    for _ in range(max_iter):
        iterations += 1
        pair_sums = p[:, None] + p[None, :]
        z = np.where(active, totals / np.where(active, pair_sums, 1.0), 0.0)
        p_new = total_wins / z.sum(axis=1)

        logp = np.log(p_new)
        logp -= logp.mean()
        p_new = np.exp(logp)

        delta = np.max(np.abs(logp - np.log(p)))
        p = p_new
        if delta < tol:
            converged = True
            break
    return p, iterations, converged


# ---------------------------------------------------------------------------
# Random-intercept LMM: Woodbury collapse of the GLS normal equations
# ---------------------------------------------------------------------------

def _lmm_collapse_core(lam, XtX, Xty, yty, gx, gy, ng):
    """Collapse per-group sufficient statistics at variance ratio lam.

    With V = I + lam * Z Z' block-diagonal over groups, returns
      A = X' V^-1 X, b = X' V^-1 y, c = y' V^-1 y, logdet = log|V|.
    gx[g] = column sums of X within group g, gy[g] = sum of y, ng[g] = size.
    """
    G, p = gx.shape
    A = XtX.copy()
    b = Xty.copy()
    c = yty
    logdet = 0.0
    for g in range(G):
        f = lam / (1.0 + lam * ng[g])
        logdet += np.log1p(lam * ng[g])
        gyg = gy[g]
        c -= f * gyg * gyg
        for i in range(p):
            gxi = gx[g, i]
            b[i] -= f * gxi * gyg
            for j in range(p):
                A[i, j] -= f * gxi * gx[g, j]
    return A, b, c, logdet


def _lmm_collapse_numpy(lam, XtX, Xty, yty, gx, gy, ng):
    """Vectorized fallback for _lmm_collapse_core (same contract)."""
    f = lam / (1.0 + lam * ng)
    A = XtX - (gx * f[:, None]).T @ gx
    b = Xty - gx.T @ (f * gy)
    c = yty - float(np.sum(f * gy * gy))
    logdet = float(np.sum(np.log1p(lam * ng)))
    return A, b, c, logdet


# ---------------------------------------------------------------------------
# Backend selection
# ---------------------------------------------------------------------------

bt_mm = _bt_mm_numpy
lmm_collapse = _lmm_collapse_numpy
NUMBA_ACTIVE = False

if _numba_requested():
    try:
        from numba import njit

        bt_mm = njit(cache=True)(_bt_mm_core)
        lmm_collapse = njit(cache=True)(_lmm_collapse_core)
        NUMBA_ACTIVE = True
    except ImportError:
        pass


def active_backend() -> str:
    return "numba" if NUMBA_ACTIVE else "numpy"
