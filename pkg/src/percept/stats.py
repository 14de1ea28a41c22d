"""Regression kernels: OLS, random-intercept linear mixed models fitted by
profiled maximum likelihood, VIF-based collinearity pruning, and coefficient
interpretation helpers.

The LMM profiles the likelihood down to the scalar variance ratio
lam = sigma_u^2 / sigma^2. With V = I + lam * Z Z' block-diagonal over groups,
each evaluation collapses per-group sufficient statistics (Woodbury) and the
scalar search runs on log(lam) over [log 1e-8, log 1e3]. Inference is Wald:
t for OLS, z for the LMM (ML, no REML or df corrections).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats as spstats

from . import _kernels

LAM_LOG_LO = math.log(1e-8)
LAM_LOG_HI = math.log(1e3)
LAM_TOL = 1e-8
_GRID_POINTS = 41


class RankDeficiencyError(ValueError):
    def __init__(self, columns: list[str]):
        super().__init__(f"design matrix is rank deficient; suspect columns: {columns}")
        self.columns = columns


class SingularDesignError(ValueError):
    pass


@dataclass
class DesignMatrix:
    names: list[str]
    X: np.ndarray
    has_intercept: bool = True

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        if self.X.shape[1] != len(self.names):
            raise ValueError(f"{self.X.shape[1]} columns vs {len(self.names)} names")
        if not np.isfinite(self.X).all():
            raise ValueError("X contains non-finite entries")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.names.index(name)]

    def subset(self, names: list[str]) -> "DesignMatrix":
        idx = [self.names.index(n) for n in names]
        return DesignMatrix(list(names), self.X[:, idx], has_intercept=self.has_intercept)


def build_design(
    columns: dict[str, np.ndarray],
    categoricals: dict[str, list] | None = None,
    intercept: bool = True,
) -> DesignMatrix:
    """Assemble a design matrix from numeric columns and categorical factors.

    Categoricals are reference-coded with the most frequent level as the
    reference; indicator columns are named factor=level."""
    names: list[str] = []
    cols: list[np.ndarray] = []
    if intercept:
        n = len(next(iter(columns.values()))) if columns else len(next(iter(categoricals.values())))
        names.append("intercept")
        cols.append(np.ones(n))
    for name, values in columns.items():
        names.append(name)
        cols.append(np.asarray(values, dtype=float))
    if categoricals:
        for factor, values in categoricals.items():
            values = list(values)
            levels, counts = np.unique(values, return_counts=True)
            reference = levels[np.argmax(counts)]
            for level in levels:
                if level == reference:
                    continue
                names.append(f"{factor}={level}")
                cols.append(np.array([1.0 if v == level else 0.0 for v in values]))
    return DesignMatrix(names, np.column_stack(cols), has_intercept=intercept)


@dataclass
class RegressionResult:
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    statistics: dict[str, float]
    p_values: dict[str, float]
    residual_variance: float
    n: int
    fit_log: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["term", "estimate", "std_error", "statistic", "p_value"])
        for term in self.coefficients:
            writer.writerow([
                term,
                f"{self.coefficients[term]:.10g}",
                f"{self.std_errors[term]:.10g}",
                f"{self.statistics[term]:.10g}",
                f"{self.p_values[term]:.10g}",
            ])
        return buf.getvalue()


@dataclass
class MixedModelResult(RegressionResult):
    group_name: str = ""
    random_intercept_variance: float = 0.0
    variance_ratio: float = 0.0
    profiled_loglik: float = float("-inf")
    converged: bool = False


def _check_rank(dm: DesignMatrix) -> None:
    rank = np.linalg.matrix_rank(dm.X)
    if rank < dm.p:
        # name columns with near-zero pivots in a pivoted QR
        from scipy.linalg import qr

        _, r, piv = qr(dm.X, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        tol = diag.max() * max(dm.X.shape) * np.finfo(float).eps if diag.size else 0.0
        bad = [dm.names[piv[i]] for i in range(len(diag)) if diag[i] <= tol]
        raise RankDeficiencyError(bad or list(dm.names))


def fit_ols(dm: DesignMatrix, y: np.ndarray) -> RegressionResult:
    """Ordinary least squares with t-based Wald inference."""
    y = np.asarray(y, dtype=float)
    n, p = dm.X.shape
    if n <= p:
        raise ValueError(f"need n > p, got n={n}, p={p}")
    _check_rank(dm)

    xtx = dm.X.T @ dm.X
    beta = np.linalg.solve(xtx, dm.X.T @ y)
    resid = y - dm.X @ beta
    dof = n - p
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(xtx)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.inf * np.sign(beta))
    pvals = 2 * spstats.t.sf(np.abs(t), dof)

    return RegressionResult(
        coefficients=dict(zip(dm.names, beta.tolist())),
        std_errors=dict(zip(dm.names, se.tolist())),
        statistics=dict(zip(dm.names, t.tolist())),
        p_values=dict(zip(dm.names, pvals.tolist())),
        residual_variance=sigma2,
        n=n,
    )


# ---------------------------------------------------------------------------
# Random-intercept LMM
# ---------------------------------------------------------------------------

def _group_stats(X: np.ndarray, y: np.ndarray, groups) -> tuple:
    codes, _ = _factorize(groups)
    G = int(codes.max()) + 1
    p = X.shape[1]
    gx = np.zeros((G, p))
    np.add.at(gx, codes, X)
    gy = np.bincount(codes, weights=y, minlength=G)
    ng = np.bincount(codes, minlength=G).astype(float)
    return gx, gy, ng, G


def _factorize(groups) -> tuple[np.ndarray, list]:
    labels = list(groups)
    uniques = sorted(set(labels), key=str)
    index = {g: i for i, g in enumerate(uniques)}
    return np.array([index[g] for g in labels], dtype=np.int64), uniques


def lmm_profiled_loglik(
    lam: float,
    XtX: np.ndarray,
    Xty: np.ndarray,
    yty: float,
    gx: np.ndarray,
    gy: np.ndarray,
    ng: np.ndarray,
    n: int,
) -> float:
    """Profiled ML log-likelihood at the variance ratio lam (beta and sigma^2
    profiled out). Returns -inf when the collapsed system is not PD."""
    A, b, c, logdet = _kernels.lmm_collapse(lam, XtX, Xty, yty, gx, gy, ng)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return float("-inf")
    beta = np.linalg.solve(L.T, np.linalg.solve(L, b))
    rss = c - float(beta @ b)
    if rss <= 0 or not np.isfinite(rss):
        return float("-inf")
    sigma2 = rss / n
    return -0.5 * (n * math.log(2 * math.pi * sigma2) + n + logdet)


def fit_random_intercept_lmm(dm: DesignMatrix, y: np.ndarray, groups, group_name: str = "group") -> MixedModelResult:
    """Fit y = X beta + u_group + eps by profiled maximum likelihood.

    The scalar search runs a coarse log-spaced grid followed by bounded
    refinement around the best grid point. Wald z inference."""
    y = np.asarray(y, dtype=float)
    n, p = dm.X.shape
    if n <= p:
        raise ValueError(f"need n > p, got n={n}, p={p}")
    _check_rank(dm)
    codes, uniques = _factorize(groups)
    if len(uniques) < 2:
        raise SingularDesignError("need at least 2 groups for a random intercept")

    X = np.ascontiguousarray(dm.X)
    XtX = X.T @ X
    Xty = X.T @ y
    yty = float(y @ y)
    gx, gy, ng, G = _group_stats(X, y, groups)

    fit_log: list[str] = []
    if ng.max() == 1:
        fit_log.append(
            "warning: every group has a single observation; sigma_u and sigma "
            "are not separately identifiable (boundary solution reported)"
        )

    def objective(loglam: float) -> float:
        return -lmm_profiled_loglik(math.exp(loglam), XtX, Xty, yty, gx, gy, ng, n)

    grid = np.linspace(LAM_LOG_LO, LAM_LOG_HI, _GRID_POINTS)
    grid_vals = np.array([objective(t) for t in grid])
    if not np.isfinite(grid_vals).any():
        raise SingularDesignError("profiled likelihood undefined everywhere on the search grid")
    best = int(np.argmin(grid_vals))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]

    res = optimize.minimize_scalar(
        objective, bounds=(lo, hi), method="bounded", options={"xatol": LAM_TOL, "maxiter": 500}
    )
    converged = bool(res.success) and bool(np.isfinite(res.fun))
    loglam = float(res.x) if np.isfinite(res.fun) else grid[best]
    if objective(loglam) > grid_vals[best]:
        loglam = float(grid[best])
    lam = math.exp(loglam)
    if loglam <= LAM_LOG_LO + 1e-6 or loglam >= LAM_LOG_HI - 1e-6:
        fit_log.append(f"note: variance ratio at search boundary (log lam = {loglam:.3f})")

    A, b, c, _ = _kernels.lmm_collapse(lam, XtX, Xty, yty, gx, gy, ng)
    try:
        beta = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError("collapsed normal equations singular at optimum") from exc
    rss = c - float(beta @ b)
    sigma2 = rss / n
    sigma_u2 = lam * sigma2
    cov = sigma2 * np.linalg.inv(A)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, np.inf * np.sign(beta))
    pvals = 2 * spstats.norm.sf(np.abs(z))
    loglik = lmm_profiled_loglik(lam, XtX, Xty, yty, gx, gy, ng, n)

    return MixedModelResult(
        coefficients=dict(zip(dm.names, beta.tolist())),
        std_errors=dict(zip(dm.names, se.tolist())),
        statistics=dict(zip(dm.names, z.tolist())),
        p_values=dict(zip(dm.names, pvals.tolist())),
        residual_variance=sigma2,
        n=n,
        fit_log=fit_log,
        group_name=group_name,
        random_intercept_variance=sigma_u2,
        variance_ratio=lam,
        profiled_loglik=loglik,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Collinearity
# ---------------------------------------------------------------------------

def vif(dm: DesignMatrix) -> dict[str, float]:
    """Variance inflation factor per non-intercept column: 1/(1-R^2) from
    regressing the column on the remaining non-intercept columns (intercept
    always included as a regressor, never scored). Perfect collinearity
    reports +inf."""
    scored = [nm for nm in dm.names if nm != "intercept"]
    if len(scored) < 2:
        raise ValueError("need at least 2 non-intercept columns")
    n = dm.n
    out: dict[str, float] = {}
    for name in scored:
        target = dm.column(name)
        others = [nm for nm in scored if nm != name]
        X = np.column_stack([np.ones(n)] + [dm.column(nm) for nm in others])
        beta, *_ = np.linalg.lstsq(X, target, rcond=None)
        resid = target - X @ beta
        ss_res = float(resid @ resid)
        ss_tot = float(((target - target.mean()) ** 2).sum())
        if ss_tot == 0.0:
            out[name] = float("inf")
            continue
        r2 = 1.0 - ss_res / ss_tot
        out[name] = float("inf") if r2 >= 1.0 - 1e-12 else 1.0 / (1.0 - r2)
    return out


def stepwise_vif_prune(dm: DesignMatrix, threshold: float = 5.0) -> tuple[list[str], list[tuple[str, float]]]:
    """Iteratively drop the highest-VIF column while max VIF > threshold.

    Ties go to the earlier column. Terminates in at most p steps; can end
    with a single column (VIF then undefined, treated as done)."""
    retained = [nm for nm in dm.names if nm != "intercept"]
    removal_log: list[tuple[str, float]] = []
    while len(retained) >= 2:
        current = dm.subset((["intercept"] if "intercept" in dm.names else []) + retained)
        vifs = vif(current)
        worst_name = max(retained, key=lambda nm: (vifs[nm], -retained.index(nm)))
        worst = vifs[worst_name]
        if worst <= threshold:
            break
        removal_log.append((worst_name, worst))
        retained.remove(worst_name)
    return retained, removal_log


def percent_change(beta: float) -> float:
    """exp(beta) - 1: percent change of a level outcome per unit predictor
    when the model outcome is log-transformed."""
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    return float(np.expm1(beta))


def pearson_r(x: np.ndarray, y: np.ndarray) -> float | None:
    """Pearson correlation; None when undefined (zero variance or n < 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        return None
    xd = x - x.mean()
    yd = y - y.mean()
    denom = math.sqrt(float(xd @ xd) * float(yd @ yd))
    if denom == 0.0:
        return None
    return float(xd @ yd / denom)
