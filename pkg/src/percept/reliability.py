"""Annotation quality statistics: Krippendorff's alpha per statement and
Cronbach's alpha per multi-statement group.

Krippendorff's alpha uses the coincidence-matrix formulation (missing cells
simply contribute no pairs); the test suite checks it against a brute-force
pairwise oracle. Cronbach's alpha is the classic k/(k-1) * (1 - sum(item
variances)/variance(total)) with sample (n-1) variances.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .catalog import Dimension, StatementCatalog


class NoPairableValuesError(ValueError):
    """No unit carries two or more ratings, so disagreement is undefined."""


class DegenerateVarianceError(ValueError):
    """Total-score variance is zero; Cronbach's alpha is undefined."""


@dataclass
class ReliabilityMatrix:
    """units x raters grid of Likert values; NaN marks a missing cell."""

    units: list[str]
    raters: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.units), len(self.raters)):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.units)} units x {len(self.raters)} raters"
            )
        if len(self.raters) < 2:
            raise ValueError("need at least 2 raters")
        present = self.values[~np.isnan(self.values)]
        if present.size and (present.min() < 1 or present.max() > 5):
            raise ValueError("ratings must lie in 1..5")


def krippendorff_alpha(matrix: ReliabilityMatrix, metric: str = "interval") -> float | None:
    """Krippendorff's alpha via coincidence matrices.

    metric: "interval" (squared difference) or "ordinal" (squared rank-sum
    difference based on the marginal value frequencies). Returns None when
    expected disagreement is zero (e.g. constant data); raises
    NoPairableValuesError when no unit has >= 2 ratings.
    """
    if metric not in ("interval", "ordinal"):
        raise ValueError(f"metric must be 'interval' or 'ordinal', got {metric!r}")

    rows = [row[~np.isnan(row)] for row in matrix.values]
    rows = [r for r in rows if r.size >= 2]
    if not rows:
        raise NoPairableValuesError("no unit has >= 2 ratings")

    values = np.unique(np.concatenate(rows))
    v = values.size
    index = {val: k for k, val in enumerate(values)}

    coincidence = np.zeros((v, v))
    for row in rows:
        m = row.size
        idx = np.array([index[x] for x in row])
        for a in range(m):
            for b in range(m):
                if a != b:
                    coincidence[idx[a], idx[b]] += 1.0 / (m - 1)

    n_c = coincidence.sum(axis=1)
    n = n_c.sum()
    if n <= 1:
        raise NoPairableValuesError("fewer than two pairable values")

    if metric == "interval":
        delta = (values[:, None] - values[None, :]) ** 2
    else:
        # ordinal: squared difference of cumulative marginal ranks
        cum = np.cumsum(n_c)
        rank = cum - n_c / 2.0
        delta = (rank[:, None] - rank[None, :]) ** 2

    d_observed = float((coincidence * delta).sum()) / n
    d_expected = float((np.outer(n_c, n_c) * delta).sum()) / (n * (n - 1))

    if d_expected == 0.0:
        return None
    return 1.0 - d_observed / d_expected


def cronbach_alpha(item_matrix: np.ndarray) -> float:
    """Cronbach's alpha for a complete respondents x items grid."""
    grid = np.asarray(item_matrix, dtype=float)
    if grid.ndim != 2:
        raise ValueError("item_matrix must be 2-dimensional")
    n, k = grid.shape
    if k < 2:
        raise ValueError("need at least 2 items")
    if n < 2:
        raise ValueError("need at least 2 respondents")
    if np.isnan(grid).any():
        raise ValueError("item_matrix must be complete (no missing values)")

    item_vars = grid.var(axis=0, ddof=1)
    total_var = grid.sum(axis=1).var(ddof=1)
    if total_var == 0.0:
        raise DegenerateVarianceError("total-score variance is zero")
    return k / (k - 1) * (1.0 - item_vars.sum() / total_var)


@dataclass
class ReliabilityReport:
    statement_alphas: dict[str, float | None]
    group_alphas: dict[Dimension, float | None]
    statement_units: dict[str, int]
    statement_pairable: dict[str, int]
    group_rows: dict[Dimension, int]
    n_raters: int

    def mean_statement_alpha(self) -> float | None:
        defined = [a for a in self.statement_alphas.values() if a is not None]
        if not defined:
            return None
        return float(np.mean(defined))

    def to_json(self) -> str:
        return json.dumps(
            {
                "statement_alphas": self.statement_alphas,
                "group_alphas": {d.value: a for d, a in self.group_alphas.items()},
                "statement_units": self.statement_units,
                "statement_pairable": self.statement_pairable,
                "group_rows": {d.value: c for d, c in self.group_rows.items()},
                "n_raters": self.n_raters,
                "mean_statement_alpha": self.mean_statement_alpha(),
            },
            sort_keys=True,
        )

    def to_csv(self, catalog: StatementCatalog) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["statement_id", "group", "k_alpha", "c_alpha", "n_units", "n_pairable"])
        for s in catalog.statements:
            k_alpha = self.statement_alphas.get(s.id)
            c_alpha = self.group_alphas.get(s.dimension)
            writer.writerow(
                [
                    s.id,
                    s.dimension.value,
                    "" if k_alpha is None else f"{k_alpha:.6f}",
                    "" if c_alpha is None else f"{c_alpha:.6f}",
                    self.statement_units.get(s.id, 0),
                    self.statement_pairable.get(s.id, 0),
                ]
            )
        return buf.getvalue()


def _pairable_count(matrix_rows: list[np.ndarray]) -> int:
    return int(sum(r.size for r in matrix_rows if r.size >= 2))


def reliability_report(records, catalog: StatementCatalog, metric: str = "interval") -> ReliabilityReport:
    """Per-statement Krippendorff alphas and per-group Cronbach alphas.

    Builds one units x raters matrix per statement and, for each dimension
    with more than one statement, an item matrix whose rows are complete
    annotator-on-document responses (reverse-coded items mapped r -> 6-r).
    Undefined alphas are reported as None rather than failing the report.
    """
    doc_ids = sorted({r.doc_id for r in records})
    annotator_ids = sorted({r.annotator_id for r in records})
    doc_index = {d: i for i, d in enumerate(doc_ids)}
    rater_index = {a: i for i, a in enumerate(annotator_ids)}

    statement_alphas: dict[str, float | None] = {}
    statement_units: dict[str, int] = {}
    statement_pairable: dict[str, int] = {}

    for statement in catalog.statements:
        grid = np.full((len(doc_ids), len(annotator_ids)), np.nan)
        for rec in records:
            rating = rec.ratings.get(statement.id)
            if rating is not None:
                grid[doc_index[rec.doc_id], rater_index[rec.annotator_id]] = rating
        rows = [row[~np.isnan(row)] for row in grid]
        statement_units[statement.id] = int(sum(1 for r in rows if r.size >= 1))
        statement_pairable[statement.id] = _pairable_count(rows)
        try:
            matrix = ReliabilityMatrix(doc_ids, annotator_ids, grid)
            statement_alphas[statement.id] = krippendorff_alpha(matrix, metric=metric)
        except (NoPairableValuesError, ValueError):
            statement_alphas[statement.id] = None

    group_alphas: dict[Dimension, float | None] = {}
    group_rows: dict[Dimension, int] = {}
    for dimension in Dimension:
        statements = catalog.statements_for(dimension)
        if len(statements) < 2:
            continue
        rows = []
        for rec in records:
            row = []
            for s in statements:
                rating = rec.ratings.get(s.id)
                if rating is None:
                    break
                row.append(6 - rating if s.reverse_coded else rating)
            else:
                rows.append(row)
        group_rows[dimension] = len(rows)
        if len(rows) < 2:
            group_alphas[dimension] = None
            continue
        try:
            group_alphas[dimension] = float(cronbach_alpha(np.array(rows, dtype=float)))
        except DegenerateVarianceError:
            group_alphas[dimension] = None

    return ReliabilityReport(
        statement_alphas=statement_alphas,
        group_alphas=group_alphas,
        statement_units=statement_units,
        statement_pairable=statement_pairable,
        group_rows=group_rows,
        n_raters=len(annotator_ids),
    )
