"""Likert ratings -> perception profiles, and Likert -> ranking-score
conversion through paired comparisons.

Profiles average each dimension's statement ratings (reverse-coded items
mapped r -> 6-r first). Ranking scores come from a paired-comparison worth
model: every annotator who rated two documents contributes a win for the one
they scored higher (ties count half), and worths are fitted by MM iteration.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .catalog import Dimension, StatementCatalog
from .corpus import AnnotationRecord


class EmptyRecordError(ValueError):
    """Annotation record carries no ratings."""


class MixedDocError(ValueError):
    """Profiles for different documents passed where one document expected."""


class InsufficientComparisonsError(ValueError):
    """No document pair shares an annotator."""


class InsufficientOverlapError(ValueError):
    """Too few documents shared between ratings and rank tables."""


class UndefinedCorrelationError(ValueError):
    """Correlation undefined (zero variance on one side)."""


@dataclass
class PerceptionProfile:
    doc_id: str
    scores: dict[Dimension, float]
    n_annotators: int = 1
    per_dimension_counts: dict[Dimension, int] = field(default_factory=dict)
    extra: dict = field(default_factory=dict, compare=False)


@dataclass
class RankScoreTable:
    dimension: Dimension
    scores: dict[str, float]
    iterations: int
    converged: bool
    excluded_docs: list[str] = field(default_factory=list)

    def log_scores(self) -> dict[str, float]:
        return {doc: float(np.log(w)) for doc, w in self.scores.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["doc_id", "worth", "log_worth"])
        for doc_id in sorted(self.scores):
            w = self.scores[doc_id]
            writer.writerow([doc_id, f"{w:.10g}", f"{np.log(w):.10g}"])
        return buf.getvalue()


def profile_from_statement_scores(
    doc_id: str,
    statement_scores: dict[str, float],
    catalog: StatementCatalog,
    reverse_code: bool = True,
) -> PerceptionProfile:
    """Shared profile rule: per-dimension mean of statement scores, with
    reverse-coded statements mapped s -> 6-s when reverse_code is on.
    Dimensions without any scored statement are absent."""
    sums: dict[Dimension, float] = {}
    counts: dict[Dimension, int] = {}
    for sid, value in statement_scores.items():
        statement = catalog.get(sid)
        v = 6.0 - value if (reverse_code and statement.reverse_coded) else float(value)
        sums[statement.dimension] = sums.get(statement.dimension, 0.0) + v
        counts[statement.dimension] = counts.get(statement.dimension, 0) + 1
    scores = {d: sums[d] / counts[d] for d in sums}
    return PerceptionProfile(
        doc_id=doc_id,
        scores=scores,
        n_annotators=1,
        per_dimension_counts=counts,
    )


def annotator_profile(
    record: AnnotationRecord,
    catalog: StatementCatalog,
    reverse_code: bool = True,
) -> PerceptionProfile:
    """One annotator's 12-dimension profile for one document.

    per_dimension_counts holds the number of statements contributing to each
    dimension mean. Missing statement ratings are simply excluded."""
    if not record.ratings:
        raise EmptyRecordError(f"record by {record.annotator_id} for {record.doc_id} has no ratings")
    profile = profile_from_statement_scores(
        record.doc_id, {k: float(v) for k, v in record.ratings.items()}, catalog, reverse_code
    )
    profile.extra["reverse_code"] = reverse_code
    return profile


def article_profile(profiles: list[PerceptionProfile]) -> PerceptionProfile:
    """Average per-annotator profiles for one document.

    Each dimension averages over the annotators that rated it;
    per_dimension_counts records how many did."""
    if not profiles:
        raise ValueError("no profiles given")
    doc_ids = {p.doc_id for p in profiles}
    if len(doc_ids) > 1:
        raise MixedDocError(f"profiles span multiple documents: {sorted(doc_ids)}")

    sums: dict[Dimension, float] = {}
    counts: dict[Dimension, int] = {}
    for p in profiles:
        for d, score in p.scores.items():
            sums[d] = sums.get(d, 0.0) + score
            counts[d] = counts.get(d, 0) + 1
    return PerceptionProfile(
        doc_id=profiles[0].doc_id,
        scores={d: sums[d] / counts[d] for d in sums},
        n_annotators=len(profiles),
        per_dimension_counts=counts,
    )


def article_profiles_from_records(
    records: list[AnnotationRecord],
    catalog: StatementCatalog,
    reverse_code: bool = True,
) -> dict[str, PerceptionProfile]:
    """Aggregate annotation records into one profile per document."""
    per_doc: dict[str, list[PerceptionProfile]] = {}
    for rec in records:
        if not rec.ratings:
            continue
        per_doc.setdefault(rec.doc_id, []).append(annotator_profile(rec, catalog, reverse_code))
    return {doc_id: article_profile(plist) for doc_id, plist in per_doc.items()}


# ---------------------------------------------------------------------------
# Likert -> ranking scores
# ---------------------------------------------------------------------------

# Fraction of each edge's comparison count added as pseudo-wins to both
# directions. Keeps all worths finite when a document never wins (the MLE
# would otherwise push its worth to zero); symmetric, so ties-only data stays
# exactly equal, and proportional, so duplicating every comparison leaves the
# fitted worths unchanged.
COMPARISON_SMOOTHING = 0.1

MM_TOL = 1e-8
MM_MAX_ITER = 1000


def _largest_component(n: int, edges: np.ndarray) -> np.ndarray:
    """Boolean mask of the largest connected component of an n-node graph
    given a symmetric boolean adjacency matrix."""
    labels = np.full(n, -1, dtype=np.int64)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = current
        while stack:
            node = stack.pop()
            for nb in np.flatnonzero(edges[node]):
                if labels[nb] < 0:
                    labels[nb] = current
                    stack.append(nb)
        current += 1
    sizes = np.bincount(labels, minlength=current)
    return labels == int(np.argmax(sizes))


def rank_scores(
    records: list[AnnotationRecord],
    catalog: StatementCatalog,
    dimension: Dimension,
    smoothing: float = COMPARISON_SMOOTHING,
) -> RankScoreTable:
    """Fit paired-comparison worth scores for one dimension.

    Worths are normalized so the mean log-worth is 0. Documents outside the
    largest connected comparison component are excluded and reported."""
    per_annotator: dict[str, dict[str, float]] = {}
    for rec in records:
        if not rec.ratings:
            continue
        profile = annotator_profile(rec, catalog, reverse_code=True)
        if dimension in profile.scores:
            per_annotator.setdefault(rec.annotator_id, {})[rec.doc_id] = profile.scores[dimension]

    doc_ids = sorted({doc for ratings in per_annotator.values() for doc in ratings})
    index = {doc: i for i, doc in enumerate(doc_ids)}
    n = len(doc_ids)

    wins = np.zeros((n, n))
    for ratings in per_annotator.values():
        docs = sorted(ratings)
        for a in range(len(docs)):
            for b in range(a + 1, len(docs)):
                i, j = index[docs[a]], index[docs[b]]
                si, sj = ratings[docs[a]], ratings[docs[b]]
                if si > sj:
                    wins[i, j] += 1.0
                elif sj > si:
                    wins[j, i] += 1.0
                else:
                    wins[i, j] += 0.5
                    wins[j, i] += 0.5

    observed = (wins + wins.T) > 0
    if not observed.any():
        raise InsufficientComparisonsError("no document pair shares an annotator")

    keep = _largest_component(n, observed)
    excluded = [doc_ids[i] for i in range(n) if not keep[i]]
    kept_ids = [doc_ids[i] for i in range(n) if keep[i]]
    w = wins[np.ix_(keep, keep)]
    w = w + smoothing * (w + w.T)

    totals = w + w.T
    worths, iterations, converged = _kernels.bt_mm(
        np.ascontiguousarray(w), np.ascontiguousarray(totals), MM_MAX_ITER, MM_TOL
    )

    return RankScoreTable(
        dimension=dimension,
        scores={doc: float(worths[i]) for i, doc in enumerate(kept_ids)},
        iterations=int(iterations),
        converged=bool(converged),
        excluded_docs=excluded,
    )


def rating_rank_agreement(
    article_profiles_by_doc: dict[str, PerceptionProfile],
    rank_tables: dict[Dimension, RankScoreTable] | list[RankScoreTable],
) -> dict[Dimension, float]:
    """Pearson correlation between mean ratings and log-worth scores,
    per dimension."""
    if isinstance(rank_tables, list):
        rank_tables = {t.dimension: t for t in rank_tables}

    out: dict[Dimension, float] = {}
    for dimension, table in rank_tables.items():
        shared = [
            doc for doc in table.scores
            if doc in article_profiles_by_doc and dimension in article_profiles_by_doc[doc].scores
        ]
        if len(shared) < 3:
            raise InsufficientOverlapError(
                f"{dimension.value}: only {len(shared)} documents shared between ratings and ranks"
            )
        ratings = np.array([article_profiles_by_doc[d].scores[dimension] for d in shared])
        log_worths = np.array([np.log(table.scores[d]) for d in shared])
        if ratings.std() == 0 or log_worths.std() == 0:
            raise UndefinedCorrelationError(f"{dimension.value}: zero variance")
        out[dimension] = float(np.corrcoef(ratings, log_worths)[0, 1])
    return out


def profiles_to_jsonl_dicts(profiles: dict[str, PerceptionProfile]) -> list[dict]:
    return [
        {
            "doc_id": p.doc_id,
            "scores": {d.value: s for d, s in p.scores.items()},
            "n_annotators": p.n_annotators,
            "per_dimension_counts": {d.value: c for d, c in p.per_dimension_counts.items()},
        }
        for p in (profiles[k] for k in sorted(profiles))
    ]


def profile_from_jsonl_dict(data: dict) -> PerceptionProfile:
    return PerceptionProfile(
        doc_id=data["doc_id"],
        scores={Dimension(k): float(v) for k, v in data["scores"].items()},
        n_annotators=int(data.get("n_annotators", 1)),
        per_dimension_counts={
            Dimension(k): int(v) for k, v in data.get("per_dimension_counts", {}).items()
        },
    )
