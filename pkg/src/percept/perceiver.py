"""Multi-task perception scorer: 25 statement-score outputs on top of an
encoder backend, trained with masked MSE and best-validation-epoch selection.

Labels are raw per-statement rating means (no reverse coding); reverse coding
applies only when statement scores are folded into a 12-dimension profile,
using the exact aggregation rule from the aggregate module.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .aggregate import PerceptionProfile, profile_from_statement_scores
from .catalog import DIMENSIONS, Dimension, StatementCatalog, catalog_hash, default_catalog
from .corpus import AnnotationRecord, NewsDocument
from .stats import pearson_r

TITLE_BODY_SEPARATOR = "\n"


class TooFewDocumentsError(ValueError):
    pass


class CatalogMismatchError(ValueError):
    pass


class DivergenceError(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 10
    split_ratios: tuple[float, float, float] = (0.7, 0.1, 0.2)
    learning_rate: float = 0.02
    batch_size: int = 8
    max_input_length: int = 4000
    seed: int = 0
    selection_metric: str = "mean_dimension_pearson"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {self.split_ratios}")


@dataclass
class LabeledDoc:
    doc: NewsDocument
    labels: np.ndarray  # (25,) mean statement ratings; undefined where masked
    mask: np.ndarray    # (25,) bool, True where the statement was rated


@dataclass
class ScorerModel:
    backend_name: str
    width: int
    weights: np.ndarray          # (width, 25)
    bias: np.ndarray             # (25,)
    catalog_hash: str
    statement_ids: list[str]
    config: TrainConfig
    best_epoch: int = 0
    validation_metric: float = float("nan")
    epoch_metrics: list[float] = field(default_factory=list)
    version: str = "1"


@dataclass
class StatementScores:
    doc_id: str
    scores: dict[str, float]


def model_input_text(doc: NewsDocument, max_input_length: int) -> str:
    """Title + separator + body, head-truncated to max_input_length chars."""
    return f"{doc.title}{TITLE_BODY_SEPARATOR}{doc.body}"[:max_input_length]


def split_dataset(items: list, ratios=(0.7, 0.1, 0.2), seed: int = 0) -> tuple[list, list, list]:
    """Deterministic disjoint train/validation/test split; floor rounding on
    the first two parts, remainder to test."""
    n = len(items)
    if n < 10:
        raise TooFewDocumentsError(f"need >= 10 labeled documents, got {n}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_train = int(np.floor(ratios[0] * n))
    n_val = int(np.floor(ratios[1] * n))
    train = [items[i] for i in order[:n_train]]
    val = [items[i] for i in order[n_train : n_train + n_val]]
    test = [items[i] for i in order[n_train + n_val :]]
    return train, val, test


def build_labels(
    records: list[AnnotationRecord],
    catalog: StatementCatalog,
    docs: list[NewsDocument] | None = None,
) -> list[LabeledDoc]:
    """Per-document 25-vectors of raw mean statement ratings with a mask for
    statements nobody rated. Documents with no ratings at all are dropped."""
    statement_ids = catalog.statement_ids()
    sid_index = {sid: i for i, sid in enumerate(statement_ids)}
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, np.ndarray] = {}
    for rec in records:
        s = sums.setdefault(rec.doc_id, np.zeros(len(statement_ids)))
        c = counts.setdefault(rec.doc_id, np.zeros(len(statement_ids)))
        for sid, rating in rec.ratings.items():
            if sid in sid_index:
                s[sid_index[sid]] += rating
                c[sid_index[sid]] += 1

    doc_map = {d.doc_id: d for d in docs} if docs is not None else None
    labeled: list[LabeledDoc] = []
    for doc_id in sorted(sums):
        mask = counts[doc_id] > 0
        if not mask.any():
            continue
        if doc_map is not None:
            if doc_id not in doc_map:
                continue
            doc = doc_map[doc_id]
        else:
            doc = NewsDocument(doc_id=doc_id, title="", body="", outlet_type="",
                               science_domain="", paper_id="", coverage_count=0)
        labels = np.where(mask, sums[doc_id] / np.maximum(counts[doc_id], 1), 0.0)
        labeled.append(LabeledDoc(doc=doc, labels=labels, mask=mask))
    return labeled


def _label_profile(item: LabeledDoc, catalog: StatementCatalog) -> PerceptionProfile:
    scores = {
        sid: float(item.labels[i])
        for i, sid in enumerate(catalog.statement_ids())
        if item.mask[i]
    }
    return profile_from_statement_scores(item.doc.doc_id, scores, catalog, reverse_code=True)


def _predict_raw(features: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    return np.clip(features @ weights + bias, 1.0, 5.0)


def _mean_dimension_pearson(
    predicted: np.ndarray, items: list[LabeledDoc], catalog: StatementCatalog
) -> float:
    """Mean Pearson r over dimensions between predicted-profile and
    label-profile scores; undefined dimensions are skipped."""
    statement_ids = catalog.statement_ids()
    pred_profiles = []
    label_profiles = []
    for row, item in zip(predicted, items):
        scores = {sid: float(row[i]) for i, sid in enumerate(statement_ids)}
        pred_profiles.append(profile_from_statement_scores(item.doc.doc_id, scores, catalog))
        label_profiles.append(_label_profile(item, catalog))
    rs = []
    for dim in DIMENSIONS:
        pairs = [
            (p.scores[dim], l.scores[dim])
            for p, l in zip(pred_profiles, label_profiles)
            if dim in p.scores and dim in l.scores
        ]
        if len(pairs) < 2:
            continue
        r = pearson_r(np.array([a for a, _ in pairs]), np.array([b for _, b in pairs]))
        if r is not None:
            rs.append(r)
    return float(np.mean(rs)) if rs else float("-inf")


def train(
    dataset: tuple[list[LabeledDoc], list[LabeledDoc]],
    config: TrainConfig,
    backend,
    catalog: StatementCatalog | None = None,
    record_history: bool = False,
) -> ScorerModel:
    """Train the 25-output regression head with Adam on masked MSE.

    dataset = (train items, validation items). Features come from the frozen
    backend; after each epoch the validation selection metric is computed and
    the best-epoch snapshot is returned. Deterministic per seed on the light
    backend (one RNG stream: init, then per-epoch shuffles). With
    record_history the per-epoch (weights, bias) snapshots are kept on the
    returned model's history attribute."""
    train_items, val_items = dataset
    if not train_items or not val_items:
        raise ValueError("train and validation splits must be non-empty")
    catalog = catalog or default_catalog()

    rng = np.random.default_rng(config.seed)
    texts = [model_input_text(it.doc, config.max_input_length) for it in train_items]
    features = backend.encode(texts)
    val_features = backend.encode([model_input_text(it.doc, config.max_input_length) for it in val_items])
    labels = np.stack([it.labels for it in train_items])
    masks = np.stack([it.mask for it in train_items]).astype(float)

    width = features.shape[1]
    n_out = labels.shape[1]
    weights = rng.normal(0.0, 0.01, size=(width, n_out))
    bias = np.full(n_out, 3.0)

    m_w = np.zeros_like(weights); v_w = np.zeros_like(weights)
    m_b = np.zeros_like(bias); v_b = np.zeros_like(bias)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    best_metric = float("-inf")
    best_snapshot = (weights.copy(), bias.copy())
    best_epoch = 0
    epoch_metrics: list[float] = []
    history: list[tuple[np.ndarray, np.ndarray]] = []

    n = features.shape[0]
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            f = features[idx]
            y = labels[idx]
            mask = masks[idx]
            pred = f @ weights + bias
            err = (pred - y) * mask
            denom = max(mask.sum(), 1.0)
            loss = float((err ** 2).sum() / denom)
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}")
            grad_out = 2.0 * err / denom
            g_w = f.T @ grad_out
            g_b = grad_out.sum(axis=0)

            step += 1
            m_w = beta1 * m_w + (1 - beta1) * g_w
            v_w = beta2 * v_w + (1 - beta2) * g_w ** 2
            m_b = beta1 * m_b + (1 - beta1) * g_b
            v_b = beta2 * v_b + (1 - beta2) * g_b ** 2
            mw_hat = m_w / (1 - beta1 ** step)
            vw_hat = v_w / (1 - beta2 ** step)
            mb_hat = m_b / (1 - beta1 ** step)
            vb_hat = v_b / (1 - beta2 ** step)
            weights -= config.learning_rate * mw_hat / (np.sqrt(vw_hat) + eps)
            bias -= config.learning_rate * mb_hat / (np.sqrt(vb_hat) + eps)

        val_pred = _predict_raw(val_features, weights, bias)
        metric = _mean_dimension_pearson(val_pred, val_items, catalog)
        epoch_metrics.append(metric)
        if record_history:
            history.append((weights.copy(), bias.copy()))
        if metric > best_metric:
            best_metric = metric
            best_snapshot = (weights.copy(), bias.copy())
            best_epoch = epoch

    model = ScorerModel(
        backend_name=backend.name,
        width=width,
        weights=best_snapshot[0],
        bias=best_snapshot[1],
        catalog_hash=catalog_hash(catalog),
        statement_ids=catalog.statement_ids(),
        config=config,
        best_epoch=best_epoch,
        validation_metric=best_metric,
        epoch_metrics=epoch_metrics,
    )
    if record_history:
        model.history = history
    return model


def predict(
    model: ScorerModel, doc: NewsDocument, catalog: StatementCatalog, backend
) -> tuple[StatementScores, PerceptionProfile]:
    """Score one document: 25 clamped statement scores plus the 12-dimension
    profile derived via the shared aggregation rule (reverse coding on)."""
    if catalog_hash(catalog) != model.catalog_hash:
        raise CatalogMismatchError("model was trained against a different catalog")
    text = model_input_text(doc, model.config.max_input_length)
    if not text.strip():
        raise ValueError(f"document {doc.doc_id} has no text")
    features = backend.encode([text])
    row = _predict_raw(features, model.weights, model.bias)[0]
    scores = {sid: float(row[i]) for i, sid in enumerate(model.statement_ids)}
    profile = profile_from_statement_scores(doc.doc_id, scores, catalog, reverse_code=True)
    return StatementScores(doc_id=doc.doc_id, scores=scores), profile


def predict_batch(model: ScorerModel, docs: list[NewsDocument], catalog: StatementCatalog, backend):
    return [predict(model, doc, catalog, backend) for doc in docs]


def evaluate(
    model: ScorerModel,
    test_items: list[LabeledDoc],
    catalog: StatementCatalog,
    backend,
) -> dict:
    """Per-dimension Pearson r between predicted and label-derived profile
    scores across test docs; zero-variance dimensions report None and are
    excluded from the overall mean."""
    if len(test_items) < 3:
        raise ValueError("need >= 3 test documents")
    per_dim: dict[Dimension, list[tuple[float, float]]] = {d: [] for d in DIMENSIONS}
    for item in test_items:
        _, pred_profile = predict(model, item.doc, catalog, backend)
        label_profile = _label_profile(item, catalog)
        for dim in DIMENSIONS:
            if dim in pred_profile.scores and dim in label_profile.scores:
                per_dim[dim].append((pred_profile.scores[dim], label_profile.scores[dim]))
    result: dict[Dimension, float | None] = {}
    for dim, pairs in per_dim.items():
        if len(pairs) < 2:
            result[dim] = None
            continue
        result[dim] = pearson_r(np.array([a for a, _ in pairs]), np.array([b for _, b in pairs]))
    defined = [r for r in result.values() if r is not None]
    return {
        "per_dimension": result,
        "overall": float(np.mean(defined)) if defined else None,
        "n": len(test_items),
    }


def evaluation_to_csv(evaluation: dict) -> str:
    lines = ["dimension,pearson_r,n"]
    for dim, r in evaluation["per_dimension"].items():
        value = "" if r is None else f"{r:.6f}"
        lines.append(f"{dim.value},{value},{evaluation['n']}")
    overall = evaluation["overall"]
    overall_value = "" if overall is None else f"{overall:.6f}"
    lines.append(f"overall,{overall_value},{evaluation['n']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_model(model: ScorerModel, path) -> None:
    """Model artifact directory: metadata.json + weights.npz."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    meta = {
        "format_version": model.version,
        "backend_name": model.backend_name,
        "width": model.width,
        "catalog_hash": model.catalog_hash,
        "statement_ids": model.statement_ids,
        "config": asdict(model.config),
        "best_epoch": model.best_epoch,
        "validation_metric": model.validation_metric,
        "epoch_metrics": model.epoch_metrics,
    }
    (path / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    np.savez(path / "weights.npz", weights=model.weights, bias=model.bias)


def load_model(path, catalog: StatementCatalog | None = None) -> ScorerModel:
    path = Path(path)
    meta_path = path / "metadata.json"
    weights_path = path / "weights.npz"
    if not meta_path.exists() or not weights_path.exists():
        raise ModelFormatError(f"{path} is not a model directory (metadata.json/weights.npz missing)")
    try:
        meta = json.loads(meta_path.read_text())
        blobs = np.load(weights_path)
        weights = blobs["weights"]
        bias = blobs["bias"]
    except (ValueError, KeyError, OSError) as exc:
        raise ModelFormatError(f"corrupted model artifact at {path}: {exc}") from exc
    if meta.get("format_version") != "1":
        raise ModelFormatError(f"unsupported model format version {meta.get('format_version')!r}")
    if catalog is not None and meta["catalog_hash"] != catalog_hash(catalog):
        raise CatalogMismatchError("model catalog hash does not match the provided catalog")
    cfg = meta["config"]
    cfg["split_ratios"] = tuple(cfg["split_ratios"])
    config = TrainConfig(**cfg)
    model = ScorerModel(
        backend_name=meta["backend_name"],
        width=int(meta["width"]),
        weights=weights,
        bias=bias,
        catalog_hash=meta["catalog_hash"],
        statement_ids=list(meta["statement_ids"]),
        config=config,
        best_epoch=int(meta["best_epoch"]),
        validation_metric=float(meta["validation_metric"]),
        epoch_metrics=list(meta["epoch_metrics"]),
    )
    if model.weights.shape != (model.width, len(model.statement_ids)):
        raise ModelFormatError("weights shape does not match metadata")
    return model
