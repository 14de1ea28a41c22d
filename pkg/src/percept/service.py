"""HTTP JSON API for scoring and framing comparison.

Endpoints (all under /v1): score, score/batch, compare, health, model.
Errors use {"error": {"code", "message"}}. The loaded artifacts live behind a
single attribute reference, so a hot swap is one atomic assignment and
concurrent requests see either the old or the new bundle in full.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import perceiver
from .aggregate import PerceptionProfile
from .analysis import EngagementPredictor, predict_engagement
from .backends import HashedNgramBackend, get_backend
from .catalog import StatementCatalog, default_catalog
from .corpus import NewsDocument

DEFAULT_MAX_TEXT_BYTES = 262_144


@dataclass
class ModelBundle:
    model: perceiver.ScorerModel
    backend: object
    catalog: StatementCatalog
    predictors: dict[str, EngagementPredictor]


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def load_bundle(model_dir, predictor_path=None, backend=None) -> ModelBundle:
    catalog = default_catalog()
    model = perceiver.load_model(model_dir, catalog)
    if backend is None:
        if model.backend_name.startswith("hashed-ngram-"):
            backend = HashedNgramBackend(width=model.width)
        else:
            backend = get_backend("heavy")
    predictors: dict[str, EngagementPredictor] = {}
    if predictor_path is not None:
        data = json.loads(Path(predictor_path).read_text())
        entries = data if isinstance(data, list) else [data]
        for entry in entries:
            predictor = EngagementPredictor.from_dict(entry)
            predictors[predictor.outcome] = predictor
    return ModelBundle(model=model, backend=backend, catalog=catalog, predictors=predictors)


def create_app(
    model_dir=None,
    predictor_path=None,
    max_text_bytes: int = DEFAULT_MAX_TEXT_BYTES,
) -> FastAPI:
    app = FastAPI(title="percept scoring service")
    app.state.bundle = None
    app.state.max_text_bytes = max_text_bytes
    if model_dir is not None:
        app.state.bundle = load_bundle(model_dir, predictor_path)

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    def require_bundle() -> ModelBundle:
        bundle = app.state.bundle
        if bundle is None:
            raise ApiError(503, "model_not_loaded", "no model loaded")
        return bundle

    def check_text(text) -> str:
        if not isinstance(text, str) or not text.strip():
            raise ApiError(400, "empty_text", "text must be a non-empty string")
        if len(text.encode("utf-8")) > app.state.max_text_bytes:
            raise ApiError(413, "text_too_large",
                           f"text exceeds {app.state.max_text_bytes} bytes")
        return text

    def score_one(bundle: ModelBundle, text: str, title: str = "") -> tuple[dict, PerceptionProfile]:
        doc = NewsDocument(doc_id="request", title=title or "", body=text,
                           outlet_type="", science_domain="", paper_id="", coverage_count=0)
        statement_scores, profile = perceiver.predict(bundle.model, doc, bundle.catalog, bundle.backend)
        payload = {
            "statement_scores": statement_scores.scores,
            "profile": {d.value: s for d, s in profile.scores.items()},
            "model_version": bundle.model.backend_name,
            "catalog_version": bundle.catalog.version,
        }
        return payload, profile

    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "model_loaded": app.state.bundle is not None}

    @app.get("/v1/model")
    async def model_info():
        bundle = require_bundle()
        return {
            "backend_name": bundle.model.backend_name,
            "catalog_hash": bundle.model.catalog_hash,
            "catalog_version": bundle.catalog.version,
            "best_epoch": bundle.model.best_epoch,
            "validation_metric": bundle.model.validation_metric,
            "config": {
                "epochs": bundle.model.config.epochs,
                "learning_rate": bundle.model.config.learning_rate,
                "batch_size": bundle.model.config.batch_size,
                "max_input_length": bundle.model.config.max_input_length,
                "seed": bundle.model.config.seed,
            },
            "predictors": sorted(bundle.predictors),
        }

    @app.post("/v1/score")
    async def score(request: Request):
        bundle = require_bundle()
        body = await _json_body(request)
        text = check_text(body.get("text"))
        payload, _ = score_one(bundle, text, body.get("title") or "")
        return payload

    @app.post("/v1/score/batch")
    async def score_batch(request: Request):
        bundle = require_bundle()
        body = await _json_body(request)
        texts = body.get("texts")
        if not isinstance(texts, list) or not texts:
            raise ApiError(400, "bad_request", "texts must be a non-empty list")
        results = []
        for text in texts:
            payload, _ = score_one(bundle, check_text(text))
            results.append(payload)
        return {"results": results}

    @app.post("/v1/compare")
    async def compare(request: Request):
        bundle = require_bundle()
        if not bundle.predictors:
            raise ApiError(503, "predictor_not_loaded", "no engagement predictor loaded")
        body = await _json_body(request)
        variants = body.get("variants")
        if not isinstance(variants, list) or len(variants) < 2:
            raise ApiError(400, "bad_request", "need at least 2 variants")
        labels = [v.get("label") for v in variants]
        if len(set(labels)) != len(labels) or any(not l for l in labels):
            raise ApiError(400, "bad_request", "variant labels must be unique and non-empty")

        scored = []
        for variant in variants:
            text = check_text(variant.get("text"))
            payload, profile = score_one(bundle, text, variant.get("title") or "")
            engagement = {}
            for outcome, predictor in bundle.predictors.items():
                est = predict_engagement(predictor, profile)
                engagement[outcome] = {
                    "prediction": est["prediction"],
                    "interval": list(est["interval"]),
                }
            scored.append({
                "label": variant["label"],
                "profile": payload["profile"],
                "statement_scores": payload["statement_scores"],
                "predicted_engagement": engagement,
            })

        baseline = scored[0]
        deltas = []
        for other in scored[1:]:
            deltas.append({
                "label": other["label"],
                "baseline": baseline["label"],
                "profile_delta": {
                    dim: other["profile"][dim] - baseline["profile"][dim]
                    for dim in baseline["profile"]
                },
                "engagement_delta": {
                    outcome: other["predicted_engagement"][outcome]["prediction"]
                    - baseline["predicted_engagement"][outcome]["prediction"]
                    for outcome in baseline["predicted_engagement"]
                },
            })
        return {"variants": scored, "deltas": deltas}

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ApiError(400, "bad_request", "request body must be JSON") from None
    if not isinstance(body, dict):
        raise ApiError(400, "bad_request", "request body must be a JSON object")
    return body


def swap_model(app: FastAPI, bundle: ModelBundle) -> None:
    """Atomic hot swap: a single reference assignment."""
    app.state.bundle = bundle
