"""HTTP API wiring the full workflow for the composer UI and batch callers.

All endpoints live under /api/v1 (health is also exposed at /healthz).
Errors come back as {"code", "message", "detail"}: 4xx for caller faults,
5xx for backend faults. Responses carry the catalog/session version they
were computed from.
"""

from __future__ import annotations

import json
import logging
from functools import partial

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__, catalog as cat, evaluation, generation, similarity
from .config import ServiceConfig
from .errors import (
    BackendError,
    CatalogMiss,
    FormatError,
    NotFound,
    SessionStateError,
)
from .sentiment import default_lexicon
from .session import SessionStore

log = logging.getLogger(__name__)


class ServiceContext:
    """Owns the stores and hooks the modules together."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = cat.ReviewStore(
            data_dir=config.data_dir, coverage_threshold=config.coverage_threshold
        )
        self.product_type_infos = similarity.load_bundled_product_types()
        self.store.register_product_types(
            cat.ProductType(p.id, p.name, p.department, p.description)
            for p in self.product_type_infos
        )
        self.lexicon = default_lexicon()
        self.backend = self._make_backend()
        self.limits = generation.ValidationLimits(
            min_words=config.min_words,
            max_words=config.max_words,
            strict=config.strict_validation,
        )
        self._embedder: similarity.TfidfEmbedder | None = None
        session_dir = config.data_dir if config.data_dir is not None else None
        self.sessions = SessionStore(
            data_dir=session_dir,
            topics_lookup=self._topics_with_fallback,
            suggester=self._suggest_for_session,
            lexicon=self.lexicon,
            blend_alpha=config.blend_alpha,
        )

    def _make_backend(self):
        if self.config.backend == "http":
            return generation.HttpBackend(
                url=self.config.llm_url, api_key=self.config.api_key()
            )
        return generation.TemplateBackend(seed=self.config.seed)

    @property
    def embedder(self) -> similarity.TfidfEmbedder:
        if self._embedder is None:
            self._embedder = similarity.TfidfEmbedder(
                [p.name for p in self.store.product_types()]
            )
        return self._embedder

    def pt_info(self, pt_id: str) -> similarity.ProductTypeInfo:
        pt = self.store.product_type(pt_id)
        return similarity.ProductTypeInfo(pt.id, pt.name, pt.department, pt.description)

    def similar(self, pt_id: str, method_kind: str, k: int | None = None):
        method = similarity.SimilarityMethod(
            kind=method_kind,
            threshold=self.config.levenshtein_threshold,
            k=k or self.config.k,
        )
        candidates = [
            similarity.ProductTypeInfo(p.id, p.name, p.department, p.description)
            for p in self.store.product_types()
        ]
        return similarity.similar_product_types(
            self.pt_info(pt_id), method, candidates,
            embedder=self.embedder, backend=self.backend,
        )

    # -- fallback chain for cold-start topic lookup -------------------------

    def _topics_from_similar(self, pt_id: str) -> list[cat.Topic]:
        for info, _score in self.similar(pt_id, "cosine"):
            entry = self.store.catalog.get(info.id)
            if entry:
                return [
                    cat.Topic(t.label, t.synonyms, t.support, "similar_pt") for t in entry
                ]
        return []

    def _topics_from_description(self, pt_id: str) -> list[cat.Topic]:
        pt = self.store.product_type(pt_id)
        if not pt.description:
            return []
        return cat.extract_topics_from_description(pt.description)

    def _topics_from_llm(self, pt_id: str) -> list[cat.Topic]:
        prompt = (
            f"Product type: {pt_id}\n"
            "List up to 10 review topics customers mention for this product type, "
            "one per line."
        )
        try:
            response = self.backend.complete_text(prompt)
        except BackendError:
            return []
        topics = []
        for line in response.splitlines():
            label = line.strip().lstrip("-*•0123456789. ").strip().lower()
            if label:
                topics.append(cat.Topic(label=label, source="llm"))
        return topics[:10]

    def _topics_with_fallback(self, pt_id: str):
        result = self.topics_for(pt_id, allow_fallback=True)
        return result.topics, result.provenance

    def topics_for(self, pt_id: str, allow_fallback: bool) -> cat.TopicLookupResult:
        chain = {
            "similar_pt": partial(self._topics_from_similar, pt_id),
            "description": partial(self._topics_from_description, pt_id),
            "llm": partial(self._topics_from_llm, pt_id),
        }
        fallbacks = [(name, chain[name]) for name in self.config.fallback_order]
        return cat.topics_for(
            self.store, pt_id, allow_fallback=allow_fallback, fallbacks=fallbacks
        )

    # -- suggestion hook for sessions ---------------------------------------

    def _suggest_for_session(self, session) -> list[generation.PhraseSuggestion]:
        vocabulary = {t.label for t in session.presented_topics}
        for topic in session.presented_topics:
            vocabulary.update(topic.synonyms)
        return generation.suggest(
            product_type=session.product_type_id,
            product_name=session.product_name,
            ratings=session.ratings,
            backend=self.backend,
            lexicon=self.lexicon,
            limits=self.limits,
            topic_vocabulary=vocabulary,
        )


_ERROR_STATUS = {
    NotFound: (404, "not_found"),
    CatalogMiss: (404, "catalog_miss"),
    SessionStateError: (409, "session_state"),
    ValueError: (400, "invalid_request"),
    BackendError: (502, "backend_error"),
    FormatError: (502, "format_error"),
}


def _error_response(exc: Exception) -> JSONResponse:
    for klass, (status, code) in _ERROR_STATUS.items():
        if isinstance(exc, klass):
            return JSONResponse(
                status_code=status,
                content={"code": code, "message": str(exc), "detail": type(exc).__name__},
            )
    log.exception("unhandled error")
    return JSONResponse(
        status_code=500,
        content={"code": "internal", "message": str(exc), "detail": type(exc).__name__},
    )


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    ctx = ServiceContext(config)
    app = FastAPI(title="reviewkit", version=__version__)
    app.state.ctx = ctx

    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    for klass in _ERROR_STATUS:
        app.add_exception_handler(klass, lambda request, exc: _error_response(exc))

    def health() -> dict:
        return {"status": "ok", "version": __version__}

    app.get("/healthz")(health)
    app.get("/api/v1/healthz")(health)

    @app.post("/api/v1/catalog/reviews")
    async def ingest(request: Request):
        body = (await request.body()).decode("utf-8")
        summary = ctx.store.ingest_reviews(body.splitlines())
        return {"catalog_version": ctx.store.version, **summary.to_dict()}

    @app.get("/api/v1/product-types")
    def product_types():
        return {
            "catalog_version": ctx.store.version,
            "product_types": [
                {
                    "id": p.id,
                    "name": p.name,
                    "department": p.department,
                    "review_count": ctx.store.review_count(p.id),
                }
                for p in ctx.store.product_types()
            ],
        }

    @app.get("/api/v1/product-types/{pt_id}/topics")
    def topics(pt_id: str, fallback: bool = False):
        result = ctx.topics_for(pt_id, allow_fallback=fallback)
        return {
            "catalog_version": ctx.store.version,
            "product_type": pt_id,
            "provenance": result.provenance,
            "topics": [t.to_dict() for t in result.topics],
        }

    @app.get("/api/v1/product-types/{pt_id}/similar")
    def similar(pt_id: str, method: str = "cosine", k: int | None = None):
        ranked = ctx.similar(pt_id, method, k)
        return {
            "catalog_version": ctx.store.version,
            "product_type": pt_id,
            "method": method,
            "similar": [
                {"product_type": info.id, "score": round(score, 6)} for info, score in ranked
            ],
        }

    @app.post("/api/v1/sessions")
    async def create_session(request: Request):
        payload = await request.json()
        if not isinstance(payload, dict) or not payload.get("product_type"):
            raise ValueError("body must be an object with a product_type field")
        session = ctx.sessions.create_session(
            product_type_id=payload["product_type"],
            product_name=payload.get("product_name"),
            idempotency_key=payload.get("idempotency_key"),
        )
        return session.to_dict()

    @app.get("/api/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return ctx.sessions.get(session_id).to_dict()

    @app.post("/api/v1/sessions/{session_id}/ratings")
    async def rate(session_id: str, request: Request):
        payload = await request.json()
        if not isinstance(payload, list):
            raise ValueError("body must be a list of {topic, stars} objects")
        try:
            ratings = [
                generation.TopicRating(topic=r["topic"], stars=int(r["stars"])) for r in payload
            ]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"each rating needs topic and stars: {exc}") from exc
        return ctx.sessions.rate_topics(session_id, ratings).to_dict()

    @app.post("/api/v1/sessions/{session_id}/suggestions")
    def suggest(session_id: str):
        return ctx.sessions.suggest_phrases(session_id).to_dict()

    @app.put("/api/v1/sessions/{session_id}/draft")
    async def draft(session_id: str, request: Request):
        payload = await request.json()
        return ctx.sessions.update_draft(session_id, payload.get("text", "")).to_dict()

    @app.post("/api/v1/sessions/{session_id}/finalize")
    def finalize(session_id: str):
        ctx.sessions.finalize(session_id)
        return ctx.sessions.get(session_id).to_dict()

    @app.post("/api/v1/eval/bleu")
    async def eval_bleu(request: Request):
        payload = await request.json()
        records = payload.get("records", [])
        pairs = evaluation.load_bleu_records(json.dumps(r) for r in records)
        report = evaluation.corpus_bleu(
            pairs,
            eligibility=payload.get("eligibility", True),
            smoothing=payload.get("smoothing", False),
        )
        return report.to_dict()

    return app


def serve(config: ServiceConfig | None = None) -> None:
    import uvicorn

    config = config or ServiceConfig.from_env()
    uvicorn.run(create_app(config), host="127.0.0.1", port=config.port, log_level="info")
