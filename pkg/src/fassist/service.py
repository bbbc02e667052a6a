"""HTTP query service over a trained model and its corpus.

The service is a thin read-only layer: a query is tokenized, the
translation model ranks the full component inventory, the reranker
reorders the head of that ranking, and the top k results are returned
with display metadata (signature, description, source link) drawn from
the corpus.  Responses are pure functions of the loaded artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .corpus import (
    Component,
    ComponentInventory,
    Corpus,
    TextSequence,
    load_corpus,
    load_hierarchy,
    tokenize_text,
)
from .features import Featurizer
from .model_store import TrainedModel, load_model
from .reranker import rerank
from .translation import rank_components

MAX_K = 50
DEFAULT_K = 10


class ServiceError(ValueError):
    """Raised for malformed queries; carries an HTTP-friendly message."""


@dataclass(frozen=True)
class RankedResult:
    rank: int
    score: float
    component: Component
    signature: str
    description: str
    source_url: str

    def as_dict(self) -> dict:
        return {
            "rank": self.rank,
            "score": self.score,
            "component": list(self.component.linearized),
            "signature": self.signature,
            "description": self.description,
            "source_url": self.source_url,
        }


def _source_url(template: Optional[str], file: str, line: int) -> str:
    if not template or not file:
        return ""
    return template.replace("{file}", file).replace("{line}", str(line))


class QueryEngine:
    """Immutable bundle of model artifacts behind answer_query."""

    def __init__(self, model: TrainedModel, corpus: Corpus):
        self.model = model
        self.corpus = corpus
        self.inventory = ComponentInventory.from_corpus(corpus)
        self.featurizer = Featurizer(
            lex_table=model.forward,
            phrase_table=model.phrase_table,
            hierarchy=corpus.hierarchy,
            param_desc_lookup=Featurizer.param_lookup_from_corpus(corpus),
            index=model.index,
        )
        # display metadata per linearization, first pair wins
        self.metadata = {}
        for pair in corpus.pairs:
            key = pair.component.linearized
            if key not in self.metadata:
                self.metadata[key] = (
                    pair.text.joined(),
                    _source_url(
                        corpus.source_url_template,
                        pair.source.file,
                        pair.source.line,
                    ),
                )

    @property
    def project_name(self) -> str:
        return self.model.project_name or self.corpus.project_name

    def answer_query(self, q: str, k: int = DEFAULT_K) -> list:
        if not isinstance(k, int) or not 1 <= k <= MAX_K:
            raise ServiceError(f"k must be between 1 and {MAX_K}")
        tokens = tokenize_text(q or "")
        if not tokens:
            raise ServiceError("empty query")
        query = TextSequence(tuple(tokens))
        full = rank_components(
            query, self.inventory, self.model.forward,
            k=len(self.inventory.components),
        )
        # the head always covers k, so every returned score is the
        # reranker's log-linear score and ordering stays monotone
        head = full[: max(self.model.rerank_pool, k)]
        reordered = rerank(
            query, head, self.model.weights, self.featurizer, k=len(head)
        )
        results = []
        for rank, (component, score) in enumerate(reordered[:k], start=1):
            description, source_url = self.metadata.get(
                component.linearized, ("", "")
            )
            results.append(
                RankedResult(
                    rank=rank,
                    score=float(score),
                    component=component,
                    signature=component.signature(),
                    description=description,
                    source_url=source_url,
                )
            )
        return results


def load_engine(model_path, corpus_path, hierarchy_path=None) -> QueryEngine:
    model = load_model(model_path)
    corpus = load_corpus(corpus_path)
    if hierarchy_path:
        from dataclasses import replace

        corpus = replace(corpus, hierarchy=load_hierarchy(hierarchy_path))
    return QueryEngine(model, corpus)


def create_app(engine: QueryEngine, static_dir=None):
    """FastAPI application exposing /api/health and /api/query."""
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse

    app = FastAPI(title="fassist query service")

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok",
            "project": engine.project_name,
            "pairs": len(engine.corpus.pairs),
        }

    @app.get("/api/query")
    def query(q: str = "", k: int = DEFAULT_K):
        try:
            results = engine.answer_query(q, k)
        except ServiceError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return [result.as_dict() for result in results]

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app


def serve(
    model_path,
    corpus_path,
    hierarchy_path=None,
    host: str = "127.0.0.1",
    port: int = 8000,
    static_dir=None,
):
    """Load artifacts and run the HTTP server until interrupted."""
    import uvicorn

    engine = load_engine(model_path, corpus_path, hierarchy_path)
    app = create_app(engine, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)
