"""HTTP+JSON service over a loaded engine.

Every response carries the data generation it was computed against; every
non-2xx body is an ApiError. Reads take no locks; reloading builds the next
generation and swaps it in atomically.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .engine import EngineManager
from .errors import BibsearchError
from .models import (
    ApiError,
    ChainRequest,
    ChainResponse,
    CountriesResponse,
    CountryUsageModel,
    DocumentResponse,
    HealthResponse,
    OpRequest,
    RankedListModel,
    RankedResponse,
    ReadershipResponse,
    ReloadResponse,
    SearchRequest,
    SimilarRequest,
    UtilityResponse,
    UtilityRowModel,
)
from .secondorder import OperatorKind

_STATUS_BY_CODE = {
    "not_found": 404,
    "invalid_query": 400,
    "parse_error": 400,
    "conflict": 409,
    "error": 500,
}


def create_app(manager: EngineManager, ui_dir: str | Path | None = None) -> FastAPI:
    # The interactive API docs move aside so /docs/{id} can serve documents.
    app = FastAPI(title="bibsearch", docs_url="/api-docs", redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(BibsearchError)
    async def handle_domain_error(request: Request, exc: BibsearchError):
        body = ApiError(code=exc.code, message=exc.message, detail=exc.detail)
        return JSONResponse(status_code=_STATUS_BY_CODE.get(exc.code, 500), content=body.model_dump())

    @app.exception_handler(RequestValidationError)
    async def handle_request_validation(request: Request, exc: RequestValidationError):
        body = ApiError(code="invalid_query", message="request validation failed", detail=str(exc.errors()))
        return JSONResponse(status_code=400, content=body.model_dump())

    @app.exception_handler(StarletteHTTPException)
    async def handle_http_exception(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "invalid_query", 409: "conflict"}.get(exc.status_code, "error")
        body = ApiError(code=code, message=str(exc.detail))
        return JSONResponse(status_code=exc.status_code, content=body.model_dump())

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", generation=manager.engine.generation)

    @app.get("/docs/{doc_id:path}", response_model=DocumentResponse)
    def get_document(doc_id: str):
        engine = manager.engine
        return DocumentResponse.from_document(engine.document(doc_id), engine.generation)

    @app.post("/search", response_model=RankedResponse)
    def post_search(request: SearchRequest):
        engine = manager.engine
        ranked = engine.search(request.to_query(engine.config.search_limit))
        model = RankedListModel.from_ranked(ranked, engine.graph.external)
        return RankedResponse(generation=engine.generation, **model.model_dump())

    @app.post("/similar", response_model=RankedResponse)
    def post_similar(request: SimilarRequest):
        engine = manager.engine
        ranked = engine.similar(
            request.seed_ids,
            year_min=request.year_min,
            year_max=request.year_max,
            limit=request.limit,
        )
        model = RankedListModel.from_ranked(ranked, engine.graph.external)
        return RankedResponse(generation=engine.generation, **model.model_dump())

    @app.post("/op/{kind}", response_model=RankedResponse)
    def post_operator(kind: Literal["references", "citations", "alsoread"], request: OpRequest):
        engine = manager.engine
        ranked = engine.operator(
            OperatorKind(kind),
            request.ids,
            limit=request.limit,
            include_external=request.include_external,
        )
        model = RankedListModel.from_ranked(ranked, engine.graph.external)
        return RankedResponse(generation=engine.generation, **model.model_dump())

    @app.post("/chain", response_model=ChainResponse)
    def post_chain(request: ChainRequest):
        engine = manager.engine
        spec = request.to_spec(engine.config.search_limit, engine.config.operator_limit)
        result = engine.chain(spec)
        return ChainResponse.from_result(result, engine.generation, engine.graph.external)

    @app.post("/reload", response_model=ReloadResponse)
    def post_reload():
        engine = manager.reload()
        return ReloadResponse(generation=engine.generation, summary=engine.summary)

    @app.get("/analytics/utility", response_model=UtilityResponse)
    def analytics_utility():
        engine = manager.engine
        report = engine.utility()
        rows = [
            UtilityRowModel(
                code=row.code,
                count=row.count,
                minutes=float(row.minutes),
                fte_years=float(row.fte_years),
            )
            for row in report.rows
        ]
        return UtilityResponse(
            generation=engine.generation, rows=rows, total_fte_years=float(report.total_fte_years)
        )

    @app.get("/analytics/countries", response_model=CountriesResponse)
    def analytics_countries():
        engine = manager.engine
        counts = [
            CountryUsageModel(
                iso=usage.iso,
                raw_entries=usage.raw_entries,
                adjusted_requests=usage.adjusted_requests,
            )
            for usage in engine.countries_usage().values()
        ]
        return CountriesResponse(generation=engine.generation, counts=counts)

    @app.get("/analytics/readership", response_model=ReadershipResponse)
    def analytics_readership(month: str, heavy_threshold: int | None = None):
        engine = manager.engine
        stats = engine.readership(month, heavy_threshold)
        return ReadershipResponse(
            generation=engine.generation,
            month=stats.month,
            unique_reads=stats.total_unique,
            users=len(stats.counts),
            heavy_threshold=stats.heavy_threshold,
            heavy_users=len(stats.heavy_users),
            median_heavy=stats.median_heavy,
            heavy_share=stats.heavy_share,
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
