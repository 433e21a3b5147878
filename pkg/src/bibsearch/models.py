"""Request/response models: the JSON wire format of the HTTP API.

The CLI renders the same models for its JSON output, so both surfaces return
identical payloads for identical requests against the same data generation.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel

from .corpus import Document
from .retrieval import DEFAULT_SEARCH_LIMIT, Query, RankedList
from .secondorder import ChainResult, ChainSpec, ChainStep, OperatorKind

OperatorName = Literal["similar", "references", "citations", "alsoread"]


class ApiError(BaseModel):
    code: Literal["not_found", "invalid_query", "parse_error", "conflict", "error"]
    message: str
    detail: str | None = None


class QueryModel(BaseModel):
    title: str | None = None
    abstract: str | None = None
    author: str | None = None
    year_min: int | None = None
    year_max: int | None = None
    limit: int | None = None

    def to_query(self, default_limit: int = DEFAULT_SEARCH_LIMIT) -> Query:
        return Query(
            title=self.title,
            abstract=self.abstract,
            author=self.author,
            year_min=self.year_min,
            year_max=self.year_max,
            limit=self.limit if self.limit is not None else default_limit,
        )


class SearchRequest(QueryModel):
    pass


class SimilarRequest(BaseModel):
    seed_ids: list[str]
    year_min: int | None = None
    year_max: int | None = None
    limit: int | None = None


class OpRequest(BaseModel):
    ids: list[str]
    limit: int | None = None
    include_external: bool = False


class ChainStepModel(BaseModel):
    kind: OperatorName
    limit: int | None = None


class ChainRequest(BaseModel):
    seed: list[str] | QueryModel
    steps: list[ChainStepModel]
    year_min: int | None = None
    year_max: int | None = None

    def to_spec(self, search_limit: int, operator_limit: int) -> ChainSpec:
        if isinstance(self.seed, QueryModel):
            seed: Query | tuple[str, ...] = self.seed.to_query(search_limit)
        else:
            seed = tuple(self.seed)
        steps = tuple(
            ChainStep(OperatorKind(s.kind), s.limit if s.limit is not None else operator_limit)
            for s in self.steps
        )
        return ChainSpec(seed=seed, steps=steps, year_min=self.year_min, year_max=self.year_max)


class RankedEntry(BaseModel):
    id: str
    score: float
    external: bool = False


class RankedListModel(BaseModel):
    provenance: str
    truncated: bool
    entries: list[RankedEntry]

    @classmethod
    def from_ranked(cls, ranked: RankedList, external: frozenset[str] = frozenset()) -> "RankedListModel":
        return cls(
            provenance=ranked.provenance,
            truncated=ranked.truncated,
            entries=[
                RankedEntry(id=doc_id, score=float(score), external=doc_id in external)
                for doc_id, score in ranked.entries
            ],
        )


class RankedResponse(RankedListModel):
    generation: int


class StageModel(BaseModel):
    kind: OperatorName
    limit: int
    empty: bool
    result: RankedListModel


class ChainResponse(BaseModel):
    generation: int
    seed: RankedListModel
    stages: list[StageModel]

    @classmethod
    def from_result(
        cls, result: ChainResult, generation: int, external: frozenset[str] = frozenset()
    ) -> "ChainResponse":
        return cls(
            generation=generation,
            seed=RankedListModel.from_ranked(result.seed, external),
            stages=[
                StageModel(
                    kind=stage.kind.value,
                    limit=stage.limit,
                    empty=stage.empty,
                    result=RankedListModel.from_ranked(stage.result, external),
                )
                for stage in result.stages
            ],
        )


class DocumentResponse(BaseModel):
    generation: int
    id: str
    title: str
    abstract: str
    authors: list[str]
    year: int
    journal: str

    @classmethod
    def from_document(cls, doc: Document, generation: int) -> "DocumentResponse":
        return cls(
            generation=generation,
            id=doc.id,
            title=doc.title,
            abstract=doc.abstract,
            authors=list(doc.authors),
            year=doc.year,
            journal=doc.journal,
        )


class HealthResponse(BaseModel):
    status: str
    generation: int


class ReloadResponse(BaseModel):
    generation: int
    summary: dict


class UtilityRowModel(BaseModel):
    code: str
    count: int
    minutes: float
    fte_years: float


class UtilityResponse(BaseModel):
    generation: int
    rows: list[UtilityRowModel]
    total_fte_years: float


class CountryUsageModel(BaseModel):
    iso: str
    raw_entries: int
    adjusted_requests: float


class CountriesResponse(BaseModel):
    generation: int
    counts: list[CountryUsageModel]


class ReadershipResponse(BaseModel):
    generation: int
    month: str
    unique_reads: int
    users: int
    heavy_threshold: int
    heavy_users: int
    median_heavy: float | None
    heavy_share: float
