"""Second-order operators: list-to-list transforms over the indexes.

Each operator takes a ranked list of documents and returns the collated
reference, citation, or also-read list of those documents; scores count
membership overlaps with the input (input scores are ignored). Chains apply
operators in sequence, each stage feeding the next.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .corpus import Corpus
from .errors import EmptySeedError, InvalidQueryError, NotFoundError
from .graph import CitationGraph, CoReadIndex
from .retrieval import (
    DEFAULT_OPERATOR_LIMIT,
    InvertedIndex,
    Query,
    RankedList,
    find_similar,
    search,
)


class OperatorKind(str, Enum):
    SIMILAR = "similar"
    REFERENCES = "references"
    CITATIONS = "citations"
    ALSO_READ = "alsoread"


def _check_limit(limit: int) -> None:
    if limit <= 0:
        raise InvalidQueryError("limit must be positive")


def op_references(
    input_list: RankedList,
    graph: CitationGraph,
    limit: int = DEFAULT_OPERATOR_LIMIT,
    include_external: bool = False,
) -> RankedList:
    """Collated references: score(c) = how many input docs cite c.

    External ids are excluded unless requested; input docs stay eligible
    (a paper in the input may be referenced by others in it).
    """
    _check_limit(limit)
    ids = input_list.ids()
    counts: dict[str, int] = {}
    for doc_id in ids:
        for cited in graph.forward.get(doc_id, ()):
            if not include_external and cited in graph.external:
                continue
            counts[cited] = counts.get(cited, 0) + 1
    scores = {doc: float(n) for doc, n in counts.items()}
    return RankedList.from_scores(scores, limit, f"references({len(ids)} inputs)")


def op_citations(
    input_list: RankedList,
    graph: CitationGraph,
    limit: int = DEFAULT_OPERATOR_LIMIT,
) -> RankedList:
    """Collated citations: score(c) = how many input docs c's reference list
    contains. Citing docs are always in-corpus."""
    _check_limit(limit)
    ids = input_list.ids()
    id_set = set(ids)
    candidates: set[str] = set()
    for doc_id in ids:
        candidates.update(graph.inverse.get(doc_id, ()))
    scores: dict[str, float] = {}
    for candidate in candidates:
        overlap = len(id_set.intersection(graph.forward.get(candidate, ())))
        if overlap:
            scores[candidate] = float(overlap)
    return RankedList.from_scores(scores, limit, f"citations({len(ids)} inputs)")


def op_alsoread(
    input_list: RankedList,
    coread: CoReadIndex,
    limit: int = DEFAULT_OPERATOR_LIMIT,
) -> RankedList:
    """Collated also-read: pool the readers of the input docs and score each
    candidate by how many pooled readers read it. Input docs are excluded."""
    _check_limit(limit)
    ids = input_list.ids()
    id_set = set(ids)
    pooled: set[str] = set()
    for doc_id in ids:
        pooled.update(coread.readers_of(doc_id))
    counts: dict[str, int] = {}
    for user in pooled:
        for candidate in coread.user_docs[user]:
            if candidate in id_set:
                continue
            counts[candidate] = counts.get(candidate, 0) + 1
    scores = {doc: float(n) for doc, n in counts.items()}
    return RankedList.from_scores(scores, limit, f"alsoread({len(ids)} inputs)")


@dataclass(frozen=True)
class ChainStep:
    kind: OperatorKind
    limit: int = DEFAULT_OPERATOR_LIMIT


@dataclass(frozen=True)
class ChainSpec:
    """Declarative operator chain: a seed (query or explicit ids) plus steps.

    The optional year range applies at Similar steps (and nowhere else).
    """

    seed: Query | tuple[str, ...]
    steps: tuple[ChainStep, ...]
    year_min: int | None = None
    year_max: int | None = None

    def validate(self) -> None:
        if not self.steps:
            raise InvalidQueryError("chain needs at least one step")
        for step in self.steps:
            if step.limit <= 0:
                raise InvalidQueryError("every step limit must be positive")
        if isinstance(self.seed, Query):
            self.seed.validate()
        elif not self.seed:
            raise InvalidQueryError("explicit seed id list must be non-empty")


@dataclass(frozen=True)
class StageResult:
    kind: OperatorKind
    limit: int
    result: RankedList
    empty: bool


@dataclass(frozen=True)
class ChainResult:
    seed: RankedList
    stages: tuple[StageResult, ...] = field(default_factory=tuple)


def run_chain(
    spec: ChainSpec,
    *,
    corpus: Corpus,
    index: InvertedIndex,
    graph: CitationGraph,
    coread: CoReadIndex,
) -> ChainResult:
    """Resolve the seed, then apply every step in order.

    Stage k's output is exactly stage k+1's input. A stage that comes up
    empty is recorded as such and every later stage stays empty; only an
    empty *seed* is an error.
    """
    spec.validate()
    if isinstance(spec.seed, Query):
        seed_list = search(index, spec.seed)
    else:
        for doc_id in spec.seed:
            if doc_id not in corpus:
                raise NotFoundError(f"unknown document id {doc_id!r}")
        seed_list = RankedList.from_ids(spec.seed, "seed(ids)")
    if not seed_list:
        raise EmptySeedError("seed resolved to no documents")

    stages: list[StageResult] = []
    current = seed_list
    for step in spec.steps:
        if not current:
            result = RankedList((), f"{step.kind.value}(0 inputs)")
        elif step.kind is OperatorKind.SIMILAR:
            result = find_similar(
                corpus, index, current.ids(),
                year_min=spec.year_min, year_max=spec.year_max, limit=step.limit,
            )
        elif step.kind is OperatorKind.REFERENCES:
            result = op_references(current, graph, step.limit)
        elif step.kind is OperatorKind.CITATIONS:
            result = op_citations(current, graph, step.limit)
        else:
            result = op_alsoread(current, coread, step.limit)
        stages.append(StageResult(step.kind, step.limit, result, empty=not result))
        current = result
    return ChainResult(seed=seed_list, stages=tuple(stages))


def parse_steps(text: str) -> tuple[ChainStep, ...]:
    """Parse a compact ``kind:limit,kind:limit`` step list (CLI surface)."""
    steps: list[ChainStep] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, limit_text = part.partition(":")
        try:
            kind = OperatorKind(name.strip().lower())
        except ValueError:
            allowed = ", ".join(k.value for k in OperatorKind)
            raise InvalidQueryError(f"unknown operator {name!r}; allowed: {allowed}") from None
        if limit_text:
            try:
                limit = int(limit_text)
            except ValueError:
                raise InvalidQueryError(f"bad limit {limit_text!r} in step {part!r}") from None
        else:
            limit = DEFAULT_OPERATOR_LIMIT
        steps.append(ChainStep(kind, limit))
    if not steps:
        raise InvalidQueryError("no chain steps given")
    return tuple(steps)
