"""Citation/reference adjacency and the also-read co-occurrence index.

The citation graph keeps cited ids that fall outside the corpus (real
reference data always points beyond any snapshot); they are flagged external
and excluded from ranking unless explicitly requested. The co-read index is
derived from read-type events (A, E, F, G) inside a trailing time window,
with repeat reads collapsed per (user, doc).
"""

from __future__ import annotations

import csv
from collections.abc import Iterable
from pathlib import Path

from .corpus import MS_PER_DAY, READ_CODES, Corpus, ReadLog
from .errors import NotFoundError, ParseError, ValidationError
from .retrieval import DEFAULT_OPERATOR_LIMIT, RankedList


class CitationGraph:
    """Forward (references) and inverse (citations) adjacency over doc ids."""

    def __init__(
        self,
        forward: dict[str, tuple[str, ...]],
        external: frozenset[str],
        corpus_ids: frozenset[str],
        duplicates_dropped: int = 0,
    ):
        self.forward = forward
        inverse: dict[str, list[str]] = {}
        for citing, cited_list in forward.items():
            for cited in cited_list:
                inverse.setdefault(cited, []).append(citing)
        self.inverse = {doc: tuple(sorted(citers)) for doc, citers in sorted(inverse.items())}
        self.external = external
        self.corpus_ids = corpus_ids
        self.duplicates_dropped = duplicates_dropped

    @property
    def edge_count(self) -> int:
        return sum(len(v) for v in self.forward.values())

    def is_external(self, doc_id: str) -> bool:
        return doc_id in self.external

    def references_of(self, doc_id: str) -> tuple[str, ...]:
        """Sorted ids cited by ``doc_id`` (external ids included)."""
        if doc_id not in self.corpus_ids:
            raise NotFoundError(f"unknown document id {doc_id!r}")
        return self.forward.get(doc_id, ())

    def citations_of(self, doc_id: str) -> tuple[str, ...]:
        """Sorted ids citing ``doc_id``; valid for corpus and external ids."""
        if doc_id not in self.corpus_ids and doc_id not in self.external:
            raise NotFoundError(f"unknown document id {doc_id!r}")
        return self.inverse.get(doc_id, ())


def build_citation_graph(pairs: Iterable[tuple[str, str]], corpus: Corpus) -> CitationGraph:
    """Build the graph from (citing, cited) pairs.

    The citing side must exist in the corpus; cited ids may be external.
    Duplicate pairs are dropped silently but counted; self-citations are
    invalid.
    """
    forward: dict[str, set[str]] = {}
    external: set[str] = set()
    duplicates = 0
    for citing, cited in pairs:
        if not citing or not cited:
            raise ValidationError(f"empty id in pair ({citing!r}, {cited!r})")
        if citing == cited:
            raise ValidationError(f"self-citation {citing!r}")
        if citing not in corpus:
            raise ValidationError(f"citing id {citing!r} absent from corpus")
        seen = forward.setdefault(citing, set())
        if cited in seen:
            duplicates += 1
            continue
        seen.add(cited)
        if cited not in corpus:
            external.add(cited)
    frozen = {doc: tuple(sorted(cited)) for doc, cited in sorted(forward.items())}
    return CitationGraph(frozen, frozenset(external), corpus.ids(), duplicates)


def load_citations(path: str | Path, corpus: Corpus) -> CitationGraph:
    """Load a headerless ``citing,cited`` CSV into a CitationGraph."""
    path = Path(path)
    pairs: list[tuple[str, str]] = []
    with path.open(encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(
                    f"expected 2 fields, got {len(row)}", path=str(path), line=lineno
                )
            pairs.append((row[0], row[1]))
    try:
        return build_citation_graph(pairs, corpus)
    except ValidationError as exc:
        raise ValidationError(exc.message, path=str(path)) from None


def save_citations(graph: CitationGraph, path: str | Path) -> None:
    """Write edges in canonical form: sorted (citing, cited) pairs."""
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for citing in sorted(graph.forward):
            for cited in graph.forward[citing]:
                writer.writerow([citing, cited])


class CoReadIndex:
    """Who read what inside the active window, with inverse user mapping."""

    def __init__(
        self,
        readers: dict[str, tuple[tuple[str, int], ...]],
        corpus_ids: frozenset[str],
        min_readers: int,
        window_ms: tuple[int, int] | None,
    ):
        self.readers = readers
        self.reader_sets = {doc: frozenset(u for u, _ in pairs) for doc, pairs in readers.items()}
        user_docs: dict[str, set[str]] = {}
        for doc, pairs in readers.items():
            for user, _ in pairs:
                user_docs.setdefault(user, set()).add(doc)
        self.user_docs = {u: frozenset(docs) for u, docs in user_docs.items()}
        self.corpus_ids = corpus_ids
        self.min_readers = min_readers
        self.window_ms = window_ms

    def readers_of(self, doc_id: str) -> frozenset[str]:
        return self.reader_sets.get(doc_id, frozenset())


def build_coread(log: ReadLog, window_days: int = 180, min_readers: int = 2) -> CoReadIndex:
    """Index read-type events in the trailing window ending at the log's max
    timestamp. Repeat reads of a doc by the same user collapse to one entry
    carrying the latest timestamp."""
    if window_days <= 0:
        raise ValidationError("window_days must be positive")
    if min_readers <= 0:
        raise ValidationError("min_readers must be positive")
    end = log.max_timestamp_ms
    if end is None:
        return CoReadIndex({}, log.corpus_ids, min_readers, None)
    start = end - window_days * MS_PER_DAY
    last_read: dict[tuple[str, str], int] = {}
    for event in log.events:
        if event.access_type not in READ_CODES:
            continue
        if event.timestamp_ms < start:
            continue
        key = (event.doc, event.user)
        prior = last_read.get(key)
        if prior is None or event.timestamp_ms > prior:
            last_read[key] = event.timestamp_ms
    readers: dict[str, list[tuple[str, int]]] = {}
    for (doc, user), ts in last_read.items():
        readers.setdefault(doc, []).append((user, ts))
    frozen = {doc: tuple(sorted(pairs)) for doc, pairs in sorted(readers.items())}
    return CoReadIndex(frozen, log.corpus_ids, min_readers, (start, end))


def also_read(coread: CoReadIndex, doc_id: str, limit: int = DEFAULT_OPERATOR_LIMIT) -> RankedList:
    """Documents most read by the readers of ``doc_id``.

    Candidates read by fewer than ``min_readers`` users overall are dropped;
    the query document never appears in its own list.
    """
    if doc_id not in coread.corpus_ids:
        raise NotFoundError(f"unknown document id {doc_id!r}")
    counts: dict[str, int] = {}
    for user in coread.readers_of(doc_id):
        for candidate in coread.user_docs[user]:
            if candidate == doc_id:
                continue
            counts[candidate] = counts.get(candidate, 0) + 1
    scores = {
        doc: float(n)
        for doc, n in counts.items()
        if len(coread.reader_sets[doc]) >= coread.min_readers
    }
    return RankedList.from_scores(scores, limit, f"also_read({doc_id})")
