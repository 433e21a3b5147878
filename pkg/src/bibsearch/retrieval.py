"""First-order text search over title, abstract, and author fields.

Recall-oriented partial matching: a document is a candidate as soon as any
query term matches in any queried field (OR semantics). Per-field score is

    sum over matched terms of  ln(1 + N/df) * (1 + ln tf)

divided by ln(1 + field length); the total score adds the queried fields
together (combination of evidence). Query terms are deduplicated, so
repeating a term does not change scores. Ties rank by ascending doc id.
"""

from __future__ import annotations

import math
import re
from collections import Counter, defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from .corpus import Corpus, Document, SynonymTable
from .errors import InvalidQueryError, NotFoundError

FIELDS = ("title", "abstract", "author")

DEFAULT_SEARCH_LIMIT = 200
DEFAULT_OPERATOR_LIMIT = 500

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_MIN_TOKEN_LEN = 2


def tokenize(text: str, synonyms: SynonymTable | None = None) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop tokens shorter than two
    characters, and map each token to its synonym group's canonical term."""
    tokens = []
    for tok in _TOKEN_RE.findall(text.lower()):
        if len(tok) < _MIN_TOKEN_LEN:
            continue
        tokens.append(synonyms.canonical(tok) if synonyms else tok)
    return tokens


def _surname(author: str) -> str:
    return author.split(",", 1)[0]


def _field_text(doc: Document, field_name: str) -> str:
    if field_name == "title":
        return doc.title
    if field_name == "abstract":
        return doc.abstract
    return " ".join(_surname(a) for a in doc.authors)


class InvertedIndex:
    """Immutable per-field postings over one corpus snapshot.

    postings[field][term] is a (doc id, tf) list sorted by doc id;
    field_lengths[field][doc] is the token count of that field.
    """

    def __init__(
        self,
        n_docs: int,
        postings: Mapping[str, Mapping[str, tuple[tuple[str, int], ...]]],
        field_lengths: Mapping[str, Mapping[str, int]],
        years: Mapping[str, int],
        synonyms: SynonymTable,
    ):
        self.n_docs = n_docs
        self.postings = {f: dict(postings.get(f, {})) for f in FIELDS}
        self.field_lengths = {f: dict(field_lengths.get(f, {})) for f in FIELDS}
        self.years = dict(years)
        self.synonyms = synonyms

    def df(self, field_name: str, term: str) -> int:
        return len(self.postings[field_name].get(term, ()))


def build_index(corpus: Corpus, synonyms: SynonymTable | None = None) -> InvertedIndex:
    """Build the inverted index for a corpus. Deterministic: iteration is in
    doc-id order, so postings come out sorted without an extra pass."""
    synonyms = synonyms or SynonymTable.empty()
    postings: dict[str, dict[str, list[tuple[str, int]]]] = {f: defaultdict(list) for f in FIELDS}
    lengths: dict[str, dict[str, int]] = {f: {} for f in FIELDS}
    years: dict[str, int] = {}
    for doc in corpus:
        years[doc.id] = doc.year
        for f in FIELDS:
            tokens = tokenize(_field_text(doc, f), synonyms)
            lengths[f][doc.id] = len(tokens)
            for term, tf in Counter(tokens).items():
                postings[f][term].append((doc.id, tf))
    frozen = {
        f: {term: tuple(plist) for term, plist in sorted(postings[f].items())}
        for f in FIELDS
    }
    return InvertedIndex(len(corpus), frozen, lengths, years, synonyms)


@dataclass(frozen=True)
class Query:
    """Fielded query; at least one text field must be non-empty."""

    title: str | None = None
    abstract: str | None = None
    author: str | None = None
    year_min: int | None = None
    year_max: int | None = None
    limit: int = DEFAULT_SEARCH_LIMIT

    def validate(self) -> None:
        if not (self.title or self.abstract or self.author):
            raise InvalidQueryError("at least one of title, abstract, author must be non-empty")
        if self.year_min is not None and self.year_max is not None and self.year_min > self.year_max:
            raise InvalidQueryError(f"year_min {self.year_min} exceeds year_max {self.year_max}")
        if self.limit <= 0:
            raise InvalidQueryError("limit must be positive")

    def queried_fields(self) -> tuple[str, ...]:
        return tuple(f for f in FIELDS if getattr(self, f))


@dataclass(frozen=True)
class RankedList:
    """Ordered (doc id, score) results, the currency between operators.

    Scores are non-increasing, ties break by ascending doc id, ids are
    unique. ``truncated`` records whether a limit cut candidates off.
    """

    entries: tuple[tuple[str, float], ...]
    provenance: str
    truncated: bool = False

    @staticmethod
    def from_scores(scores: Mapping[str, float], limit: int, provenance: str) -> "RankedList":
        ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        return RankedList(
            entries=tuple(ordered[:limit]),
            provenance=provenance,
            truncated=len(ordered) > limit,
        )

    @staticmethod
    def from_ids(ids: Iterable[str], provenance: str) -> "RankedList":
        unique = sorted(set(ids))
        return RankedList(tuple((i, 0.0) for i in unique), provenance)

    def ids(self) -> tuple[str, ...]:
        return tuple(doc_id for doc_id, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)


def _year_ok(year: int, year_min: int | None, year_max: int | None) -> bool:
    if year_min is not None and year < year_min:
        return False
    if year_max is not None and year > year_max:
        return False
    return True


def _score_fields(index: InvertedIndex, field_terms: Mapping[str, Sequence[str]],
                  year_min: int | None, year_max: int | None) -> dict[str, float]:
    """Accumulate combined-evidence scores for every matching document.

    Term contributions add in query order and fields in FIELDS order, so
    identical inputs produce bit-identical floats regardless of corpus
    line order.
    """
    totals: dict[str, float] = {}
    for f in FIELDS:
        terms = field_terms.get(f)
        if not terms:
            continue
        raw: dict[str, float] = {}
        for term in terms:
            plist = index.postings[f].get(term)
            if not plist:
                continue
            idf = math.log(1 + index.n_docs / len(plist))
            for doc_id, tf in plist:
                raw[doc_id] = raw.get(doc_id, 0.0) + idf * (1 + math.log(tf))
        lengths = index.field_lengths[f]
        for doc_id, score in raw.items():
            if not _year_ok(index.years[doc_id], year_min, year_max):
                continue
            totals[doc_id] = totals.get(doc_id, 0.0) + score / math.log(1 + lengths[doc_id])
    return totals


def _dedup_terms(tokens: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(tokens))


def search(index: InvertedIndex, query: Query) -> RankedList:
    """Rank documents matching any query term in any queried field."""
    query.validate()
    field_terms = {
        f: _dedup_terms(tokenize(getattr(query, f), index.synonyms))
        for f in query.queried_fields()
    }
    scores = _score_fields(index, field_terms, query.year_min, query.year_max)
    provenance = f"search({','.join(query.queried_fields())})"
    return RankedList.from_scores(scores, query.limit, provenance)


def find_similar(
    corpus: Corpus,
    index: InvertedIndex,
    seed_docs: Sequence[str],
    year_min: int | None = None,
    year_max: int | None = None,
    limit: int = DEFAULT_OPERATOR_LIMIT,
) -> RankedList:
    """Use documents as the query: the concatenated seed abstracts are issued
    as an abstract-field query, and the seeds are excluded from the result."""
    if limit <= 0:
        raise InvalidQueryError("limit must be positive")
    seeds = _dedup_terms(seed_docs)
    for seed in seeds:
        if seed not in corpus:
            raise NotFoundError(f"unknown document id {seed!r}")
    text = " ".join(corpus[s].abstract for s in seeds)
    terms = _dedup_terms(tokenize(text, index.synonyms))
    scores = _score_fields(index, {"abstract": terms}, year_min, year_max)
    for seed in seeds:
        scores.pop(seed, None)
    provenance = f"similar({len(seeds)} seeds)"
    return RankedList.from_scores(scores, limit, provenance)
