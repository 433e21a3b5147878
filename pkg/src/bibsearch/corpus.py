"""Data model and on-disk formats for the bibliographic corpus.

Documents, read-log events, synonym groups, and per-country records, plus a
loader and a canonical writer for each format. Text is stored verbatim; all
normalization happens at retrieval time. Loaded structures are immutable and
safe to share between concurrent readers.

Canonical form: documents sorted by id, log events by timestamp, citation
pairs by (citing, cited), countries by iso code, synonym groups by their
first term; "\\n" line endings throughout. ``save(load(f))`` is a fixed point
for every loader.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import NotFoundError, ParseError, ValidationError

ACCESS_TYPES = frozenset("ACDEFGILMNOPRSTUQ")
QUERY_CODE = "Q"
# Codes that count as actually reading an article: abstract view plus the
# three full-text renderings. Everything else is navigation.
READ_CODES = frozenset("AEFG")

CULTURES = ("european", "asian", "other")

YEAR_FLOOR = 1600
YEAR_CEIL = 2100

MS_PER_DAY = 86_400_000


# ---------------------------------------------------------------------------
# Timestamps: ISO-8601 UTC strings in files, epoch milliseconds internally.
# ---------------------------------------------------------------------------

def parse_timestamp(text: str) -> int:
    """Parse an ISO-8601 UTC instant into epoch milliseconds.

    The designator must be explicit (``Z`` or a numeric offset); naive
    timestamps are rejected as ambiguous.
    """
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        moment = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValueError(f"bad timestamp {text!r}: {exc}") from None
    if moment.tzinfo is None:
        raise ValueError(f"bad timestamp {text!r}: missing UTC designator")
    return round(moment.timestamp() * 1000)


def format_timestamp(ms: int) -> str:
    """Render epoch milliseconds in canonical ISO-8601 UTC form."""
    secs, millis = divmod(ms, 1000)
    moment = datetime.fromtimestamp(secs, tz=timezone.utc)
    base = moment.strftime("%Y-%m-%dT%H:%M:%S")
    return f"{base}.{millis:03d}Z" if millis else f"{base}Z"


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Document:
    """One bibliographic record."""

    id: str
    title: str
    abstract: str
    authors: tuple[str, ...]
    year: int
    journal: str

    def __post_init__(self):
        if not self.id:
            raise ValidationError("document id must be non-empty")
        if not self.title:
            raise ValidationError(f"document {self.id!r}: title must be non-empty")
        if not YEAR_FLOOR <= self.year <= YEAR_CEIL:
            raise ValidationError(
                f"document {self.id!r}: year {self.year} outside [{YEAR_FLOOR}, {YEAR_CEIL}]"
            )


class Corpus:
    """Immutable document collection keyed by id."""

    def __init__(self, documents: Iterable[Document]):
        docs: dict[str, Document] = {}
        for doc in documents:
            if doc.id in docs:
                raise ValidationError(f"duplicate document id {doc.id!r}")
            docs[doc.id] = doc
        self._docs = dict(sorted(docs.items()))
        self._ids = frozenset(self._docs)

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def __iter__(self) -> Iterator[Document]:
        return iter(self._docs.values())

    def __getitem__(self, doc_id: str) -> Document:
        try:
            return self._docs[doc_id]
        except KeyError:
            raise NotFoundError(f"unknown document id {doc_id!r}") from None

    def get(self, doc_id: str) -> Document | None:
        return self._docs.get(doc_id)

    def ids(self) -> frozenset[str]:
        return self._ids

    def sorted_ids(self) -> tuple[str, ...]:
        return tuple(self._docs)


_DOC_KEYS = ("id", "title", "abstract", "authors", "year", "journal")


def _document_from_obj(obj: object, path: str, line: int) -> Document:
    if not isinstance(obj, dict):
        raise ParseError("record is not an object", path=path, line=line)
    missing = [k for k in _DOC_KEYS if k not in obj]
    if missing:
        raise ParseError(f"missing keys {missing}", path=path, line=line)
    for key in ("id", "title", "abstract", "journal"):
        if not isinstance(obj[key], str):
            raise ParseError(f"key {key!r} must be a string", path=path, line=line)
    if not isinstance(obj["year"], int) or isinstance(obj["year"], bool):
        raise ParseError("key 'year' must be an integer", path=path, line=line)
    authors = obj["authors"]
    if not isinstance(authors, list) or not all(isinstance(a, str) for a in authors):
        raise ParseError("key 'authors' must be an array of strings", path=path, line=line)
    try:
        return Document(
            id=obj["id"],
            title=obj["title"],
            abstract=obj["abstract"],
            authors=tuple(authors),
            year=obj["year"],
            journal=obj["journal"],
        )
    except ValidationError as exc:
        raise ValidationError(exc.message, path=path, line=line) from None


def load_documents(path: str | Path) -> Corpus:
    """Load a line-delimited documents file into a Corpus.

    Rejects malformed lines (parse error with the line number) and duplicate
    ids (validation error naming the id and the offending line).
    """
    path = Path(path)
    docs: dict[str, Document] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON ({exc.msg})", path=str(path), line=lineno) from None
            doc = _document_from_obj(obj, str(path), lineno)
            if doc.id in docs:
                raise ValidationError(
                    f"duplicate document id {doc.id!r}", path=str(path), line=lineno
                )
            docs[doc.id] = doc
    return Corpus(docs.values())


def save_documents(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus in canonical form (sorted by id, compact JSON)."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        for doc in corpus:
            obj = {
                "id": doc.id,
                "title": doc.title,
                "abstract": doc.abstract,
                "authors": list(doc.authors),
                "year": doc.year,
                "journal": doc.journal,
            }
            handle.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
            handle.write("\n")


# ---------------------------------------------------------------------------
# Read log
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReadEvent:
    """One logged access. ``doc`` is empty exactly for simple queries (Q)."""

    timestamp_ms: int
    user: str
    doc: str
    access_type: str

    def __post_init__(self):
        if self.access_type not in ACCESS_TYPES:
            raise ValidationError(f"unknown access type {self.access_type!r}")
        if self.access_type == QUERY_CODE:
            if self.doc:
                raise ValidationError("Q events must carry an empty doc id")
        elif not self.doc:
            raise ValidationError(f"{self.access_type} event without a doc id")

    def sort_key(self) -> tuple:
        return (self.timestamp_ms, self.user, self.doc, self.access_type)


class ReadLog:
    """Chronologically sorted access events against a fixed corpus.

    Events that reference unknown documents are quarantined: kept for raw
    entry counts, excluded from every article-level statistic.
    """

    def __init__(self, events: Iterable[ReadEvent], quarantined: Iterable[ReadEvent],
                 corpus_ids: frozenset[str]):
        self.events = tuple(sorted(events, key=ReadEvent.sort_key))
        self.quarantined = tuple(sorted(quarantined, key=ReadEvent.sort_key))
        self.corpus_ids = corpus_ids

    def __len__(self) -> int:
        return len(self.events)

    def all_events(self) -> tuple[ReadEvent, ...]:
        return tuple(sorted(self.events + self.quarantined, key=ReadEvent.sort_key))

    @property
    def max_timestamp_ms(self) -> int | None:
        if not self.events:
            return None
        return self.events[-1].timestamp_ms


def load_read_log(path: str | Path, corpus: Corpus) -> ReadLog:
    """Load a read-log CSV, quarantining events on unknown documents."""
    path = Path(path)
    active: list[ReadEvent] = []
    quarantined: list[ReadEvent] = []
    with path.open(encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(
                    f"expected 4 fields, got {len(row)}", path=str(path), line=lineno
                )
            ts_text, user, doc, code = row
            try:
                ts = parse_timestamp(ts_text)
            except ValueError as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from None
            try:
                event = ReadEvent(timestamp_ms=ts, user=user, doc=doc, access_type=code)
            except ValidationError as exc:
                raise ParseError(exc.message, path=str(path), line=lineno) from None
            if event.access_type != QUERY_CODE and event.doc not in corpus:
                quarantined.append(event)
            else:
                active.append(event)
    return ReadLog(active, quarantined, corpus.ids())


def save_read_log(log: ReadLog, path: str | Path) -> None:
    """Write all events (active and quarantined) in canonical order."""
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for event in log.all_events():
            writer.writerow(
                [format_timestamp(event.timestamp_ms), event.user, event.doc, event.access_type]
            )


# ---------------------------------------------------------------------------
# Synonyms
# ---------------------------------------------------------------------------

class SynonymTable:
    """Groups of interchangeable terms; the first term of a group is canonical."""

    def __init__(self, groups: Iterable[Iterable[str]]):
        frozen: list[tuple[str, ...]] = []
        canonical: dict[str, str] = {}
        for group in groups:
            terms = tuple(dict.fromkeys(t.strip().lower() for t in group if t.strip()))
            if not terms:
                continue
            for term in terms:
                if term in canonical:
                    raise ValidationError(f"term {term!r} appears in more than one synonym group")
                canonical[term] = terms[0]
            frozen.append(terms)
        self.groups = tuple(sorted(frozen, key=lambda g: g[0]))
        self._canonical = canonical

    @classmethod
    def empty(cls) -> "SynonymTable":
        return cls(())

    def canonical(self, term: str) -> str:
        return self._canonical.get(term, term)

    def __len__(self) -> int:
        return len(self.groups)


def load_synonyms(path: str | Path) -> SynonymTable:
    """Load a synonyms file: one comma-separated group per line."""
    path = Path(path)
    groups: list[list[str]] = []
    with path.open(encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text:
                continue
            terms = [t.strip().lower() for t in text.split(",") if t.strip()]
            if not terms:
                continue
            groups.append(terms)
    try:
        return SynonymTable(groups)
    except ValidationError as exc:
        raise ValidationError(exc.message, path=str(path)) from None


def save_synonyms(table: SynonymTable, path: str | Path) -> None:
    """Write synonym groups in canonical form (groups sorted by first term)."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        for group in table.groups:
            handle.write(",".join(group))
            handle.write("\n")


# ---------------------------------------------------------------------------
# Countries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountryRecord:
    """Per-country indicators; ``usage`` is the query count standing in for
    basic-research output."""

    iso: str
    gdp: float
    population: int
    iau_members: int
    culture: str
    usage: int

    def __post_init__(self):
        if len(self.iso) != 2 or not self.iso.isalpha():
            raise ValidationError(f"iso code {self.iso!r} is not a 2-letter code")
        if self.culture not in CULTURES:
            raise ValidationError(
                f"unknown culture {self.culture!r}; allowed: {', '.join(CULTURES)}"
            )
        if self.gdp <= 0:
            raise ValidationError(f"{self.iso}: gdp must be positive")
        if self.population <= 0:
            raise ValidationError(f"{self.iso}: population must be positive")
        if self.iau_members < 0:
            raise ValidationError(f"{self.iso}: iau_members must be non-negative")
        if self.usage < 0:
            raise ValidationError(f"{self.iso}: usage must be non-negative")


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{what} must be an integer, got {text!r}") from None


def load_countries(path: str | Path) -> list[CountryRecord]:
    """Load a countries CSV, rejecting rows that violate record invariants."""
    path = Path(path)
    records: dict[str, CountryRecord] = {}
    with path.open(encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 6:
                raise ParseError(
                    f"expected 6 fields, got {len(row)}", path=str(path), line=lineno
                )
            iso, gdp_text, pop_text, iau_text, culture, usage_text = (f.strip() for f in row)
            try:
                gdp = float(gdp_text)
                population = _parse_int(pop_text, "population")
                iau = _parse_int(iau_text, "iau_members")
                usage = _parse_int(usage_text, "usage")
            except ValueError as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from None
            try:
                record = CountryRecord(
                    iso=iso.upper(), gdp=gdp, population=population,
                    iau_members=iau, culture=culture.lower(), usage=usage,
                )
            except ValidationError as exc:
                raise ValidationError(exc.message, path=str(path), line=lineno) from None
            if record.iso in records:
                raise ValidationError(
                    f"duplicate country {record.iso}", path=str(path), line=lineno
                )
            records[record.iso] = record
    return [records[iso] for iso in sorted(records)]


def _format_float(value: float) -> str:
    return repr(int(value)) if float(value).is_integer() and abs(value) < 1e16 else repr(value)


def save_countries(records: Iterable[CountryRecord], path: str | Path) -> None:
    """Write country records in canonical form (sorted by iso)."""
    ordered = sorted(records, key=lambda r: r.iso)
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for r in ordered:
            writer.writerow(
                [r.iso, _format_float(r.gdp), r.population, r.iau_members, r.culture, r.usage]
            )


# ---------------------------------------------------------------------------
# User -> country resolver
# ---------------------------------------------------------------------------

def load_user_map(path: str | Path) -> dict[str, str]:
    """Load a user-to-iso mapping CSV (``user,iso``)."""
    path = Path(path)
    mapping: dict[str, str] = {}
    with path.open(encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(
                    f"expected 2 fields, got {len(row)}", path=str(path), line=lineno
                )
            user, iso = row[0], row[1].strip().upper()
            if not user:
                raise ParseError("empty user id", path=str(path), line=lineno)
            if len(iso) != 2 or not iso.isalpha():
                raise ParseError(f"bad iso code {row[1]!r}", path=str(path), line=lineno)
            if user in mapping:
                raise ValidationError(
                    f"duplicate user {user!r}", path=str(path), line=lineno
                )
            mapping[user] = iso
    return mapping


def save_user_map(mapping: Mapping[str, str], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for user in sorted(mapping):
            writer.writerow([user, mapping[user]])
