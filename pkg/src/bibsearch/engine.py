"""Engine assembly: configuration, ingestion, snapshot persistence, and the
atomic-swap manager shared by the HTTP service and the CLI.

A data directory holds the canonical source files plus a line-delimited
snapshot of the built postings and adjacency. The snapshot is a cache: it
carries content hashes of its sources and is ignored (and rebuilt) whenever
they do not match, so rebuilding from source is always possible.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, fields
from pathlib import Path

from .analytics import (
    CountryUsage,
    MonthlyUserStats,
    UtilityReport,
    UtilityTable,
    count_access_types,
    country_usage,
    load_utility_table,
    unique_reads,
    user_month_stats,
    utility_report,
)
from .corpus import (
    Corpus,
    CountryRecord,
    Document,
    ReadLog,
    SynonymTable,
    load_countries,
    load_documents,
    load_read_log,
    load_synonyms,
    load_user_map,
    save_countries,
    save_documents,
    save_read_log,
    save_synonyms,
    save_user_map,
)
from .errors import ConflictError, ValidationError
from .graph import (
    CitationGraph,
    CoReadIndex,
    build_coread,
    load_citations,
    save_citations,
)
from .retrieval import (
    InvertedIndex,
    Query,
    RankedList,
    build_index,
    find_similar,
    search,
)
from .secondorder import (
    ChainResult,
    ChainSpec,
    OperatorKind,
    op_alsoread,
    op_citations,
    op_references,
    run_chain,
)

DATA_ENV_VAR = "BIBSEARCH_DATA"

DOCUMENTS_FILE = "documents.jsonl"
CITATIONS_FILE = "citations.csv"
READS_FILE = "reads.csv"
SYNONYMS_FILE = "synonyms.txt"
COUNTRIES_FILE = "countries.csv"
USERS_FILE = "users.csv"
UTILITY_FILE = "utility.csv"
MANIFEST_FILE = "manifest.json"
SNAPSHOT_DIR = "snapshot"


@dataclass(frozen=True)
class EngineConfig:
    """Flat runtime configuration (key=value file, all integer-valued)."""

    window_days: int = 180
    min_readers: int = 2
    search_limit: int = 200
    operator_limit: int = 500
    heavy_threshold: int = 10
    active_threshold: int = 1737
    port: int = 8000

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        known = {f.name for f in fields(cls)}
        values: dict[str, int] = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in known:
                raise ValidationError(f"unknown config line {raw!r}", path=str(path), line=lineno)
            try:
                values[key] = int(value.strip())
            except ValueError:
                raise ValidationError(
                    f"config value for {key} must be an integer", path=str(path), line=lineno
                ) from None
        return cls(**values)


def resolve_data_dir(explicit: str | None = None) -> Path:
    """Data directory: explicit flag, else the environment override, else ./data."""
    if explicit:
        return Path(explicit)
    env = os.environ.get(DATA_ENV_VAR)
    return Path(env) if env else Path("data")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass(frozen=True)
class SourcePaths:
    documents: Path
    citations: Path
    reads: Path
    synonyms: Path | None = None
    countries: Path | None = None
    users: Path | None = None
    utility: Path | None = None

    @classmethod
    def in_dir(cls, data_dir: Path) -> "SourcePaths":
        def optional(name: str) -> Path | None:
            candidate = data_dir / name
            return candidate if candidate.exists() else None

        return cls(
            documents=data_dir / DOCUMENTS_FILE,
            citations=data_dir / CITATIONS_FILE,
            reads=data_dir / READS_FILE,
            synonyms=optional(SYNONYMS_FILE),
            countries=optional(COUNTRIES_FILE),
            users=optional(USERS_FILE),
            utility=optional(UTILITY_FILE),
        )


class Engine:
    """One immutable generation of loaded data plus every query operation.

    Queries never mutate state; swapping generations is the manager's job.
    """

    def __init__(
        self,
        *,
        generation: int,
        config: EngineConfig,
        corpus: Corpus,
        synonyms: SynonymTable,
        index: InvertedIndex,
        graph: CitationGraph,
        read_log: ReadLog,
        coread: CoReadIndex,
        countries: list[CountryRecord],
        user_map: dict[str, str],
        utility_table: UtilityTable,
        summary: dict,
    ):
        self.generation = generation
        self.config = config
        self.corpus = corpus
        self.synonyms = synonyms
        self.index = index
        self.graph = graph
        self.read_log = read_log
        self.coread = coread
        self.countries = countries
        self.user_map = user_map
        self.utility_table = utility_table
        self.summary = summary

    # -- construction -------------------------------------------------------

    @classmethod
    def from_sources(
        cls,
        paths: SourcePaths,
        config: EngineConfig | None = None,
        generation: int = 1,
        prebuilt: tuple[InvertedIndex, CitationGraph, CoReadIndex] | None = None,
    ) -> "Engine":
        config = config or EngineConfig()
        missing = [
            str(p) for p in (paths.documents, paths.citations, paths.reads) if not p.exists()
        ]
        if missing:
            raise ValidationError(f"missing data files: {', '.join(missing)}")
        corpus = load_documents(paths.documents)
        synonyms = load_synonyms(paths.synonyms) if paths.synonyms else SynonymTable.empty()
        read_log = load_read_log(paths.reads, corpus)
        countries = load_countries(paths.countries) if paths.countries else []
        user_map = load_user_map(paths.users) if paths.users else {}
        utility_table = load_utility_table(paths.utility) if paths.utility else UtilityTable.default()
        if prebuilt is not None:
            index, graph, coread = prebuilt
        else:
            index = build_index(corpus, synonyms)
            graph = load_citations(paths.citations, corpus)
            coread = build_coread(read_log, config.window_days, config.min_readers)
        summary = {
            "documents": len(corpus),
            "citation_edges": graph.edge_count,
            "duplicate_citation_pairs": graph.duplicates_dropped,
            "external_cited_ids": sorted(graph.external),
            "read_events": len(read_log.events),
            "quarantined_events": len(read_log.quarantined),
            "countries": len(countries),
            "users_mapped": len(user_map),
        }
        return cls(
            generation=generation,
            config=config,
            corpus=corpus,
            synonyms=synonyms,
            index=index,
            graph=graph,
            read_log=read_log,
            coread=coread,
            countries=countries,
            user_map=user_map,
            utility_table=utility_table,
            summary=summary,
        )

    @classmethod
    def load(
        cls,
        data_dir: str | Path,
        config: EngineConfig | None = None,
        generation: int = 1,
        use_snapshot: bool = True,
    ) -> "Engine":
        data_dir = Path(data_dir)
        config = config or EngineConfig()
        paths = SourcePaths.in_dir(data_dir)
        prebuilt = None
        if use_snapshot:
            prebuilt = _try_load_snapshot(data_dir, paths, config)
        return cls.from_sources(paths, config, generation=generation, prebuilt=prebuilt)

    # -- query surface -------------------------------------------------------

    def document(self, doc_id: str) -> Document:
        return self.corpus[doc_id]

    def search(self, query: Query) -> RankedList:
        return search(self.index, query)

    def similar(
        self,
        seed_ids: list[str],
        year_min: int | None = None,
        year_max: int | None = None,
        limit: int | None = None,
    ) -> RankedList:
        return find_similar(
            self.corpus,
            self.index,
            seed_ids,
            year_min=year_min,
            year_max=year_max,
            limit=limit if limit is not None else self.config.operator_limit,
        )

    def operator(
        self,
        kind: OperatorKind,
        ids: list[str],
        limit: int | None = None,
        include_external: bool = False,
    ) -> RankedList:
        limit = limit if limit is not None else self.config.operator_limit
        input_list = RankedList.from_ids(ids, "input(ids)")
        if kind is OperatorKind.REFERENCES:
            return op_references(input_list, self.graph, limit, include_external)
        if kind is OperatorKind.CITATIONS:
            return op_citations(input_list, self.graph, limit)
        if kind is OperatorKind.ALSO_READ:
            return op_alsoread(input_list, self.coread, limit)
        return self.similar(list(ids), limit=limit)

    def chain(self, spec: ChainSpec) -> ChainResult:
        return run_chain(
            spec, corpus=self.corpus, index=self.index, graph=self.graph, coread=self.coread
        )

    # -- analytics surface ---------------------------------------------------

    def utility(self, table: UtilityTable | None = None) -> UtilityReport:
        counts = count_access_types(self.read_log)
        return utility_report(counts, table or self.utility_table)

    def countries_usage(self) -> dict[str, CountryUsage]:
        return country_usage(self.read_log, self.user_map)

    def readership(self, month: str, heavy_threshold: int | None = None) -> MonthlyUserStats:
        threshold = heavy_threshold if heavy_threshold is not None else self.config.heavy_threshold
        return user_month_stats(self.read_log, month, threshold)

    def unique_reads(self, month: str) -> int:
        return unique_reads(self.read_log, month)


# ---------------------------------------------------------------------------
# Ingestion and snapshotting
# ---------------------------------------------------------------------------

def ingest(paths: SourcePaths, out_dir: str | Path, config: EngineConfig | None = None) -> dict:
    """Validate sources, write their canonical forms plus a built snapshot
    into ``out_dir``, and return the load summary."""
    config = config or EngineConfig()
    engine = Engine.from_sources(paths, config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_documents(engine.corpus, out_dir / DOCUMENTS_FILE)
    save_citations(engine.graph, out_dir / CITATIONS_FILE)
    save_read_log(engine.read_log, out_dir / READS_FILE)
    if engine.synonyms.groups:
        save_synonyms(engine.synonyms, out_dir / SYNONYMS_FILE)
    if engine.countries:
        save_countries(engine.countries, out_dir / COUNTRIES_FILE)
    if engine.user_map:
        save_user_map(engine.user_map, out_dir / USERS_FILE)
    if paths.utility:
        (out_dir / UTILITY_FILE).write_bytes(Path(paths.utility).read_bytes())
    _write_snapshot(out_dir, engine, config)
    manifest = dict(engine.summary)
    (out_dir / MANIFEST_FILE).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest


def _source_hashes(data_dir: Path) -> dict[str, str]:
    hashes = {}
    for name in (DOCUMENTS_FILE, CITATIONS_FILE, READS_FILE, SYNONYMS_FILE):
        path = data_dir / name
        if path.exists():
            hashes[name] = _sha256(path)
    return hashes


def _write_snapshot(data_dir: Path, engine: Engine, config: EngineConfig) -> None:
    snap = data_dir / SNAPSHOT_DIR
    snap.mkdir(parents=True, exist_ok=True)

    with (snap / "postings.jsonl").open("w", encoding="utf-8", newline="\n") as handle:
        for field in sorted(engine.index.postings):
            for term, plist in engine.index.postings[field].items():
                record = {"field": field, "term": term, "postings": [[d, tf] for d, tf in plist]}
                handle.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")

    with (snap / "lengths.jsonl").open("w", encoding="utf-8", newline="\n") as handle:
        for field in sorted(engine.index.field_lengths):
            for doc, length in sorted(engine.index.field_lengths[field].items()):
                record = {"field": field, "doc": doc, "length": length}
                handle.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")

    with (snap / "forward.jsonl").open("w", encoding="utf-8", newline="\n") as handle:
        for doc in sorted(engine.graph.forward):
            record = {"doc": doc, "cites": list(engine.graph.forward[doc])}
            handle.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")

    with (snap / "coread.jsonl").open("w", encoding="utf-8", newline="\n") as handle:
        for doc in sorted(engine.coread.readers):
            record = {"doc": doc, "readers": [[u, ts] for u, ts in engine.coread.readers[doc]]}
            handle.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")

    meta = {
        "hashes": _source_hashes(data_dir),
        "window_days": config.window_days,
        "min_readers": config.min_readers,
        "duplicates_dropped": engine.graph.duplicates_dropped,
        "external": sorted(engine.graph.external),
        "window_ms": list(engine.coread.window_ms) if engine.coread.window_ms else None,
    }
    (snap / "meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _try_load_snapshot(
    data_dir: Path, paths: SourcePaths, config: EngineConfig
) -> tuple[InvertedIndex, CitationGraph, CoReadIndex] | None:
    """Load built structures when the snapshot matches the sources; else None."""
    snap = data_dir / SNAPSHOT_DIR
    meta_path = snap / "meta.json"
    if not meta_path.exists():
        return None
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return None
    if meta.get("hashes") != _source_hashes(data_dir):
        return None
    if meta.get("window_days") != config.window_days or meta.get("min_readers") != config.min_readers:
        return None

    corpus = load_documents(paths.documents)
    synonyms = load_synonyms(paths.synonyms) if paths.synonyms else SynonymTable.empty()

    postings: dict[str, dict[str, tuple[tuple[str, int], ...]]] = {}
    for line in (snap / "postings.jsonl").read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        field_postings = postings.setdefault(record["field"], {})
        field_postings[record["term"]] = tuple((d, tf) for d, tf in record["postings"])
    lengths: dict[str, dict[str, int]] = {}
    for line in (snap / "lengths.jsonl").read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        lengths.setdefault(record["field"], {})[record["doc"]] = record["length"]
    years = {doc.id: doc.year for doc in corpus}
    index = InvertedIndex(len(corpus), postings, lengths, years, synonyms)

    forward: dict[str, tuple[str, ...]] = {}
    for line in (snap / "forward.jsonl").read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        forward[record["doc"]] = tuple(record["cites"])
    graph = CitationGraph(
        forward,
        frozenset(meta.get("external", [])),
        corpus.ids(),
        meta.get("duplicates_dropped", 0),
    )

    readers: dict[str, tuple[tuple[str, int], ...]] = {}
    for line in (snap / "coread.jsonl").read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        readers[record["doc"]] = tuple((u, ts) for u, ts in record["readers"])
    window = tuple(meta["window_ms"]) if meta.get("window_ms") else None
    coread = CoReadIndex(readers, corpus.ids(), config.min_readers, window)

    return index, graph, coread


class EngineManager:
    """Owns the live engine generation.

    Reads grab the current reference without locking; reloads build the next
    generation under an exclusive lock and swap the reference atomically, so
    in-flight queries finish against the generation they started with.
    """

    def __init__(self, data_dir: str | Path, config: EngineConfig | None = None):
        self.data_dir = Path(data_dir)
        self.config = config or EngineConfig()
        self._engine: Engine | None = None
        self._swap_lock = threading.Lock()

    @property
    def engine(self) -> Engine:
        engine = self._engine
        if engine is None:
            raise ConflictError("no data loaded yet")
        return engine

    def load(self, use_snapshot: bool = True) -> Engine:
        with self._swap_lock:
            next_generation = self._engine.generation + 1 if self._engine else 1
            engine = Engine.load(
                self.data_dir, self.config, generation=next_generation, use_snapshot=use_snapshot
            )
            self._engine = engine
            return engine

    def reload(self) -> Engine:
        return self.load()
