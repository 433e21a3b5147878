from __future__ import annotations

import json

import pytest

from bibsearch.engine import (
    Engine,
    EngineConfig,
    EngineManager,
    SourcePaths,
    ingest,
    resolve_data_dir,
)
from bibsearch.errors import ConflictError, ValidationError
from bibsearch.retrieval import Query
from bibsearch.secondorder import ChainSpec, ChainStep, OperatorKind


def test_config_from_file(tmp_path):
    path = tmp_path / "config.txt"
    path.write_text("window_days=90\nmin_readers = 3  # trailing comment\n\n# comment\nport=9001\n")
    config = EngineConfig.from_file(path)
    assert config.window_days == 90
    assert config.min_readers == 3
    assert config.port == 9001
    assert config.search_limit == 200  # default untouched


def test_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "config.txt"
    path.write_text("window=90\n")
    with pytest.raises(ValidationError):
        EngineConfig.from_file(path)


def test_config_rejects_non_integer(tmp_path):
    path = tmp_path / "config.txt"
    path.write_text("window_days=ninety\n")
    with pytest.raises(ValidationError):
        EngineConfig.from_file(path)


def test_resolve_data_dir_precedence(monkeypatch):
    monkeypatch.delenv("BIBSEARCH_DATA", raising=False)
    assert str(resolve_data_dir(None)) == "data"
    monkeypatch.setenv("BIBSEARCH_DATA", "/somewhere/else")
    assert str(resolve_data_dir(None)) == "/somewhere/else"
    assert str(resolve_data_dir("explicit")) == "explicit"


def test_missing_sources_error_lists_files(tmp_path):
    with pytest.raises(ValidationError) as excinfo:
        Engine.from_sources(SourcePaths.in_dir(tmp_path))
    message = str(excinfo.value)
    assert "documents.jsonl" in message
    assert "citations.csv" in message
    assert "reads.csv" in message


def test_ingest_writes_canonical_files_and_manifest(fixtures_dir, tmp_path):
    out = tmp_path / "data"
    summary = ingest(SourcePaths.in_dir(fixtures_dir), out)
    for name in ("documents.jsonl", "citations.csv", "reads.csv", "synonyms.txt",
                 "countries.csv", "users.csv", "manifest.json"):
        assert (out / name).exists(), name
    assert (out / "snapshot" / "postings.jsonl").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest == summary
    assert manifest["documents"] == 18
    # every external cited id reported exactly once
    assert manifest["external_cited_ids"] == ["EXT-1970-117", "EXT-1987-042"]
    assert manifest["quarantined_events"] == 2


def _engines_equal(a: Engine, b: Engine) -> None:
    assert a.index.postings == b.index.postings
    assert a.index.field_lengths == b.index.field_lengths
    assert a.graph.forward == b.graph.forward
    assert a.graph.inverse == b.graph.inverse
    assert a.graph.external == b.graph.external
    assert a.coread.readers == b.coread.readers
    assert a.coread.window_ms == b.coread.window_ms
    query = Query(abstract="supernova distance universe", limit=10)
    assert a.search(query).entries == b.search(query).entries
    spec = ChainSpec(
        seed=("sn1998a",),
        steps=(ChainStep(OperatorKind.SIMILAR, 50), ChainStep(OperatorKind.REFERENCES, 50)),
    )
    assert a.chain(spec) == b.chain(spec)


def test_snapshot_load_equals_rebuild(fixtures_dir, tmp_path):
    out = tmp_path / "data"
    ingest(SourcePaths.in_dir(fixtures_dir), out)
    from_snapshot = Engine.load(out, use_snapshot=True)
    rebuilt = Engine.load(out, use_snapshot=False)
    _engines_equal(from_snapshot, rebuilt)


def test_stale_snapshot_is_rebuilt(fixtures_dir, tmp_path):
    out = tmp_path / "data"
    ingest(SourcePaths.in_dir(fixtures_dir), out)
    docs_path = out / "documents.jsonl"
    extra = {
        "id": "zz-new-doc", "title": "Fresh Entry", "abstract": "fresh words",
        "authors": [], "year": 2003, "journal": "AJ",
    }
    docs_path.write_text(docs_path.read_text() + json.dumps(extra) + "\n")
    engine = Engine.load(out, use_snapshot=True)
    assert "zz-new-doc" in engine.corpus
    assert engine.index.n_docs == 19


def test_snapshot_ignored_when_config_differs(fixtures_dir, tmp_path):
    out = tmp_path / "data"
    ingest(SourcePaths.in_dir(fixtures_dir), out, EngineConfig(window_days=180))
    narrow = Engine.load(out, EngineConfig(window_days=30), use_snapshot=True)
    wide = Engine.load(out, EngineConfig(window_days=180), use_snapshot=True)
    assert narrow.coread.window_ms != wide.coread.window_ms


def test_manager_generation_bumps_on_reload(fixtures_dir, tmp_path):
    out = tmp_path / "data"
    ingest(SourcePaths.in_dir(fixtures_dir), out)
    manager = EngineManager(out)
    with pytest.raises(ConflictError):
        manager.engine
    first = manager.load()
    assert first.generation == 1
    second = manager.reload()
    assert second.generation == 2
    assert manager.engine is second


def test_inflight_reference_survives_swap(fixtures_dir, tmp_path):
    # a handler that grabbed the engine keeps its generation through a reload
    out = tmp_path / "data"
    ingest(SourcePaths.in_dir(fixtures_dir), out)
    manager = EngineManager(out)
    old = manager.load()
    query = Query(abstract="supernova distance", limit=5)
    before = old.search(query).entries
    manager.reload()
    assert old.generation == 1
    assert manager.engine.generation == 2
    assert old.search(query).entries == before


def test_engine_operator_dispatch(fixture_engine):
    refs = fixture_engine.operator(OperatorKind.REFERENCES, ["sn1998a"], limit=10)
    assert refs.entries
    cites = fixture_engine.operator(OperatorKind.CITATIONS, ["m1993a"], limit=10)
    assert cites.entries
    also = fixture_engine.operator(OperatorKind.ALSO_READ, ["sn1998a"], limit=10)
    assert also.entries
    sim = fixture_engine.operator(OperatorKind.SIMILAR, ["sn1998a"], limit=10)
    assert sim.entries


def test_engine_analytics_surface(fixture_engine):
    report = fixture_engine.utility()
    assert float(report.total_fte_years) > 0
    usage = fixture_engine.countries_usage()
    assert usage["ZZ"].raw_entries == 1  # the unmapped u99 query
    stats = fixture_engine.readership("2002-12", heavy_threshold=2)
    assert stats.total_unique == 9
    assert fixture_engine.unique_reads("2002-12") == 9
