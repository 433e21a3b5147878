from __future__ import annotations

import pytest

from bibsearch.corpus import MS_PER_DAY, Corpus, Document, ReadEvent, ReadLog
from bibsearch.errors import NotFoundError, ValidationError
from bibsearch.graph import (
    also_read,
    build_citation_graph,
    build_coread,
    load_citations,
)

from .generators import random_case
from .oracles import oracle_also_read, oracle_read_sets


def make_corpus(*ids):
    return Corpus(
        Document(id=i, title="t", abstract="", authors=(), year=2000, journal="j") for i in ids
    )


def read_log(corpus, events):
    active, quarantined = [], []
    for ts, user, doc, code in events:
        event = ReadEvent(timestamp_ms=ts, user=user, doc=doc, access_type=code)
        (active if code == "Q" or doc in corpus else quarantined).append(event)
    return ReadLog(active, quarantined, corpus.ids())


# ---------------------------------------------------------------------------
# Citation graph
# ---------------------------------------------------------------------------

def test_references_of_sorted():
    graph = build_citation_graph([("x", "b"), ("x", "a")], make_corpus("x", "a", "b"))
    assert graph.references_of("x") == ("a", "b")


def test_references_of_no_edges():
    graph = build_citation_graph([], make_corpus("x"))
    assert graph.references_of("x") == ()


def test_external_cited_id_kept_and_flagged():
    graph = build_citation_graph([("x", "EXT1")], make_corpus("x"))
    assert graph.references_of("x") == ("EXT1",)
    assert graph.is_external("EXT1")
    assert graph.external == frozenset({"EXT1"})


def test_citations_of():
    corpus = make_corpus("x", "y", "a", "b")
    graph = build_citation_graph([("y", "a"), ("x", "a"), ("x", "b")], corpus)
    assert graph.citations_of("a") == ("x", "y")
    assert graph.citations_of("y") == ()
    assert graph.citations_of("b") == ("x",)


def test_citations_of_external_id_is_queryable():
    graph = build_citation_graph([("x", "EXT1")], make_corpus("x"))
    assert graph.citations_of("EXT1") == ("x",)


def test_unknown_doc_raises():
    graph = build_citation_graph([], make_corpus("x"))
    with pytest.raises(NotFoundError):
        graph.references_of("nope")
    with pytest.raises(NotFoundError):
        graph.citations_of("nope")


def test_citing_id_must_exist():
    with pytest.raises(ValidationError):
        build_citation_graph([("ghost", "x")], make_corpus("x"))


def test_self_citation_rejected():
    with pytest.raises(ValidationError):
        build_citation_graph([("x", "x")], make_corpus("x"))


def test_duplicate_pairs_deduplicated_and_counted(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("x,a\nx,a\nx,b\nx,a\n")
    graph = load_citations(path, make_corpus("x", "a", "b"))
    assert graph.references_of("x") == ("a", "b")
    assert graph.duplicates_dropped == 2
    assert graph.edge_count == 2


def test_round_trip_citations(fixtures_dir, tmp_path):
    from bibsearch.corpus import load_documents
    from bibsearch.graph import save_citations

    corpus = load_documents(fixtures_dir / "documents.jsonl")
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    save_citations(load_citations(fixtures_dir / "citations.csv", corpus), first)
    save_citations(load_citations(first, corpus), second)
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize("seed", range(15))
def test_forward_inverse_consistency(seed):
    case = random_case(seed + 800)
    graph = case.graph
    forward_pairs = {(a, b) for a, cited in graph.forward.items() for b in cited}
    inverse_pairs = {(a, b) for b, citers in graph.inverse.items() for a in citers}
    assert forward_pairs == inverse_pairs
    for adjacency in (graph.forward, graph.inverse):
        for ids in adjacency.values():
            assert list(ids) == sorted(set(ids))


# ---------------------------------------------------------------------------
# Co-read index
# ---------------------------------------------------------------------------

T0 = 1_030_000_000_000


def test_coread_collapses_repeat_reads():
    corpus = make_corpus("d1")
    log = read_log(corpus, [(T0, "u1", "d1", "A"), (T0 + 1000, "u1", "d1", "F")])
    coread = build_coread(log, window_days=30, min_readers=1)
    assert coread.readers["d1"] == (("u1", T0 + 1000),)


def test_coread_window_excludes_old_events():
    corpus = make_corpus("d1", "d2")
    log = read_log(
        corpus,
        [(T0, "u1", "d1", "A"), (T0 - 40 * MS_PER_DAY, "u1", "d2", "A")],
    )
    coread = build_coread(log, window_days=30, min_readers=1)
    assert "d2" not in coread.readers
    assert "d1" in coread.readers


def test_coread_window_boundary_is_closed():
    corpus = make_corpus("d1", "d2")
    log = read_log(
        corpus,
        [(T0, "u1", "d1", "A"), (T0 - 30 * MS_PER_DAY, "u2", "d2", "A")],
    )
    coread = build_coread(log, window_days=30, min_readers=1)
    assert "d2" in coread.readers


def test_coread_ignores_navigation_codes():
    corpus = make_corpus("d1")
    log = read_log(corpus, [(T0, "u1", "d1", "R"), (T0, "u2", "d1", "C")])
    coread = build_coread(log, window_days=30, min_readers=1)
    assert coread.readers == {}


def test_coread_empty_log():
    corpus = make_corpus("d1")
    coread = build_coread(read_log(corpus, []), window_days=30, min_readers=1)
    assert coread.window_ms is None
    assert also_read(coread, "d1").entries == ()


# ---------------------------------------------------------------------------
# also_read
# ---------------------------------------------------------------------------

def test_also_read_derived_example():
    corpus = make_corpus("d1", "d2", "d3")
    log = read_log(
        corpus,
        [
            (T0, "u1", "d1", "A"),
            (T0, "u1", "d2", "A"),
            (T0, "u2", "d1", "A"),
            (T0, "u2", "d3", "A"),
            (T0, "u3", "d2", "A"),
        ],
    )
    coread = build_coread(log, window_days=30, min_readers=1)
    result = also_read(coread, "d1", limit=10)
    assert list(result.entries) == [("d2", 1), ("d3", 1)]


def test_also_read_zero_readers_empty():
    corpus = make_corpus("d1", "d2")
    log = read_log(corpus, [(T0, "u1", "d2", "A")])
    coread = build_coread(log, window_days=30, min_readers=1)
    assert also_read(coread, "d1").entries == ()


def test_also_read_unknown_doc():
    corpus = make_corpus("d1")
    coread = build_coread(read_log(corpus, []), window_days=30, min_readers=1)
    with pytest.raises(NotFoundError):
        also_read(coread, "ghost")


def test_also_read_min_readers_filters_candidates():
    corpus = make_corpus("d1", "d2", "d3")
    events = [
        (T0, "u1", "d1", "A"),
        (T0, "u2", "d1", "A"),
        (T0, "u1", "d2", "A"),  # d2 read only by u1 overall
        (T0, "u1", "d3", "A"),
        (T0, "u2", "d3", "A"),  # d3 read by two users
    ]
    log = read_log(corpus, events)
    coread = build_coread(log, window_days=30, min_readers=2)
    result = also_read(coread, "d1", limit=10)
    assert list(result.entries) == [("d3", 2)]


@pytest.mark.parametrize("seed", range(20))
def test_also_read_matches_oracle(seed):
    case = random_case(seed + 900)
    doc_readers, user_docs = oracle_read_sets(case.events, set(case.ids), case.window_days)
    for doc_id in case.rng.sample(case.ids, k=min(5, len(case.ids))):
        result = also_read(case.coread, doc_id, limit=25)
        expected = oracle_also_read(doc_id, doc_readers, user_docs, case.min_readers, limit=25)
        assert list(result.entries) == expected


@pytest.mark.parametrize("seed", range(15))
def test_coread_symmetry_and_score_bound(seed):
    case = random_case(seed + 950)
    doc_readers, _ = oracle_read_sets(case.events, set(case.ids), case.window_days)
    docs = sorted(doc_readers)
    # raw common-reader counts are symmetric
    for a in docs[:10]:
        for b in docs[:10]:
            common_ab = len(doc_readers[a] & doc_readers[b])
            common_ba = len(doc_readers[b] & doc_readers[a])
            assert common_ab == common_ba
    # also_read scores never exceed the reader count of the query doc
    for doc_id in docs[:10]:
        result = also_read(case.coread, doc_id, limit=100)
        for _, score in result.entries:
            assert score <= len(doc_readers[doc_id])


def test_build_coread_rejects_bad_parameters():
    corpus = make_corpus("d1")
    log = read_log(corpus, [])
    with pytest.raises(ValidationError):
        build_coread(log, window_days=0)
    with pytest.raises(ValidationError):
        build_coread(log, min_readers=0)
