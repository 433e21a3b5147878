"""Independent brute-force oracles.

Everything here recomputes expected results straight from raw inputs (plain
dict documents, citation pairs, event tuples) with its own tokenizer and its
own set arithmetic, never touching the package's index, graph, or co-read
structures. Score accumulation follows the same fixed order as the engine
(query-term order within a field, then title/abstract/author), so comparisons
can demand bit-identical floats.
"""

from __future__ import annotations

import math
import re

FIELDS = ("title", "abstract", "author")
READ_CODES = {"A", "E", "F", "G"}
MS_PER_DAY = 86_400_000


def synonym_canon(groups):
    return {term: group[0] for group in groups for term in group}


def oracle_tokens(text, canon):
    out = []
    for tok in re.findall(r"[a-z0-9]+", text.lower()):
        if len(tok) >= 2:
            out.append(canon.get(tok, tok))
    return out


def _field_text(doc, field):
    if field == "author":
        return " ".join(a.split(",", 1)[0] for a in doc["authors"])
    return doc[field]


def _dedup(tokens):
    return list(dict.fromkeys(tokens))


def oracle_search(docs, groups, query_fields, year_min=None, year_max=None, limit=200):
    """Score every document directly from raw text with the pinned formula."""
    canon = synonym_canon(groups)
    n = len(docs)
    doc_tokens = {
        f: {d["id"]: oracle_tokens(_field_text(d, f), canon) for d in docs} for f in FIELDS
    }
    df = {f: {} for f in FIELDS}
    for f in FIELDS:
        for d in docs:
            for term in set(doc_tokens[f][d["id"]]):
                df[f][term] = df[f].get(term, 0) + 1
    query_terms = {
        f: _dedup(oracle_tokens(text, canon))
        for f, text in query_fields.items()
        if text
    }
    scores = {}
    for d in docs:
        if year_min is not None and d["year"] < year_min:
            continue
        if year_max is not None and d["year"] > year_max:
            continue
        total = 0.0
        matched = False
        for f in FIELDS:
            terms = query_terms.get(f)
            if not terms:
                continue
            tokens = doc_tokens[f][d["id"]]
            s = 0.0
            for term in terms:
                tf = tokens.count(term)
                if tf == 0:
                    continue
                s += math.log(1 + n / df[f][term]) * (1 + math.log(tf))
            if s:
                matched = True
                total += s / math.log(1 + len(tokens))
        if matched:
            scores[d["id"]] = total
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered[:limit]


def oracle_find_similar(docs, groups, seed_ids, year_min=None, year_max=None, limit=500):
    canon = synonym_canon(groups)
    by_id = {d["id"]: d for d in docs}
    seeds = _dedup(seed_ids)
    text = " ".join(by_id[s]["abstract"] for s in seeds)
    ordered = oracle_search(
        docs, groups, {"abstract": text}, year_min=year_min, year_max=year_max, limit=len(docs)
    )
    ordered = [(doc_id, score) for doc_id, score in ordered if doc_id not in seeds]
    return ordered[:limit]


# ---------------------------------------------------------------------------
# Citation operators
# ---------------------------------------------------------------------------

def reference_sets(pairs):
    refs = {}
    for citing, cited in pairs:
        refs.setdefault(citing, set()).add(cited)
    return refs


def _ranked(counts, limit):
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(doc, float(n)) for doc, n in ordered[:limit]]


def oracle_op_references(input_ids, pairs, corpus_ids, limit=500, include_external=False):
    refs = reference_sets(pairs)
    inputs = _dedup(input_ids)
    candidates = set()
    for d in inputs:
        candidates |= refs.get(d, set())
    if not include_external:
        candidates &= set(corpus_ids)
    counts = {}
    for c in candidates:
        counts[c] = sum(1 for d in inputs if c in refs.get(d, set()))
    return _ranked(counts, limit)


def oracle_op_citations(input_ids, pairs, limit=500):
    refs = reference_sets(pairs)
    inputs = set(_dedup(input_ids))
    counts = {}
    for citing, cited in refs.items():
        overlap = len(cited & inputs)
        if overlap:
            counts[citing] = overlap
    return _ranked(counts, limit)


# ---------------------------------------------------------------------------
# Co-read
# ---------------------------------------------------------------------------

def oracle_read_sets(events, corpus_ids, window_days):
    """(doc -> readers, user -> docs) from raw (ts, user, doc, code) tuples."""
    active = [e for e in events if e[3] == "Q" or e[2] in corpus_ids]
    if not active:
        return {}, {}
    end = max(e[0] for e in active)
    start = end - window_days * MS_PER_DAY
    doc_readers = {}
    user_docs = {}
    for ts, user, doc, code in active:
        if code not in READ_CODES or ts < start:
            continue
        doc_readers.setdefault(doc, set()).add(user)
        user_docs.setdefault(user, set()).add(doc)
    return doc_readers, user_docs


def oracle_also_read(doc_id, doc_readers, user_docs, min_readers, limit=500):
    counts = {}
    for user in doc_readers.get(doc_id, set()):
        for candidate in user_docs[user]:
            if candidate == doc_id:
                continue
            counts[candidate] = counts.get(candidate, 0) + 1
    counts = {
        c: n for c, n in counts.items() if len(doc_readers.get(c, set())) >= min_readers
    }
    return _ranked(counts, limit)


def oracle_op_alsoread(input_ids, doc_readers, user_docs, limit=500):
    inputs = set(_dedup(input_ids))
    pooled = set()
    for d in inputs:
        pooled |= doc_readers.get(d, set())
    counts = {}
    for user in pooled:
        for candidate in user_docs[user]:
            if candidate in inputs:
                continue
            counts[candidate] = counts.get(candidate, 0) + 1
    return _ranked(counts, limit)
