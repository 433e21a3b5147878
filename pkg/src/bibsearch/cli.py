"""Command-line client: ingestion, queries, operators, chains, reports, serve.

The CLI drives the same engine layer as the HTTP service and renders the
same response models for ``--format json``, so both surfaces return
identical results for identical requests on the same data generation.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .analytics import (
    ACTIVE_COUNTRY_THRESHOLD,
    bifurcation_report,
    filter_active_countries,
    fit_usage_per_capita,
    fulltext_reads,
    load_access_counts,
    load_share_table,
    load_utility_table,
    predict_research,
    predict_scientists,
    readership_ratio,
    share_report,
    utility_report,
)
from .corpus import load_countries
from .engine import (
    Engine,
    EngineConfig,
    EngineManager,
    SourcePaths,
    ingest,
    resolve_data_dir,
)
from .errors import BibsearchError, InvalidQueryError
from .models import ChainResponse, RankedListModel, RankedResponse
from .retrieval import Query, RankedList
from .secondorder import ChainSpec, OperatorKind, parse_steps


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)


def _write_csv(headers: list[str], rows: list[list[str]]) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)


def _load_engine(args: argparse.Namespace) -> Engine:
    config = EngineConfig.from_file(args.config) if args.config else EngineConfig()
    return Engine.load(resolve_data_dir(args.data), config)


def _ranked_rows(engine: Engine, ranked: RankedList) -> list[list[str]]:
    rows = []
    for rank, (doc_id, score) in enumerate(ranked.entries, start=1):
        doc = engine.corpus.get(doc_id)
        year = str(doc.year) if doc else ""
        title = doc.title if doc else "(external)"
        rows.append([str(rank), f"{score:.4f}", doc_id, year, title])
    return rows


def _emit_ranked(engine: Engine, ranked: RankedList, fmt: str) -> None:
    if fmt == "json":
        model = RankedListModel.from_ranked(ranked, engine.graph.external)
        response = RankedResponse(generation=engine.generation, **model.model_dump())
        print(response.model_dump_json(indent=2))
    elif fmt == "csv":
        rows = [
            [doc_id, repr(float(score)), str(doc_id in engine.graph.external).lower()]
            for doc_id, score in ranked.entries
        ]
        _write_csv(["id", "score", "external"], rows)
    else:
        print(f"{ranked.provenance}: {len(ranked)} results"
              + (" (truncated)" if ranked.truncated else ""))
        if ranked.entries:
            print(_table(["rank", "score", "id", "year", "title"], _ranked_rows(engine, ranked)))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace) -> int:
    config = EngineConfig.from_file(args.config) if args.config else EngineConfig()
    paths = SourcePaths(
        documents=Path(args.docs),
        citations=Path(args.cites),
        reads=Path(args.reads),
        synonyms=Path(args.synonyms) if args.synonyms else None,
        countries=Path(args.countries) if args.countries else None,
        users=Path(args.users) if args.users else None,
        utility=Path(args.utility) if args.utility else None,
    )
    summary = ingest(paths, args.out, config)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    engine = _load_engine(args)
    query = Query(
        title=args.title,
        abstract=args.abstract,
        author=args.author,
        year_min=args.year_min,
        year_max=args.year_max,
        limit=args.limit if args.limit is not None else engine.config.search_limit,
    )
    _emit_ranked(engine, engine.search(query), args.format)
    return 0


def _collect_ids(args: argparse.Namespace) -> list[str]:
    ids: list[str] = []
    for chunk in args.ids or []:
        ids.extend(part.strip() for part in chunk.split(",") if part.strip())
    ids.extend(args.id or [])
    if not ids:
        raise InvalidQueryError("no document ids given")
    return ids


def cmd_similar(args: argparse.Namespace) -> int:
    engine = _load_engine(args)
    ranked = engine.similar(
        _collect_ids(args), year_min=args.year_min, year_max=args.year_max, limit=args.limit
    )
    _emit_ranked(engine, ranked, args.format)
    return 0


def cmd_op(args: argparse.Namespace) -> int:
    engine = _load_engine(args)
    ranked = engine.operator(
        OperatorKind(args.kind),
        _collect_ids(args),
        limit=args.limit,
        include_external=args.include_external,
    )
    _emit_ranked(engine, ranked, args.format)
    return 0


def cmd_chain(args: argparse.Namespace) -> int:
    engine = _load_engine(args)
    if args.seed_text:
        seed: Query | tuple[str, ...] = Query(
            abstract=args.seed_text,
            limit=args.seed_limit if args.seed_limit is not None else engine.config.search_limit,
        )
    elif args.seed_ids:
        seed = tuple(p.strip() for p in args.seed_ids.split(",") if p.strip())
    else:
        raise InvalidQueryError("one of --seed-text or --seed-ids is required")
    spec = ChainSpec(
        seed=seed,
        steps=parse_steps(args.steps),
        year_min=args.year_min,
        year_max=args.year_max,
    )
    result = engine.chain(spec)
    if args.format == "json":
        print(
            ChainResponse.from_result(result, engine.generation, engine.graph.external)
            .model_dump_json(indent=2)
        )
        return 0
    print(f"seed {result.seed.provenance}: {len(result.seed)} docs")
    if args.format == "text":
        print(_table(["rank", "score", "id", "year", "title"], _ranked_rows(engine, result.seed)))
    for number, stage in enumerate(result.stages, start=1):
        status = "empty" if stage.empty else f"{len(stage.result)} docs"
        print(f"stage {number}: {stage.kind.value} (limit {stage.limit}) -> {status}")
        if args.format == "text" and stage.result.entries:
            print(_table(["rank", "score", "id", "year", "title"], _ranked_rows(engine, stage.result)))
    return 0


def cmd_report_utility(args: argparse.Namespace) -> int:
    table = load_utility_table(args.table) if args.table else None
    if args.counts:
        counts = load_access_counts(args.counts)
        report = utility_report(counts, table)
    else:
        engine = _load_engine(args)
        report = engine.utility(table)
        counts = {row.code: row.count for row in report.rows}
    headers = ["code", "count", "minutes", "fte_years"]
    if args.format == "csv":
        rows = [
            [r.code, str(r.count), repr(float(r.minutes)), repr(float(r.fte_years))]
            for r in report.rows
        ]
        rows.append(["total", "", "", repr(float(report.total_fte_years))])
        _write_csv(headers, rows)
    else:
        rows = [
            [r.code, str(r.count), f"{float(r.minutes):g}", f"{float(r.fte_years):.1f}"]
            for r in report.rows
        ]
        print(_table(headers, rows))
        print(f"total research time gained: {float(report.total_fte_years):.1f} FTE-years")
        ratio = readership_ratio(fulltext_reads(counts))
        print(f"full-text reads vs. non-electronic baseline: {ratio:.2f}x")
    return 0


def cmd_report_countries(args: argparse.Namespace) -> int:
    engine = _load_engine(args)
    usage = engine.countries_usage()
    headers = ["iso", "raw_entries", "adjusted_requests"]
    rows = [
        [u.iso, str(u.raw_entries), f"{u.adjusted_requests:g}"] for u in usage.values()
    ]
    if args.format == "csv":
        _write_csv(headers, rows)
    else:
        print(_table(headers, rows))
    return 0


def cmd_report_readership(args: argparse.Namespace) -> int:
    engine = _load_engine(args)
    stats = engine.readership(args.month, args.heavy_threshold)
    headers = ["month", "unique_reads", "users", "heavy_users", "median_heavy", "heavy_share"]
    median = "" if stats.median_heavy is None else f"{stats.median_heavy:g}"
    row = [
        stats.month,
        str(stats.total_unique),
        str(len(stats.counts)),
        str(len(stats.heavy_users)),
        median,
        f"{stats.heavy_share:.4f}",
    ]
    if args.format == "csv":
        _write_csv(headers, [row])
    else:
        print(_table(headers, [row]))
    return 0


def cmd_report_model(args: argparse.Namespace) -> int:
    records = load_countries(args.countries)
    active = filter_active_countries(records, args.active_threshold)
    print(f"countries: {len(records)} loaded, {len(active)} at or above usage {args.active_threshold}")
    if len(active) >= 2:
        fit = fit_usage_per_capita(active)
        print(
            f"per-capita usage vs per-capita gdp: exponent {fit.exponent:.3f}, "
            f"coefficient {fit.coefficient:.3e}, residual rms {fit.residual_rms:.3f} (n={fit.n})"
        )
    report = bifurcation_report(active)
    for culture, split in report.splits.items():
        print(
            f"{culture}: {split.above} above / {split.below} below / "
            f"{split.on_line} on the members = gdp/k line"
        )
    headers = ["iso", "culture", "iau_members", "predicted_scientists", "research_proxy", "side"]
    rows = []
    for record in active:
        scientists = predict_scientists(record)
        rows.append([
            record.iso,
            record.culture,
            str(record.iau_members),
            f"{scientists:.1f}",
            f"{predict_research(record, scientists):.3e}",
            report.sides[record.iso],
        ])
    if args.format == "csv":
        _write_csv(headers, rows)
    else:
        print(_table(headers, rows))
    return 0


def cmd_report_shares(args: argparse.Namespace) -> int:
    report = share_report(load_share_table(args.shares))
    headers = ["country", "reads_pct", "cites_pct", "papers_pct", "mean_cites_papers", "rel_deviation"]
    rows = [
        [
            r.country,
            f"{r.reads_pct:g}",
            f"{r.cites_pct:g}",
            f"{r.papers_pct:g}",
            f"{r.mean_cites_papers:g}",
            f"{r.relative_deviation:+.3f}",
        ]
        for r in report.rows
    ]
    if args.format == "csv":
        _write_csv(headers, rows)
    else:
        print(_table(headers, rows))
        print(f"median absolute deviation: {report.median_abs_deviation:.3f}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    config = EngineConfig.from_file(args.config) if args.config else EngineConfig()
    manager = EngineManager(resolve_data_dir(args.data), config)
    manager.load()
    app = create_app(manager, ui_dir=args.ui)
    port = args.port if args.port is not None else config.port
    uvicorn.run(app, host=args.host, port=port)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", help="data directory (default: $BIBSEARCH_DATA or ./data)")
    parser.add_argument("--config", help="key=value config file")


def _add_format_arg(parser: argparse.ArgumentParser, choices=("text", "csv", "json")) -> None:
    parser.add_argument("--format", choices=choices, default="text")


def _add_id_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ids", action="append", help="comma-separated document ids")
    parser.add_argument("--id", action="append", help="single document id (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bibsearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate sources and build a data directory")
    p.add_argument("--docs", required=True)
    p.add_argument("--cites", required=True)
    p.add_argument("--reads", required=True)
    p.add_argument("--synonyms")
    p.add_argument("--countries")
    p.add_argument("--users")
    p.add_argument("--utility")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("search", help="fielded text search")
    _add_data_args(p)
    p.add_argument("--title")
    p.add_argument("--abstract")
    p.add_argument("--author")
    p.add_argument("--year-min", type=int)
    p.add_argument("--year-max", type=int)
    p.add_argument("--limit", type=int)
    _add_format_arg(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("similar", help="find documents with similar abstracts")
    _add_data_args(p)
    _add_id_args(p)
    p.add_argument("--year-min", type=int)
    p.add_argument("--year-max", type=int)
    p.add_argument("--limit", type=int)
    _add_format_arg(p)
    p.set_defaults(func=cmd_similar)

    p = sub.add_parser("op", help="apply a second-order operator to explicit ids")
    p.add_argument("kind", choices=[k.value for k in OperatorKind])
    _add_data_args(p)
    _add_id_args(p)
    p.add_argument("--limit", type=int)
    p.add_argument("--include-external", action="store_true")
    _add_format_arg(p)
    p.set_defaults(func=cmd_op)

    p = sub.add_parser("chain", help="run a declarative operator chain")
    _add_data_args(p)
    p.add_argument("--seed-text", help="abstract text used to resolve the seed list")
    p.add_argument("--seed-ids", help="comma-separated explicit seed ids")
    p.add_argument("--seed-limit", type=int)
    p.add_argument("--steps", required=True, help="e.g. similar:500,alsoread:500,references:500")
    p.add_argument("--year-min", type=int)
    p.add_argument("--year-max", type=int)
    _add_format_arg(p, choices=("text", "summary", "json"))
    p.set_defaults(func=cmd_chain)

    report = sub.add_parser("report", help="analytics reports")
    rsub = report.add_subparsers(dest="report", required=True)

    p = rsub.add_parser("utility", help="research time gained, by access type")
    _add_data_args(p)
    p.add_argument("--counts", help="code,count CSV instead of the ingested log")
    p.add_argument("--table", help="code,minutes CSV overriding the default utility values")
    _add_format_arg(p, choices=("text", "csv"))
    p.set_defaults(func=cmd_report_utility)

    p = rsub.add_parser("countries", help="per-country raw and adjusted usage")
    _add_data_args(p)
    _add_format_arg(p, choices=("text", "csv"))
    p.set_defaults(func=cmd_report_countries)

    p = rsub.add_parser("readership", help="unique reads and heavy-user statistics")
    _add_data_args(p)
    p.add_argument("--month", required=True, help="YYYY-MM")
    p.add_argument("--heavy-threshold", type=int)
    _add_format_arg(p, choices=("text", "csv"))
    p.set_defaults(func=cmd_report_readership)

    p = rsub.add_parser("model", help="country research model over a countries file")
    p.add_argument("--countries", required=True)
    p.add_argument("--active-threshold", type=int, default=ACTIVE_COUNTRY_THRESHOLD)
    _add_format_arg(p, choices=("text", "csv"))
    p.set_defaults(func=cmd_report_model)

    p = rsub.add_parser("shares", help="reads share vs. citation/publication shares")
    p.add_argument("--shares", required=True, help="country,reads,cites,papers CSV")
    _add_format_arg(p, choices=("text", "csv"))
    p.set_defaults(func=cmd_report_shares)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_data_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int)
    p.add_argument("--ui", help="directory of built UI assets to mount at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BibsearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
