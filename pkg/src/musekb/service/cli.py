"""Command-line pipeline: ingest -> campaign simulate -> moderate -> build-kg
-> query / mine / recommend / export, plus serve.

All artifacts live in a data directory (flag --data-dir, env DATA_DIR):
records.csv, rejected.csv, store.json, annotations.csv, comments.csv,
enriched.csv, moderation_report.csv, graph.triples. Exit codes: 0 success,
1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .. import catalog
from ..analytics import frequent_pairs, recommend, transactions_from_records
from ..campaign import CampaignStore, write_export, read_export
from ..errors import MusekbError
from ..kg import FixtureResolver, build_graph, integrate_external, parse_graph, serialize_graph
from ..moderation import ModerationPolicy, moderate_campaign
from ..query import evaluate_query, parse_query
from ..vocabulary import Category, builtin_vocabularies
from ..fixtures import synthetic_records
from .api import ServiceConfig, create_app, load_state, check_port_available
from .simulate import DEFAULT_SIM_START, SimulationBehavior, simulate_annotators

DEFAULT_CAMPAIGN_ID = "music-enrichment"


def _data_dir(args) -> Path:
    path = Path(args.data_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_records(data_dir: Path, name: str = "records.csv"):
    return catalog.load_dataset(data_dir / name).records


def cmd_synth(args) -> int:
    records = synthetic_records(args.tracks, seed=args.seed)
    catalog.export_enriched(records, args.output)
    print(f"wrote {len(records)} synthetic records to {args.output}")
    return 0


def cmd_ingest(args) -> int:
    data_dir = _data_dir(args)
    result = catalog.load_dataset(args.input)
    for line_no, error in result.errors:
        print(f"row {line_no}: {error.code}: {error.message}", file=sys.stderr)
    policy = catalog.CurationPolicy(max_duration_ms=args.max_duration_ms)
    kept, rejected = catalog.apply_curation(result.records, policy)
    catalog.export_enriched(kept, data_dir / "records.csv")
    with open(data_dir / "rejected.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["europeana_id", "reasons"])
        for rejection in rejected:
            writer.writerow([rejection.record.europeana_id, ";".join(rejection.reasons)])
    print(
        f"ingested {len(result.records)} records: kept {len(kept)}, "
        f"rejected {len(rejected)}, row errors {len(result.errors)}"
    )
    return 0


def cmd_simulate(args) -> int:
    data_dir = _data_dir(args)
    records = _load_records(data_dir)
    start = (
        datetime.fromisoformat(args.campaign_start).astimezone(timezone.utc)
        if args.campaign_start
        else DEFAULT_SIM_START
    )
    store = CampaignStore(clock=lambda: start)
    store.create_campaign(
        DEFAULT_CAMPAIGN_ID,
        title="Music metadata enrichment",
        instructions="Listen to each track, pick fitting tags, vote on others' tags.",
        item_ids=[r.europeana_id for r in records],
        start=start,
        days=args.days,
    )
    behavior = SimulationBehavior(
        items_per_annotator=args.items_per_annotator,
        accuracy=args.accuracy,
        votes_per_annotator=args.votes_per_annotator,
    )
    result = simulate_annotators(store, DEFAULT_CAMPAIGN_ID, args.annotators, args.seed, behavior)
    export = store.export_annotations(DEFAULT_CAMPAIGN_ID)
    write_export(export, data_dir / "annotations.csv", data_dir / "comments.csv")
    store.save(data_dir / "store.json")
    print(result.summary())
    return 0


def cmd_moderate(args) -> int:
    data_dir = _data_dir(args)
    records = _load_records(data_dir)
    export = read_export(data_dir / "annotations.csv", data_dir / "comments.csv")
    policy = ModerationPolicy(
        top_k_emotion_genre=args.top_k,
        min_diff_emotion_genre=args.min_diff,
        min_diff_instruments_exclusive=args.instrument_min_diff,
    )
    enriched, report = moderate_campaign(export, policy, records)
    catalog.export_enriched(enriched, data_dir / "enriched.csv")
    report.write(data_dir / "moderation_report.csv")
    print(report.to_csv(), end="")
    return 0


def cmd_build_kg(args) -> int:
    data_dir = _data_dir(args)
    records = _load_records(data_dir, "enriched.csv")
    graph = build_graph(records)
    if args.facts:
        from ..kg import HAS_COMPOSER

        resolver = FixtureResolver(args.facts)
        composers = sorted({t.object for t in graph.triples(predicate=HAS_COMPOSER)}, key=lambda i: i.value)
        graph, report = integrate_external(graph, resolver, composers)
        for line in report.lines():
            print(line, file=sys.stderr)
    serialize_graph(graph, data_dir / "graph.triples")
    print(f"wrote {len(graph)} triples to {data_dir / 'graph.triples'}")
    return 0


def cmd_query(args) -> int:
    data_dir = _data_dir(args)
    graph = parse_graph(data_dir / "graph.triples")
    if args.file:
        try:
            text = Path(args.file).read_text(encoding="utf-8")
        except OSError as exc:
            raise catalog.FileUnreadable(str(exc)) from None
    else:
        text = args.query
    ast = parse_query(text, graph.prefixes)
    table = evaluate_query(ast, graph)
    print(table.to_csv(), end="")
    return 0


def cmd_mine(args) -> int:
    data_dir = _data_dir(args)
    records = _load_records(data_dir, "enriched.csv")
    transactions = transactions_from_records(records)
    pairs = frequent_pairs(transactions, args.min_support)
    vocabs = builtin_vocabularies()

    def label(term_id: str) -> str:
        for category in Category:
            term = vocabs[category].get(term_id)
            if term is not None:
                return term.label
        return term_id

    print("support,pair")
    for (a, b), support in pairs:
        print(f'{support:.3f},"{label(a)}, {label(b)}"')
    return 0


def cmd_recommend(args) -> int:
    data_dir = _data_dir(args)
    records = _load_records(data_dir, "enriched.csv")
    by_id = {r.europeana_id: r for r in records}
    seed_record = by_id.get(args.seed)
    if seed_record is None:
        from ..campaign import UnknownItem

        raise UnknownItem(f"no record with id {args.seed!r}")
    print("europeana_id,score,title")
    for record, score in recommend(seed_record, records, args.k):
        print(f"{record.europeana_id},{score:.4f},{record.title or ''}")
    return 0


def cmd_export(args) -> int:
    data_dir = _data_dir(args)
    records = _load_records(data_dir, "enriched.csv")
    catalog.export_enriched(records, args.output)
    print(f"wrote {len(records)} enriched records to {args.output}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    data_dir = _data_dir(args)
    config = ServiceConfig(data_dir=data_dir, host=args.host, port=args.port)
    check_port_available(config.host, config.port)
    state = load_state(data_dir)
    app = create_app(state)

    @app.on_event("shutdown")
    def _flush():
        state.store.save(data_dir / "store.json")

    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="musekb", description=__doc__)
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("DATA_DIR", "data"),
        help="pipeline artifact directory (env DATA_DIR)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic raw dataset")
    p.add_argument("--tracks", type=int, default=854)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="load, curate and normalize a raw dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--max-duration-ms", type=int, default=360_000)
    p.set_defaults(func=cmd_ingest)

    p_campaign = sub.add_parser("campaign", help="campaign operations")
    campaign_sub = p_campaign.add_subparsers(dest="campaign_command", required=True)
    p = campaign_sub.add_parser("simulate", help="run synthetic annotators over the records")
    p.add_argument("--annotators", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--campaign-start", default=None, help="ISO timestamp (default fixed)")
    p.add_argument("--days", type=int, default=18)
    p.add_argument("--items-per-annotator", type=int, default=80)
    p.add_argument("--accuracy", type=float, default=0.8)
    p.add_argument("--votes-per-annotator", type=int, default=500)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moderate", help="filter raw annotations into enriched records")
    p.add_argument("--top-k", type=int, default=2)
    p.add_argument("--min-diff", type=int, default=2)
    p.add_argument("--instrument-min-diff", type=int, default=5)
    p.set_defaults(func=cmd_moderate)

    p = sub.add_parser("build-kg", help="compile enriched records into a triple graph")
    p.add_argument("--facts", default=None, help="external facts fixture (entity,predicate,object)")
    p.set_defaults(func=cmd_build_kg)

    p = sub.add_parser("query", help="evaluate a graph-pattern query")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("-f", "--file", help="query file")
    group.add_argument("-q", "--query", help="query text")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("mine", help="mine frequent tag pairs")
    p.add_argument("--min-support", type=float, required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("recommend", help="recommend tracks similar to a seed track")
    p.add_argument("--seed", required=True, help="seed track europeana id")
    p.add_argument("-k", type=int, default=10)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("export", help="write the final enriched open dataset")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("PORT", "8080")))
    p.set_defaults(func=cmd_serve)

    return parser


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MusekbError as exc:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[IOError]: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
