"""Command-line interface for headless use.

Subcommands: serve, ingest, embed, sparql, diff, query, export.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .diffing import diff_graphs, diff_instances
from .embeddings import HttpEmbedder, MockEmbedder, VectorStore, build_embedding_index
from .errors import ProtoQueryError
from .graph import PrototypeGraph
from .localstore import TripleStore, eval_local
from .ontology import Ontology, ingest_ontology
from .overview import ChartParams, build_chart, build_overlay, export_csv
from .results import to_instance_graphs
from .sparqlgen import generate_count, generate_select


def _detect_format(path: str, override: str | None) -> str:
    if override:
        return override
    return "ntriples" if path.endswith(".nt") else "turtle"


def _load_ontology(path: str, format: str | None) -> Ontology:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        return Ontology.from_json(json.loads(text))
    return ingest_ontology(text, _detect_format(path, format))


def _load_graph(path: str, ontology: Ontology) -> PrototypeGraph:
    return PrototypeGraph.deserialize(Path(path).read_text(encoding="utf-8"), ontology)


def _print_table(table, csv_mode: bool, out=None) -> None:
    out = out or sys.stdout
    if csv_mode:
        out.write(export_csv(table))
        return
    widths = [len(c) for c in table.columns]
    rendered = []
    for row in table.rows:
        cells = ["" if c is None else c.value for c in row]
        rendered.append(cells)
        widths = [max(w, len(c)) for w, c in zip(widths, cells)]
    out.write("  ".join(c.ljust(w) for c, w in zip(table.columns, widths)).rstrip() + "\n")
    out.write("  ".join("-" * w for w in widths) + "\n")
    for cells in rendered:
        out.write("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip() + "\n")


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_ingest(args) -> int:
    ontology = _load_ontology(args.ontology, args.format)
    print(f"classes:    {len(ontology.classes)}")
    print(f"links:      {len(ontology.links)}")
    print(f"properties: {len(ontology.properties)}")
    print(f"warnings:   {len(ontology.warnings)}")
    for warning in ontology.warnings:
        print(f"  - {warning}")
    if args.out:
        Path(args.out).write_text(
            json.dumps(ontology.to_json(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        print(f"wrote canonical schema to {args.out}")
    return 0


def cmd_embed(args) -> int:
    ontology = _load_ontology(args.ontology, args.format)
    if args.url:
        embedder = HttpEmbedder(args.url, args.model or "")
    else:
        embedder = MockEmbedder(args.dimension)
    store = VectorStore(args.store)
    index = build_embedding_index(ontology, embedder, store)
    print(f"index for ontology {index.ontology_hash[:12]}…: "
          f"{len(index)} entries, dimension {index.dimension}")
    print(f"provider calls this run: {embedder.calls}")
    return 0


def cmd_sparql(args) -> int:
    ontology = _load_ontology(args.ontology, None)
    graph = _load_graph(args.graph, ontology)
    if args.count:
        query = generate_count(graph, ontology, args.expand_subclasses)
    else:
        query = generate_select(graph, ontology, args.limit, args.expand_subclasses)
    sys.stdout.write(query.text)
    return 0


def cmd_diff(args) -> int:
    ontology = _load_ontology(args.ontology, None)
    left = _load_graph(args.left, ontology)
    right = _load_graph(args.right, ontology)
    diff = diff_graphs(left, right)
    if args.json:
        print(json.dumps(diff.to_json(), sort_keys=True, indent=2))
        return 0
    print(f"nodes:      +{len(diff.nodes_added)} -{len(diff.nodes_deleted)} "
          f"({len(diff.nodes_shared)} shared)")
    for nid in sorted(diff.nodes_added):
        print(f"  + node {nid} <{right.nodes[nid].cls}>")
    for nid in sorted(diff.nodes_deleted):
        print(f"  - node {nid} <{left.nodes[nid].cls}>")
    print(f"edges:      +{len(diff.edges_added)} -{len(diff.edges_deleted)} "
          f"({len(diff.edges_shared)} shared)")
    for eid in sorted(diff.edges_added):
        edge = right.edges[eid]
        print(f"  + edge {eid} {edge.tail} -<{edge.link}>-> {edge.head}")
    for eid in sorted(diff.edges_deleted):
        edge = left.edges[eid]
        print(f"  - edge {eid} {edge.tail} -<{edge.link}>-> {edge.head}")
    print(f"subqueries: +{len(diff.subqueries_added)} -{len(diff.subqueries_deleted)} "
          f"({len(diff.subqueries_shared)} shared, {len(diff.subqueries_changed)} changed)")
    for sid in sorted(diff.subqueries_added):
        sq = right.subqueries[sid]
        print(f"  + subquery {sid} node {sq.node} <{sq.property}> {sq.kind}")
    for sid in sorted(diff.subqueries_deleted):
        sq = left.subqueries[sid]
        print(f"  - subquery {sid} node {sq.node} <{sq.property}> {sq.kind}")
    for sid in sorted(diff.subqueries_changed):
        print(f"  ~ subquery {sid} condition changed")
    return 0


def _run_table(args, graph, ontology):
    if args.local:
        store = TripleStore.from_file(args.local)
        return eval_local(store, graph, ontology, args.limit)
    if args.endpoint:
        from . import client

        query = generate_select(graph, ontology, args.limit, args.expand_subclasses)
        return client.execute(args.endpoint, query)
    raise ProtoQueryError("need --local DATA or --endpoint URL")


def cmd_query(args) -> int:
    ontology = _load_ontology(args.ontology, None)
    graph = _load_graph(args.graph, ontology)
    table = _run_table(args, graph, ontology)
    _print_table(table, args.csv)
    print(f"({len(table.rows)} rows)", file=sys.stderr)
    return 0


def cmd_export(args) -> int:
    ontology = _load_ontology(args.ontology, None)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        if args.kind == "results":
            graph = _load_graph(args.graph, ontology)
            table = _run_table(args, graph, ontology)
            out.write(export_csv(table))
        elif args.kind == "instance_diff":
            left = _load_graph(args.left, ontology)
            right = _load_graph(args.right, ontology)
            left_table = _run_table(args, left, ontology)
            right_table = _run_table(args, right, ontology)
            shared = diff_graphs(left, right).nodes_shared
            diff = diff_instances(
                to_instance_graphs(left_table, left),
                to_instance_graphs(right_table, right),
                shared,
            )
            out.write(export_csv(diff))
        elif args.kind == "chart":
            selected = [int(v) for v in args.values.split(",") if v]
            if args.left and args.right:
                left = _load_graph(args.left, ontology)
                right = _load_graph(args.right, ontology)
                left_table = _run_table(args, left, ontology)
                right_table = _run_table(args, right, ontology)
                spec = build_overlay(
                    left_table, right_table, left, right, ontology, selected, ChartParams()
                )
            else:
                graph = _load_graph(args.graph, ontology)
                table = _run_table(args, graph, ontology)
                spec = build_chart(table, graph, ontology, selected, ChartParams())
            out.write(export_csv(spec))
        else:
            raise ProtoQueryError(f"unknown export kind {args.kind!r}")
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protoquery",
        description="Ontology-constrained query building with diff views",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8040)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("ingest", help="parse an ontology and report its contents")
    p.add_argument("ontology")
    p.add_argument("--format", choices=["turtle", "ntriples"], default=None)
    p.add_argument("--out", default=None, help="write canonical schema JSON here")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("embed", help="build (or load) the embedding index")
    p.add_argument("ontology")
    p.add_argument("--format", choices=["turtle", "ntriples"], default=None)
    p.add_argument("--store", default="data/embeddings")
    p.add_argument("--url", default=None, help="embedding endpoint (omit for the mock)")
    p.add_argument("--model", default=None)
    p.add_argument("--dimension", type=int, default=256, help="mock embedder dimension")
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("sparql", help="print the SPARQL for a graph file")
    p.add_argument("graph")
    p.add_argument("--ontology", required=True)
    p.add_argument("--count", action="store_true")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--expand-subclasses", action="store_true")
    p.set_defaults(fn=cmd_sparql)

    p = sub.add_parser("diff", help="diff two graph files")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--ontology", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_diff)

    p = sub.add_parser("query", help="execute a graph file and print the results")
    p.add_argument("graph")
    p.add_argument("--ontology", required=True)
    p.add_argument("--local", default=None, help="N-Triples data file")
    p.add_argument("--endpoint", default=None, help="SPARQL endpoint URL")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--expand-subclasses", action="store_true")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("export", help="export results, instance diffs, or chart data as CSV")
    p.add_argument("graph", nargs="?", default=None)
    p.add_argument("--kind", choices=["results", "instance_diff", "chart"], default="results")
    p.add_argument("--ontology", required=True)
    p.add_argument("--left", default=None)
    p.add_argument("--right", default=None)
    p.add_argument("--values", default="")
    p.add_argument("--local", default=None)
    p.add_argument("--endpoint", default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--expand-subclasses", action="store_true")
    p.add_argument("--out", "-o", default=None)
    p.set_defaults(fn=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ProtoQueryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
