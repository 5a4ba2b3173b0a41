#!/usr/bin/env python3
"""Headless walkthrough of the exploratory-search storyline over the HTTP API.

Starts the service in-process with the bundled fixture ontology and toy
dataset, then drives it exactly as a client would: build a query, snapshot,
evolve it, inspect the graph diff, fetch the overlay chart, export the
instance diff as CSV, and finish with a natural-language edit proposed by a
scripted offline model, previewed, and accepted.
"""

import csv
import io
import json
import sys
import tempfile
import threading
import time
from pathlib import Path

import requests
import uvicorn

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import EX, ONTOLOGY_TTL  # noqa: E402  (fixture constants)
from protoquery.config import ServiceConfig  # noqa: E402
from protoquery.nl import MockLm  # noqa: E402
from protoquery.server import create_app  # noqa: E402


def serve(app):
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    return server, f"http://127.0.0.1:{port}"


def build_dataset(tmp: Path) -> str:
    from conftest import tv_store
    from protoquery.ontology import ingest_ontology
    from protoquery.rdfio import serialize_ntriples

    store = tv_store.__wrapped__(ingest_ontology(ONTOLOGY_TTL))
    path = tmp / "tv.nt"
    path.write_text(serialize_ntriples(store.triples), encoding="utf-8")
    return str(path)


def main() -> int:
    tmp = Path(tempfile.mkdtemp(prefix="protoquery-demo-"))
    data_file = build_dataset(tmp)

    scripted_change = {
        "add_nodes": [{"ref": "where", "class": EX + "Place"}],
        "add_edges": [{"tail": "where", "link": EX + "birthPlace", "head": 3}],  # reversed
        "delete_nodes": [], "delete_edges": [], "delete_subqueries": [],
        "add_constraints": [], "add_values": [],
    }
    app = create_app(ServiceConfig(data_dir=str(tmp / "data")), lm=MockLm([scripted_change]))
    server, base = serve(app)
    try:
        print(f"service on {base}\n")
        ontology_id = requests.post(
            f"{base}/ontologies", json={"document": ONTOLOGY_TTL}, timeout=30
        ).json()["ontology"]
        print(f"ontology registered: {ontology_id[:12]}…")
        sid = requests.post(f"{base}/sessions", json={
            "ontology": ontology_id, "settings": {"local_data": data_file},
        }, timeout=30).json()["session"]
        print(f"session: {sid}\n")

        requests.patch(f"{base}/sessions/{sid}/graph", json={"operations": [
            {"op": "add_node", "class": EX + "TelevisionShow"},
            {"op": "add_node", "class": EX + "Work"},
            {"op": "add_node", "class": EX + "PopulatedPlace"},
            {"op": "add_edge", "tail": 0, "link": EX + "openingTheme", "head": 1},
            {"op": "add_edge", "tail": 0, "link": EX + "recordedIn", "head": 2},
            {"op": "set_subquery", "node": 0, "property": EX + "runtime", "kind": "value"},
        ]}, timeout=30).raise_for_status()
        print("initial query: shows with an opening theme, recorded somewhere, runtime plotted")
        print(requests.get(f"{base}/sessions/{sid}/sparql", timeout=30).json()["text"])

        requests.post(f"{base}/sessions/{sid}/snapshots/initial", timeout=30)
        requests.patch(f"{base}/sessions/{sid}/graph", json={"operations": [
            {"op": "remove", "kind": "node", "id": 1},
            {"op": "set_subquery", "node": 2, "property": EX + "name", "kind": "constraint",
             "condition": {"operator": "contains", "operand": "York", "negated": False}},
        ]}, timeout=30).raise_for_status()
        print("evolved: theme dropped, place label constrained to \"York\"\n")

        diff = requests.get(f"{base}/sessions/{sid}/diff",
                            params={"left": "initial"}, timeout=30).json()["diff"]
        print("graph diff vs snapshot:", json.dumps(diff, indent=2), "\n")

        chart = requests.get(f"{base}/sessions/{sid}/chart", params={
            "values": "0", "left": "initial", "right": "current",
        }, timeout=30).json()
        print(f"overlay chart: {chart['chart']} with {len(chart['series'])} series")
        for series in chart["series"]:
            print(f"  {series['name']}: counts {series['data']['counts']}")

        csv_text = requests.get(f"{base}/sessions/{sid}/export.csv", params={
            "kind": "instance_diff", "left": "initial",
        }, timeout=30).text
        statuses = [row["diff_status"] for row in csv.DictReader(io.StringIO(csv_text))]
        print(f"\ninstance diff CSV: {statuses.count('added')} added, "
              f"{statuses.count('removed')} removed, {statuses.count('shared')} shared")

        requests.patch(f"{base}/sessions/{sid}/graph", json={"operations": [
            {"op": "add_node", "class": EX + "Person"},
        ]}, timeout=30)
        proposal = requests.post(f"{base}/sessions/{sid}/nl", json={
            "request": "add the birthplace of the person",
        }, timeout=30).json()
        print("\nNL proposal for 'add the birthplace of the person':")
        print("  change set:", json.dumps(proposal["changeset"]))
        print("  repairs:", json.dumps(proposal["repairs"]))
        requests.post(f"{base}/sessions/{sid}/nl/accept", timeout=30)
        graph = requests.get(f"{base}/sessions/{sid}/graph", timeout=30).json()["graph"]
        print(f"  accepted; graph now has {len(graph['nodes'])} nodes, "
              f"{len(graph['edges'])} edges")
        return 0
    finally:
        server.should_exit = True


if __name__ == "__main__":
    sys.exit(main())
