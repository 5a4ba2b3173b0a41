#!/usr/bin/env python3
"""Manual full-scale ingest check against a published DBpedia ontology snapshot.

Needs network access (or a pre-downloaded file). Verifies that the snapshot
parses, that the declared class count lands in the expected 700-800 band,
and that a full embedding-index build with the offline mock embedder stays
under 60 seconds. The same check runs inside the acceptance suite when
PROTOQUERY_DBPEDIA_FILE is set.

Usage:
    python3 scripts/dbpedia_check.py --file dbpedia.nt
    python3 scripts/dbpedia_check.py --url https://downloads.dbpedia.org/2016-10/dbpedia_2016-10.nt
"""

import argparse
import sys
import tempfile
import time
from pathlib import Path

from protoquery.embeddings import MockEmbedder, VectorStore, build_embedding_index
from protoquery.ontology import ingest_ontology

DEFAULT_URL = "https://downloads.dbpedia.org/2016-10/dbpedia_2016-10.nt"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--file", help="local ontology snapshot (.nt or .ttl)")
    parser.add_argument("--url", default=DEFAULT_URL, help="download URL when --file is absent")
    args = parser.parse_args()

    if args.file:
        path = Path(args.file)
        text = path.read_text(encoding="utf-8")
        fmt = "ntriples" if path.suffix == ".nt" else "turtle"
    else:
        import requests

        print(f"downloading {args.url} ...")
        resp = requests.get(args.url, timeout=300)
        resp.raise_for_status()
        text = resp.text
        fmt = "ntriples" if args.url.endswith(".nt") else "turtle"

    started = time.perf_counter()
    ontology = ingest_ontology(text, fmt)
    parse_seconds = time.perf_counter() - started
    declared = len(ontology.classes) - 1  # minus the synthetic root
    print(f"parsed in {parse_seconds:.1f}s: {declared} classes, "
          f"{len(ontology.links)} links, {len(ontology.properties)} properties, "
          f"{len(ontology.warnings)} warnings")

    ok = True
    if not 700 <= declared <= 800:
        print(f"FAIL: expected 700-800 classes for a DBpedia snapshot, got {declared}")
        ok = False
    else:
        print("PASS: class count in the 700-800 band")

    embedder = MockEmbedder(256)
    started = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        index = build_embedding_index(ontology, embedder, VectorStore(tmp))
    build_seconds = time.perf_counter() - started
    print(f"embedding index: {len(index)} entries in {build_seconds:.1f}s "
          f"({embedder.calls} provider calls)")
    if build_seconds >= 60:
        print("FAIL: index build exceeded 60s")
        ok = False
    else:
        print("PASS: index build under 60s")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
