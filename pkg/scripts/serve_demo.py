#!/usr/bin/env python3
"""Development server for the frontend: real HTTP API, scripted offline model.

The language model is a repeating mock that proposes adding a birth place to
node 0, deliberately reversed so the repair pass visibly flips it. Pair it
with the bundled fixture ontology (tests/fixtures/kg.ttl) or the frontend
live test (frontend: `npm run test:live`).

Usage: python3 scripts/serve_demo.py [--port 8040] [--data DIR]
"""

import argparse
import sys
import tempfile
from pathlib import Path

import uvicorn

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import EX  # noqa: E402
from protoquery.config import ServiceConfig  # noqa: E402
from protoquery.server import create_app  # noqa: E402


class RepeatingMockLm:
    """Returns the same scripted change set forever."""

    def __init__(self, response: dict):
        self.response = response

    def complete_structured(self, messages, json_schema):
        return self.response


SCRIPTED = {
    "add_nodes": [{"ref": "birthplace", "class": EX + "Place"}],
    "add_edges": [{"tail": "birthplace", "link": EX + "birthPlace", "head": 0}],
    "delete_nodes": [], "delete_edges": [], "delete_subqueries": [],
    "add_constraints": [], "add_values": [],
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--port", type=int, default=8040)
    parser.add_argument("--data", default=None)
    args = parser.parse_args()

    data_dir = args.data or tempfile.mkdtemp(prefix="protoquery-demo-")
    config = ServiceConfig(data_dir=data_dir, cors_origins=["*"], debounce_ms=200)
    app = create_app(config, lm=RepeatingMockLm(SCRIPTED))
    print(f"data dir: {data_dir}")
    print(f"scripted model: always proposes a reversed birth-place edge on node 0")
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
