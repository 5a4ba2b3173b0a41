"""Threaded loopback SPARQL endpoint serving a local TripleStore.

Speaks enough of the SPARQL 1.1 protocol for the client module and tests:
query via GET parameter or form-encoded POST, results as
application/sparql-results+json.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import sparql_eval
from .errors import ParseError
from .localstore import TripleStore
from .terms import Term


def _binding_json(term: Term) -> dict:
    if term.kind == "iri":
        return {"type": "uri", "value": term.value}
    if term.kind == "bnode":
        return {"type": "bnode", "value": term.value}
    out = {"type": "literal", "value": term.value}
    if term.datatype:
        out["datatype"] = term.datatype
    if term.lang:
        out["xml:lang"] = term.lang
    return out


def results_json(variables: list[str], solutions: list[dict[str, Term]]) -> dict:
    bindings = []
    for sol in solutions:
        bindings.append(
            {var: _binding_json(sol[var]) for var in variables if var in sol}
        )
    return {"head": {"vars": list(variables)}, "results": {"bindings": bindings}}


class LoopbackSparqlServer:
    """Serve a TripleStore over HTTP on 127.0.0.1; use as a context manager."""

    def __init__(self, store: TripleStore, port: int = 0):
        self.store = store
        self.fail_next_status: int | None = None
        self.delay_next_s: float = 0.0
        self.request_count = 0
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # keep test output clean
                pass

            def _respond(self, status: int, payload: bytes, content_type: str) -> None:
                self.send_response(status)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def _handle_query(self, query: str | None) -> None:
                outer.request_count += 1
                if outer.delay_next_s:
                    delay = outer.delay_next_s
                    outer.delay_next_s = 0.0
                    time.sleep(delay)
                if outer.fail_next_status is not None:
                    status = outer.fail_next_status
                    outer.fail_next_status = None
                    self._respond(status, b"synthetic failure", "text/plain")
                    return
                if not query:
                    self._respond(400, b"missing query parameter", "text/plain")
                    return
                try:
                    parsed = sparql_eval.parse_query(query)
                    variables, solutions = sparql_eval.evaluate(outer.store, parsed)
                except ParseError as exc:
                    self._respond(400, str(exc).encode("utf-8"), "text/plain")
                    return
                payload = json.dumps(results_json(variables, solutions)).encode("utf-8")
                self._respond(200, payload, "application/sparql-results+json")

            def do_GET(self):
                params = parse_qs(urlparse(self.path).query)
                self._handle_query(params.get("query", [None])[0])

            def do_POST(self):
                length = int(self.headers.get("Content-Length", "0"))
                body = self.rfile.read(length).decode("utf-8")
                content_type = self.headers.get("Content-Type", "")
                if content_type.startswith("application/sparql-query"):
                    query = body
                else:
                    query = parse_qs(body).get("query", [None])[0]
                self._handle_query(query)

        self._server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/sparql"

    def start(self) -> "LoopbackSparqlServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "LoopbackSparqlServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
