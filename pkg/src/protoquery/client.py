"""SPARQL 1.1 protocol client returning ResultTables.

Fail-fast by design: no retries, 30 s default timeout, errors surface with
the endpoint's own message attached.
"""

from __future__ import annotations

import requests

from .errors import EndpointError, MalformedResultsError, NetworkError, QueryTimeoutError
from .results import ResultTable
from .sparqlgen import SparqlQuery
from .terms import Term

DEFAULT_TIMEOUT = 30.0


def execute(endpoint: str, query: SparqlQuery | str, timeout: float = DEFAULT_TIMEOUT) -> ResultTable:
    """POST the query to a SPARQL endpoint and parse the JSON results."""
    text = query.text if isinstance(query, SparqlQuery) else query
    try:
        response = requests.post(
            endpoint,
            data={"query": text},
            headers={"Accept": "application/sparql-results+json"},
            timeout=timeout,
        )
    except requests.Timeout as exc:
        raise QueryTimeoutError(f"endpoint did not answer within {timeout}s") from exc
    except requests.RequestException as exc:
        raise NetworkError(f"cannot reach endpoint {endpoint}: {exc}") from exc
    if response.status_code != 200:
        raise EndpointError(response.status_code, response.text)
    try:
        doc = response.json()
    except ValueError as exc:
        raise MalformedResultsError(f"endpoint did not return JSON: {exc}") from exc
    return parse_results_document(doc)


def parse_results_document(doc: dict) -> ResultTable:
    """Parse a SPARQL JSON results document; unbound variables become None."""
    try:
        variables = list(doc["head"]["vars"])
        bindings = doc["results"]["bindings"]
    except (KeyError, TypeError) as exc:
        raise MalformedResultsError(f"missing results structure: {exc}") from exc
    rows = []
    for binding in bindings:
        if not isinstance(binding, dict):
            raise MalformedResultsError("binding is not an object")
        row = []
        for var in variables:
            row.append(_parse_cell(binding.get(var)))
        rows.append(tuple(row))
    return ResultTable(variables, rows)


def _parse_cell(doc) -> Term | None:
    if doc is None:
        return None
    try:
        kind = doc["type"]
        value = doc["value"]
    except (KeyError, TypeError) as exc:
        raise MalformedResultsError(f"malformed binding cell: {doc!r}") from exc
    if kind == "uri":
        return Term("iri", value)
    if kind == "bnode":
        return Term("bnode", value)
    if kind in ("literal", "typed-literal"):
        return Term("literal", value, doc.get("datatype"), doc.get("xml:lang"))
    raise MalformedResultsError(f"unknown binding type {kind!r}")
