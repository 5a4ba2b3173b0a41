"""Natural-language edit requests resolved into ontology-valid change sets.

Three steps: embed the request and retrieve candidate classes/links, decode
the LM against the constrained change-set schema, then repair and apply.
Providers are pluggable HTTP clients; deterministic in-process mocks cover
all tests so nothing here needs network access or model weights.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import requests

from .changeset import (
    ChangeSet,
    ConstrainedSchema,
    RepairAction,
    apply_changeset,
    build_constrained_schema,
    repair_changeset,
)
from .diffing import GraphDiff
from .embeddings import Candidates, EmbeddingIndex, retrieve_candidates
from .errors import LmError, SchemaViolationError
from .graph import PrototypeGraph
from .ontology import Ontology

DEFAULT_K = 16


def load_few_shot() -> dict:
    """Prompt exemplars live in a versioned asset file, not code."""
    text = resources.files("protoquery").joinpath("prompts/fewshot.json").read_text("utf-8")
    return json.loads(text)


class MockLm:
    """Scripted provider: returns queued responses, dicts or raw strings."""

    def __init__(self, responses: list):
        self.responses = list(responses)
        self.requests: list[dict] = []

    def complete_structured(self, messages: list[dict], json_schema: dict):
        self.requests.append({"messages": messages, "schema": json_schema})
        if not self.responses:
            raise LmError("mock LM has no scripted response left")
        return self.responses.pop(0)


class HttpLm:
    """Chat-completions-style endpoint with schema-constrained output."""

    def __init__(self, url: str, model: str, timeout: float = 120.0):
        self.url = url
        self.model = model
        self.timeout = timeout

    def complete_structured(self, messages: list[dict], json_schema: dict):
        payload = {
            "model": self.model,
            "messages": messages,
            "response_format": {
                "type": "json_schema",
                "json_schema": {"name": "graph_changeset", "schema": json_schema, "strict": True},
            },
        }
        try:
            response = requests.post(self.url, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise LmError(f"LM endpoint unreachable: {exc}") from exc
        if response.status_code != 200:
            raise LmError(f"LM endpoint returned HTTP {response.status_code}: {response.text[:300]}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise LmError(f"malformed LM response: {exc}") from exc


def graph_summary(g: PrototypeGraph, o: Ontology) -> str:
    """Compact current-graph listing included in every prompt."""
    lines = []
    for node in sorted(g.nodes.values(), key=lambda n: n.id):
        label = o.classes[node.cls].label if o.has_class(node.cls) else node.cls
        lines.append(f"node {node.id}: <{node.cls}> ({label})")
    for edge in sorted(g.edges.values(), key=lambda e: e.id):
        lines.append(f"edge {edge.id}: node {edge.tail} -<{edge.link}>-> node {edge.head}")
    for sq in sorted(g.subqueries.values(), key=lambda s: s.id):
        if sq.condition is not None:
            cond = f" {sq.condition.operator} {sq.condition.operand!r}"
            cond += " (negated)" if sq.condition.negated else ""
        else:
            cond = ""
        lines.append(f"subquery {sq.id}: node {sq.node} <{sq.property}> {sq.kind}{cond}")
    return "\n".join(lines) if lines else "(empty graph)"


def candidate_summary(candidates: Candidates, o: Ontology) -> str:
    lines = ["candidate classes:"]
    for ranked in candidates.classes:
        label = o.classes[ranked.element].label if o.has_class(ranked.element) else ""
        lines.append(f"  <{ranked.element}> ({label})")
    lines.append("candidate links:")
    for ranked in candidates.links:
        link = o.links.get(ranked.element)
        if link is not None:
            lines.append(f"  <{link.id}> ({link.label}: <{link.fromtype}> to <{link.totype}>)")
        else:
            lines.append(f"  <{ranked.element}>")
    return "\n".join(lines)


def build_messages(
    request: str,
    g: PrototypeGraph,
    o: Ontology,
    candidates: Candidates,
    few_shot: dict | None = None,
) -> list[dict]:
    few_shot = few_shot or load_few_shot()
    messages = [{"role": "system", "content": few_shot["system"]}]
    for example in few_shot.get("examples", []):
        messages.append({"role": "user", "content": example["request"]})
        messages.append({"role": "assistant", "content": json.dumps(example["response"])})
    user = (
        "Current query graph:\n" + graph_summary(g, o)
        + "\n\n" + candidate_summary(candidates, o)
        + "\n\nEdit request: " + request
    )
    messages.append({"role": "user", "content": user})
    return messages


def request_changeset(
    lm,
    request: str,
    schema: ConstrainedSchema,
    g: PrototypeGraph,
    o: Ontology,
    candidates: Candidates,
    few_shot: dict | None = None,
    audit: "AuditLog | None" = None,
) -> ChangeSet:
    """Ask the provider for a shape-valid change set; off-schema output raises."""
    json_schema = schema.to_json_schema()
    messages = build_messages(request, g, o, candidates, few_shot)
    raw = lm.complete_structured(messages, json_schema)
    if audit is not None:
        audit.append({"event": "lm_response", "request": request,
                      "messages": messages, "response": raw})
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(f"provider returned non-JSON output: {exc}") from exc
    try:
        jsonschema.validate(raw, json_schema)
    except jsonschema.ValidationError as exc:
        raise SchemaViolationError(f"provider output violates the schema: {exc.message}") from exc
    return ChangeSet.from_json(raw)


@dataclass
class Proposal:
    request: str
    changeset: ChangeSet
    repairs: list[RepairAction]
    base_graph: PrototypeGraph
    proposed_graph: PrototypeGraph
    diff: GraphDiff
    candidates: Candidates
    node_map: dict[str, int] = field(default_factory=dict)


def propose(
    request: str,
    g: PrototypeGraph,
    o: Ontology,
    index: EmbeddingIndex,
    embedder,
    lm,
    k: int = DEFAULT_K,
    few_shot: dict | None = None,
    audit: "AuditLog | None" = None,
) -> Proposal:
    """Full pipeline: retrieve, decode under constraints, repair, apply.

    The returned proposal carries the untouched base graph, so accepting is
    swapping graphs and rejecting is a no-op.
    """
    candidates = retrieve_candidates(index, request, embedder, k)
    schema = build_constrained_schema(candidates, g, o)
    raw = request_changeset(lm, request, schema, g, o, candidates, few_shot, audit)
    repaired, notes = repair_changeset(raw, g, o)
    result = apply_changeset(g, repaired)
    if audit is not None:
        audit.append({
            "event": "proposal",
            "request": request,
            "changeset": repaired.to_json(),
            "repairs": [n.to_json() for n in notes],
            "diff": result.diff.to_json(),
        })
    return Proposal(
        request=request,
        changeset=repaired,
        repairs=notes,
        base_graph=g,
        proposed_graph=result.graph,
        diff=result.diff,
        candidates=candidates,
        node_map=result.node_map,
    )


class AuditLog:
    """Append-only JSONL log of prompts and responses."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, record: dict) -> None:
        record = {"ts": time.time(), **record}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
