"""The versioned prototype graph: ontology-typed nodes, links, and sub-queries.

Every mutation is validated against the ontology, so a graph built through
this module is ontology-valid at all times. Element ids are serial per kind
and never reused, which is what makes identity-based diffing across
snapshots work.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

from .conditions import Condition
from .errors import (
    GraphFormatError,
    OperatorKindError,
    PropertyDomainError,
    TypeMismatchError,
    UnknownElementError,
)
from .ontology import Ontology

FORMAT_TAG = "proto-graph-1"

CONSTRAINT = "constraint"
VALUE = "value"

NODE = "node"
EDGE = "edge"
SUBQUERY = "subquery"


@dataclass
class ProtoNode:
    id: int
    cls: str


@dataclass
class ProtoEdge:
    id: int
    tail: int
    link: str
    head: int


@dataclass
class SubQuery:
    id: int
    node: int
    property: str
    kind: str
    condition: Condition | None = None
    revision: int = 0

    def canonical(self) -> str:
        """Serialization compared by the diff engine's changed() check."""
        doc = {
            "node": self.node,
            "property": self.property,
            "kind": self.kind,
            "condition": self.condition.to_json() if self.condition else None,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


@dataclass
class RemovalReport:
    nodes: list[int] = field(default_factory=list)
    edges: list[int] = field(default_factory=list)
    subqueries: list[int] = field(default_factory=list)


@dataclass
class Violation:
    kind: str
    element: int
    rule: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} {self.element}: [{self.rule}] {self.detail}"


class PrototypeGraph:
    """Mutable query blueprint bound to one ontology."""

    def __init__(self, ontology: Ontology):
        self.ontology = ontology
        self.nodes: dict[int, ProtoNode] = {}
        self.edges: dict[int, ProtoEdge] = {}
        self.subqueries: dict[int, SubQuery] = {}
        self.next_ids = {NODE: 0, EDGE: 0, SUBQUERY: 0, "snapshot": 0}
        self.revision = 0
        self.version_tag = "v0"

    # --- bookkeeping ---

    def _bump(self) -> None:
        self.revision += 1
        self.version_tag = f"v{self.revision}"

    def _alloc(self, kind: str) -> int:
        allocated = self.next_ids[kind]
        self.next_ids[kind] = allocated + 1
        return allocated

    def node_class(self, node_id: int) -> str:
        if node_id not in self.nodes:
            raise UnknownElementError(f"no node {node_id}")
        return self.nodes[node_id].cls

    def value_subqueries(self) -> list[SubQuery]:
        return sorted(
            (s for s in self.subqueries.values() if s.kind == VALUE), key=lambda s: s.id
        )

    def constraint_subqueries(self) -> list[SubQuery]:
        return sorted(
            (s for s in self.subqueries.values() if s.kind == CONSTRAINT), key=lambda s: s.id
        )

    # --- mutations ---

    def add_node(self, cls: str) -> int:
        self.ontology.require_class(cls)
        node_id = self._alloc(NODE)
        self.nodes[node_id] = ProtoNode(node_id, cls)
        self._bump()
        return node_id

    def add_edge(self, tail: int, link: str, head: int) -> int:
        if tail not in self.nodes:
            raise UnknownElementError(f"no node {tail}")
        if head not in self.nodes:
            raise UnknownElementError(f"no node {head}")
        link_def = self.ontology.links.get(link)
        if link_def is None:
            raise UnknownElementError(f"unknown link <{link}>")
        tail_cls = self.nodes[tail].cls
        head_cls = self.nodes[head].cls
        if not self.ontology.subtype_of(tail_cls, link_def.fromtype):
            raise TypeMismatchError("tail", tail_cls, link_def.fromtype, link)
        if not self.ontology.subtype_of(head_cls, link_def.totype):
            raise TypeMismatchError("head", head_cls, link_def.totype, link)
        edge_id = self._alloc(EDGE)
        self.edges[edge_id] = ProtoEdge(edge_id, tail, link, head)
        self._bump()
        return edge_id

    def set_subquery(
        self,
        node: int,
        property: str,
        kind: str,
        condition: Condition | None = None,
    ) -> int:
        if node not in self.nodes:
            raise UnknownElementError(f"no node {node}")
        if kind not in (CONSTRAINT, VALUE):
            raise GraphFormatError(f"unknown sub-query kind {kind!r}")
        prop = self._require_property(property, self.nodes[node].cls)
        if kind == CONSTRAINT:
            if condition is None:
                raise OperatorKindError(f"constraint on <{property}> requires a condition")
            condition.validate_for(prop.range_kind)
        elif condition is not None:
            raise GraphFormatError("value sub-queries carry no condition")
        sq_id = self._alloc(SUBQUERY)
        self.subqueries[sq_id] = SubQuery(sq_id, node, property, kind, condition)
        self._bump()
        return sq_id

    def update_subquery(self, subquery: int, condition: Condition) -> int:
        """Replace a constraint's condition in place; bumps its revision by 1."""
        sq = self.subqueries.get(subquery)
        if sq is None:
            raise UnknownElementError(f"no sub-query {subquery}")
        if sq.kind != CONSTRAINT:
            raise GraphFormatError("only constraint sub-queries carry a condition")
        prop = self._require_property(sq.property, self.nodes[sq.node].cls)
        condition.validate_for(prop.range_kind)
        sq.condition = condition
        sq.revision += 1
        self._bump()
        return subquery

    def remove_element(self, kind: str, element_id: int) -> RemovalReport:
        report = RemovalReport()
        if kind == NODE:
            if element_id not in self.nodes:
                raise UnknownElementError(f"no node {element_id}")
            report.nodes.append(element_id)
            report.edges = sorted(
                e.id for e in self.edges.values() if element_id in (e.tail, e.head)
            )
            report.subqueries = sorted(
                s.id for s in self.subqueries.values() if s.node == element_id
            )
            for edge_id in report.edges:
                del self.edges[edge_id]
            for sq_id in report.subqueries:
                del self.subqueries[sq_id]
            del self.nodes[element_id]
        elif kind == EDGE:
            if element_id not in self.edges:
                raise UnknownElementError(f"no edge {element_id}")
            del self.edges[element_id]
            report.edges.append(element_id)
        elif kind == SUBQUERY:
            if element_id not in self.subqueries:
                raise UnknownElementError(f"no sub-query {element_id}")
            del self.subqueries[element_id]
            report.subqueries.append(element_id)
        else:
            raise UnknownElementError(f"unknown element kind {kind!r}")
        self._bump()
        return report

    def _require_property(self, property: str, cls: str):
        prop = self.ontology.properties.get(property)
        if prop is None:
            raise UnknownElementError(f"unknown property <{property}>")
        if not self.ontology.subtype_of(cls, prop.domain):
            raise PropertyDomainError(
                f"property <{property}> has domain <{prop.domain}>, "
                f"which <{cls}> is not a subtype of"
            )
        return prop

    # --- snapshots ---

    def clone(self) -> "PrototypeGraph":
        """Identical deep copy with no version bookkeeping side effects."""
        copied = PrototypeGraph(self.ontology)
        copied.nodes = copy.deepcopy(self.nodes)
        copied.edges = copy.deepcopy(self.edges)
        copied.subqueries = copy.deepcopy(self.subqueries)
        copied.next_ids = dict(self.next_ids)
        copied.revision = self.revision
        copied.version_tag = self.version_tag
        return copied

    def snapshot(self) -> "PrototypeGraph":
        """Deep, independent copy; id counters carry over so ids stay comparable."""
        snap_serial = self.next_ids["snapshot"]
        self.next_ids["snapshot"] = snap_serial + 1
        copied = PrototypeGraph(self.ontology)
        copied.nodes = copy.deepcopy(self.nodes)
        copied.edges = copy.deepcopy(self.edges)
        copied.subqueries = copy.deepcopy(self.subqueries)
        copied.next_ids = dict(self.next_ids)
        copied.revision = self.revision
        copied.version_tag = f"v{self.revision}-snap{snap_serial}"
        return copied

    # --- validation ---

    def validate(self, ontology: Ontology | None = None) -> list[Violation]:
        """Check every invariant; violations are data, not exceptions."""
        o = ontology or self.ontology
        violations: list[Violation] = []
        for node in self.nodes.values():
            if not o.has_class(node.cls):
                violations.append(
                    Violation(NODE, node.id, "UnknownClass", f"class <{node.cls}> not in ontology")
                )
        for edge in self.edges.values():
            if edge.tail not in self.nodes or edge.head not in self.nodes:
                violations.append(
                    Violation(EDGE, edge.id, "DanglingEndpoint", "edge references a missing node")
                )
                continue
            link = o.links.get(edge.link)
            if link is None:
                violations.append(
                    Violation(EDGE, edge.id, "UnknownLink", f"link <{edge.link}> not in ontology")
                )
                continue
            tail_cls = self.nodes[edge.tail].cls
            head_cls = self.nodes[edge.head].cls
            if not (o.has_class(tail_cls) and o.has_class(head_cls)):
                continue  # already reported on the node
            if not o.subtype_of(tail_cls, link.fromtype):
                violations.append(
                    Violation(
                        EDGE, edge.id, "TypeMismatch",
                        f"tail <{tail_cls}> is not a subtype of <{link.fromtype}>",
                    )
                )
            if not o.subtype_of(head_cls, link.totype):
                violations.append(
                    Violation(
                        EDGE, edge.id, "TypeMismatch",
                        f"head <{head_cls}> is not a subtype of <{link.totype}>",
                    )
                )
        for sq in self.subqueries.values():
            if sq.node not in self.nodes:
                violations.append(
                    Violation(SUBQUERY, sq.id, "DanglingNode", "sub-query references a missing node")
                )
                continue
            prop = o.properties.get(sq.property)
            if prop is None:
                violations.append(
                    Violation(
                        SUBQUERY, sq.id, "UnknownProperty", f"property <{sq.property}> not in ontology"
                    )
                )
                continue
            node_cls = self.nodes[sq.node].cls
            if o.has_class(node_cls) and not o.subtype_of(node_cls, prop.domain):
                violations.append(
                    Violation(
                        SUBQUERY, sq.id, "PropertyDomain",
                        f"<{sq.property}> does not apply to <{node_cls}>",
                    )
                )
            if sq.kind == CONSTRAINT:
                if sq.condition is None:
                    violations.append(
                        Violation(SUBQUERY, sq.id, "MissingCondition", "constraint without condition")
                    )
                else:
                    try:
                        sq.condition.validate_for(prop.range_kind)
                    except Exception as exc:
                        violations.append(
                            Violation(SUBQUERY, sq.id, "OperatorKind", str(exc))
                        )
            elif sq.condition is not None:
                violations.append(
                    Violation(SUBQUERY, sq.id, "UnexpectedCondition", "value sub-query with condition")
                )
        return sorted(violations, key=lambda v: (v.kind, v.element, v.rule))

    # --- serialization ---

    def to_json(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "version_tag": self.version_tag,
            "revision": self.revision,
            "next_ids": dict(self.next_ids),
            "nodes": [
                {"id": n.id, "class": n.cls} for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
            "edges": [
                {"id": e.id, "tail": e.tail, "link": e.link, "head": e.head}
                for e in sorted(self.edges.values(), key=lambda e: e.id)
            ],
            "subqueries": [
                {
                    "id": s.id,
                    "node": s.node,
                    "property": s.property,
                    "kind": s.kind,
                    "condition": s.condition.to_json() if s.condition else None,
                    "revision": s.revision,
                }
                for s in sorted(self.subqueries.values(), key=lambda s: s.id)
            ],
        }

    def serialize(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, doc: dict, ontology: Ontology) -> "PrototypeGraph":
        """Load a graph document without enforcing admissibility.

        Files may describe invalid graphs; call validate() to report
        violations instead of failing the load.
        """
        if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
            raise GraphFormatError(f"not a {FORMAT_TAG} document")
        graph = cls(ontology)
        try:
            for n in doc["nodes"]:
                graph.nodes[int(n["id"])] = ProtoNode(int(n["id"]), n["class"])
            for e in doc["edges"]:
                graph.edges[int(e["id"])] = ProtoEdge(
                    int(e["id"]), int(e["tail"]), e["link"], int(e["head"])
                )
            for s in doc["subqueries"]:
                condition = Condition.from_json(s["condition"]) if s.get("condition") else None
                graph.subqueries[int(s["id"])] = SubQuery(
                    int(s["id"]), int(s["node"]), s["property"], s["kind"],
                    condition, int(s.get("revision", 0)),
                )
            graph.next_ids.update({k: int(v) for k, v in doc["next_ids"].items()})
            graph.revision = int(doc.get("revision", 0))
            graph.version_tag = doc.get("version_tag", f"v{graph.revision}")
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError(f"malformed graph document: {exc}") from exc
        return graph

    @classmethod
    def deserialize(cls, text: str, ontology: Ontology) -> "PrototypeGraph":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"not valid JSON: {exc}") from exc
        return cls.from_json(doc, ontology)
