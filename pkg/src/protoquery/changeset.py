"""Structured graph edits: the constrained schema, repair pass, and apply.

A ChangeSet is shape-valid by construction (the LM decodes against the
JSON schema) but may still be graph-inconsistent. The repair pass makes it
applicable with three deterministic steps, in order: synthesize nodes for
undeclared edge endpoints, flip edges that are reversed with respect to
the ontology, and drop whatever remains invalid, reporting every action.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .conditions import OPERATORS, Condition
from .diffing import GraphDiff, diff_graphs
from .errors import SchemaViolationError, UnknownElementError, UnrepairableError
from .graph import CONSTRAINT, VALUE, PrototypeGraph
from .ontology import Ontology
from .terms import RANGE_BOOLEAN, RANGE_DATE, RANGE_NUMERIC, RANGE_TEXT, parse_boolean, parse_datetime, parse_number

NodeRef = int | str


@dataclass
class AddNode:
    ref: str
    cls: str


@dataclass
class AddEdge:
    tail: NodeRef
    link: str
    head: NodeRef


@dataclass
class AddConstraint:
    node: NodeRef
    property: str
    condition: Condition


@dataclass
class AddValue:
    node: NodeRef
    property: str


@dataclass
class ChangeSet:
    add_nodes: list[AddNode] = field(default_factory=list)
    add_edges: list[AddEdge] = field(default_factory=list)
    delete_nodes: list[int] = field(default_factory=list)
    delete_edges: list[int] = field(default_factory=list)
    delete_subqueries: list[int] = field(default_factory=list)
    add_constraints: list[AddConstraint] = field(default_factory=list)
    add_values: list[AddValue] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (
            self.add_nodes or self.add_edges or self.delete_nodes
            or self.delete_edges or self.delete_subqueries
            or self.add_constraints or self.add_values
        )

    def to_json(self) -> dict:
        return {
            "add_nodes": [{"ref": n.ref, "class": n.cls} for n in self.add_nodes],
            "add_edges": [
                {"tail": e.tail, "link": e.link, "head": e.head} for e in self.add_edges
            ],
            "delete_nodes": list(self.delete_nodes),
            "delete_edges": list(self.delete_edges),
            "delete_subqueries": list(self.delete_subqueries),
            "add_constraints": [
                {"node": c.node, "property": c.property, "condition": c.condition.to_json()}
                for c in self.add_constraints
            ],
            "add_values": [
                {"node": v.node, "property": v.property} for v in self.add_values
            ],
        }

    @classmethod
    def from_json(cls, doc) -> "ChangeSet":
        """Parse and shape-check a change-set document."""
        if not isinstance(doc, dict):
            raise SchemaViolationError("change set must be an object")
        try:
            out = cls(
                add_nodes=[
                    AddNode(_req_str(n, "ref"), _req_str(n, "class"))
                    for n in doc.get("add_nodes", [])
                ],
                add_edges=[
                    AddEdge(_node_ref(e, "tail"), _req_str(e, "link"), _node_ref(e, "head"))
                    for e in doc.get("add_edges", [])
                ],
                delete_nodes=[_int(v) for v in doc.get("delete_nodes", [])],
                delete_edges=[_int(v) for v in doc.get("delete_edges", [])],
                delete_subqueries=[_int(v) for v in doc.get("delete_subqueries", [])],
                add_constraints=[
                    AddConstraint(
                        _node_ref(c, "node"),
                        _req_str(c, "property"),
                        _condition(c.get("condition")),
                    )
                    for c in doc.get("add_constraints", [])
                ],
                add_values=[
                    AddValue(_node_ref(v, "node"), _req_str(v, "property"))
                    for v in doc.get("add_values", [])
                ],
            )
        except (TypeError, AttributeError) as exc:
            raise SchemaViolationError(f"malformed change set: {exc}") from exc
        return out

    def canonical(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def _req_str(doc: dict, key: str) -> str:
    value = doc.get(key)
    if not isinstance(value, str):
        raise SchemaViolationError(f"field {key!r} must be a string, got {value!r}")
    return value


def _node_ref(doc: dict, key: str) -> NodeRef:
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise SchemaViolationError(f"field {key!r} must be a node id or temp ref, got {value!r}")
    return value


def _int(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolationError(f"expected an integer id, got {value!r}")
    return value


def _condition(doc) -> Condition:
    if not isinstance(doc, dict) or "operator" not in doc or "operand" not in doc:
        raise SchemaViolationError(f"malformed condition: {doc!r}")
    if doc["operator"] not in OPERATORS:
        raise SchemaViolationError(f"unknown operator {doc['operator']!r}")
    return Condition.from_json(doc)


# --- constrained schema ---

@dataclass
class ConstrainedSchema:
    allowed_classes: set[str]
    allowed_links: set[str]
    allowed_properties: set[str]
    connection_rules: list[tuple[str, str, str]]
    node_ids: list[int]
    edge_ids: list[int]
    subquery_ids: list[int]

    def to_json_schema(self) -> dict:
        """The structural grammar handed to the LM as output constraints."""

        def enum_or_none(values: list) -> dict | None:
            return {"enum": values} if values else None

        def array_of(item_schema: dict | None) -> dict:
            if item_schema is None:
                return {"type": "array", "maxItems": 0}
            return {"type": "array", "items": item_schema}

        classes = enum_or_none(sorted(self.allowed_classes))
        links = enum_or_none(sorted(self.allowed_links))
        properties = enum_or_none(sorted(self.allowed_properties))
        temp_ref = {"type": "string", "pattern": "^[A-Za-z][A-Za-z0-9_]*$"}
        if self.node_ids:
            node_ref = {"oneOf": [{"enum": self.node_ids}, temp_ref]}
        else:
            node_ref = temp_ref

        condition = {
            "type": "object",
            "additionalProperties": False,
            "required": ["operator", "operand"],
            "properties": {
                "operator": {"enum": list(OPERATORS)},
                "negated": {"type": "boolean"},
                "operand": {"type": ["string", "number", "boolean"]},
            },
        }
        schema = {
            "type": "object",
            "additionalProperties": False,
            "required": [
                "add_nodes", "add_edges", "delete_nodes", "delete_edges",
                "delete_subqueries", "add_constraints", "add_values",
            ],
            "properties": {
                "add_nodes": array_of(
                    None if classes is None else {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["ref", "class"],
                        "properties": {"ref": temp_ref, "class": classes},
                    }
                ),
                "add_edges": array_of(
                    None if links is None else {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["tail", "link", "head"],
                        "properties": {"tail": node_ref, "link": links, "head": node_ref},
                    }
                ),
                "delete_nodes": array_of(enum_or_none(self.node_ids)),
                "delete_edges": array_of(enum_or_none(self.edge_ids)),
                "delete_subqueries": array_of(enum_or_none(self.subquery_ids)),
                "add_constraints": array_of(
                    None if properties is None else {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["node", "property", "condition"],
                        "properties": {
                            "node": node_ref,
                            "property": properties,
                            "condition": condition,
                        },
                    }
                ),
                "add_values": array_of(
                    None if properties is None else {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["node", "property"],
                        "properties": {"node": node_ref, "property": properties},
                    }
                ),
            },
        }
        return schema


def build_constrained_schema(
    candidates,
    g: PrototypeGraph,
    o: Ontology,
) -> ConstrainedSchema:
    """Allowed sets are the retrieval candidates plus everything already in the graph."""
    allowed_classes = set(candidates.class_ids()) if candidates else set()
    allowed_links = set(candidates.link_ids()) if candidates else set()
    allowed_classes.update(node.cls for node in g.nodes.values())
    allowed_links.update(edge.link for edge in g.edges.values())

    allowed_properties: set[str] = set()
    for cls in allowed_classes:
        if o.has_class(cls):
            allowed_properties.update(p.id for p in o.properties_of(cls))

    rules: list[tuple[str, str, str]] = []
    for link_id in sorted(allowed_links):
        link = o.links.get(link_id)
        if link is None:
            continue
        froms = sorted(
            c for c in allowed_classes if o.has_class(c) and o.subtype_of(c, link.fromtype)
        )
        tos = sorted(
            c for c in allowed_classes if o.has_class(c) and o.subtype_of(c, link.totype)
        )
        for f in froms:
            for t in tos:
                rules.append((f, link_id, t))

    return ConstrainedSchema(
        allowed_classes=allowed_classes,
        allowed_links=allowed_links,
        allowed_properties=allowed_properties,
        connection_rules=rules,
        node_ids=sorted(g.nodes),
        edge_ids=sorted(g.edges),
        subquery_ids=sorted(g.subqueries),
    )


# --- repair ---

@dataclass
class RepairAction:
    action: str
    detail: str

    def to_json(self) -> dict:
        return {"action": self.action, "detail": self.detail}


def repair_changeset(
    raw: ChangeSet,
    g: PrototypeGraph,
    o: Ontology,
) -> tuple[ChangeSet, list[RepairAction]]:
    """Deterministic repair: synthesize missing nodes, flip reversed edges,
    then drop residual invalid elements. The result applies cleanly or the
    repair itself is buggy (UnrepairableError)."""
    notes: list[RepairAction] = []
    add_nodes = [AddNode(n.ref, n.cls) for n in raw.add_nodes]
    add_edges = [AddEdge(e.tail, e.link, e.head) for e in raw.add_edges]

    declared: dict[str, str] = {}
    for node in add_nodes:
        declared.setdefault(node.ref, node.cls)

    live_nodes = {nid for nid in g.nodes if nid not in set(raw.delete_nodes)}

    # step 1: synthesize nodes for undeclared temp refs on edges
    for edge in add_edges:
        link = o.links.get(edge.link)
        if link is None:
            continue
        for attr, endpoint_cls in (("tail", link.fromtype), ("head", link.totype)):
            ref = getattr(edge, attr)
            if isinstance(ref, str) and ref not in declared:
                add_nodes.append(AddNode(ref, endpoint_cls))
                declared[ref] = endpoint_cls
                notes.append(RepairAction(
                    "synthesized_node",
                    f"edge {attr} ref {ref!r} was undeclared; added a <{endpoint_cls}> node",
                ))

    def ref_class(ref: NodeRef) -> str | None:
        if isinstance(ref, int):
            return g.nodes[ref].cls if ref in live_nodes else None
        cls = declared.get(ref)
        return cls if cls is not None and o.has_class(cls) else None

    # step 2: flip edges that only work in the reverse direction
    for edge in add_edges:
        if edge.link not in o.links:
            continue
        tail_cls, head_cls = ref_class(edge.tail), ref_class(edge.head)
        if tail_cls is None or head_cls is None:
            continue
        if not o.link_admissible(tail_cls, edge.link, head_cls) and \
                o.link_admissible(head_cls, edge.link, tail_cls):
            edge.tail, edge.head = edge.head, edge.tail
            notes.append(RepairAction(
                "flipped_edge",
                f"edge <{edge.link}> was reversed for the ontology; endpoints swapped",
            ))

    # step 3: drop residual invalid elements
    kept_nodes: list[AddNode] = []
    seen_refs: set[str] = set()
    for node in add_nodes:
        if not o.has_class(node.cls):
            notes.append(RepairAction("dropped_node", f"unknown class <{node.cls}>"))
            continue
        if node.ref in seen_refs:
            notes.append(RepairAction("dropped_node", f"duplicate temp ref {node.ref!r}"))
            continue
        seen_refs.add(node.ref)
        kept_nodes.append(node)
    declared = {n.ref: n.cls for n in kept_nodes}

    def resolvable(ref: NodeRef) -> bool:
        if isinstance(ref, int):
            return ref in live_nodes
        return ref in declared

    def resolved_class(ref: NodeRef) -> str:
        return g.nodes[ref].cls if isinstance(ref, int) else declared[ref]

    kept_edges: list[AddEdge] = []
    for edge in add_edges:
        if edge.link not in o.links:
            notes.append(RepairAction("dropped_edge", f"unknown link <{edge.link}>"))
            continue
        if not (resolvable(edge.tail) and resolvable(edge.head)):
            notes.append(RepairAction(
                "dropped_edge", f"edge <{edge.link}> references an unavailable node"
            ))
            continue
        if not o.link_admissible(resolved_class(edge.tail), edge.link, resolved_class(edge.head)):
            notes.append(RepairAction(
                "dropped_edge", f"edge <{edge.link}> is inadmissible in either direction"
            ))
            continue
        kept_edges.append(edge)

    def filter_deletes(ids: list[int], pool: dict, label: str) -> list[int]:
        kept: list[int] = []
        for element_id in ids:
            if element_id in pool and element_id not in kept:
                kept.append(element_id)
            else:
                notes.append(RepairAction(
                    f"dropped_delete_{label}", f"{label} {element_id} does not exist"
                ))
        return kept

    delete_nodes = filter_deletes(raw.delete_nodes, g.nodes, "node")
    delete_edges = filter_deletes(raw.delete_edges, g.edges, "edge")
    delete_subqueries = filter_deletes(raw.delete_subqueries, g.subqueries, "subquery")

    kept_constraints: list[AddConstraint] = []
    for item in raw.add_constraints:
        prop = o.properties.get(item.property)
        if prop is None or not resolvable(item.node):
            notes.append(RepairAction(
                "dropped_constraint",
                f"constraint on <{item.property}> references an unavailable node or property",
            ))
            continue
        if not o.subtype_of(resolved_class(item.node), prop.domain):
            notes.append(RepairAction(
                "dropped_constraint",
                f"<{item.property}> is outside the domain of <{resolved_class(item.node)}>",
            ))
            continue
        condition, coerced = _fit_condition(item.condition, prop.range_kind)
        if condition is None:
            notes.append(RepairAction(
                "dropped_constraint",
                f"condition {item.condition.to_json()} does not fit a {prop.range_kind} property",
            ))
            continue
        if coerced:
            notes.append(RepairAction(
                "coerced_operand",
                f"operand for <{item.property}> converted to {prop.range_kind}",
            ))
        kept_constraints.append(AddConstraint(item.node, item.property, condition))

    kept_values: list[AddValue] = []
    for item in raw.add_values:
        prop = o.properties.get(item.property)
        if prop is None or not resolvable(item.node):
            notes.append(RepairAction(
                "dropped_value",
                f"value on <{item.property}> references an unavailable node or property",
            ))
            continue
        if not o.subtype_of(resolved_class(item.node), prop.domain):
            notes.append(RepairAction(
                "dropped_value",
                f"<{item.property}> is outside the domain of <{resolved_class(item.node)}>",
            ))
            continue
        kept_values.append(AddValue(item.node, item.property))

    repaired = ChangeSet(
        add_nodes=kept_nodes,
        add_edges=kept_edges,
        delete_nodes=delete_nodes,
        delete_edges=delete_edges,
        delete_subqueries=delete_subqueries,
        add_constraints=kept_constraints,
        add_values=kept_values,
    )

    scratch, _ = _apply(g, repaired)
    violations = scratch.validate(o)
    if violations:
        raise UnrepairableError(
            "repair produced an invalid change set: " + "; ".join(map(str, violations))
        )
    return repaired, notes


def _fit_condition(condition: Condition, range_kind: str) -> tuple[Condition | None, bool]:
    """Validate a condition against the range kind, coercing obvious operand forms."""
    try:
        condition.validate_for(range_kind)
        return condition, False
    except Exception:
        pass
    operand = condition.operand
    coerced = None
    if range_kind == RANGE_NUMERIC and isinstance(operand, str):
        number = parse_number(operand)
        if number is not None:
            coerced = int(number) if number.is_integer() else number
    elif range_kind == RANGE_BOOLEAN and isinstance(operand, str):
        coerced = parse_boolean(operand)
    elif range_kind == RANGE_DATE and isinstance(operand, (int, float)) \
            and not isinstance(operand, bool):
        if parse_datetime(str(int(operand))) is not None:
            coerced = str(int(operand))
    elif range_kind == RANGE_TEXT and isinstance(operand, (int, float)) \
            and not isinstance(operand, bool):
        coerced = json.dumps(operand)
    if coerced is None:
        return None, False
    candidate = Condition(condition.operator, coerced, condition.negated)
    try:
        candidate.validate_for(range_kind)
        return candidate, True
    except Exception:
        return None, False


# --- apply ---

@dataclass
class ApplyResult:
    graph: PrototypeGraph
    diff: GraphDiff
    node_map: dict[str, int]


def apply_changeset(g: PrototypeGraph, cs: ChangeSet) -> ApplyResult:
    """Apply atomically: stale ids reject the whole set, g itself never changes."""
    _check_stale(g, cs)
    new_graph, node_map = _apply(g, cs)
    return ApplyResult(new_graph, diff_graphs(g, new_graph), node_map)


def _check_stale(g: PrototypeGraph, cs: ChangeSet) -> None:
    for nid in cs.delete_nodes:
        if nid not in g.nodes:
            raise UnknownElementError(f"node {nid} no longer exists")
    for eid in cs.delete_edges:
        if eid not in g.edges:
            raise UnknownElementError(f"edge {eid} no longer exists")
    for sid in cs.delete_subqueries:
        if sid not in g.subqueries:
            raise UnknownElementError(f"sub-query {sid} no longer exists")
    declared = {n.ref for n in cs.add_nodes}

    def check_ref(ref: NodeRef, context: str) -> None:
        if isinstance(ref, int):
            if ref not in g.nodes or ref in cs.delete_nodes:
                raise UnknownElementError(f"{context} references unavailable node {ref}")
        elif ref not in declared:
            raise UnknownElementError(f"{context} references undeclared ref {ref!r}")

    for edge in cs.add_edges:
        check_ref(edge.tail, "edge")
        check_ref(edge.head, "edge")
    for item in cs.add_constraints:
        check_ref(item.node, "constraint")
    for item in cs.add_values:
        check_ref(item.node, "value")


def _apply(g: PrototypeGraph, cs: ChangeSet) -> tuple[PrototypeGraph, dict[str, int]]:
    new_graph = g.clone()
    for nid in sorted(set(cs.delete_nodes)):
        new_graph.remove_element("node", nid)
    for eid in sorted(set(cs.delete_edges)):
        if eid in new_graph.edges:  # may already be gone via node cascade
            new_graph.remove_element("edge", eid)
    for sid in sorted(set(cs.delete_subqueries)):
        if sid in new_graph.subqueries:
            new_graph.remove_element("subquery", sid)
    node_map: dict[str, int] = {}
    for node in cs.add_nodes:
        node_map[node.ref] = new_graph.add_node(node.cls)

    def resolve(ref: NodeRef) -> int:
        return ref if isinstance(ref, int) else node_map[ref]

    for edge in cs.add_edges:
        new_graph.add_edge(resolve(edge.tail), edge.link, resolve(edge.head))
    for item in cs.add_constraints:
        new_graph.set_subquery(resolve(item.node), item.property, CONSTRAINT, item.condition)
    for item in cs.add_values:
        new_graph.set_subquery(resolve(item.node), item.property, VALUE)
    return new_graph, node_map
