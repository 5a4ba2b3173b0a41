"""Deterministic compilation of a prototype graph into SPARQL 1.1 text.

Value sub-queries compile to required (inner-join) triples, not OPTIONAL:
rows lacking the property are excluded, which is what the distribution
charts assume. Type triples use the node's exact class IRI unless
expand_subclasses is on, in which case a UNION over the subclass closure is
emitted for endpoints that do not materialize subclass types.
"""

from __future__ import annotations

from dataclasses import dataclass

from .conditions import (
    CONTAINS,
    EQ,
    GEQ,
    GT,
    LEQ,
    LT,
    NEQ,
    REGEX,
    Condition,
)
from .errors import EmptyGraphError, InvalidGraphError
from .graph import CONSTRAINT, PrototypeGraph, SubQuery
from .ontology import Ontology
from .results import node_var, subquery_var
from .terms import (
    RANGE_BOOLEAN,
    RANGE_DATE,
    RANGE_IRI,
    RANGE_NUMERIC,
    XSD,
    escape_string,
    normalize_datetime_operand,
)

DEFAULT_ROW_LIMIT = 1000
DEFAULT_DISTRIBUTION_LIMIT = 100000

_COMPARISON = {EQ: "=", NEQ: "!=", LT: "<", LEQ: "<=", GT: ">", GEQ: ">="}


@dataclass
class SparqlQuery:
    text: str
    projection: list[tuple[str, tuple[str, int]]]


def generate_select(
    g: PrototypeGraph,
    o: Ontology | None = None,
    limit: int | None = None,
    expand_subclasses: bool = False,
) -> SparqlQuery:
    """Compile the graph to a SELECT query; same input, byte-identical output."""
    ontology = o or g.ontology
    _check(g, ontology)
    projection = [(node_var(i), ("node", i)) for i in sorted(g.nodes)]
    projection += [(subquery_var(s.id), ("subquery", s.id)) for s in g.value_subqueries()]
    head = "SELECT " + " ".join("?" + var for var, _ in projection)
    text = _assemble(g, ontology, head, limit, expand_subclasses)
    return SparqlQuery(text, projection)


def generate_count(
    g: PrototypeGraph,
    o: Ontology | None = None,
    expand_subclasses: bool = False,
) -> SparqlQuery:
    """Same graph pattern wrapped in SELECT (COUNT(*) AS ?c)."""
    ontology = o or g.ontology
    _check(g, ontology)
    text = _assemble(g, ontology, "SELECT (COUNT(*) AS ?c)", None, expand_subclasses)
    return SparqlQuery(text, [("c", ("count", 0))])


def _check(g: PrototypeGraph, ontology: Ontology) -> None:
    violations = g.validate(ontology)
    if violations:
        raise InvalidGraphError(violations)
    if not g.nodes:
        raise EmptyGraphError("cannot generate a query for a graph without nodes")


def _assemble(
    g: PrototypeGraph,
    ontology: Ontology,
    head: str,
    limit: int | None,
    expand_subclasses: bool,
) -> str:
    lines: list[str] = []
    needs_xsd = False

    for node_id in sorted(g.nodes):
        cls = g.nodes[node_id].cls
        var = "?" + node_var(node_id)
        if expand_subclasses:
            subtypes = sorted(ontology.descendants(cls))
            if len(subtypes) > 1:
                branches = " UNION ".join(f"{{ {var} a <{c}> . }}" for c in subtypes)
                lines.append(f"  {branches}")
                continue
        lines.append(f"  {var} a <{cls}> .")

    for edge_id in sorted(g.edges):
        edge = g.edges[edge_id]
        lines.append(f"  ?{node_var(edge.tail)} <{edge.link}> ?{node_var(edge.head)} .")

    for sq in sorted(g.subqueries.values(), key=lambda s: s.id):
        lines.append(f"  ?{node_var(sq.node)} <{sq.property}> ?{subquery_var(sq.id)} .")
        if sq.kind == CONSTRAINT:
            expr = _filter_expression(sq, ontology)
            if sq.condition.negated:
                expr = f"!({expr})"
            lines.append(f"  FILTER({expr})")
            if ontology.properties[sq.property].range_kind == RANGE_DATE:
                needs_xsd = True

    parts = []
    if needs_xsd:
        parts.append(f"PREFIX xsd: <{XSD}>")
    parts.append(head)
    parts.append("WHERE {")
    parts.extend(lines)
    parts.append("}")
    if limit is not None:
        parts.append(f"LIMIT {limit}")
    return "\n".join(parts) + "\n"


def _filter_expression(sq: SubQuery, ontology: Ontology) -> str:
    condition: Condition = sq.condition
    var = "?" + subquery_var(sq.id)
    kind = ontology.properties[sq.property].range_kind
    op = condition.operator

    if op == CONTAINS:
        needle = escape_string(str(condition.operand).lower())
        return f'CONTAINS(LCASE(STR({var})), "{needle}")'
    if op == REGEX:
        pattern = escape_string(str(condition.operand))
        return f'REGEX(STR({var}), "{pattern}")'

    symbol = _COMPARISON[op]
    if kind == RANGE_NUMERIC:
        return f"{var} {symbol} {_render_number(condition.operand)}"
    if kind == RANGE_DATE:
        normalized = normalize_datetime_operand(str(condition.operand))
        return f'xsd:dateTime({var}) {symbol} "{normalized}"^^xsd:dateTime'
    if kind == RANGE_BOOLEAN:
        return f"{var} {symbol} {'true' if condition.operand else 'false'}"
    if kind == RANGE_IRI:
        return f"{var} {symbol} <{condition.operand}>"
    return f'STR({var}) {symbol} "{escape_string(str(condition.operand))}"'


def _render_number(value) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(float(value))
