"""In-memory triple store with a brute-force prototype-graph matcher.

The matcher is the semantic reference for generated SPARQL: exhaustive
backtracking over type triples (with subclass expansion), edges, and
sub-query bindings, with SPARQL bag semantics (unprojected constraint
bindings still multiply rows).
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

from . import rdfio
from .errors import InvalidGraphError
from .graph import CONSTRAINT, PrototypeGraph
from .ontology import Ontology
from .results import ResultTable, projection_columns, row_sort_key
from .terms import RDF_TYPE, Term, Triple, iri


class TripleStore:
    """Immutable set of triples with subject/predicate/object indexes."""

    def __init__(self, triples: list[Triple]):
        self.triples: list[Triple] = list(dict.fromkeys(triples))
        self._by_sp: dict[tuple[str, str], list[Term]] = defaultdict(list)
        self._by_po: dict[tuple[str, str], list[Term]] = defaultdict(list)
        self._by_p: dict[str, list[tuple[Term, Term]]] = defaultdict(list)
        for s, p, o in self.triples:
            self._by_p[p.value].append((s, o))
            self._by_sp[(s.value, p.value)].append(o)
            if o.kind != "literal":
                self._by_po[(p.value, o.value)].append(s)

    def __len__(self) -> int:
        return len(self.triples)

    def objects(self, subject: str, predicate: str) -> list[Term]:
        return self._by_sp.get((subject, predicate), [])

    def subjects(self, predicate: str, obj: str) -> list[Term]:
        return self._by_po.get((predicate, obj), [])

    def pairs(self, predicate: str) -> list[tuple[Term, Term]]:
        return self._by_p.get(predicate, [])

    def has(self, subject: str, predicate: str, obj: Term) -> bool:
        return any(o == obj for o in self.objects(subject, predicate))

    def entities_typed(self, class_iris: set[str]) -> list[str]:
        """Subjects having rdf:type in the given class set, deduplicated, sorted."""
        found: set[str] = set()
        for cls in class_iris:
            found.update(s.value for s in self.subjects(RDF_TYPE, cls))
        return sorted(found)

    @classmethod
    def from_ntriples(cls, document: str) -> "TripleStore":
        return cls(rdfio.parse_ntriples(document))

    @classmethod
    def from_file(cls, path: str | Path) -> "TripleStore":
        text = Path(path).read_text(encoding="utf-8")
        if str(path).endswith(".ttl"):
            return cls(rdfio.parse_turtle(text))
        return cls.from_ntriples(text)


def eval_local(
    store: TripleStore,
    g: PrototypeGraph,
    o: Ontology | None = None,
    limit: int | None = None,
) -> ResultTable:
    """Exhaustive match of the prototype graph against a local store.

    Subclass expansion is always applied to type matching; rows come back in
    canonical sorted order so tables are directly comparable.
    """
    ontology = o or g.ontology
    violations = g.validate(ontology)
    if violations:
        raise InvalidGraphError(violations)

    columns = projection_columns(g)
    if not g.nodes:
        return ResultTable(columns, [])

    node_ids = sorted(g.nodes)
    candidates: dict[int, list[str]] = {}
    for node_id in node_ids:
        subtype_iris = ontology.descendants(g.nodes[node_id].cls)
        candidates[node_id] = store.entities_typed(subtype_iris)

    edges = sorted(g.edges.values(), key=lambda e: e.id)
    subqueries = sorted(g.subqueries.values(), key=lambda s: s.id)

    rows: list[tuple[Term | None, ...]] = []

    def edges_ok(bound: dict[int, str], newest: int) -> bool:
        for edge in edges:
            if edge.tail in bound and edge.head in bound and newest in (edge.tail, edge.head):
                if not store.has(bound[edge.tail], edge.link, iri(bound[edge.head])):
                    return False
        return True

    def assign_nodes(index: int, bound: dict[int, str]) -> None:
        if index == len(node_ids):
            assign_subqueries(0, bound, {})
            return
        node_id = node_ids[index]
        for entity in candidates[node_id]:
            bound[node_id] = entity
            if edges_ok(bound, node_id):
                assign_nodes(index + 1, bound)
            del bound[node_id]

    def assign_subqueries(index: int, nodes: dict[int, str], values: dict[int, Term]) -> None:
        if index == len(subqueries):
            row = [iri(nodes[i]) for i in node_ids]
            row += [values[s.id] for s in subqueries if s.kind != CONSTRAINT]
            rows.append(tuple(row))
            return
        sq = subqueries[index]
        range_kind = ontology.properties[sq.property].range_kind
        for term in store.objects(nodes[sq.node], sq.property):
            if sq.kind == CONSTRAINT and not sq.condition.evaluate(term, range_kind):
                continue
            values[sq.id] = term
            assign_subqueries(index + 1, nodes, values)
            del values[sq.id]

    assign_nodes(0, {})
    table = ResultTable(columns, sorted(rows, key=row_sort_key))
    if limit is not None:
        table = ResultTable(columns, table.rows[:limit])
    return table


def count_local(store: TripleStore, g: PrototypeGraph, o: Ontology | None = None) -> int:
    return len(eval_local(store, g, o).rows)
