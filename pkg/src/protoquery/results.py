"""Tabular query results and per-row instance graphs."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ProjectionMismatchError
from .graph import PrototypeGraph
from .terms import Term


def node_var(node_id: int) -> str:
    return f"n{node_id}"


def subquery_var(sq_id: int) -> str:
    return f"s{sq_id}"


def projection_columns(graph: PrototypeGraph) -> list[str]:
    """Node variables by node id, then value variables by sub-query id."""
    cols = [node_var(i) for i in sorted(graph.nodes)]
    cols += [subquery_var(s.id) for s in graph.value_subqueries()]
    return cols


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple[Term | None, ...]] = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ProjectionMismatchError(
                    f"row has {len(row)} cells, expected {len(self.columns)}"
                )

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise ProjectionMismatchError(f"no column {name!r}") from None

    def column_values(self, name: str) -> list[Term | None]:
        idx = self.column_index(name)
        return [row[idx] for row in self.rows]

    def sorted_rows(self) -> list[tuple[Term | None, ...]]:
        return sorted(self.rows, key=row_sort_key)

    def to_json(self) -> dict:
        return {
            "columns": list(self.columns),
            "rows": [[cell_to_json(c) for c in row] for row in self.rows],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ResultTable":
        return cls(
            columns=list(doc["columns"]),
            rows=[tuple(cell_from_json(c) for c in row) for row in doc["rows"]],
        )


def cell_to_json(cell: Term | None):
    if cell is None:
        return None
    out = {"kind": cell.kind, "value": cell.value}
    if cell.datatype:
        out["datatype"] = cell.datatype
    if cell.lang:
        out["lang"] = cell.lang
    return out


def cell_from_json(doc) -> Term | None:
    if doc is None:
        return None
    return Term(doc["kind"], doc["value"], doc.get("datatype"), doc.get("lang"))


def row_sort_key(row: tuple[Term | None, ...]) -> tuple:
    """Canonical lexicographic key over cell strings; None sorts first."""
    return tuple(
        ("", "", "") if c is None else (c.value, c.kind, c.datatype or "") for c in row
    )


@dataclass(frozen=True)
class InstanceGraph:
    """One concrete match: prototype node id -> entity IRI, value sub-query id -> literal."""

    node_bindings: tuple[tuple[int, str], ...]
    value_bindings: tuple[tuple[int, str], ...] = ()

    def nodes(self) -> dict[int, str]:
        return dict(self.node_bindings)

    def values(self) -> dict[int, str]:
        return dict(self.value_bindings)

    def key_over(self, shared_nodes: set[int]) -> tuple[str, ...]:
        """Identity restricted to shared prototype nodes, IRIs sorted."""
        return tuple(sorted(v for k, v in self.node_bindings if k in shared_nodes))


def to_instance_graphs(table: ResultTable, graph: PrototypeGraph) -> list[InstanceGraph]:
    """One instance graph per distinct row of a result table.

    Raises ProjectionMismatchError when the table's columns do not match the
    graph's projection contract.
    """
    expected = projection_columns(graph)
    if list(table.columns) != expected:
        raise ProjectionMismatchError(
            f"table columns {table.columns} do not match projection {expected}"
        )
    node_ids = sorted(graph.nodes)
    value_ids = [s.id for s in graph.value_subqueries()]
    seen: set[InstanceGraph] = set()
    out: list[InstanceGraph] = []
    for row in table.rows:
        node_bindings = []
        for offset, node_id in enumerate(node_ids):
            cell = row[offset]
            node_bindings.append((node_id, cell.value if cell else ""))
        value_bindings = []
        for offset, sq_id in enumerate(value_ids):
            cell = row[len(node_ids) + offset]
            if cell is not None:
                value_bindings.append((sq_id, cell.value))
        instance = InstanceGraph(tuple(node_bindings), tuple(value_bindings))
        if instance not in seen:
            seen.add(instance)
            out.append(instance)
    return out
