"""Difference sets between two prototype-graph versions and their results.

Elements are compared by serial id, so the two graphs must share an id
space (one is an ancestor snapshot of the other, or both descend from a
common ancestor). Added/deleted/shared always partition the two id sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import IncomparableResultsError, ValueSelectionMismatchError
from .graph import PrototypeGraph
from .results import InstanceGraph, ResultTable, subquery_var


@dataclass
class GraphDiff:
    nodes_added: set[int] = field(default_factory=set)
    nodes_deleted: set[int] = field(default_factory=set)
    nodes_shared: set[int] = field(default_factory=set)
    edges_added: set[int] = field(default_factory=set)
    edges_deleted: set[int] = field(default_factory=set)
    edges_shared: set[int] = field(default_factory=set)
    subqueries_added: set[int] = field(default_factory=set)
    subqueries_deleted: set[int] = field(default_factory=set)
    subqueries_shared: set[int] = field(default_factory=set)
    subqueries_changed: set[int] = field(default_factory=set)

    def is_empty(self) -> bool:
        return not (
            self.nodes_added or self.nodes_deleted
            or self.edges_added or self.edges_deleted
            or self.subqueries_added or self.subqueries_deleted
            or self.subqueries_changed
        )

    def status_of(self, kind: str, element_id: int) -> str | None:
        """added/deleted/changed/shared for an element, or None if unknown."""
        added, deleted, shared = {
            "node": (self.nodes_added, self.nodes_deleted, self.nodes_shared),
            "edge": (self.edges_added, self.edges_deleted, self.edges_shared),
            "subquery": (
                self.subqueries_added, self.subqueries_deleted, self.subqueries_shared,
            ),
        }[kind]
        if element_id in added:
            return "added"
        if element_id in deleted:
            return "deleted"
        if kind == "subquery" and element_id in self.subqueries_changed:
            return "changed"
        if element_id in shared:
            return "shared"
        return None

    def to_json(self) -> dict:
        return {
            "nodes": {
                "added": sorted(self.nodes_added),
                "deleted": sorted(self.nodes_deleted),
                "shared": sorted(self.nodes_shared),
            },
            "edges": {
                "added": sorted(self.edges_added),
                "deleted": sorted(self.edges_deleted),
                "shared": sorted(self.edges_shared),
            },
            "subqueries": {
                "added": sorted(self.subqueries_added),
                "deleted": sorted(self.subqueries_deleted),
                "shared": sorted(self.subqueries_shared),
                "changed": sorted(self.subqueries_changed),
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GraphDiff":
        return cls(
            nodes_added=set(doc["nodes"]["added"]),
            nodes_deleted=set(doc["nodes"]["deleted"]),
            nodes_shared=set(doc["nodes"]["shared"]),
            edges_added=set(doc["edges"]["added"]),
            edges_deleted=set(doc["edges"]["deleted"]),
            edges_shared=set(doc["edges"]["shared"]),
            subqueries_added=set(doc["subqueries"]["added"]),
            subqueries_deleted=set(doc["subqueries"]["deleted"]),
            subqueries_shared=set(doc["subqueries"]["shared"]),
            subqueries_changed=set(doc["subqueries"]["changed"]),
        )


def diff_graphs(left: PrototypeGraph, right: PrototypeGraph) -> GraphDiff:
    """Identity-based difference sets between two graph versions."""
    diff = GraphDiff()
    left_nodes, right_nodes = set(left.nodes), set(right.nodes)
    diff.nodes_added = right_nodes - left_nodes
    diff.nodes_deleted = left_nodes - right_nodes
    diff.nodes_shared = left_nodes & right_nodes

    left_edges, right_edges = set(left.edges), set(right.edges)
    diff.edges_added = right_edges - left_edges
    diff.edges_deleted = left_edges - right_edges
    diff.edges_shared = left_edges & right_edges

    left_sqs, right_sqs = set(left.subqueries), set(right.subqueries)
    diff.subqueries_added = right_sqs - left_sqs
    diff.subqueries_deleted = left_sqs - right_sqs
    diff.subqueries_shared = left_sqs & right_sqs
    diff.subqueries_changed = {
        sq_id
        for sq_id in diff.subqueries_shared
        if left.subqueries[sq_id].canonical() != right.subqueries[sq_id].canonical()
    }
    return diff


@dataclass
class InstanceDiff:
    instances_added: set[tuple[str, ...]] = field(default_factory=set)
    instances_removed: set[tuple[str, ...]] = field(default_factory=set)
    instances_shared: set[tuple[str, ...]] = field(default_factory=set)

    def to_json(self) -> dict:
        return {
            "added": sorted(list(k) for k in self.instances_added),
            "removed": sorted(list(k) for k in self.instances_removed),
            "shared": sorted(list(k) for k in self.instances_shared),
        }


def diff_instances(
    left: list[InstanceGraph],
    right: list[InstanceGraph],
    shared_nodes: set[int] | None = None,
) -> InstanceDiff:
    """Compare result rows of two versions by their shared-node instance IRIs.

    Keys use only prototype nodes present on both sides, so instance diffs
    survive node additions. shared_nodes defaults to the intersection of the
    node ids seen in the two binding sets.
    """
    if shared_nodes is None:
        left_ids = {k for ig in left for k, _ in ig.node_bindings}
        right_ids = {k for ig in right for k, _ in ig.node_bindings}
        if left and right:
            shared_nodes = left_ids & right_ids
        else:
            shared_nodes = left_ids | right_ids
        if not shared_nodes and (left or right):
            raise IncomparableResultsError("no shared prototype nodes between result sets")
        if not left and not right:
            return InstanceDiff()
    elif not shared_nodes:
        raise IncomparableResultsError("no shared prototype nodes between result sets")

    left_keys = {ig.key_over(shared_nodes) for ig in left}
    right_keys = {ig.key_over(shared_nodes) for ig in right}
    return InstanceDiff(
        instances_added=right_keys - left_keys,
        instances_removed=left_keys - right_keys,
        instances_shared=left_keys & right_keys,
    )


@dataclass
class PairedSeries:
    subquery: int
    left: list
    right: list


def diff_result_values(
    left_table: ResultTable,
    right_table: ResultTable,
    left_graph: PrototypeGraph,
    right_graph: PrototypeGraph,
    selected: list[int],
) -> list[PairedSeries]:
    """Aligned left/right column series for the selected value sub-queries.

    Distribution-level comparison only: no row matching is attempted. Raises
    ValueSelectionMismatchError unless every selected value sub-query exists
    on both sides with the same property and node.
    """
    out: list[PairedSeries] = []
    for sq_id in selected:
        left_sq = left_graph.subqueries.get(sq_id)
        right_sq = right_graph.subqueries.get(sq_id)
        if left_sq is None or right_sq is None:
            raise ValueSelectionMismatchError(
                f"value sub-query {sq_id} is not present in both graph versions"
            )
        if left_sq.kind != "value" or right_sq.kind != "value":
            raise ValueSelectionMismatchError(f"sub-query {sq_id} is not a value selection")
        if (left_sq.property, left_sq.node) != (right_sq.property, right_sq.node):
            raise ValueSelectionMismatchError(
                f"value sub-query {sq_id} differs between versions"
            )
        var = subquery_var(sq_id)
        left_vals = [c.value for c in left_table.column_values(var) if c is not None]
        right_vals = [c.value for c in right_table.column_values(var) if c is not None]
        out.append(PairedSeries(sq_id, left_vals, right_vals))
    return out
