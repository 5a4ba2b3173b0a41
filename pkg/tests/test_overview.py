import csv
import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EX, patient_graph
from protoquery.diffing import InstanceDiff, diff_instances
from protoquery.errors import (
    ChartKindMismatchError,
    EmptySeriesError,
    UnsupportedSelectionError,
)
from protoquery.localstore import eval_local
from protoquery.overview import (
    CATEGORIES,
    CONTINUOUS,
    DISCRETE,
    HEATMAP,
    HISTOGRAM,
    SCATTER,
    ChartParams,
    ColumnMeta,
    build_chart,
    build_overlay,
    export_csv,
    heatmap_grid,
    histogram,
    select_chart,
    top_categories,
)
from protoquery.results import InstanceGraph, ResultTable
from protoquery.terms import iri, literal


def col(kind: str, n: int = 10) -> ColumnMeta:
    return ColumnMeta(subquery=0, kind=kind, non_null_count=n)


def test_decision_table_single_column():
    assert select_chart([col(CONTINUOUS)], 10, 1000) == HISTOGRAM
    assert select_chart([col(DISCRETE)], 10, 1000) == CATEGORIES


def test_decision_table_two_columns():
    two = [col(CONTINUOUS), ColumnMeta(1, CONTINUOUS, 10)]
    assert select_chart(two, 50_000, 1000) == HEATMAP
    assert select_chart(two, 200, 1000) == SCATTER
    assert select_chart(two, 1000, 1000) == SCATTER  # threshold is strict


def test_decision_table_rejects_bad_selections():
    with pytest.raises(UnsupportedSelectionError):
        select_chart([], 10, 1000)
    with pytest.raises(UnsupportedSelectionError):
        select_chart([col(CONTINUOUS), ColumnMeta(1, DISCRETE, 10)], 10, 1000)
    with pytest.raises(UnsupportedSelectionError):
        select_chart([col(CONTINUOUS)] * 3, 10, 1000)


def test_histogram_uniform():
    h = histogram([float(i) for i in range(10)], 10)
    assert h.counts == [1] * 10
    assert h.edges[0] == 0.0 and h.edges[-1] == 9.0


def test_histogram_max_value_in_last_bucket():
    h = histogram([0.0, 10.0], 5)
    assert h.counts[-1] == 1
    assert sum(h.counts) == 2


def test_histogram_degenerate_all_equal():
    h = histogram([3.0] * 7, 20)
    assert len(h.counts) == 1
    assert h.counts == [7]
    assert h.edges == [3.0, 4.0]


def test_histogram_empty_series():
    with pytest.raises(EmptySeriesError):
        histogram([], 5)


def test_histogram_matches_independent_binning_oracle():
    rng = random.Random(7)
    values = [rng.uniform(-50, 120) for _ in range(500)]
    buckets = 20
    h = histogram(values, buckets)
    low, high = min(values), max(values)
    width = (high - low) / buckets
    expected = [0] * buckets
    for v in values:
        idx = buckets - 1 if v == high else int((v - low) // width)
        idx = min(idx, buckets - 1)
        expected[idx] += 1
    assert h.counts == expected


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=300),
       st.integers(min_value=1, max_value=40))
def test_histogram_conservation(values, buckets):
    h = histogram(values, buckets)
    assert sum(h.counts) == len(values)


def test_top_categories_small_vocabulary():
    c = top_categories(["a", "b", "a", "c"], 5)
    assert c.categories == [("a", 2), ("b", 1), ("c", 1)]
    assert c.other == 0


def test_top_categories_tie_broken_lexicographically():
    values = ["USA"] * 3 + ["Russia"] * 3 + ["Chile"] * 1
    c = top_categories(values, 1)
    assert c.categories[0][0] == "Russia"
    assert c.other == 4


def test_top_categories_other_reconciles():
    values = [f"cat{i:03d}" for i in range(100) for _ in range(i % 5 + 1)]
    c = top_categories(values, 15)
    assert len(c.categories) == 15
    assert sum(n for _, n in c.categories) + c.other == len(values)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from("abcdefghij"), min_size=1, max_size=200),
       st.integers(min_value=1, max_value=12))
def test_top_categories_conservation(values, k):
    c = top_categories(values, k)
    assert sum(n for _, n in c.categories) + c.other == len(values)


def test_heatmap_grid_counts_conserved():
    rng = random.Random(11)
    xs = [rng.uniform(0, 10) for _ in range(200)]
    ys = [rng.uniform(-5, 5) for _ in range(200)]
    grid = heatmap_grid(xs, ys, 8)
    assert sum(sum(row) for row in grid.cells) == 200


# --- chart building over result tables ---

def _table(values: list[str | None], column: str = "s0") -> ResultTable:
    rows = [
        (iri(f"http://x.org/e{i}"), None if v is None else literal(v))
        for i, v in enumerate(values)
    ]
    return ResultTable(["n0", column], rows)


def test_build_chart_histogram(ontology, patient_store):
    g = patient_graph(ontology, negated=False)
    table = eval_local(patient_store, g)
    spec = build_chart(table, g, ontology, [1], ChartParams(buckets=5))
    assert spec.chart == HISTOGRAM
    assert len(spec.series) == 1
    assert sum(spec.series[0].data["counts"]) == len(table.rows)


def test_build_chart_categories(ontology, tv_store):
    from protoquery.graph import PrototypeGraph

    g = PrototypeGraph(ontology)
    place = g.add_node(EX + "PopulatedPlace")
    g.set_subquery(place, EX + "name", "value")
    table = eval_local(tv_store, g)
    spec = build_chart(table, g, ontology, [0], ChartParams(top_k=2))
    assert spec.chart == CATEGORIES
    data = spec.series[0].data
    assert sum(e["count"] for e in data["categories"]) + data["other"] == len(table.rows)


def test_build_chart_scatter_and_heatmap(ontology, ships_store):
    from protoquery.graph import PrototypeGraph

    g = PrototypeGraph(ontology)
    ship = g.add_node(EX + "Ship")
    g.set_subquery(ship, EX + "lengthM", "value")
    g.set_subquery(ship, EX + "commissioned", "value")
    table = eval_local(ships_store, g)
    scatter = build_chart(table, g, ontology, [0, 1], ChartParams(heatmap_threshold=1000))
    assert scatter.chart == SCATTER
    heatmap = build_chart(table, g, ontology, [0, 1], ChartParams(heatmap_threshold=3))
    assert heatmap.chart == HEATMAP


def test_date_histogram_gets_iso_labels(ontology, ships_store):
    from protoquery.graph import PrototypeGraph

    g = PrototypeGraph(ontology)
    ship = g.add_node(EX + "Ship")
    g.set_subquery(ship, EX + "commissioned", "value")
    table = eval_local(ships_store, g)
    spec = build_chart(table, g, ontology, [0], ChartParams(buckets=4))
    labels = spec.series[0].data["labels"]
    assert len(labels) == len(spec.series[0].data["edges"])
    assert labels[0].startswith("19")


def test_overlay_histogram_shares_edges(ontology, patient_store):
    left_graph = patient_graph(ontology, negated=False)
    right_graph = patient_graph(ontology, negated=True)
    left = eval_local(patient_store, left_graph)
    right = eval_local(patient_store, right_graph)
    spec = build_overlay(
        left, right, left_graph, right_graph, ontology, [1], ChartParams(buckets=6)
    )
    assert spec.chart == HISTOGRAM
    assert len(spec.series) == 2
    assert spec.series[0].data["edges"] == spec.series[1].data["edges"]
    assert sum(spec.series[0].data["counts"]) == len(left.rows)
    assert sum(spec.series[1].data["counts"]) == len(right.rows)
    # the two patient groups do not overlap in age in the fixture
    assert spec.series[0].data["counts"] != spec.series[1].data["counts"]


def test_overlay_identical_sides(ontology, patient_store):
    g = patient_graph(ontology, negated=False)
    table = eval_local(patient_store, g)
    spec = build_overlay(table, table, g, g, ontology, [1], ChartParams(buckets=6))
    assert spec.series[0].data == spec.series[1].data


def test_overlay_kind_mismatch(ontology, ships_store):
    from protoquery.graph import PrototypeGraph

    g = PrototypeGraph(ontology)
    ship = g.add_node(EX + "Ship")
    g.set_subquery(ship, EX + "lengthM", "value")
    g.set_subquery(ship, EX + "commissioned", "value")
    table = eval_local(ships_store, g)
    small = ResultTable(table.columns, table.rows[:2])
    with pytest.raises(ChartKindMismatchError):
        build_overlay(table, small, g, g, ontology, [0, 1], ChartParams(heatmap_threshold=4))


def test_overlay_scatter_two_series(ontology, ships_store):
    from protoquery.conditions import Condition
    from protoquery.graph import PrototypeGraph

    def ships_of(country_name: str):
        g = PrototypeGraph(ontology)
        ship = g.add_node(EX + "Ship")
        port = g.add_node(EX + "PopulatedPlace")
        country = g.add_node(EX + "Country")
        g.add_edge(ship, EX + "homeport", port)
        g.add_edge(port, EX + "country", country)
        g.set_subquery(ship, EX + "lengthM", "value")
        g.set_subquery(ship, EX + "commissioned", "value")
        g.set_subquery(country, EX + "name", "constraint", Condition("eq", country_name))
        return g

    us, ru = ships_of("United States"), ships_of("Russia")
    us_table = eval_local(ships_store, us)
    ru_table = eval_local(ships_store, ru)
    spec = build_overlay(us_table, ru_table, us, ru, ontology, [0, 1], ChartParams())
    assert spec.chart == SCATTER
    assert len(spec.series) == 2
    assert len(spec.series[0].data["points"]) == 4
    assert len(spec.series[1].data["points"]) == 2


# --- CSV export ---

def test_export_empty_table_is_header_only():
    out = export_csv(ResultTable(["a", "b"], []))
    assert out.splitlines() == ["a,b"]


def test_export_instance_diff_statuses():
    diff = InstanceDiff(
        instances_added={("http://x.org/new",)},
        instances_removed={("http://x.org/gone",)},
        instances_shared=set(),
    )
    out = export_csv(diff)
    rows = list(csv.DictReader(io.StringIO(out)))
    statuses = sorted(r["diff_status"] for r in rows)
    assert statuses == ["added", "removed"]


def test_export_csv_reparse_matches_diff_sets():
    left = [InstanceGraph(((0, f"http://x.org/e{i}"),)) for i in range(5)]
    right = [InstanceGraph(((0, f"http://x.org/e{i}"),)) for i in range(2, 7)]
    diff = diff_instances(left, right)
    rows = list(csv.DictReader(io.StringIO(export_csv(diff))))
    by_status = {"added": 0, "removed": 0, "shared": 0}
    for row in rows:
        by_status[row["diff_status"]] += 1
    assert by_status["added"] == len(diff.instances_added) == 2
    assert by_status["removed"] == len(diff.instances_removed) == 2
    assert by_status["shared"] == len(diff.instances_shared) == 3


def test_export_chart_csv(ontology, patient_store):
    g = patient_graph(ontology, negated=False)
    table = eval_local(patient_store, g)
    spec = build_chart(table, g, ontology, [1], ChartParams(buckets=4))
    rows = list(csv.DictReader(io.StringIO(export_csv(spec))))
    assert sum(int(r["count"]) for r in rows) == len(table.rows)


def test_export_quotes_embedded_commas():
    table = ResultTable(["s0"], [(literal("a,b"),)])
    out = export_csv(table)
    assert '"a,b"' in out
