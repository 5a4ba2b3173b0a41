"""Result-set overview: chart selection heuristic, binning, and CSV export.

One selected value gives a distribution (histogram for continuous data,
top categories for discrete); two continuous values give a scatter plot,
or a heatmap once there are too many points. Overlay mode computes shared
buckets/grids over the union of both sides so the series stay comparable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime

from .diffing import InstanceDiff
from .errors import (
    ChartKindMismatchError,
    EmptySeriesError,
    UnsupportedSelectionError,
)
from .graph import PrototypeGraph
from .ontology import Ontology
from .results import ResultTable, subquery_var
from .terms import (
    RANGE_DATE,
    RANGE_NUMERIC,
    Term,
    parse_datetime,
    parse_number,
)

HISTOGRAM = "histogram"
CATEGORIES = "categories"
SCATTER = "scatter"
HEATMAP = "heatmap"

CONTINUOUS = "continuous"
DISCRETE = "discrete"

DEFAULT_BUCKETS = 20
DEFAULT_TOP_K = 15
DEFAULT_HEATMAP_THRESHOLD = 1000
DEFAULT_HEATMAP_GRID = 40


@dataclass
class ColumnMeta:
    subquery: int
    kind: str
    non_null_count: int
    label: str = ""
    is_date: bool = False


@dataclass
class Series:
    name: str
    data: dict


@dataclass
class ChartSpec:
    chart: str
    series: list[Series]
    axes: dict
    parameters: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "chart": self.chart,
            "series": [{"name": s.name, "data": s.data} for s in self.series],
            "axes": self.axes,
            "parameters": self.parameters,
        }


def column_kind(range_kind: str) -> str:
    return CONTINUOUS if range_kind in (RANGE_NUMERIC, RANGE_DATE) else DISCRETE


def select_chart(cols: list[ColumnMeta], row_count: int, heatmap_threshold: int) -> str:
    """The pure decision table behind the overview panel."""
    if len(cols) == 1:
        return HISTOGRAM if cols[0].kind == CONTINUOUS else CATEGORIES
    if len(cols) == 2:
        if any(c.kind != CONTINUOUS for c in cols):
            raise UnsupportedSelectionError(
                "two-value selections need both values continuous"
            )
        return HEATMAP if row_count > heatmap_threshold else SCATTER
    raise UnsupportedSelectionError(f"cannot chart {len(cols)} selected values")


@dataclass
class Histogram:
    edges: list[float]
    counts: list[int]
    labels: list[str] | None = None

    def to_json(self) -> dict:
        out = {"edges": self.edges, "counts": self.counts}
        if self.labels is not None:
            out["labels"] = self.labels
        return out


def histogram(values: list[float], buckets: int, edges: list[float] | None = None) -> Histogram:
    """Equal-width bucketing over [min, max]; the max value lands in the last bucket.

    Degenerate all-equal input collapses to a single bucket of nominal width 1.
    Passing precomputed edges (for overlay mode) overrides the bucket count.
    """
    if buckets < 1:
        raise ValueError("buckets must be >= 1")
    if not values:
        raise EmptySeriesError("no values to bin")
    if edges is None:
        low, high = min(values), max(values)
        if low == high:
            edges = [low, low + 1.0]
        else:
            width = (high - low) / buckets
            edges = [low + i * width for i in range(buckets)] + [high]
    counts = [0] * (len(edges) - 1)
    low, high = edges[0], edges[-1]
    span = high - low
    for v in values:
        if v < low or v > high:
            continue
        if span <= 0:
            index = 0
        else:
            index = min(int((v - low) / span * len(counts)), len(counts) - 1)
        counts[index] += 1
    return Histogram(edges, counts)


@dataclass
class Categories:
    categories: list[tuple[str, int]]
    other: int

    def to_json(self) -> dict:
        return {
            "categories": [{"value": v, "count": c} for v, c in self.categories],
            "other": self.other,
        }


def top_categories(values: list[str], k: int, keys: list[str] | None = None) -> Categories:
    """Top k categories by count, ties broken lexicographically; rest is 'other'."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not values:
        raise EmptySeriesError("no values to count")
    counts: dict[str, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    if keys is None:
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        keys = [key for key, _ in ranked[:k]]
    listed = [(key, counts.get(key, 0)) for key in keys]
    other = len(values) - sum(c for _, c in listed)
    return Categories(listed, other)


@dataclass
class HeatmapGrid:
    x_edges: list[float]
    y_edges: list[float]
    cells: list[list[int]]

    def to_json(self) -> dict:
        return {"x_edges": self.x_edges, "y_edges": self.y_edges, "cells": self.cells}


def heatmap_grid(
    xs: list[float],
    ys: list[float],
    grid: int,
    x_edges: list[float] | None = None,
    y_edges: list[float] | None = None,
) -> HeatmapGrid:
    if not xs:
        raise EmptySeriesError("no points to grid")
    x_hist = histogram(xs, grid, x_edges)
    y_hist = histogram(ys, grid, y_edges)
    x_edges, y_edges = x_hist.edges, y_hist.edges
    cells = [[0] * (len(x_edges) - 1) for _ in range(len(y_edges) - 1)]

    def bucket(v: float, edges: list[float]) -> int | None:
        low, high = edges[0], edges[-1]
        if v < low or v > high:
            return None
        span = high - low
        n = len(edges) - 1
        if span <= 0:
            return 0
        return min(int((v - low) / span * n), n - 1)

    for x, y in zip(xs, ys):
        xi, yi = bucket(x, x_edges), bucket(y, y_edges)
        if xi is not None and yi is not None:
            cells[yi][xi] += 1
    return HeatmapGrid(x_edges, y_edges, cells)


# --- building chart specs from result tables ---

def column_meta(graph: PrototypeGraph, ontology: Ontology, table: ResultTable, sq_id: int) -> ColumnMeta:
    sq = graph.subqueries[sq_id]
    prop = ontology.properties[sq.property]
    kind = column_kind(prop.range_kind)
    cells = table.column_values(subquery_var(sq_id))
    if kind == CONTINUOUS:
        non_null = len(extract_continuous(cells, prop.range_kind == RANGE_DATE))
    else:
        non_null = sum(1 for c in cells if c is not None)
    return ColumnMeta(
        subquery=sq_id,
        kind=kind,
        non_null_count=non_null,
        label=prop.label,
        is_date=prop.range_kind == RANGE_DATE,
    )


def extract_continuous(cells: list[Term | None], is_date: bool) -> list[float]:
    """Numeric series from a column; dates bin on epoch seconds."""
    values: list[float] = []
    for cell in cells:
        if cell is None:
            continue
        if is_date:
            parsed = parse_datetime(cell.value)
            if parsed is not None:
                values.append(parsed.timestamp())
        else:
            number = parse_number(cell.value)
            if number is not None and math.isfinite(number):
                values.append(number)
    return values


def extract_discrete(cells: list[Term | None]) -> list[str]:
    return [c.value for c in cells if c is not None]


def _date_labels(edges: list[float]) -> list[str]:
    return [datetime.fromtimestamp(e).isoformat() for e in edges]


@dataclass
class ChartParams:
    buckets: int = DEFAULT_BUCKETS
    top_k: int = DEFAULT_TOP_K
    heatmap_threshold: int = DEFAULT_HEATMAP_THRESHOLD
    heatmap_grid: int = DEFAULT_HEATMAP_GRID


def build_chart(
    table: ResultTable,
    graph: PrototypeGraph,
    ontology: Ontology,
    selected: list[int],
    params: ChartParams | None = None,
    series_name: str = "results",
) -> ChartSpec:
    """Chart one result set for the selected value sub-queries."""
    params = params or ChartParams()
    cols = [column_meta(graph, ontology, table, sq_id) for sq_id in selected]
    kind = select_chart(cols, len(table.rows), params.heatmap_threshold)
    axes = _axes_for(cols)
    spec = ChartSpec(kind, [], axes, _params_json(params))
    spec.series.append(Series(series_name, _series_data(kind, table, cols, params)))
    if kind == HISTOGRAM and cols[0].is_date:
        for series in spec.series:
            series.data["labels"] = _date_labels(series.data["edges"])
    return spec


def build_overlay(
    left_table: ResultTable,
    right_table: ResultTable,
    graph_left: PrototypeGraph,
    graph_right: PrototypeGraph,
    ontology: Ontology,
    selected: list[int],
    params: ChartParams | None = None,
    names: tuple[str, str] = ("left", "right"),
) -> ChartSpec:
    """Two comparable series over shared axes, buckets, and category lists."""
    params = params or ChartParams()
    left_cols = [column_meta(graph_left, ontology, left_table, s) for s in selected]
    right_cols = [column_meta(graph_right, ontology, right_table, s) for s in selected]
    left_kind = select_chart(left_cols, len(left_table.rows), params.heatmap_threshold)
    right_kind = select_chart(right_cols, len(right_table.rows), params.heatmap_threshold)
    if left_kind != right_kind:
        raise ChartKindMismatchError(
            f"sides select different charts: {left_kind} vs {right_kind}"
        )
    kind = left_kind
    axes = _axes_for(left_cols)
    spec = ChartSpec(kind, [], axes, _params_json(params))

    if kind == HISTOGRAM:
        col = left_cols[0]
        var = subquery_var(col.subquery)
        left_vals = extract_continuous(left_table.column_values(var), col.is_date)
        right_vals = extract_continuous(right_table.column_values(var), col.is_date)
        if not left_vals and not right_vals:
            raise EmptySeriesError("both sides are empty")
        shared = histogram(left_vals + right_vals, params.buckets)
        for name, vals in zip(names, (left_vals, right_vals)):
            bucketed = histogram(vals, params.buckets, shared.edges) if vals else \
                Histogram(shared.edges, [0] * (len(shared.edges) - 1))
            data = bucketed.to_json()
            if col.is_date:
                data["labels"] = _date_labels(shared.edges)
            spec.series.append(Series(name, data))
    elif kind == CATEGORIES:
        var = subquery_var(left_cols[0].subquery)
        left_vals = extract_discrete(left_table.column_values(var))
        right_vals = extract_discrete(right_table.column_values(var))
        if not left_vals and not right_vals:
            raise EmptySeriesError("both sides are empty")
        shared = top_categories(left_vals + right_vals, params.top_k)
        keys = [k for k, _ in shared.categories]
        for name, vals in zip(names, (left_vals, right_vals)):
            counted = top_categories(vals, params.top_k, keys) if vals else \
                Categories([(k, 0) for k in keys], 0)
            spec.series.append(Series(name, counted.to_json()))
    else:
        xs_l, ys_l = _xy(left_table, left_cols)
        xs_r, ys_r = _xy(right_table, right_cols)
        if kind == SCATTER:
            bounds = _shared_bounds(xs_l + xs_r, ys_l + ys_r)
            spec.axes.update(bounds)
            spec.series.append(Series(names[0], {"points": list(zip(xs_l, ys_l))}))
            spec.series.append(Series(names[1], {"points": list(zip(xs_r, ys_r))}))
        else:
            if not (xs_l + xs_r):
                raise EmptySeriesError("both sides are empty")
            shared = heatmap_grid(xs_l + xs_r, ys_l + ys_r, params.heatmap_grid)
            for name, xs, ys in ((names[0], xs_l, ys_l), (names[1], xs_r, ys_r)):
                grid = heatmap_grid(xs, ys, params.heatmap_grid, shared.x_edges, shared.y_edges) \
                    if xs else HeatmapGrid(shared.x_edges, shared.y_edges,
                                           [[0] * (len(shared.x_edges) - 1)
                                            for _ in range(len(shared.y_edges) - 1)])
                spec.series.append(Series(name, grid.to_json()))
    return spec


def _series_data(kind: str, table: ResultTable, cols: list[ColumnMeta], params: ChartParams) -> dict:
    if kind == HISTOGRAM:
        col = cols[0]
        values = extract_continuous(table.column_values(subquery_var(col.subquery)), col.is_date)
        return histogram(values, params.buckets).to_json()
    if kind == CATEGORIES:
        values = extract_discrete(table.column_values(subquery_var(cols[0].subquery)))
        return top_categories(values, params.top_k).to_json()
    xs, ys = _xy(table, cols)
    if kind == SCATTER:
        return {"points": list(zip(xs, ys))}
    return heatmap_grid(xs, ys, params.heatmap_grid).to_json()


def _xy(table: ResultTable, cols: list[ColumnMeta]) -> tuple[list[float], list[float]]:
    x_idx = table.column_index(subquery_var(cols[0].subquery))
    y_idx = table.column_index(subquery_var(cols[1].subquery))
    xs, ys = [], []
    for row in table.rows:
        xc, yc = row[x_idx], row[y_idx]
        if xc is None or yc is None:
            continue
        x = _cell_float(xc, cols[0].is_date)
        y = _cell_float(yc, cols[1].is_date)
        if x is not None and y is not None:
            xs.append(x)
            ys.append(y)
    return xs, ys


def _cell_float(cell: Term, is_date: bool) -> float | None:
    if is_date:
        parsed = parse_datetime(cell.value)
        return parsed.timestamp() if parsed else None
    number = parse_number(cell.value)
    return number if number is not None and math.isfinite(number) else None


def _shared_bounds(xs: list[float], ys: list[float]) -> dict:
    if not xs:
        return {}
    return {
        "x_range": [min(xs), max(xs)],
        "y_range": [min(ys), max(ys)],
    }


def _axes_for(cols: list[ColumnMeta]) -> dict:
    if len(cols) == 1:
        return {"x": cols[0].label, "y": "count"}
    return {"x": cols[0].label, "y": cols[1].label}


def _params_json(params: ChartParams) -> dict:
    return {
        "buckets": params.buckets,
        "top_k": params.top_k,
        "heatmap_threshold": params.heatmap_threshold,
        "heatmap_grid": params.heatmap_grid,
    }


# --- CSV export ---

def export_csv(data) -> str:
    """RFC-4180-style CSV with a header row; dispatches on the payload type."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    if isinstance(data, ResultTable):
        writer.writerow(data.columns)
        for row in data.rows:
            writer.writerow(["" if c is None else c.value for c in row])
    elif isinstance(data, InstanceDiff):
        width = max(
            (len(k) for k in (data.instances_added | data.instances_removed | data.instances_shared)),
            default=0,
        )
        writer.writerow([f"instance_{i + 1}" for i in range(width)] + ["diff_status"])
        for status, keys in (
            ("added", data.instances_added),
            ("removed", data.instances_removed),
            ("shared", data.instances_shared),
        ):
            for key in sorted(keys):
                writer.writerow(list(key) + [""] * (width - len(key)) + [status])
    elif isinstance(data, ChartSpec):
        _chart_csv(writer, data)
    else:
        raise TypeError(f"cannot export {type(data).__name__} as CSV")
    return buffer.getvalue()


def _chart_csv(writer, spec: ChartSpec) -> None:
    if spec.chart == HISTOGRAM:
        writer.writerow(["series", "bucket_low", "bucket_high", "count"])
        for series in spec.series:
            edges, counts = series.data["edges"], series.data["counts"]
            for i, count in enumerate(counts):
                writer.writerow([series.name, edges[i], edges[i + 1], count])
    elif spec.chart == CATEGORIES:
        writer.writerow(["series", "category", "count"])
        for series in spec.series:
            for entry in series.data["categories"]:
                writer.writerow([series.name, entry["value"], entry["count"]])
            writer.writerow([series.name, "__other__", series.data["other"]])
    elif spec.chart == SCATTER:
        writer.writerow(["series", "x", "y"])
        for series in spec.series:
            for x, y in series.data["points"]:
                writer.writerow([series.name, x, y])
    else:
        writer.writerow(["series", "x_low", "x_high", "y_low", "y_high", "count"])
        for series in spec.series:
            x_edges = series.data["x_edges"]
            y_edges = series.data["y_edges"]
            for yi, row in enumerate(series.data["cells"]):
                for xi, count in enumerate(row):
                    writer.writerow([
                        series.name, x_edges[xi], x_edges[xi + 1],
                        y_edges[yi], y_edges[yi + 1], count,
                    ])
