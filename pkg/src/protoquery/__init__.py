"""Ontology-constrained prototype-graph query building with diff views."""

from .conditions import Condition
from .diffing import GraphDiff, InstanceDiff, diff_graphs, diff_instances, diff_result_values
from .graph import PrototypeGraph
from .localstore import TripleStore, eval_local
from .ontology import Ontology, ingest_ontology
from .results import InstanceGraph, ResultTable, to_instance_graphs
from .sparqlgen import generate_count, generate_select

__version__ = "0.1.0"

__all__ = [
    "Condition",
    "GraphDiff",
    "InstanceDiff",
    "InstanceGraph",
    "Ontology",
    "PrototypeGraph",
    "ResultTable",
    "TripleStore",
    "diff_graphs",
    "diff_instances",
    "diff_result_values",
    "eval_local",
    "generate_count",
    "generate_select",
    "ingest_ontology",
    "to_instance_graphs",
    "__version__",
]
