"""Exception hierarchy shared by all protoquery modules."""

from __future__ import annotations


class ProtoQueryError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


# --- ontology ingestion ---

class ParseError(ProtoQueryError):
    """Malformed RDF document."""

    code = "parse_error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", col {column})" if column is not None else ")")
        super().__init__(f"{message}{where}")


class CyclicHierarchyError(ProtoQueryError):
    """The subclass relation contains a cycle."""

    code = "cyclic_hierarchy"

    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("subclass cycle: " + " -> ".join(cycle + cycle[:1]))


class UnknownClassError(ProtoQueryError):
    code = "unknown_class"


# --- prototype graph ---

class UnknownElementError(ProtoQueryError):
    code = "unknown_element"


class TypeMismatchError(ProtoQueryError):
    """Edge endpoint class is not admissible for the link."""

    code = "type_mismatch"

    def __init__(self, endpoint: str, actual: str, expected: str, link: str):
        self.endpoint = endpoint
        self.actual = actual
        self.expected = expected
        self.link = link
        super().__init__(
            f"{endpoint} of link <{link}> must be a subtype of <{expected}>, got <{actual}>"
        )


class PropertyDomainError(ProtoQueryError):
    code = "property_domain"


class OperatorKindError(ProtoQueryError):
    """Condition operator incompatible with the property's range kind."""

    code = "operator_kind"


class GraphFormatError(ProtoQueryError):
    """Graph document does not match the canonical file schema."""

    code = "graph_format"


# --- query generation / execution ---

class InvalidGraphError(ProtoQueryError):
    code = "invalid_graph"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            "graph fails validation: " + "; ".join(str(v) for v in self.violations)
        )


class EmptyGraphError(ProtoQueryError):
    code = "empty_graph"


class NetworkError(ProtoQueryError):
    code = "network_error"


class QueryTimeoutError(NetworkError):
    code = "timeout"


class EndpointError(ProtoQueryError):
    """Endpoint answered with a non-success HTTP status."""

    code = "endpoint_error"

    def __init__(self, status: int, body: str):
        self.status = status
        self.body = body
        super().__init__(f"endpoint returned HTTP {status}: {body[:500]}")


class MalformedResultsError(ProtoQueryError):
    code = "malformed_results"


class ProjectionMismatchError(ProtoQueryError):
    code = "projection_mismatch"


# --- diffing ---

class IncomparableResultsError(ProtoQueryError):
    code = "incomparable_results"


class ValueSelectionMismatchError(ProtoQueryError):
    code = "value_selection_mismatch"


# --- result overview ---

class UnsupportedSelectionError(ProtoQueryError):
    code = "unsupported_selection"


class EmptySeriesError(ProtoQueryError):
    code = "empty_series"


class ChartKindMismatchError(ProtoQueryError):
    code = "chart_kind_mismatch"


# --- NL change-set pipeline ---

class EmbedderError(ProtoQueryError):
    code = "embedder_error"


class StorageError(ProtoQueryError):
    code = "storage_error"


class LmError(ProtoQueryError):
    code = "lm_error"


class SchemaViolationError(ProtoQueryError):
    """Provider output does not conform to the change-set schema."""

    code = "schema_violation"


class UnrepairableError(ProtoQueryError):
    """Post-repair apply still fails validation; indicates an internal bug."""

    code = "unrepairable"


# --- server ---

class UnknownSnapshotError(ProtoQueryError):
    code = "unknown_snapshot"


class StaleProposalError(ProtoQueryError):
    code = "stale_proposal"


class PendingProposalError(ProtoQueryError):
    code = "pending_proposal"
