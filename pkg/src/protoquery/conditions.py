"""Sub-query filter conditions: the eight-operator grammar plus negation.

A Condition is always typed against the property's range kind; the same
semantics back both the direct evaluator and the generated SPARQL filters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from .errors import OperatorKindError
from .terms import (
    RANGE_BOOLEAN,
    RANGE_DATE,
    RANGE_IRI,
    RANGE_KINDS,
    RANGE_NUMERIC,
    RANGE_TEXT,
    Term,
    parse_boolean,
    parse_datetime,
    parse_number,
)

EQ = "eq"
NEQ = "neq"
LT = "lt"
LEQ = "leq"
GT = "gt"
GEQ = "geq"
CONTAINS = "contains"
REGEX = "regex"

OPERATORS = (EQ, NEQ, LT, LEQ, GT, GEQ, CONTAINS, REGEX)
ORDER_OPERATORS = (LT, LEQ, GT, GEQ)
TEXT_OPERATORS = (CONTAINS, REGEX)


def operator_compatible(operator: str, range_kind: str) -> bool:
    """Ordering operators need numeric/date; contains/regex need text."""
    if operator not in OPERATORS:
        return False
    if operator in ORDER_OPERATORS:
        return range_kind in (RANGE_NUMERIC, RANGE_DATE)
    if operator in TEXT_OPERATORS:
        return range_kind == RANGE_TEXT
    return True


def _operand_ok(operand: Any, range_kind: str) -> bool:
    if range_kind == RANGE_NUMERIC:
        return isinstance(operand, (int, float)) and not isinstance(operand, bool)
    if range_kind == RANGE_BOOLEAN:
        return isinstance(operand, bool)
    if range_kind == RANGE_DATE:
        return isinstance(operand, str) and parse_datetime(operand) is not None
    return isinstance(operand, str)


@dataclass(frozen=True)
class Condition:
    operator: str
    operand: Any
    negated: bool = False

    def validate_for(self, range_kind: str) -> None:
        if range_kind not in RANGE_KINDS:
            raise OperatorKindError(f"unknown range kind {range_kind!r}")
        if not operator_compatible(self.operator, range_kind):
            raise OperatorKindError(
                f"operator {self.operator!r} is not usable on a {range_kind} property"
            )
        if not _operand_ok(self.operand, range_kind):
            raise OperatorKindError(
                f"operand {self.operand!r} does not fit range kind {range_kind!r}"
            )

    def to_json(self) -> dict:
        return {"operator": self.operator, "negated": self.negated, "operand": self.operand}

    @classmethod
    def from_json(cls, doc: dict) -> "Condition":
        return cls(
            operator=doc["operator"],
            operand=doc["operand"],
            negated=bool(doc.get("negated", False)),
        )

    def evaluate(self, term: Term, range_kind: str) -> bool:
        """Apply the condition to a bound RDF term.

        Mirrors SPARQL error semantics: an untypable comparison is an error,
        and errors stay errors under negation, so the row is excluded either
        way.
        """
        raw = _apply_operator(self.operator, self.operand, term, range_kind)
        if raw is None:
            return False
        return (not raw) if self.negated else raw


def _apply_operator(operator: str, operand: Any, term: Term, range_kind: str) -> bool | None:
    if operator in TEXT_OPERATORS:
        text = term.value
        if operator == CONTAINS:
            return str(operand).lower() in text.lower()
        try:
            return re.search(str(operand), text) is not None
        except re.error:
            return None

    if range_kind == RANGE_NUMERIC:
        left = parse_number(term.value) if term.is_literal() else None
        right = float(operand)
    elif range_kind == RANGE_DATE:
        left = parse_datetime(term.value) if term.is_literal() else None
        right = parse_datetime(str(operand))
    elif range_kind == RANGE_BOOLEAN:
        left = parse_boolean(term.value) if term.is_literal() else None
        right = bool(operand)
    elif range_kind == RANGE_IRI:
        left = term.value if term.is_iri() else None
        right = str(operand)
    else:
        # text equality is STR()-based, so IRIs compare by their string form
        left = term.value
        right = str(operand)
    if left is None or right is None:
        return None

    if operator == EQ:
        return left == right
    if operator == NEQ:
        return left != right
    if operator == LT:
        return left < right
    if operator == LEQ:
        return left <= right
    if operator == GT:
        return left > right
    if operator == GEQ:
        return left >= right
    return None
