"""Parser and evaluator for the SPARQL subset served by the loopback endpoint.

This is a second, text-level execution path: queries arrive as SPARQL 1.1
strings, are parsed into an AST, and are joined against a TripleStore with
bag semantics and three-valued filter logic. It never looks at the
prototype graph, which is what makes endpoint-vs-local comparisons a real
check on the generator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime

from .errors import ParseError
from .localstore import TripleStore
from .terms import (
    RDF_TYPE,
    XSD,
    Term,
    iri,
    literal,
    parse_boolean,
    parse_datetime,
    parse_number,
    unescape_string,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<dtype>\^\^)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<pname>[A-Za-z_][A-Za-z0-9_.-]*:[A-Za-z0-9_.-]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|[=<>!{}().,*;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class TriplePattern:
    s: "Var | Term"
    p: "Var | Term"
    o: "Var | Term"


@dataclass
class Union:
    branches: list["Group"]


@dataclass
class Group:
    triples: list
    filters: list


@dataclass
class ParsedQuery:
    variables: list[str]
    count: bool
    group: Group
    limit: int | None


# --- expression AST ---

@dataclass(frozen=True)
class Lit:
    value: object


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


@dataclass(frozen=True)
class Compare:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    inner: object


class _Tokens:
    def __init__(self, text: str):
        self.tokens: list[tuple[str, str]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"cannot tokenize query near {text[pos:pos+20]!r}")
            pos = m.end()
            kind = m.lastgroup
            if kind in ("ws", "comment"):
                continue
            self.tokens.append((kind, m.group()))
        self.index = 0

    def peek(self) -> tuple[str, str]:
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return ("eof", "")

    def next(self) -> tuple[str, str]:
        token = self.peek()
        self.index += 1
        return token

    def expect_op(self, op: str) -> None:
        kind, value = self.next()
        if value != op:
            raise ParseError(f"expected {op!r}, found {value!r}")

    def match_keyword(self, word: str) -> bool:
        kind, value = self.peek()
        if kind in ("name", "pname") and value.upper() == word.upper():
            self.next()
            return True
        return False

    def expect_keyword(self, word: str) -> None:
        if not self.match_keyword(word):
            raise ParseError(f"expected keyword {word}, found {self.peek()[1]!r}")


def parse_query(text: str) -> ParsedQuery:
    t = _Tokens(text)
    prefixes: dict[str, str] = {}
    while t.match_keyword("PREFIX"):
        kind, value = t.next()
        if kind != "pname" or not value.endswith(":"):
            # pname token includes the local part; a bare prefix ends with ':'
            raise ParseError(f"malformed prefix declaration near {value!r}")
        kind2, iri_tok = t.next()
        if kind2 != "iri":
            raise ParseError("prefix declaration requires an IRI")
        prefixes[value[:-1]] = iri_tok[1:-1]

    t.expect_keyword("SELECT")
    variables: list[str] = []
    count = False
    kind, value = t.peek()
    if value == "(":
        t.next()
        t.expect_keyword("COUNT")
        t.expect_op("(")
        t.expect_op("*")
        t.expect_op(")")
        t.expect_keyword("AS")
        kind, var_tok = t.next()
        if kind != "var":
            raise ParseError("COUNT alias must be a variable")
        variables = [var_tok[1:]]
        count = True
        t.expect_op(")")
    else:
        while t.peek()[0] == "var":
            variables.append(t.next()[1][1:])
        if not variables:
            raise ParseError("SELECT needs at least one variable")

    t.expect_keyword("WHERE")
    group = _parse_group(t, prefixes)

    limit = None
    if t.match_keyword("LIMIT"):
        kind, value = t.next()
        if kind != "number":
            raise ParseError("LIMIT requires an integer")
        limit = int(value)
    if t.peek()[0] != "eof":
        raise ParseError(f"unexpected trailing token {t.peek()[1]!r}")
    return ParsedQuery(variables, count, group, limit)


def _parse_group(t: _Tokens, prefixes: dict[str, str]) -> Group:
    t.expect_op("{")
    triples: list = []
    filters: list = []
    while True:
        kind, value = t.peek()
        if value == "}":
            t.next()
            return Group(triples, filters)
        if kind == "eof":
            raise ParseError("unterminated group")
        if value == "{":
            branches = [_parse_group(t, prefixes)]
            while t.match_keyword("UNION"):
                branches.append(_parse_group(t, prefixes))
            triples.append(Union(branches))
            if t.peek()[1] == ".":
                t.next()
            continue
        if kind in ("name", "pname") and value.upper() == "FILTER":
            t.next()
            t.expect_op("(")
            filters.append(_parse_expression(t, prefixes))
            t.expect_op(")")
            if t.peek()[1] == ".":
                t.next()
            continue
        s = _parse_term(t, prefixes, allow_a=False)
        p = _parse_term(t, prefixes, allow_a=True)
        o = _parse_term(t, prefixes, allow_a=False)
        triples.append(TriplePattern(s, p, o))
        if t.peek()[1] == ".":
            t.next()


def _parse_term(t: _Tokens, prefixes: dict[str, str], allow_a: bool):
    kind, value = t.next()
    if kind == "var":
        return Var(value[1:])
    if kind == "iri":
        return iri(value[1:-1])
    if kind == "name" and value == "a" and allow_a:
        return iri(RDF_TYPE)
    if kind == "pname":
        prefix, local = value.split(":", 1)
        if prefix not in prefixes:
            raise ParseError(f"undeclared prefix {prefix!r}")
        return iri(prefixes[prefix] + local)
    if kind == "string":
        text = unescape_string(value[1:-1])
        if t.peek()[0] == "dtype":
            t.next()
            dtype = _parse_term(t, prefixes, allow_a=False)
            return literal(text, datatype=dtype.value)
        return literal(text)
    if kind == "number":
        return literal(value, datatype=XSD + ("decimal" if "." in value else "integer"))
    if kind == "name" and value in ("true", "false"):
        return literal(value, datatype=XSD + "boolean")
    raise ParseError(f"unexpected term {value!r}")


_COMPARE_OPS = ("=", "!=", "<", "<=", ">", ">=")


def _parse_expression(t: _Tokens, prefixes: dict[str, str]):
    left = _parse_primary(t, prefixes)
    kind, value = t.peek()
    if value in _COMPARE_OPS:
        t.next()
        right = _parse_primary(t, prefixes)
        return Compare(value, left, right)
    return left


def _parse_primary(t: _Tokens, prefixes: dict[str, str]):
    kind, value = t.peek()
    if value == "!":
        t.next()
        return Not(_parse_primary(t, prefixes))
    if value == "(":
        t.next()
        inner = _parse_expression(t, prefixes)
        t.expect_op(")")
        return inner
    if kind == "name" and value.upper() in ("CONTAINS", "LCASE", "STR", "REGEX", "UCASE"):
        t.next()
        t.expect_op("(")
        args = [_parse_expression(t, prefixes)]
        while t.peek()[1] == ",":
            t.next()
            args.append(_parse_expression(t, prefixes))
        t.expect_op(")")
        return Call(value.upper(), tuple(args))
    if kind == "pname" and t.tokens[t.index + 1 : t.index + 2] and t.tokens[t.index + 1][1] == "(":
        # datatype cast written as a prefixed function call, e.g. xsd:dateTime(...)
        prefix, local = value.split(":", 1)
        if prefix not in prefixes:
            raise ParseError(f"undeclared prefix {prefix!r}")
        t.next()
        t.expect_op("(")
        args = [_parse_expression(t, prefixes)]
        t.expect_op(")")
        return Call("CAST:" + prefixes[prefix] + local, tuple(args))
    if kind == "var":
        t.next()
        return Var(value[1:])
    term = _parse_term(t, prefixes, allow_a=False)
    return Lit(_eager_value(term))


def _eager_value(term: Term):
    """Constants evaluate by datatype so comparisons are value-based."""
    if term.kind != "literal":
        return term
    dtype = term.datatype or ""
    if dtype == XSD + "boolean":
        return parse_boolean(term.value)
    if dtype in (XSD + "dateTime", XSD + "date"):
        return parse_datetime(term.value)
    if dtype.startswith(XSD) and dtype not in (XSD + "string",):
        number = parse_number(term.value)
        if number is not None:
            return number
    return term.value


# --- evaluation ---

def evaluate(store: TripleStore, query: ParsedQuery) -> tuple[list[str], list[dict[str, Term]]]:
    """Run a parsed query; returns (variables, solution mappings)."""
    solutions = _eval_group(store, query.group, [{}])
    if query.count:
        count_term = literal(str(len(solutions)), datatype=XSD + "integer")
        return query.variables, [{query.variables[0]: count_term}]
    if query.limit is not None:
        solutions = solutions[: query.limit]
    return query.variables, solutions


def _eval_group(store: TripleStore, group: Group, incoming: list[dict]) -> list[dict]:
    solutions = incoming
    for element in group.triples:
        if isinstance(element, Union):
            merged: list[dict] = []
            for branch in element.branches:
                merged.extend(_eval_group(store, branch, solutions))
            solutions = merged
        else:
            solutions = _match_triple(store, element, solutions)
    for expr in group.filters:
        solutions = [s for s in solutions if _truth(_eval_expr(expr, s))]
    return solutions


def _match_triple(store: TripleStore, pattern: TriplePattern, solutions: list[dict]) -> list[dict]:
    if isinstance(pattern.p, Var):
        raise ParseError("variable predicates are not supported")
    predicate = pattern.p.value
    out: list[dict] = []
    for sol in solutions:
        s_term = _resolve(pattern.s, sol)
        o_term = _resolve(pattern.o, sol)
        if s_term is not None and o_term is not None:
            if store.has(s_term.value, predicate, o_term):
                out.append(sol)
        elif s_term is not None:
            for obj in store.objects(s_term.value, predicate):
                out.append({**sol, pattern.o.name: obj})
        elif o_term is not None and o_term.kind != "literal":
            for subj in store.subjects(predicate, o_term.value):
                out.append({**sol, pattern.s.name: subj})
        elif o_term is not None:
            for subj, obj in store.pairs(predicate):
                if obj == o_term:
                    out.append({**sol, pattern.s.name: subj})
        else:
            same = isinstance(pattern.s, Var) and isinstance(pattern.o, Var) \
                and pattern.s.name == pattern.o.name
            for subj, obj in store.pairs(predicate):
                if same:
                    if subj == obj:
                        out.append({**sol, pattern.s.name: subj})
                else:
                    out.append({**sol, pattern.s.name: subj, pattern.o.name: obj})
    return out


def _resolve(position, solution: dict) -> Term | None:
    if isinstance(position, Var):
        return solution.get(position.name)
    return position


def _truth(value) -> bool:
    return value is True


def _eval_expr(expr, solution: dict):
    """Three-valued evaluation: None propagates as a type error."""
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Var):
        return solution.get(expr.name)
    if isinstance(expr, Not):
        inner = _eval_expr(expr.inner, solution)
        if isinstance(inner, bool):
            return not inner
        return None
    if isinstance(expr, Call):
        return _eval_call(expr, solution)
    if isinstance(expr, Compare):
        return _compare(expr.op, _eval_expr(expr.left, solution), _eval_expr(expr.right, solution))
    return None


def _eval_call(call: Call, solution: dict):
    args = [_eval_expr(a, solution) for a in call.args]
    if call.func == "STR":
        value = args[0]
        if isinstance(value, Term):
            return value.value
        if isinstance(value, str):
            return value
        return None
    if call.func in ("LCASE", "UCASE"):
        value = args[0]
        if isinstance(value, Term) and value.is_literal():
            value = value.value
        if not isinstance(value, str):
            return None
        return value.lower() if call.func == "LCASE" else value.upper()
    if call.func == "CONTAINS":
        hay, needle = (_as_string(a) for a in args[:2])
        if hay is None or needle is None:
            return None
        return needle in hay
    if call.func == "REGEX":
        text, pattern = (_as_string(a) for a in args[:2])
        if text is None or pattern is None:
            return None
        try:
            return re.search(pattern, text) is not None
        except re.error:
            return None
    if call.func.startswith("CAST:"):
        target = call.func[len("CAST:"):]
        value = args[0]
        if isinstance(value, Term):
            if not value.is_literal():
                return None
            value = value.value
        if target in (XSD + "dateTime", XSD + "date"):
            if isinstance(value, datetime):
                return value
            if isinstance(value, str):
                return parse_datetime(value)
            return None
        if target.startswith(XSD):
            if isinstance(value, (int, float)):
                return float(value)
            if isinstance(value, str):
                return parse_number(value)
        return None
    return None


def _as_string(value) -> str | None:
    if isinstance(value, Term) and value.is_literal():
        return value.value
    if isinstance(value, str):
        return value
    return None


def _compare(op: str, left, right):
    if left is None or right is None:
        return None
    # IRI (in)equality: both sides must be IRIs
    if isinstance(left, Term) and left.kind != "literal" or \
            isinstance(right, Term) and right.kind != "literal":
        if isinstance(left, Term) and isinstance(right, Term) \
                and left.kind != "literal" and right.kind != "literal":
            if op == "=":
                return left.value == right.value
            if op == "!=":
                return left.value != right.value
        return None
    if isinstance(left, Term) or isinstance(right, Term):
        # coerce the term side toward the computed side's type
        if isinstance(left, Term):
            term, other, term_on_left = left, right, True
        else:
            term, other, term_on_left = right, left, False
        coerced = _coerce_term(term, other)
        if coerced is None:
            return None
        left, right = (coerced, other) if term_on_left else (other, coerced)
    return _compare_plain(op, left, right)


def _coerce_term(term: Term, other):
    if isinstance(other, bool):
        return parse_boolean(term.value)
    if isinstance(other, (int, float)):
        return parse_number(term.value)
    if isinstance(other, datetime):
        return parse_datetime(term.value)
    if isinstance(other, str):
        return term.value
    return None


def _compare_plain(op: str, left, right):
    if isinstance(left, bool) != isinstance(right, bool):
        return None
    if isinstance(left, bool):
        if op == "=":
            return left == right
        if op == "!=":
            return left != right
        return None
    if type(left) is datetime and type(right) is datetime or \
            isinstance(left, (int, float)) and isinstance(right, (int, float)) or \
            isinstance(left, str) and isinstance(right, str):
        if op == "=":
            return left == right
        if op == "!=":
            return left != right
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
    return None
