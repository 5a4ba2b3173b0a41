"""RDF terms and literal-value helpers shared by parsing, evaluation, and codegen."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"

RDF_TYPE = RDF + "type"
RDFS_SUBCLASSOF = RDFS + "subClassOf"
RDFS_LABEL = RDFS + "label"
RDFS_COMMENT = RDFS + "comment"
RDFS_DOMAIN = RDFS + "domain"
RDFS_RANGE = RDFS + "range"
RDFS_CLASS = RDFS + "Class"
OWL_CLASS = OWL + "Class"
OWL_THING = OWL + "Thing"
OWL_OBJECT_PROPERTY = OWL + "ObjectProperty"
OWL_DATATYPE_PROPERTY = OWL + "DatatypeProperty"

IRI = "iri"
BNODE = "bnode"
LITERAL = "literal"


@dataclass(frozen=True)
class Term:
    """A single RDF term: IRI, blank node, or literal."""

    kind: str
    value: str
    datatype: str | None = None
    lang: str | None = None

    def is_iri(self) -> bool:
        return self.kind == IRI

    def is_literal(self) -> bool:
        return self.kind == LITERAL

    def __str__(self) -> str:
        if self.kind == IRI:
            return f"<{self.value}>"
        if self.kind == BNODE:
            return f"_:{self.value}"
        out = '"' + self.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        if self.lang:
            out += "@" + self.lang
        elif self.datatype:
            out += f"^^<{self.datatype}>"
        return out


def iri(value: str) -> Term:
    return Term(IRI, value)


def bnode(value: str) -> Term:
    return Term(BNODE, value)


def literal(value: str, datatype: str | None = None, lang: str | None = None) -> Term:
    return Term(LITERAL, value, datatype, lang)


Triple = tuple[Term, Term, Term]


# Fixed XSD-datatype mapping used to classify property ranges.
NUMERIC_DATATYPES = {
    XSD + n
    for n in (
        "integer", "int", "long", "short", "byte", "decimal", "float", "double",
        "nonNegativeInteger", "nonPositiveInteger", "positiveInteger",
        "negativeInteger", "unsignedInt", "unsignedLong", "unsignedShort",
        "unsignedByte",
    )
}
DATE_DATATYPES = {XSD + n for n in ("date", "dateTime", "gYear", "gYearMonth")}
BOOLEAN_DATATYPES = {XSD + "boolean"}
TEXT_DATATYPES = {XSD + "string", RDF + "langString"}

RANGE_NUMERIC = "numeric"
RANGE_TEXT = "text"
RANGE_DATE = "date"
RANGE_BOOLEAN = "boolean"
RANGE_IRI = "iri"
RANGE_KINDS = (RANGE_NUMERIC, RANGE_TEXT, RANGE_DATE, RANGE_BOOLEAN, RANGE_IRI)


def range_kind_for_datatype(datatype_iri: str | None) -> str:
    """Classify an XSD datatype IRI; unknown datatypes count as text."""
    if datatype_iri is None:
        return RANGE_TEXT
    if datatype_iri in NUMERIC_DATATYPES:
        return RANGE_NUMERIC
    if datatype_iri in DATE_DATATYPES:
        return RANGE_DATE
    if datatype_iri in BOOLEAN_DATATYPES:
        return RANGE_BOOLEAN
    return RANGE_TEXT


def parse_number(text: str) -> float | None:
    try:
        return float(text)
    except (TypeError, ValueError):
        return None


def parse_datetime(text: str) -> datetime | None:
    """Lenient ISO-8601 parse accepting date-only, dateTime, and gYear forms."""
    if not text:
        return None
    t = text.strip()
    if t.endswith("Z"):
        t = t[:-1] + "+00:00"
    for candidate in (t, t + "-01-01T00:00:00", t + "-01T00:00:00", t + "T00:00:00"):
        try:
            parsed = datetime.fromisoformat(candidate)
        except ValueError:
            continue
        # naive/aware datetimes do not compare; normalize to naive
        if parsed.tzinfo is not None:
            parsed = parsed.replace(tzinfo=None)
        return parsed
    return None


def parse_boolean(text: str) -> bool | None:
    t = text.strip().lower()
    if t in ("true", "1"):
        return True
    if t in ("false", "0"):
        return False
    return None


def normalize_datetime_operand(text: str) -> str | None:
    """Normalize a date or dateTime string to full dateTime lexical form."""
    parsed = parse_datetime(text)
    if parsed is None:
        return None
    return parsed.isoformat()


def escape_string(value: str) -> str:
    """Escape a string for use in a double-quoted SPARQL/Turtle literal."""
    return (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def unescape_string(value: str) -> str:
    out = []
    i = 0
    while i < len(value):
        c = value[i]
        if c == "\\" and i + 1 < len(value):
            nxt = value[i + 1]
            mapped = {"n": "\n", "r": "\r", "t": "\t", '"': '"', "'": "'", "\\": "\\"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
            if nxt == "u" and i + 6 <= len(value):
                out.append(chr(int(value[i + 2 : i + 6], 16)))
                i += 6
                continue
            if nxt == "U" and i + 10 <= len(value):
                out.append(chr(int(value[i + 2 : i + 10], 16)))
                i += 10
                continue
        out.append(c)
        i += 1
    return "".join(out)


def local_name(iri_value: str) -> str:
    """Best-effort human label from an IRI: the fragment or last path segment."""
    for sep in ("#", "/", ":"):
        if sep in iri_value:
            tail = iri_value.rsplit(sep, 1)[1]
            if tail:
                return tail
    return iri_value
