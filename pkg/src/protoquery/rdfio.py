"""Turtle and N-Triples readers.

Covers the syntax found in real ontology files (prefixes, prefixed names,
literals with language tags and datatypes, semicolon/comma continuation,
blank-node property lists, collections). Anything beyond triple syntax, such
as OWL semantics, is left to the ontology builder.
"""

from __future__ import annotations

from .errors import ParseError
from .terms import (
    RDF,
    XSD,
    Term,
    Triple,
    bnode,
    iri,
    literal,
    unescape_string,
)

RDF_FIRST = RDF + "first"
RDF_REST = RDF + "rest"
RDF_NIL = RDF + "nil"

_PN_LOCAL_EXTRA = "_-.%"


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line, self.col)

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def advance(self, n: int = 1) -> str:
        taken = self.text[self.pos : self.pos + n]
        for c in taken:
            if c == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n
        return taken

    def skip_ws(self) -> None:
        while not self.eof():
            c = self.peek()
            if c in " \t\r\n":
                self.advance()
            elif c == "#":
                while not self.eof() and self.peek() != "\n":
                    self.advance()
            else:
                return

    def expect(self, token: str) -> None:
        self.skip_ws()
        if self.text.startswith(token, self.pos):
            self.advance(len(token))
            return
        raise self.error(f"expected {token!r}")

    def match_keyword(self, word: str) -> bool:
        """Case-insensitive keyword match followed by a non-name character."""
        self.skip_ws()
        end = self.pos + len(word)
        if self.text[self.pos : end].lower() != word.lower():
            return False
        nxt = self.text[end : end + 1]
        if nxt and (nxt.isalnum() or nxt in "_:"):
            return False
        self.advance(len(word))
        return True


class _TurtleParser:
    def __init__(self, text: str):
        self.s = _Scanner(text)
        self.prefixes: dict[str, str] = {}
        self.base = ""
        self.triples: list[Triple] = []
        self._bnode_counter = 0

    # --- entry point ---

    def parse(self) -> list[Triple]:
        while True:
            self.s.skip_ws()
            if self.s.eof():
                return self.triples
            if self.s.peek() == "@":
                self._directive_at()
            elif self.s.match_keyword("PREFIX"):
                self._prefix_decl(sparql_style=True)
            elif self.s.match_keyword("BASE"):
                self._base_decl(sparql_style=True)
            else:
                self._triples_block()

    # --- directives ---

    def _directive_at(self) -> None:
        if self.s.text.startswith("@prefix", self.s.pos):
            self.s.advance(len("@prefix"))
            self._prefix_decl(sparql_style=False)
        elif self.s.text.startswith("@base", self.s.pos):
            self.s.advance(len("@base"))
            self._base_decl(sparql_style=False)
        else:
            raise self.s.error("unknown directive")

    def _prefix_decl(self, sparql_style: bool) -> None:
        self.s.skip_ws()
        name = self._read_prefix_name()
        self.s.skip_ws()
        target = self._read_iriref()
        self.prefixes[name] = target
        if not sparql_style:
            self.s.expect(".")

    def _base_decl(self, sparql_style: bool) -> None:
        self.s.skip_ws()
        self.base = self._read_iriref()
        if not sparql_style:
            self.s.expect(".")

    def _read_prefix_name(self) -> str:
        start = self.s.pos
        while not self.s.eof() and self.s.peek() != ":":
            c = self.s.peek()
            if c in " \t\r\n":
                break
            self.s.advance()
        name = self.s.text[start : self.s.pos]
        self.s.expect(":")
        return name

    # --- triples ---

    def _triples_block(self) -> None:
        subject = self._subject()
        self.s.skip_ws()
        if self.s.peek() == "." and isinstance(subject, Term) and subject.kind == "bnode":
            # bare [ ... ] . form
            self.s.advance()
            return
        self._predicate_object_list(subject)
        self.s.expect(".")

    def _subject(self) -> Term:
        self.s.skip_ws()
        c = self.s.peek()
        if c == "[":
            return self._blank_node_property_list()
        if c == "(":
            return self._collection()
        return self._iri_or_bnode()

    def _predicate_object_list(self, subject: Term) -> None:
        while True:
            predicate = self._verb()
            self._object_list(subject, predicate)
            self.s.skip_ws()
            if self.s.peek() == ";":
                self.s.advance()
                self.s.skip_ws()
                # trailing ; before . or ] is legal
                if self.s.peek() in (".", "]", ""):
                    return
                continue
            return

    def _verb(self) -> Term:
        self.s.skip_ws()
        if self.s.match_keyword("a"):
            return iri(RDF + "type")
        return self._iri_or_bnode(predicate=True)

    def _object_list(self, subject: Term, predicate: Term) -> None:
        while True:
            obj = self._object()
            self.triples.append((subject, predicate, obj))
            self.s.skip_ws()
            if self.s.peek() == ",":
                self.s.advance()
                continue
            return

    def _object(self) -> Term:
        self.s.skip_ws()
        c = self.s.peek()
        if c == "[":
            return self._blank_node_property_list()
        if c == "(":
            return self._collection()
        if c in "\"'":
            return self._literal()
        if c.isdigit() or (c in "+-." and (self.s.peek(1).isdigit() or self.s.peek(1) == ".")):
            return self._number()
        if self.s.match_keyword("true"):
            return literal("true", XSD + "boolean")
        if self.s.match_keyword("false"):
            return literal("false", XSD + "boolean")
        return self._iri_or_bnode()

    def _blank_node_property_list(self) -> Term:
        self.s.expect("[")
        node = self._fresh_bnode()
        self.s.skip_ws()
        if self.s.peek() != "]":
            self._predicate_object_list(node)
        self.s.expect("]")
        return node

    def _collection(self) -> Term:
        self.s.expect("(")
        items: list[Term] = []
        while True:
            self.s.skip_ws()
            if self.s.peek() == ")":
                self.s.advance()
                break
            if self.s.eof():
                raise self.s.error("unterminated collection")
            items.append(self._object())
        if not items:
            return iri(RDF_NIL)
        head = self._fresh_bnode()
        current = head
        for index, item in enumerate(items):
            self.triples.append((current, iri(RDF_FIRST), item))
            if index == len(items) - 1:
                self.triples.append((current, iri(RDF_REST), iri(RDF_NIL)))
            else:
                nxt = self._fresh_bnode()
                self.triples.append((current, iri(RDF_REST), nxt))
                current = nxt
        return head

    def _fresh_bnode(self) -> Term:
        self._bnode_counter += 1
        return bnode(f"gen{self._bnode_counter}")

    # --- terms ---

    def _iri_or_bnode(self, predicate: bool = False) -> Term:
        self.s.skip_ws()
        c = self.s.peek()
        if c == "<":
            return iri(self._read_iriref())
        if c == "_" and self.s.peek(1) == ":":
            if predicate:
                raise self.s.error("blank node not allowed as predicate")
            self.s.advance(2)
            return bnode(self._read_name_chars())
        if not c:
            raise self.s.error("unexpected end of document")
        return self._prefixed_name()

    def _read_iriref(self) -> str:
        self.s.skip_ws()
        if self.s.peek() != "<":
            raise self.s.error("expected IRI")
        self.s.advance()
        start = self.s.pos
        while not self.s.eof() and self.s.peek() != ">":
            if self.s.peek() in " \n\"{}|^`":
                raise self.s.error("invalid character in IRI")
            self.s.advance()
        if self.s.eof():
            raise self.s.error("unterminated IRI")
        value = self.s.text[start : self.s.pos]
        self.s.advance()
        value = unescape_string(value)
        if self.base and "://" not in value and not value.startswith("urn:"):
            return self.base + value
        return value

    def _prefixed_name(self) -> Term:
        prefix_start = self.s.pos
        while not self.s.eof() and self.s.peek() != ":":
            c = self.s.peek()
            if not (c.isalnum() or c in "_-."):
                break
            self.s.advance()
        if self.s.peek() != ":":
            raise self.s.error("expected prefixed name or IRI")
        prefix = self.s.text[prefix_start : self.s.pos]
        self.s.advance()
        local = self._read_local_name()
        if prefix not in self.prefixes:
            raise self.s.error(f"undeclared prefix {prefix!r}")
        return iri(self.prefixes[prefix] + local)

    def _read_local_name(self) -> str:
        out = []
        while not self.s.eof():
            c = self.s.peek()
            if c == "\\" and self.s.peek(1):
                self.s.advance()
                out.append(self.s.advance())
                continue
            if c.isalnum() or c in _PN_LOCAL_EXTRA:
                # a dot only stays inside the name when followed by more name chars
                if c == "." and not (self.s.peek(1).isalnum() or self.s.peek(1) in "_-%"):
                    break
                out.append(self.s.advance())
                continue
            break
        return "".join(out)

    def _read_name_chars(self) -> str:
        start = self.s.pos
        while not self.s.eof() and (self.s.peek().isalnum() or self.s.peek() in "_-."):
            self.s.advance()
        return self.s.text[start : self.s.pos]

    def _literal(self) -> Term:
        quote = self.s.peek()
        long_form = self.s.text.startswith(quote * 3, self.s.pos)
        delim = quote * 3 if long_form else quote
        self.s.advance(len(delim))
        start = self.s.pos
        while True:
            if self.s.eof():
                raise self.s.error("unterminated string literal")
            if self.s.peek() == "\\":
                self.s.advance(2)
                continue
            if self.s.text.startswith(delim, self.s.pos):
                break
            self.s.advance()
        raw = self.s.text[start : self.s.pos]
        self.s.advance(len(delim))
        value = unescape_string(raw)
        if self.s.peek() == "@":
            self.s.advance()
            lang_start = self.s.pos
            while not self.s.eof() and (self.s.peek().isalnum() or self.s.peek() == "-"):
                self.s.advance()
            return literal(value, lang=self.s.text[lang_start : self.s.pos])
        if self.s.peek() == "^" and self.s.peek(1) == "^":
            self.s.advance(2)
            dtype = self._iri_or_bnode()
            return literal(value, datatype=dtype.value)
        return literal(value)

    def _number(self) -> Term:
        start = self.s.pos
        if self.s.peek() in "+-":
            self.s.advance()
        seen_dot = False
        seen_exp = False
        while not self.s.eof():
            c = self.s.peek()
            if c.isdigit():
                self.s.advance()
            elif c == "." and not seen_dot and not seen_exp and self.s.peek(1).isdigit():
                seen_dot = True
                self.s.advance()
            elif c in "eE" and not seen_exp:
                seen_exp = True
                self.s.advance()
                if self.s.peek() in "+-":
                    self.s.advance()
            else:
                break
        text = self.s.text[start : self.s.pos]
        if seen_exp:
            dtype = XSD + "double"
        elif seen_dot:
            dtype = XSD + "decimal"
        else:
            dtype = XSD + "integer"
        return literal(text, datatype=dtype)


def parse_turtle(document: str) -> list[Triple]:
    """Parse a Turtle document into a triple list.

    Raises ParseError with line/column on malformed input.
    """
    return _TurtleParser(document).parse()


def parse_ntriples(document: str) -> list[Triple]:
    """Parse an N-Triples document (one triple per line)."""
    triples: list[Triple] = []
    for lineno, raw_line in enumerate(document.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        scanner = _Scanner(line)
        scanner.line = lineno
        try:
            subject = _nt_term(scanner, allow_literal=False)
            predicate = _nt_term(scanner, allow_literal=False)
            if predicate.kind != "iri":
                raise scanner.error("predicate must be an IRI")
            obj = _nt_term(scanner, allow_literal=True)
            scanner.expect(".")
        except ParseError as exc:
            raise ParseError(str(exc.args[0]).split(" (line")[0], lineno, exc.column) from None
        triples.append((subject, predicate, obj))
    return triples


def _nt_term(s: _Scanner, allow_literal: bool) -> Term:
    s.skip_ws()
    c = s.peek()
    if c == "<":
        s.advance()
        start = s.pos
        while not s.eof() and s.peek() != ">":
            s.advance()
        if s.eof():
            raise s.error("unterminated IRI")
        value = unescape_string(s.text[start : s.pos])
        s.advance()
        return iri(value)
    if c == "_" and s.peek(1) == ":":
        s.advance(2)
        start = s.pos
        while not s.eof() and (s.peek().isalnum() or s.peek() in "_-."):
            s.advance()
        return bnode(s.text[start : s.pos])
    if c == '"' and allow_literal:
        s.advance()
        start = s.pos
        while not s.eof():
            if s.peek() == "\\":
                s.advance(2)
                continue
            if s.peek() == '"':
                break
            s.advance()
        if s.eof():
            raise s.error("unterminated literal")
        value = unescape_string(s.text[start : s.pos])
        s.advance()
        if s.peek() == "@":
            s.advance()
            lang_start = s.pos
            while not s.eof() and (s.peek().isalnum() or s.peek() == "-"):
                s.advance()
            return literal(value, lang=s.text[lang_start : s.pos])
        if s.peek() == "^" and s.peek(1) == "^":
            s.advance(2)
            dtype = _nt_term(s, allow_literal=False)
            return literal(value, datatype=dtype.value)
        return literal(value)
    raise s.error(f"unexpected character {c!r}")


def serialize_ntriples(triples: list[Triple]) -> str:
    """Render triples as sorted N-Triples text (used for fixture stores)."""
    lines = sorted(f"{s} {p} {o} ." for s, p, o in triples)
    return "\n".join(lines) + ("\n" if lines else "")
