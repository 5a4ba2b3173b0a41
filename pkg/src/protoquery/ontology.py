"""Ontology schema: class hierarchy, link types, property definitions.

Built from RDF class/property declarations, this answers the
type-compatibility questions every other module relies on: is class A a
subtype of class B, which links may connect two classes, and which
properties a class carries.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from . import rdfio
from .errors import CyclicHierarchyError, ParseError, UnknownClassError
from .terms import (
    OWL_CLASS,
    OWL_DATATYPE_PROPERTY,
    OWL_OBJECT_PROPERTY,
    OWL_THING,
    RANGE_TEXT,
    RDF_TYPE,
    RDFS_CLASS,
    RDFS_COMMENT,
    RDFS_DOMAIN,
    RDFS_LABEL,
    RDFS_RANGE,
    RDFS_SUBCLASSOF,
    Term,
    local_name,
    range_kind_for_datatype,
)

UNIVERSAL_ROOT = OWL_THING

TURTLE = "turtle"
NTRIPLES = "ntriples"


@dataclass
class ClassDef:
    id: str
    label: str
    comment: str = ""
    parents: set[str] = field(default_factory=set)


@dataclass
class LinkDef:
    id: str
    label: str
    fromtype: str
    totype: str
    comment: str = ""


@dataclass
class PropertyDef:
    id: str
    label: str
    domain: str
    range_kind: str = RANGE_TEXT
    comment: str = ""


class Ontology:
    """Immutable schema with a precomputed reflexive-transitive subclass closure."""

    def __init__(
        self,
        classes: dict[str, ClassDef],
        links: dict[str, LinkDef],
        properties: dict[str, PropertyDef],
        warnings: list[str] | None = None,
        ignored_triples: int = 0,
    ):
        if UNIVERSAL_ROOT not in classes:
            classes = dict(classes)
            classes[UNIVERSAL_ROOT] = ClassDef(UNIVERSAL_ROOT, "Thing")
        self.classes = classes
        self.links = links
        self.properties = properties
        self.warnings = list(warnings or [])
        self.ignored_triples = ignored_triples
        self._ancestors = self._compute_closure()
        self._descendants: dict[str, set[str]] = {c: set() for c in self.classes}
        for cls, ancestors in self._ancestors.items():
            for anc in ancestors:
                self._descendants[anc].add(cls)

    # --- closure ---

    def _compute_closure(self) -> dict[str, frozenset[str]]:
        order: list[str] = []
        state: dict[str, int] = {}

        def visit(cls_id: str, stack: list[str]) -> None:
            state[cls_id] = 1
            stack.append(cls_id)
            for parent in sorted(self.classes[cls_id].parents):
                if parent not in self.classes:
                    continue
                s = state.get(parent, 0)
                if s == 1:
                    cycle = stack[stack.index(parent) :]
                    raise CyclicHierarchyError(cycle)
                if s == 0:
                    visit(parent, stack)
            stack.pop()
            state[cls_id] = 2
            order.append(cls_id)

        for cls_id in self.classes:
            if state.get(cls_id, 0) == 0:
                visit(cls_id, [])

        closure: dict[str, frozenset[str]] = {}
        for cls_id in order:
            ancestors = {cls_id, UNIVERSAL_ROOT}
            for parent in self.classes[cls_id].parents:
                if parent in closure:
                    ancestors |= closure[parent]
            closure[cls_id] = frozenset(ancestors)
        return closure

    # --- queries ---

    def has_class(self, cls_id: str) -> bool:
        return cls_id in self.classes

    def require_class(self, cls_id: str) -> ClassDef:
        if cls_id not in self.classes:
            raise UnknownClassError(f"unknown class <{cls_id}>")
        return self.classes[cls_id]

    def subtype_of(self, c1: str, c2: str) -> bool:
        """True iff c1 equals c2 or is a transitive descendant of c2."""
        self.require_class(c1)
        self.require_class(c2)
        return c2 in self._ancestors[c1]

    def ancestors(self, cls_id: str) -> frozenset[str]:
        self.require_class(cls_id)
        return self._ancestors[cls_id]

    def descendants(self, cls_id: str) -> set[str]:
        """All subtypes of cls_id, including itself."""
        self.require_class(cls_id)
        return set(self._descendants[cls_id])

    def links_between(self, from_cls: str, to_cls: str) -> list[LinkDef]:
        """Links admissible from from_cls to to_cls, ordered by link id."""
        self.require_class(from_cls)
        self.require_class(to_cls)
        found = [
            link
            for link in self.links.values()
            if self.subtype_of(from_cls, link.fromtype)
            and self.subtype_of(to_cls, link.totype)
        ]
        return sorted(found, key=lambda l: l.id)

    def properties_of(self, cls_id: str) -> list[PropertyDef]:
        """Own and inherited properties of cls_id, ordered by property id."""
        self.require_class(cls_id)
        found = [
            prop
            for prop in self.properties.values()
            if self.subtype_of(cls_id, prop.domain)
        ]
        return sorted(found, key=lambda p: p.id)

    def link_admissible(self, tail_cls: str, link_id: str, head_cls: str) -> bool:
        link = self.links.get(link_id)
        if link is None:
            return False
        return self.subtype_of(tail_cls, link.fromtype) and self.subtype_of(
            head_cls, link.totype
        )

    # --- serialization ---

    def to_json(self) -> dict:
        return {
            "format": "ontology-1",
            "classes": [
                {
                    "id": c.id,
                    "label": c.label,
                    "comment": c.comment,
                    "parents": sorted(c.parents),
                }
                for c in sorted(self.classes.values(), key=lambda c: c.id)
            ],
            "links": [
                {
                    "id": l.id,
                    "label": l.label,
                    "fromtype": l.fromtype,
                    "totype": l.totype,
                    "comment": l.comment,
                }
                for l in sorted(self.links.values(), key=lambda l: l.id)
            ],
            "properties": [
                {
                    "id": p.id,
                    "label": p.label,
                    "domain": p.domain,
                    "range_kind": p.range_kind,
                    "comment": p.comment,
                }
                for p in sorted(self.properties.values(), key=lambda p: p.id)
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Ontology":
        classes = {
            c["id"]: ClassDef(c["id"], c["label"], c.get("comment", ""), set(c["parents"]))
            for c in doc["classes"]
        }
        links = {
            l["id"]: LinkDef(l["id"], l["label"], l["fromtype"], l["totype"], l.get("comment", ""))
            for l in doc["links"]
        }
        properties = {
            p["id"]: PropertyDef(
                p["id"], p["label"], p["domain"], p["range_kind"], p.get("comment", "")
            )
            for p in doc["properties"]
        }
        return cls(classes, links, properties)

    def content_hash(self) -> str:
        """Stable hash of the schema content; keys the embedding-index cache."""
        canonical = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def ingest_ontology(document: str, format: str = TURTLE) -> Ontology:
    """Build an Ontology from RDF text.

    Unresolvable domain/range references fall back to the universal root and
    are reported in Ontology.warnings; subclass cycles are rejected.
    """
    if format == TURTLE:
        triples = rdfio.parse_turtle(document)
    elif format == NTRIPLES:
        triples = rdfio.parse_ntriples(document)
    else:
        raise ParseError(f"unsupported format {format!r}")
    return build_ontology(triples)


def build_ontology(triples: list[tuple[Term, Term, Term]]) -> Ontology:
    warnings: list[str] = []
    class_ids: set[str] = set()
    link_ids: set[str] = set()
    prop_ids: set[str] = set()
    labels_plain: dict[str, str] = {}
    labels_en: dict[str, str] = {}
    comments_plain: dict[str, str] = {}
    comments_en: dict[str, str] = {}
    parents: dict[str, set[str]] = {}
    domains: dict[str, str] = {}
    ranges: dict[str, Term] = {}
    ignored = 0

    def labels_get(subject: str, fallback: str) -> str:
        return labels_en.get(subject) or labels_plain.get(subject) or fallback

    def comments_get(subject: str) -> str:
        return comments_en.get(subject) or comments_plain.get(subject) or ""

    for s, p, o in triples:
        if s.kind != "iri":
            ignored += 1
            continue
        if p.value == RDF_TYPE and o.kind == "iri":
            if o.value in (OWL_CLASS, RDFS_CLASS):
                class_ids.add(s.value)
            elif o.value == OWL_OBJECT_PROPERTY:
                if s.value in prop_ids:
                    warnings.append(f"<{s.value}> declared both object and datatype property")
                else:
                    link_ids.add(s.value)
            elif o.value == OWL_DATATYPE_PROPERTY:
                if s.value in link_ids:
                    warnings.append(f"<{s.value}> declared both object and datatype property")
                else:
                    prop_ids.add(s.value)
            else:
                ignored += 1
        elif p.value == RDFS_SUBCLASSOF and o.kind == "iri":
            class_ids.add(s.value)
            class_ids.add(o.value)
            parents.setdefault(s.value, set()).add(o.value)
        elif p.value == RDFS_LABEL and o.kind == "literal":
            if (o.lang or "") == "en":
                labels_en.setdefault(s.value, o.value)
            else:
                labels_plain.setdefault(s.value, o.value)
        elif p.value == RDFS_COMMENT and o.kind == "literal":
            if (o.lang or "") == "en":
                comments_en.setdefault(s.value, o.value)
            else:
                comments_plain.setdefault(s.value, o.value)
        elif p.value == RDFS_DOMAIN:
            if o.kind == "iri":
                domains[s.value] = o.value
            else:
                warnings.append(f"<{s.value}> has a non-IRI domain; using universal root")
        elif p.value == RDFS_RANGE:
            ranges[s.value] = o
        else:
            ignored += 1

    if ignored:
        warnings.append(f"{ignored} triples outside the interpreted vocabulary were ignored")

    classes: dict[str, ClassDef] = {
        UNIVERSAL_ROOT: ClassDef(UNIVERSAL_ROOT, "Thing", "universal root class")
    }
    for cid in sorted(class_ids):
        if cid == UNIVERSAL_ROOT:
            continue
        cls_parents = {p for p in parents.get(cid, set()) if p != cid}
        if len(cls_parents) != len(parents.get(cid, set())):
            warnings.append(f"<{cid}> lists itself as a superclass; ignored")
        classes[cid] = ClassDef(
            id=cid,
            label=labels_get(cid, local_name(cid)),
            comment=comments_get(cid),
            parents=cls_parents,
        )

    def resolve_class(ref: str | None, owner: str, role: str) -> str:
        if ref is None:
            return UNIVERSAL_ROOT
        if ref == UNIVERSAL_ROOT or ref in classes:
            return ref
        warnings.append(f"<{owner}>: {role} <{ref}> is not a known class; using universal root")
        return UNIVERSAL_ROOT

    links: dict[str, LinkDef] = {}
    for lid in sorted(link_ids):
        range_term = ranges.get(lid)
        range_ref = range_term.value if range_term is not None and range_term.kind == "iri" else None
        if range_term is not None and range_term.kind != "iri":
            warnings.append(f"<{lid}>: non-IRI range; using universal root")
        links[lid] = LinkDef(
            id=lid,
            label=labels_get(lid, local_name(lid)),
            fromtype=resolve_class(domains.get(lid), lid, "domain"),
            totype=resolve_class(range_ref, lid, "range"),
            comment=comments_get(lid),
        )

    properties: dict[str, PropertyDef] = {}
    for pid in sorted(prop_ids):
        range_term = ranges.get(pid)
        datatype = range_term.value if range_term is not None and range_term.kind == "iri" else None
        properties[pid] = PropertyDef(
            id=pid,
            label=labels_get(pid, local_name(pid)),
            domain=resolve_class(domains.get(pid), pid, "domain"),
            range_kind=range_kind_for_datatype(datatype),
            comment=comments_get(pid),
        )

    return Ontology(classes, links, properties, warnings, ignored)
