"""Shared fixtures: a small knowledge-graph ontology and toy datasets that
rebuild the TV-show/place, author/gold-medalist, ships, and patient-filter
scenarios at desk scale."""

from __future__ import annotations

import contextlib
import socket
import threading
import time

import pytest

from protoquery.conditions import Condition
from protoquery.graph import PrototypeGraph
from protoquery.localstore import TripleStore
from protoquery.ontology import Ontology, ingest_ontology
from protoquery.terms import RDF_TYPE, XSD, Triple, iri, literal

EX = "http://example.org/kg/"

ONTOLOGY_TTL = """\
@prefix ex: <http://example.org/kg/> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .

ex:Agent a owl:Class ; rdfs:label "agent" .
ex:Person a owl:Class ; rdfs:subClassOf ex:Agent ; rdfs:label "person" ;
    rdfs:comment "A human being." .
ex:Athlete a owl:Class ; rdfs:subClassOf ex:Person ; rdfs:label "athlete" .
ex:Work a owl:Class ; rdfs:label "work" .
ex:MusicalWork a owl:Class ; rdfs:subClassOf ex:Work ; rdfs:label "musical work" .
ex:TelevisionShow a owl:Class ; rdfs:subClassOf ex:Work ; rdfs:label "television show" .
ex:Place a owl:Class ; rdfs:label "place" .
ex:PopulatedPlace a owl:Class ; rdfs:subClassOf ex:Place ; rdfs:label "populated place" .
ex:Country a owl:Class ; rdfs:subClassOf ex:PopulatedPlace ; rdfs:label "country" .
ex:Ship a owl:Class ; rdfs:label "ship" .
ex:SportsEvent a owl:Class ; rdfs:label "sports event" .
ex:Patient a owl:Class ; rdfs:label "patient" .

ex:author a owl:ObjectProperty ; rdfs:domain ex:Agent ; rdfs:range ex:Work ;
    rdfs:label "author" ; rdfs:comment "The agent wrote the work." .
ex:openingTheme a owl:ObjectProperty ; rdfs:domain ex:TelevisionShow ; rdfs:range ex:Work ;
    rdfs:label "opening theme" .
ex:recordedIn a owl:ObjectProperty ; rdfs:domain ex:Work ; rdfs:range ex:PopulatedPlace ;
    rdfs:label "recorded in" .
ex:goldMedalist a owl:ObjectProperty ; rdfs:domain ex:SportsEvent ; rdfs:range ex:Person ;
    rdfs:label "gold medalist" .
ex:birthPlace a owl:ObjectProperty ; rdfs:domain ex:Person ; rdfs:range ex:Place ;
    rdfs:label "birth place" ; rdfs:comment "Where the person was born." .
ex:homeport a owl:ObjectProperty ; rdfs:domain ex:Ship ; rdfs:range ex:PopulatedPlace ;
    rdfs:label "homeport" .
ex:country a owl:ObjectProperty ; rdfs:domain ex:PopulatedPlace ; rdfs:range ex:Country ;
    rdfs:label "country" .

ex:name a owl:DatatypeProperty ; rdfs:domain owl:Thing ; rdfs:range xsd:string ;
    rdfs:label "name" .
ex:runtime a owl:DatatypeProperty ; rdfs:domain ex:Work ; rdfs:range xsd:integer ;
    rdfs:label "runtime" .
ex:birthDate a owl:DatatypeProperty ; rdfs:domain ex:Person ; rdfs:range xsd:date ;
    rdfs:label "birth date" .
ex:lengthM a owl:DatatypeProperty ; rdfs:domain ex:Ship ; rdfs:range xsd:double ;
    rdfs:label "length" .
ex:commissioned a owl:DatatypeProperty ; rdfs:domain ex:Ship ; rdfs:range xsd:date ;
    rdfs:label "commissioned" .
ex:paediatricOnset a owl:DatatypeProperty ; rdfs:domain ex:Patient ; rdfs:range xsd:boolean ;
    rdfs:label "paediatric onset" .
ex:age a owl:DatatypeProperty ; rdfs:domain ex:Patient ; rdfs:range xsd:integer ;
    rdfs:label "age" .
"""


@pytest.fixture(scope="session")
def ontology() -> Ontology:
    return ingest_ontology(ONTOLOGY_TTL)


def typed(ontology: Ontology, entity: str, cls: str) -> list[Triple]:
    """rdf:type triples for the class and all its ancestors (materialized data)."""
    return [
        (iri(entity), iri(RDF_TYPE), iri(ancestor))
        for ancestor in sorted(ontology.ancestors(cls))
    ]


def lit_int(n: int):
    return literal(str(n), XSD + "integer")


def lit_float(x: float):
    return literal(str(x), XSD + "double")


def lit_date(s: str):
    return literal(s, XSD + "date")


def lit_bool(b: bool):
    return literal("true" if b else "false", XSD + "boolean")


def lit_str(s: str):
    return literal(s)


@pytest.fixture(scope="session")
def tv_store(ontology) -> TripleStore:
    """Shows with opening themes recorded in places; runtimes attached."""
    t: list[Triple] = []
    shows = {
        "show1": (45, "york", "theme1"),
        "show2": (30, "london", "theme2"),
        "show3": (60, "newyork", None),
        "show4": (25, "york", None),
    }
    for show, (runtime, place, theme) in shows.items():
        t += typed(ontology, EX + show, EX + "TelevisionShow")
        t.append((iri(EX + show), iri(EX + "runtime"), lit_int(runtime)))
        t.append((iri(EX + show), iri(EX + "recordedIn"), iri(EX + place)))
        if theme:
            t.append((iri(EX + show), iri(EX + "openingTheme"), iri(EX + theme)))
    for theme, runtime in (("theme1", 3), ("theme2", 4)):
        t += typed(ontology, EX + theme, EX + "MusicalWork")
        t.append((iri(EX + theme), iri(EX + "runtime"), lit_int(runtime)))
    for place, name in (("york", "York"), ("newyork", "New York City"), ("london", "London")):
        t += typed(ontology, EX + place, EX + "PopulatedPlace")
        t.append((iri(EX + place), iri(EX + "name"), lit_str(name)))
    return TripleStore(t)


@pytest.fixture(scope="session")
def medal_store(ontology) -> TripleStore:
    """Persons who author works and win gold at sports events."""
    t: list[Triple] = []
    for person, cls in (("p1", "Athlete"), ("p2", "Athlete"), ("p3", "Person"), ("p4", "Athlete")):
        t += typed(ontology, EX + person, EX + cls)
    for work, name in (
        ("w1", "Olympic Memoir"), ("w2", "Training Diary"),
        ("w3", "Cookbook"), ("w4", "Second Memoir"),
    ):
        t += typed(ontology, EX + work, EX + "Work")
        t.append((iri(EX + work), iri(EX + "name"), lit_str(name)))
    for event in ("e1", "e2"):
        t += typed(ontology, EX + event, EX + "SportsEvent")
    for s, p, o in (
        ("p1", "author", "w1"),
        ("p1", "author", "w4"),
        ("p2", "author", "w2"),
        ("p3", "author", "w3"),
        ("e1", "goldMedalist", "p1"),
        ("e1", "goldMedalist", "p2"),
        ("e2", "goldMedalist", "p2"),
        ("e2", "goldMedalist", "p4"),
    ):
        t.append((iri(EX + s), iri(EX + p), iri(EX + o)))
    return TripleStore(t)


@pytest.fixture(scope="session")
def ships_store(ontology) -> TripleStore:
    t: list[Triple] = []
    places = {"norfolk": "usa", "sandiego": "usa", "murmansk": "russia"}
    for place, country in places.items():
        t += typed(ontology, EX + place, EX + "PopulatedPlace")
        t.append((iri(EX + place), iri(EX + "country"), iri(EX + country)))
    for country, name in (("usa", "United States"), ("russia", "Russia")):
        t += typed(ontology, EX + country, EX + "Country")
        t.append((iri(EX + country), iri(EX + "name"), lit_str(name)))
    ships = [
        ("s1", 270.0, "1961-11-25", "norfolk"),
        ("s2", 332.8, "1975-05-03", "norfolk"),
        ("s3", 182.9, "1943-02-21", "sandiego"),
        ("s4", 252.0, "1985-01-11", "murmansk"),
        ("s5", 162.0, "1952-06-30", "murmansk"),
        ("s6", 305.0, "2017-07-22", "norfolk"),
    ]
    for ship, length, date, port in ships:
        t += typed(ontology, EX + ship, EX + "Ship")
        t.append((iri(EX + ship), iri(EX + "lengthM"), lit_float(length)))
        t.append((iri(EX + ship), iri(EX + "commissioned"), lit_date(date)))
        t.append((iri(EX + ship), iri(EX + "homeport"), iri(EX + port)))
    return TripleStore(t)


@pytest.fixture(scope="session")
def patient_store(ontology) -> TripleStore:
    t: list[Triple] = []
    patients = [
        ("pt1", True, 9), ("pt2", True, 14), ("pt3", True, 11), ("pt4", True, 16),
        ("pt5", False, 34), ("pt6", False, 52), ("pt7", False, 47),
        ("pt8", False, 61), ("pt9", False, 28),
    ]
    for pid, onset, age in patients:
        t += typed(ontology, EX + pid, EX + "Patient")
        t.append((iri(EX + pid), iri(EX + "paediatricOnset"), lit_bool(onset)))
        t.append((iri(EX + pid), iri(EX + "age"), lit_int(age)))
    return TripleStore(t)


# --- prototype graphs for the storylines ---

def tv_graph_left(ontology) -> PrototypeGraph:
    """Show with an opening theme, recorded in some place; runtime plotted."""
    g = PrototypeGraph(ontology)
    show = g.add_node(EX + "TelevisionShow")
    theme = g.add_node(EX + "Work")
    place = g.add_node(EX + "PopulatedPlace")
    g.add_edge(show, EX + "openingTheme", theme)
    g.add_edge(show, EX + "recordedIn", place)
    g.set_subquery(show, EX + "runtime", "value")
    return g


def tv_graph_right(ontology) -> PrototypeGraph:
    """Same storyline after the edit: theme dropped, 'York' label constraint added."""
    g = tv_graph_left(ontology)
    g.remove_element("node", 1)  # the theme Work node, cascades the openingTheme edge
    g.set_subquery(2, EX + "name", "constraint", Condition("contains", "York"))
    return g


def medal_graph(ontology) -> PrototypeGraph:
    """Persons who authored a work and medaled at a sports event."""
    g = PrototypeGraph(ontology)
    person = g.add_node(EX + "Person")
    work = g.add_node(EX + "Work")
    event = g.add_node(EX + "SportsEvent")
    g.add_edge(person, EX + "author", work)
    g.add_edge(event, EX + "goldMedalist", person)
    return g


def patient_graph(ontology, negated: bool) -> PrototypeGraph:
    g = PrototypeGraph(ontology)
    patient = g.add_node(EX + "Patient")
    g.set_subquery(
        patient, EX + "paediatricOnset", "constraint",
        Condition("eq", True, negated=negated),
    )
    g.set_subquery(patient, EX + "age", "value")
    return g


@contextlib.contextmanager
def live_server(app):
    """Serve a FastAPI app with real uvicorn on an ephemeral loopback port."""
    import uvicorn

    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("uvicorn did not start in time")
        time.sleep(0.02)
    sock: socket.socket = server.servers[0].sockets[0]
    port = sock.getsockname()[1]
    try:
        yield f"http://127.0.0.1:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=10)
