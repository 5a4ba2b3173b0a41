import pytest

from conftest import EX, tv_graph_left
from protoquery.conditions import Condition
from protoquery.errors import EmptyGraphError, InvalidGraphError
from protoquery.graph import PrototypeGraph
from protoquery.sparqlgen import generate_count, generate_select


def test_minimal_single_node(ontology):
    g = PrototypeGraph(ontology)
    g.add_node(EX + "Person")
    q = generate_select(g)
    assert q.text == (
        "SELECT ?n0\n"
        "WHERE {\n"
        f"  ?n0 a <{EX}Person> .\n"
        "}\n"
    )
    assert q.projection == [("n0", ("node", 0))]


def test_empty_graph_rejected(ontology):
    g = PrototypeGraph(ontology)
    with pytest.raises(EmptyGraphError):
        generate_select(g)
    with pytest.raises(EmptyGraphError):
        generate_count(g)


def test_invalid_graph_rejected(ontology):
    g = PrototypeGraph(ontology)
    show = g.add_node(EX + "TelevisionShow")
    theme = g.add_node(EX + "Work")
    g.add_edge(show, EX + "openingTheme", theme)
    doc = g.to_json()
    doc["edges"][0]["tail"], doc["edges"][0]["head"] = (
        doc["edges"][0]["head"], doc["edges"][0]["tail"],
    )
    bad = PrototypeGraph.from_json(doc, ontology)
    with pytest.raises(InvalidGraphError):
        generate_select(bad)


def test_author_medalist_pattern(ontology):
    g = PrototypeGraph(ontology)
    person = g.add_node(EX + "Person")
    work = g.add_node(EX + "Work")
    event = g.add_node(EX + "SportsEvent")
    g.add_edge(person, EX + "author", work)
    g.add_edge(event, EX + "goldMedalist", person)
    g.set_subquery(work, EX + "name", "constraint", Condition("contains", "memoir"))
    q = generate_select(g)
    assert q.text.count(" a <") == 3
    assert f"?n0 <{EX}author> ?n1 ." in q.text
    assert f"?n2 <{EX}goldMedalist> ?n0 ." in q.text
    assert q.text.count("FILTER") == 1


def test_contains_filter_is_case_insensitive_over_str(ontology):
    g = PrototypeGraph(ontology)
    place = g.add_node(EX + "PopulatedPlace")
    g.set_subquery(place, EX + "name", "constraint", Condition("contains", "York"))
    q = generate_select(g)
    assert 'FILTER(CONTAINS(LCASE(STR(?s0)), "york"))' in q.text


def test_negated_boolean_filter(ontology):
    g = PrototypeGraph(ontology)
    patient = g.add_node(EX + "Patient")
    g.set_subquery(
        patient, EX + "paediatricOnset", "constraint", Condition("eq", True, negated=True)
    )
    q = generate_select(g)
    assert "FILTER(!(?s0 = true))" in q.text


def test_date_filter_casts_via_xsd(ontology):
    g = PrototypeGraph(ontology)
    ship = g.add_node(EX + "Ship")
    g.set_subquery(
        ship, EX + "commissioned", "constraint", Condition("lt", "1950-01-01")
    )
    q = generate_select(g)
    assert q.text.startswith("PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>\n")
    assert 'FILTER(xsd:dateTime(?s0) < "1950-01-01T00:00:00"^^xsd:dateTime)' in q.text


def test_regex_filter(ontology):
    g = PrototypeGraph(ontology)
    work = g.add_node(EX + "Work")
    g.set_subquery(work, EX + "name", "constraint", Condition("regex", "^Olympic.*"))
    q = generate_select(g)
    assert 'FILTER(REGEX(STR(?s0), "^Olympic.*"))' in q.text


def test_string_operand_escaped(ontology):
    g = PrototypeGraph(ontology)
    work = g.add_node(EX + "Work")
    g.set_subquery(work, EX + "name", "constraint", Condition("eq", 'say "hi"\n'))
    q = generate_select(g)
    assert '"say \\"hi\\"\\n"' in q.text


def test_value_subqueries_are_projected_in_id_order(ontology):
    g = tv_graph_left(ontology)
    g.set_subquery(2, EX + "name", "value")
    q = generate_select(g)
    assert q.text.splitlines()[0] == "SELECT ?n0 ?n1 ?n2 ?s0 ?s1"


def test_limit_appended(ontology):
    g = PrototypeGraph(ontology)
    g.add_node(EX + "Person")
    q = generate_select(g, limit=1000)
    assert q.text.endswith("LIMIT 1000\n")


def test_determinism_byte_identical(ontology):
    g = tv_graph_left(ontology)
    a = generate_select(g).text
    b = generate_select(g).text
    assert a == b


def test_count_shares_where_block(ontology):
    g = tv_graph_left(ontology)
    select = generate_select(g).text
    count = generate_count(g).text
    where = select[select.index("WHERE") :]
    assert count == "SELECT (COUNT(*) AS ?c)\n" + where
    assert count.startswith("SELECT (COUNT(*) AS ?c)")


def test_variable_hygiene(ontology):
    g = tv_graph_left(ontology)
    g.set_subquery(2, EX + "name", "constraint", Condition("contains", "York"))
    q = generate_select(g)
    head, _, body = q.text.partition("WHERE")
    for var, _ in q.projection:
        assert f"?{var}" in head
        assert f"?{var} " in body or f"?{var})" in body


def test_expand_subclasses_emits_union(ontology):
    g = PrototypeGraph(ontology)
    g.add_node(EX + "Work")
    q = generate_select(g, expand_subclasses=True)
    assert "UNION" in q.text
    # descendants of Work: MusicalWork, TelevisionShow, Work itself
    assert q.text.count(" a <") == 3
    leaf = PrototypeGraph(ontology)
    leaf.add_node(EX + "Athlete")
    assert "UNION" not in generate_select(leaf, expand_subclasses=True).text
