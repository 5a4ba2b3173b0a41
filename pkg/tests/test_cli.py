import csv
import io
import json
from pathlib import Path

import pytest

from protoquery.cli import main

FIXTURES = Path(__file__).parent / "fixtures"
KG = str(FIXTURES / "kg.ttl")
TV_NT = str(FIXTURES / "tv.nt")
LEFT = str(FIXTURES / "tv_left.graph.json")
RIGHT = str(FIXTURES / "tv_right.graph.json")
PERSON = str(FIXTURES / "person.graph.json")


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_sparql_prints_deterministic_query(capsys):
    code, out, _ = run(capsys, "sparql", PERSON, "--ontology", KG)
    assert code == 0
    assert out == (
        "SELECT ?n0\n"
        "WHERE {\n"
        "  ?n0 a <http://example.org/kg/Person> .\n"
        "}\n"
    )
    code2, out2, _ = run(capsys, "sparql", PERSON, "--ontology", KG)
    assert out2 == out


def test_sparql_count_mode(capsys):
    code, out, _ = run(capsys, "sparql", PERSON, "--ontology", KG, "--count")
    assert code == 0
    assert out.startswith("SELECT (COUNT(*) AS ?c)")


def test_ingest_reports_counts(capsys):
    code, out, _ = run(capsys, "ingest", KG)
    assert code == 0
    assert "classes:    13" in out
    assert "links:      7" in out


def test_diff_names_the_fig1_changes(capsys):
    code, out, _ = run(capsys, "diff", LEFT, RIGHT, "--ontology", KG)
    assert code == 0
    assert "- node 1 <http://example.org/kg/Work>" in out
    assert "- edge 0" in out
    assert "+ subquery 1" in out
    assert "name" in out


def test_diff_json_mode(capsys):
    code, out, _ = run(capsys, "diff", LEFT, RIGHT, "--ontology", KG, "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["nodes"]["deleted"] == [1]


def test_query_local_table(capsys):
    code, out, err = run(capsys, "query", LEFT, "--ontology", KG, "--local", TV_NT)
    assert code == 0
    assert "n0" in out.splitlines()[0]
    assert "(2 rows)" in err


def test_query_csv(capsys):
    code, out, _ = run(capsys, "query", RIGHT, "--ontology", KG, "--local", TV_NT, "--csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n0", "n2", "s0"]
    assert len(rows) == 4  # header + 3 matches


def test_export_instance_diff(capsys):
    code, out, _ = run(
        capsys, "export", "--kind", "instance_diff", "--ontology", KG,
        "--left", LEFT, "--right", RIGHT, "--local", TV_NT,
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    statuses = [r["diff_status"] for r in rows]
    assert statuses.count("added") == 2
    assert statuses.count("removed") == 1
    assert statuses.count("shared") == 1


def test_embed_uses_cache_on_second_run(capsys, tmp_path):
    store = str(tmp_path / "emb")
    code, out, _ = run(capsys, "embed", KG, "--store", store)
    assert code == 0
    assert "20 entries" in out
    code, out, _ = run(capsys, "embed", KG, "--store", store)
    assert "provider calls this run: 0" in out


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_missing_file_is_error_exit_1(capsys):
    code, _, err = run(capsys, "sparql", "no-such.graph.json", "--ontology", KG)
    assert code == 1
    assert "error" in err


def test_invalid_graph_file_is_error_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.graph.json"
    bad.write_text("{}", encoding="utf-8")
    code, _, err = run(capsys, "sparql", str(bad), "--ontology", KG)
    assert code == 1
    assert "error" in err
