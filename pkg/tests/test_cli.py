import json
import os

import numpy as np
import pytest

from xlp.cli import main
from xlp.model import parse_problem, serialize_problem
from xlp.problems import case


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_case_json_round_trips_schema(capsys):
    code, out, _ = run(capsys, "solve", "--case", "RO1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "optimal"
    assert doc["objective"] == pytest.approx(16.0)
    assert doc["duals"] == [2.0, 0.0]
    assert doc["pivot_rule"] == "dantzig"


def test_solve_missing_file_is_usage_error(capsys):
    code, _, err = run(capsys, "solve", "--file", "missing.json")
    assert code == 2
    assert json.loads(err)["error"]


def test_solve_file_input_does_not_mutate_it(capsys, tmp_path):
    path = tmp_path / "p.json"
    text = serialize_problem(case("RO2"))
    path.write_text(text)
    code, out, _ = run(capsys, "solve", "--file", str(path), "--format", "json")
    assert code == 0
    assert path.read_text() == text
    assert json.loads(out)["objective"] == pytest.approx(40.0 / 3.0)


def test_solve_infeasible_file_exits_1(capsys, tmp_path):
    doc = '{"A": [[1.0]], "b": [-1.0], "w": [1.0], "name": "bad"}'
    path = tmp_path / "infeasible.json"
    path.write_text(doc)
    code, out, _ = run(capsys, "solve", "--file", str(path), "--format", "json")
    assert code == 1
    assert json.loads(out)["status"] == "infeasible"


def test_attribute_gxi_table_and_json(capsys):
    code, out, _ = run(capsys, "attribute", "--case", "RO1", "--method", "gxi",
                       "--map", "objective", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["b"] == [16.0, 0.0]
    assert doc["A"] == [[0.0, -16.0], [0.0, 0.0]]

    code, out, _ = run(capsys, "attribute", "--case", "RO1", "--method", "gxi",
                       "--format", "csv")
    assert code == 0
    assert "b[0],16" in out


def test_occlude_ks3(capsys):
    code, out, _ = run(capsys, "occlude", "--case", "KS3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["structures"] == {
        "item1": 0.0, "item2": 8.0, "item3": 0.0, "item4": 0.0,
        "item5": 0.0, "item6": 0.0, "item7": 0.0,
    }


def test_grad_emits_shapes(capsys):
    code, out, _ = run(capsys, "grad", "--case", "RO1")
    assert code == 0
    doc = json.loads(out)
    assert doc["dO_dA"]["shape"] == [2, 2]
    assert doc["dO_db"]["values"] == [2.0, 0.0]


def test_check_single_case_property(capsys):
    code, out, _ = run(capsys, "check", "--case", "RO4",
                       "--property", "implementation_invariance")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "violated"
    assert doc["property"] == "implementation_invariance"


def test_check_all_matrix(capsys):
    code, out, _ = run(capsys, "check", "--all", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["mismatches"] == []
    assert doc["expected_verdicts_checked"] >= 19


def test_reproduce_case_table_mentions_reference_status(capsys):
    code, out, _ = run(capsys, "reproduce", "RO1")
    assert code == 0
    assert "reference-exact" in out
    assert "16" in out


def test_reproduce_ks3_occlusion_row(capsys):
    code, out, _ = run(capsys, "reproduce", "KS3", "--method", "occlusion",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    occ = doc["attributions"]["occlusion/objective"]["structures"]
    assert [occ[f"item{j}"] for j in range(1, 8)] == [0, 8, 0, 0, 0, 0, 0]
    statuses = {r["key"]: r["status"] for r in doc["reference_rows"]}
    assert statuses["KS3/occlusion/objective/structures"] == "reference-exact"


def test_map_showcase_output(capsys):
    code, out, _ = run(capsys, "map", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["states"] == {"X1": 0, "X2": 0, "X3": 0}
    assert doc["edge_occlusion"] == {"E12": [0, -1, -1], "E23": [0, 0, -1]}


def test_energy_small_horizon(capsys):
    code, out, _ = run(capsys, "energy", "--seed", "3", "--horizon-hours", "48",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "optimal"
    assert doc["cap_pv"] >= 0


def test_pivot_rule_env_override(capsys, monkeypatch):
    monkeypatch.setenv("XLP_PIVOT", "bland")
    code, out, _ = run(capsys, "solve", "--case", "RO4", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["pivot_rule"] == "bland"
    assert doc["duals"] == [0.0, 2.0]  # the bland-side vertex of the dual face
