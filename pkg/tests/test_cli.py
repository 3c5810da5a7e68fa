import json

import jsonschema
import pytest

from triakis.cli import REPORT_SCHEMA, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    return code, doc


def test_analyze_tetra_edge_snaps_to_critical_value(capsys):
    code, doc = run_json(capsys, "analyze", "--family", "tetra", "--k", "1", "--r", "3.62398")
    (cell,) = doc["result"]["cells"]
    assert code == 0
    assert cell["space"] == "B3Space" and cell["dimension"] == 48
    assert cell["snapped_from"] == "181199/50000"
    assert cell["r"].startswith("3.623982461")


def test_analyze_octa_vertex_at_one(capsys):
    code, doc = run_json(capsys, "analyze", "--family", "octa", "--k", "0", "--r", "1.0")
    (cell,) = doc["result"]["cells"]
    assert code == 0 and cell["space"] == "B3Space" and cell["dimension"] == 48
    assert "snapped_from" not in cell


def test_analyze_octa_face_jumps(capsys):
    code, out, _ = run(capsys, "analyze", "--family", "octa", "--k", "2", "--r", "1.82977")
    assert code == 0
    assert "JumpedSpace  dim 96  generator jumped_generator" in out


def test_scan_and_k_list(capsys):
    code, doc = run_json(capsys, "analyze", "--family", "tetra", "--k", "0,2", "--scan", "2:3:1")
    spaces = [(c["k"], c["r"], c["space"]) for c in doc["result"]["cells"]]
    assert code == 0
    assert spaces == [(0, "2", "A3Space"), (0, "3", "B3Space"), (2, "2", "A3Space"), (2, "3", "B3Space")]


def test_unsupported_family(capsys):
    code, _, err = run(capsys, "paper-check", "--family", "icosa")
    assert code == 2
    assert "unsupported family" in err
    code, _, err = run(capsys, "analyze", "--family", "icosa", "--k", "1", "--r", "2")
    assert code == 2 and "unsupported family" in err


@pytest.mark.parametrize("argv", [
    ["analyze", "--family", "tetra", "--k", "1", "--r", "2", "--precision", "32"],
    ["analyze", "--family", "tetra", "--k", "5", "--r", "2"],
    ["analyze", "--family", "tetra", "--k", "1", "--r", "-1"],
    ["analyze", "--family", "tetra", "--k", "1"],
    ["analyze", "--family", "tetra", "--r", "2"],
    ["coeffs", "--family", "octa", "--k", "1", "--r", "2", "--m", "x"],
    ["mvp", "--family", "octa", "--k", "1", "--r", "2", "--space", "c4"],
    ["analyze", "--family", "octa", "--k", "1", "--scan", "3:1:1"],
    ["analyze", "--family", "octa", "--k", "1", "--r", "2", "--tol", "0"],
])
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_coeffs_table(capsys):
    code, doc = run_json(capsys, "coeffs", "--family", "octa", "--k", "1", "--r", "2", "--m", "2..8")
    (cell,) = doc["result"]["cells"]
    rows = {row["m"]: row for row in cell["degrees"]}
    assert code == 0
    assert all(rows[m]["closed_form"]["agrees"] for m in (2, 4, 6, 8))
    assert rows[3]["terms"] == {}
    assert set(rows[8]["terms"]) == {"e2^4", "e2^2*e4", "e2*e6", "e4^2"}


def test_critical_table(capsys):
    code, out, _ = run(capsys, "critical", "--family", "octa")
    assert code == 0
    for r in ("1.78381067250408", "2.24580617737438", "1.82977066817519"):
        assert r in out
    code, doc = run_json(capsys, "critical", "--family", "tetra")
    rows = {row["k"]: row for row in doc["result"]["rows"]}
    assert rows[1]["critical"] and not rows[0]["critical"] and not rows[2]["critical"]


def test_harmonics(capsys, tmp_path):
    out = tmp_path / "b3.json"
    code = main(["harmonics", "--system", "b3", "--max-degree", "11", "--emit-basis", "--format", "json",
                 "--out", str(out)])
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert code == 0
    assert doc["result"]["total_dim"] == 48 and doc["result"]["top_degree"] == 9
    assert sum(len(v) for v in doc["result"]["basis"].values()) == 48


def test_mvp_report(capsys):
    code, doc = run_json(capsys, "mvp", "--family", "tetra", "--r", "3.62398", "--k", "1", "--space", "b3")
    (rep,) = doc["result"]["reports"]
    assert code == 0 and rep["ok"] and rep["members"] == 48
    assert float(rep["counterexamples"]["e2"]) > 1e-3
    assert "multiplicity" in rep["note"]


def test_mvp_failure_exit_code(capsys):
    code, out, _ = run(capsys, "mvp", "--family", "octa", "--r", "2", "--k", "0", "--space", "jumped")
    assert code == 1
    assert "FAILED" in out


def test_dump_geometry(capsys):
    code, doc = run_json(capsys, "dump-geometry", "--family", "octa", "--r", "3/2")
    (inst,) = doc["result"]["instances"]
    assert code == 0
    assert (len(inst["vertices"]), len(inst["edges"]), len(inst["faces"]), len(inst["flags"])) == (14, 36, 24, 144)
    assert inst["incidence"]["ef1"].startswith("0.0")


def test_check_subset_with_low_precision_warns(capsys):
    code, doc = run_json(capsys, "paper-check", "--precision", "64", "--only", "roots", "dimensions")
    checks = {c["key"]: c for c in doc["result"]["checks"]}
    assert code == 0
    assert checks["roots"]["passed"] and checks["roots"]["warnings"]
    assert checks["dimensions"]["passed"] and not checks["dimensions"]["warnings"]


def test_unknown_check_is_usage_error(capsys):
    code, _, err = run(capsys, "check", "--only", "nonsense")
    assert code == 2 and "unknown check" in err


def test_reports_are_byte_deterministic(capsys):
    argv = ["analyze", "--family", "octa", "--k", "1", "--r", "9/4", "--format", "json"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
