import json

import pytest

from app.cli import main
from app.services.experiments import run_e1_bs12


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "group, word, verdict",
    [
        ("bs12", "taTAA", "identity"),
        ("free:2", "", "identity"),
        ("heisenberg", "a_z", "non-identity"),
    ],
)
def test_eval(capsys, group, word, verdict):
    code, out, _ = run(capsys, "eval", "--group", group, "--word", word)
    assert code == 0
    assert out.strip() == verdict


def test_eval_json(capsys):
    code, out, _ = run(capsys, "eval", "--group", "zn:2", "--word", "abAB", "--format", "json")
    assert code == 0
    assert json.loads(out) == {"group": "zn:2", "identity": True, "word": "abAB"}


@pytest.mark.parametrize("argv", [["--group", "nope", "--word", "a"], ["--group", "free:1", "--word", "b"]])
def test_eval_parse_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, "eval", *argv)
    assert code == 2
    assert err.startswith("error:")


def test_slice_trivial_group_stdout(capsys):
    code, out, _ = run(capsys, "slice", "--group", "trivial", "--regex", "a*", "--max-len", "3", "--project", "a")
    assert code == 0
    assert out == "a\n0\n1\n2\n3\n"


def test_slice_matches_e1(capsys, tmp_path):
    out_file = tmp_path / "e1.csv"
    code, _, _ = run(
        capsys, "slice", "--group", "bs12", "--regex", "t*a(T)*(A)*", "--max-len", "45", "--project", "t,A",
        "--out", str(out_file),
    )
    assert code == 0
    expected = "t,A\n" + "".join(f"{n},{m}\n" for n, m in run_e1_bs12(45).points)
    assert out_file.read_text(encoding="utf-8") == expected


def test_slice_budget_exceeded_exits_one(capsys):
    code, out, _ = run(
        capsys, "slice", "--group", "free:2", "--regex", "(a+b+A+B)*", "--max-len", "6", "--project", "a",
        "--budget", "5",
    )
    assert code == 1
    assert json.loads(out)["status"] == "error"


def test_graph_classify_p4(capsys, data_dir):
    code, out, _ = run(capsys, "graph", str(data_dir / "p4.json"))
    doc = json.loads(out)
    assert code == 0
    assert doc["verdict"] == "NotMCF"
    assert doc["witness"] == {"kind": "P4", "vertices": ["a", "b", "c", "d"]}
    assert doc["theorem"] == "A(P4)-not-MCF"


def test_graph_modes(capsys, data_dir):
    _, out, _ = run(capsys, "graph", str(data_dir / "c4.edges"), "--mode", "cograph")
    doc = json.loads(out)
    assert doc["cograph"] is True
    assert doc["join"] == [["a", "c"], ["b", "d"]]

    _, out, _ = run(capsys, "graph", str(data_dir / "k1.edges"), "--mode", "certificate")
    doc = json.loads(out)
    assert doc["in_class_g"] is True
    assert doc["certificate"] == {"kind": "leaf", "vertex": "v"}
    assert doc["replay_matches"] is True


def test_graph_missing_file_exits_two(capsys, tmp_path):
    code, _, _ = run(capsys, "graph", str(tmp_path / "missing.json"))
    assert code == 2


def test_experiment_writes_report(capsys, tmp_path):
    out_file = tmp_path / "e3.json"
    csv_file = tmp_path / "e3.csv"
    code, _, _ = run(capsys, "experiment", "--id", "E3", "--n-max", "4", "--out", str(out_file), "--csv", str(csv_file))
    assert code == 0
    record = json.loads(out_file.read_text(encoding="utf-8"))
    assert record["status"] == "success"
    assert record["results"]["points"] == [[n, 2 * n * n] for n in range(1, 5)]
    assert "duration_seconds" not in record
    assert csv_file.read_text(encoding="utf-8").splitlines()[0] == "a,y"


def test_experiment_default_output(capsys, reports_dir):
    code, _, _ = run(capsys, "experiment", "--id", "E1", "--max-len", "7", "--timing")
    assert code == 0
    record = json.loads((reports_dir / "e1.json").read_text(encoding="utf-8"))
    assert record["results"]["points"] == [[0, 1], [1, 2]]
    assert "duration_seconds" in record


def test_experiment_output_is_byte_identical(capsys, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "experiment", "--id", "E5", "--n-max", "4", "--out", str(first))
    run(capsys, "experiment", "--id", "E5", "--n-max", "4", "--out", str(second))
    assert first.read_bytes() == second.read_bytes()


def test_experiment_bound_below_minimum(capsys):
    code, _, err = run(capsys, "experiment", "--id", "E1", "--max-len", "1")
    assert code == 2
    assert "max_len" in err


def test_experiment_geometries(capsys, tmp_path):
    out_file = tmp_path / "geometries.json"
    code, _, _ = run(capsys, "experiment", "--id", "geometries", "--out", str(out_file))
    assert code == 0
    assert len(json.loads(out_file.read_text(encoding="utf-8"))["geometries"]) == 8


def test_schreier_passes(capsys, data_dir, tmp_path):
    out_file = tmp_path / "schreier.json"
    code, _, _ = run(
        capsys, "schreier", "--group", "free:1", "--action", str(data_dir / "z_index2.json"), "--bound", "8",
        "--out", str(out_file),
    )
    assert code == 0
    record = json.loads(out_file.read_text(encoding="utf-8"))
    assert record["results"]["verification"]["passed"] is True
    assert record["results"]["generators"] == [{"edge": [1, "a", 0], "name": "b0", "word": "aa"}]


def test_schreier_degree_one(capsys, data_dir, reports_dir):
    code, _, _ = run(capsys, "schreier", "--group", "free:2", "--action", str(data_dir / "trivial_action.json"), "--bound", "4")
    assert code == 0
    assert (reports_dir / "schreier.json").exists()


def test_schreier_corrupted_fails_with_witness(capsys, data_dir, tmp_path):
    code, out, _ = run(
        capsys, "schreier", "--group", "free:1", "--action", str(data_dir / "z_index2.json"), "--corrupt",
        "--out", str(tmp_path / "s.json"),
    )
    assert code == 1
    assert json.loads(out)["witness"] == ["b0'", "aa"]


def test_schreier_not_transitive_exits_two(capsys, data_dir):
    code, _, _ = run(capsys, "schreier", "--group", "free:1", "--action", str(data_dir / "not_transitive.json"))
    assert code == 2


def test_fit_with_box(capsys, tmp_path):
    points = tmp_path / "shape.csv"
    inside = sorted({(m, m * n) for m in range(7) for n in range(7) if m + n <= 6})
    points.write_text("a,a_z\n" + "".join(f"{x},{y}\n" for x, y in inside), encoding="utf-8")
    code, out, _ = run(
        capsys, "fit", str(points), "--box", "6,9", "--components", "2", "--generators", "2", "--coord-bound", "3",
        "--certificate", "vertical-gap",
    )
    doc = json.loads(out)
    assert code == 0
    assert doc["found"] is False
    assert doc["certificate"] == {"kind": "vertical-gap", "passed": True}


def test_fit_finds_line(capsys, data_dir, tmp_path):
    points = tmp_path / "line.csv"
    points.write_text("n,y\n0,0\n1,2\n2,4\n", encoding="utf-8")
    code, out, _ = run(capsys, "fit", str(points), "--components", "1", "--generators", "1", "--coord-bound", "2")
    doc = json.loads(out)
    assert code == 0
    assert doc["found"] is True
    assert doc["max_collinear"] == 3


def test_fit_bad_certificate_exits_two(capsys, data_dir):
    code, _, _ = run(
        capsys, "fit", str(data_dir / "shape_points.csv"), "--components", "1", "--generators", "1",
        "--coord-bound", "1", "--certificate", "cubic:1",
    )
    assert code == 2
