import json

import jsonschema
import pytest

from rkcontract.cli import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, main
from rkcontract.schemas import SCHEMAS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMAS[doc["command"]])
    return doc


@pytest.mark.parametrize(
    "name, h, psd",
    [("euler", 1.0, True), ("runge", 0.001, False), ("euler", 3.0, False)],
)
def test_tableau_check(capsys, name, h, psd):
    doc = run_json(capsys, "tableau-check", "--tableau", name, "--L", "1", "--h", str(h))
    assert doc["psd"] is psd


def test_tableau_check_from_file(capsys, tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"a": [["0", "0"], ["1/2", "0"]], "b": ["1/2", "1/2"]}))
    doc = run_json(capsys, "tableau-check", "--tableau", str(path), "--L", "2", "--h", "2")
    assert doc["psd"] is True


@pytest.mark.parametrize(
    "name, L, expected",
    [("euler", 2.0, 1.0), ("euler2", 2.0, 2.0), ("runge", 1.0, None)],
)
def test_interval(capsys, name, L, expected):
    doc = run_json(capsys, "interval", "--tableau", name, "--L", str(L))
    if expected is None:
        assert doc["empty"] is True and doc["h_max"] is None
    else:
        assert doc["h_max"] == pytest.approx(expected, rel=1e-9)


def test_malformed_json_is_input_error(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = run(capsys, "interval", "--tableau", str(path), "--L", "1")
    assert code == EXIT_INPUT and "bad.json" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["interval", "--tableau", "euler", "--L", "-1"],
        ["tableau-check", "--tableau", "euler", "--L", "1"],
        ["counterexample", "--L", "nan", "--h", "1"],
        ["bogus"],
    ],
)
def test_bad_arguments(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_INPUT


def test_inconsistent_tableau_is_input_error(capsys, tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"a": [[0]], "b": [0.5]}))
    assert run(capsys, "interval", "--tableau", str(path), "--L", "1")[0] == EXIT_INPUT


def test_counterexample_closed_form(capsys):
    doc = run_json(capsys, "counterexample", "--L", "2", "--h", "1")
    assert doc["dilation"] == 1.515625
    assert doc["constraints"]["all_satisfied"] is True


def test_counterexample_small_step_sweep(capsys):
    for h in (0.1, 0.01):
        doc = run_json(capsys, "counterexample", "--L", "1", "--h", str(h))
        assert (doc["dilation"] - 1) / h**3 == pytest.approx(1 / 32, rel=h)


def test_counterexample_smooth(capsys):
    doc = run_json(capsys, "counterexample", "--L", "1", "--h", "2", "--smooth")
    assert doc["witness"]["ratio"] > 1


def test_counterexample_smooth_infeasible(capsys):
    code, _, err = run(capsys, "counterexample", "--L", "1", "--h", "10", "--smooth")
    assert code == EXIT_INFEASIBLE and "infeasible" in err


@pytest.mark.parametrize("fmt", ["csv", "svg"])
def test_figure_formats(capsys, fmt):
    code, out, _ = run(capsys, "counterexample", "--L", "2", "--h", "1", "--format", fmt)
    assert code == EXIT_OK
    if fmt == "csv":
        lines = out.splitlines()
        assert lines[0] == "kind,name,x,y,dx,dy" and len(lines) == 11
    else:
        assert out.startswith("<svg")


def test_out_directory_and_manifest(capsys, tmp_path):
    out = tmp_path / "run"
    assert run(capsys, "counterexample", "--L", "2", "--h", "1", "--out", str(out))[0] == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    jsonschema.validate(manifest, SCHEMAS["manifest"])
    for name in manifest["artifacts"]:
        assert (out / name).exists()
    assert set(manifest["artifacts"]) == {"result.json", "figure.csv", "figure.svg"}
    first = (out / "result.json").read_bytes()
    run(capsys, "counterexample", "--L", "2", "--h", "1", "--out", str(out))
    assert (out / "result.json").read_bytes() == first


def test_search(capsys, monkeypatch):
    monkeypatch.setenv("RKCONTRACT_THREADS", "2")
    doc = run_json(capsys, "search", "--L", "1", "--h", "0.05", "--dim", "2", "--seed", "0", "--starts", "6")
    assert 0.027 <= doc["fit"]["coefficient"] <= 0.037
    doc1 = run_json(capsys, "search", "--L", "1", "--h", "0.05", "--dim", "1", "--starts", "6")
    assert doc1["best_ratio"] <= 1 + 1e-8


def test_search_deterministic(capsys):
    argv = ["search", "--L", "1", "--h", "0.02", "--dim", "2", "--seed", "3", "--starts", "4"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
