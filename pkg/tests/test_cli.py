import csv
import json

import pytest

from ardl_lab.cli import main


@pytest.fixture(scope="module")
def panels(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["simulate", "--seed", "1", "--out", str(root / "full")]) == 0
    assert main(["simulate", "--seed", "1", "--missing-fraction", "0.1", "--out", str(root / "gappy")]) == 0
    return root / "full" / "panel.csv", root / "gappy" / "panel.csv"


def test_simulated_csv_is_long_format(panels):
    with open(panels[0], newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["country", "indicator", "year", "value"]
    assert len(rows) - 1 == 20 * 13 * 17


def test_global_flags_before_or_after_subcommand(panels, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--out", str(a), "dlm", "--input", str(panels[0]), "--rq", "RQ2"]) == 0
    assert main(["dlm", "--input", str(panels[0]), "--rq", "RQ2", "--out", str(b)]) == 0
    assert (a / "dlm.json").read_bytes() == (b / "dlm.json").read_bytes()


def test_bounds_with_sample_dump(panels, tmp_path):
    out = tmp_path / "b"
    assert main(["bounds", "--input", str(panels[0]), "--rq", "RQ2", "--B", "199",
                 "--dump-sample", "--out", str(out)]) == 0
    res = json.loads((out / "bounds.json").read_text())
    assert set(res["critical_values"]) == {"0.9", "0.95", "0.99"}
    with open(out / "bounds_sample.csv", newline="") as fh:
        assert len(list(csv.reader(fh))) == 200


def test_rollcorr_and_ardl_print_json(panels, capsys):
    assert main(["rollcorr", "--input", str(panels[0]), "--rq", "RQ2", "--B", "100"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert len(rows) == 2 * 3
    assert main(["ardl", "--input", str(panels[0]), "--dep", "TRD", "--x", "LPI1",
                 "--entity", "USA", "--p", "1", "--q", "0"]) == 0
    assert "fit" in json.loads(capsys.readouterr().out)


def test_diagnose_runs(panels, capsys):
    assert main(["diagnose", "--input", str(panels[0]), "--rq", "RQ2", "--B", "199"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["tests"]) == 6


def test_impute_then_analyze(panels, tmp_path):
    out = tmp_path / "imp"
    assert main(["impute", "--input", str(panels[1]), "--trees", "5", "--out", str(out)]) == 0
    assert main(["dlm", "--input", str(out / "imputed.csv"), "--rq", "RQ2"]) == 0


def test_exit_codes(panels, tmp_path, capsys):
    assert main(["dlm", "--input", str(tmp_path / "missing.csv"), "--rq", "RQ2"]) == 2
    assert main(["dlm", "--input", str(panels[1]), "--rq", "RQ2"]) == 3
    assert main(["report", str(tmp_path)]) == 2
    assert main(["bounds", "--input", str(panels[0]), "--rq", "RQ2", "--B", "50"]) == 2
    assert main(["run", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "r")]) == 2
    assert not (tmp_path / "r").exists()
    capsys.readouterr()


def test_ingest_summary(panels, tmp_path):
    out = tmp_path / "ing"
    assert main(["ingest", "--input", str(panels[1]), "--out", str(out)]) == 0
    assert any(out.iterdir())
