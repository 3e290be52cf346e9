import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from bnsp.acceptance import load_schema, validate_report
from bnsp.cli import ConfigError, expand_ids, resolve, run


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_symbols_table(tmp_path):
    assert run(["--out", str(tmp_path / "a"), "symbols"]) == 0
    rows = _rows(tmp_path / "a" / "symbols.csv")
    assert rows[0] == ["k", "re_lp", "im_lp", "re_lm", "im_lm"]
    assert len(rows) == 1001
    k = np.array([float(r[0]) for r in rows[1:]])
    assert np.all(np.diff(k) > 0)
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["command"] == "symbols" and manifest["config"]["physical"]["mu1"] == 1.0
    assert "numpy" in manifest["versions"]
    assert not list(tmp_path.glob(".partial-*"))


def test_runs_are_deterministic(tmp_path):
    for name in ("a", "b"):
        assert run(["--out", str(tmp_path / name), "--seed", "3", "verify-lemmas", "--ids", "A1,shell"]) == 0
    for f in ("lemma_A1.json", "lemma_shell.json", "lemma_ratios.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_invalid_parameter_exits_nonzero(tmp_path, capsys):
    assert run(["--out", str(tmp_path / "x"), "--mu1", "-1", "symbols"]) != 0
    err = capsys.readouterr().err
    assert "mu1" in err and "invariant" in err
    assert not (tmp_path / "x").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bnsp.cli", "--out", str(tmp_path / "y"), "--mu1", "-1", "symbols"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "mu1" in proc.stderr


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mu1": 2.0, "symbols": {"rows": 50, "kmax": 3.0}}))
    assert run(["--config", str(cfg), "--out", str(tmp_path / "o"), "symbols", "--rows", "20"]) == 0
    rows = _rows(tmp_path / "o" / "symbols.csv")
    assert len(rows) == 21 and float(rows[-1][0]) == pytest.approx(3.0)
    m = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert m["config"]["physical"]["mu1"] == 2.0


def test_unknown_config_field_rejected():
    with pytest.raises(ConfigError):
        resolve("symbols", {"symbols": {"bogus": 1}}, {})
    with pytest.raises(ConfigError, match="top-level"):
        resolve("symbols", {"physical": {"mu1": 2.0}}, {})


def test_lemma_id_ranges():
    assert expand_ids("I1,5.0,N1..N3") == ["I1", "5.0", "N1", "N2", "N3"]


def test_unknown_lemma_id(tmp_path):
    assert run(["--out", str(tmp_path / "z"), "verify-lemmas", "--ids", "Q7"]) == 2


def test_green_and_envelope_outputs(tmp_path):
    assert run(["--out", str(tmp_path / "g"), "green", "--times", "1,5", "--nr", "50"]) == 0
    assert any(tmp_path.joinpath("g").glob("*.csv"))
    assert run(["--out", str(tmp_path / "e"), "envelope-check", "--times", "5,10"]) == 0


def test_acceptance_report_schema(tmp_path):
    code = run(["--out", str(tmp_path / "acc"), "acceptance", "--profile", "quick", "--ids", "1,2"])
    report = json.loads((tmp_path / "acc" / "acceptance.json").read_text())
    validate_report(report)
    assert code == (0 if report["passed"] else 1)
    assert [c["id"] for c in report["criteria"]] == [1, 2]
    assert load_schema()["type"] == "object"
    with pytest.raises(Exception):
        validate_report({"profile": "quick"})
