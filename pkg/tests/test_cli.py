import csv
import io
import json
from pathlib import Path

import pytest

from isoholder.cli import CSV_HEADER, ConfigError, execute, load_config, main, render, row_verdict

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).parent / "golden"


def run(tmp_path, doc, command, *extra):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc) if isinstance(doc, dict) else Path(doc).read_text())
    out = tmp_path / "out.txt"
    code = main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out.read_text() if out.exists() else ""


@pytest.mark.parametrize("name, command", [("chain_linear_pair", "chain"), ("chain_sums", "chain"), ("hh_x2y2", "hh")])
def test_golden_csv(tmp_path, name, command):
    code, first = run(tmp_path, CONFIGS / f"{name}.json", command, "--format", "csv")
    code2, second = run(tmp_path, CONFIGS / f"{name}.json", command, "--format", "csv")
    assert code == code2 == 0
    assert first == second == (GOLDEN / f"{name}.csv").read_text()


def test_chain_row_values(tmp_path):
    _, text = run(tmp_path, CONFIGS / "chain_linear_pair.json", "chain", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(text)))
    assert float(row["lhs"]) == pytest.approx(0.5, abs=1e-6)
    assert float(row["refined"]) == pytest.approx(0.557678, abs=1e-6)
    assert float(row["classical"]) == pytest.approx(0.577350, abs=1e-6)
    assert float(row["tightness"]) == pytest.approx(0.96593, abs=1e-5)


def test_header_fixed(tmp_path):
    _, text = run(tmp_path, CONFIGS / "chain_sums.json", "chain", "--format", "csv")
    assert text.splitlines()[0] == ",".join(CSV_HEADER)


def test_missing_p(tmp_path, capsys):
    doc = {"version": 1, "instances": [{"domain": {"kind": "index", "n": 2}, "f": [1, 2], "g": [1, 1]}]}
    code, _ = run(tmp_path, doc, "bound")
    assert code == 2
    assert "'p'" in capsys.readouterr().err


@pytest.mark.parametrize(
    "doc",
    [
        {"version": 2, "p": 2, "domain": {"kind": "index", "n": 1}, "f": "1", "g": "1"},
        {"version": 1, "p": 2, "domain": {"kind": "blob"}, "f": "1", "g": "1"},
        {"version": 1, "p": 2, "domain": {"kind": "interval", "a": 0, "b": 1}, "f": "t +", "g": "1"},
    ],
)
def test_config_errors(tmp_path, doc):
    assert run(tmp_path, doc, "bound")[0] == 2


def test_unreadable_config(tmp_path):
    assert main(["chain", "--config", str(tmp_path / "missing.json")]) == 2


def test_verbatim_sign_fails_identity(tmp_path):
    doc = {"version": 1, "p": 2, "domain": {"kind": "rectangle", "a": 0, "b": 1, "c": 0, "d": 1},
           "f": "x*y", "f_st": "1"}
    code, text = run(tmp_path, doc, "hh", "--format", "json-lines")
    assert code == 0 and json.loads(text)["identity_pass"]
    _, text = run(tmp_path, doc, "hh", "--format", "json-lines", "--paper-verbatim-sign")
    row = json.loads(text)
    assert row["identity_residual"] == pytest.approx(0.5, abs=1e-12)
    assert not row["identity_pass"]


def test_numeric_failure_row(tmp_path):
    doc = {"version": 1, "p": 0.5, "domain": {"kind": "index", "n": 2}, "f": [1, 4], "g": [0, 1]}
    code, text = run(tmp_path, doc, "bound", "--format", "json-lines")
    assert code == 1
    assert "ZeroDivisionError" in json.loads(text)["error"]


def test_reversed_bound_row(tmp_path):
    doc = {"version": 1, "p": 0.5, "domain": {"kind": "index", "n": 2}, "f": [1, 4], "g": [1, 1]}
    code, text = run(tmp_path, doc, "bound", "--format", "json-lines")
    row = json.loads(text)
    assert code == 0 and row["lhs"] == 5 and row["classical"] == pytest.approx(4.5)


def test_moment(tmp_path):
    code, text = run(tmp_path, CONFIGS / "moment.json", "moment", "--format", "json-lines")
    assert code == 0
    for line in text.splitlines():
        row = json.loads(line)
        assert row["lhs"] == pytest.approx(row["classical"], abs=1e-8)


def test_fuzz_seed_override(tmp_path):
    doc = {"version": 1, "fuzz": {"case": "discrete-1d", "trials": 20, "seed": 1}}
    _, a = run(tmp_path, doc, "fuzz", "--format", "json-lines")
    _, b = run(tmp_path, doc, "fuzz", "--format", "json-lines", "--seed", "2")
    _, c = run(tmp_path, doc, "fuzz", "--format", "json-lines", "--seed", "2")
    assert json.loads(a)["summary"]["seed"] == 1 and json.loads(b)["summary"]["seed"] == 2
    assert a != b and b == c


@pytest.mark.parametrize("fmt", ["table", "csv", "json-lines"])
def test_formats(tmp_path, fmt):
    code, text = run(tmp_path, CONFIGS / "bound_examples.json", "bound", "--format", fmt)
    assert code == 0 and text.endswith("\n")
    if fmt == "table":
        assert "0.557678" in text or "3.16228" in text


@pytest.mark.parametrize("name, command", [("chain_linear_pair", "chain"), ("chain_sums", "chain"), ("bound_examples", "bound")])
def test_round_trip(name, command):
    cfg = load_config(json.loads((CONFIGS / f"{name}.json").read_text()), command)
    rows = execute(cfg)
    for parsed in csv.DictReader(io.StringIO(render(rows, "csv"))):
        if parsed["refined"] == "":
            continue
        assert row_verdict(parsed) == (parsed["pass"] == "true")
    for line in render(rows, "json-lines").splitlines():
        parsed = json.loads(line)
        if parsed["refined"] is not None:
            assert row_verdict(parsed) == parsed["pass"]


def test_row_verdict_detects_violation():
    assert not row_verdict({"lhs": 1.0, "refined": 0.9, "classical": 1.1})
    assert not row_verdict({"lhs": 1.0, "refined": 1.2, "classical": 1.1})
    assert row_verdict({"lhs": 0.0, "refined": 0.0, "classical": 0.0})


def test_load_config_rejects_command_mismatch():
    with pytest.raises(ConfigError):
        load_config({"version": 1, "command": "hh", "p": 2}, "chain")
