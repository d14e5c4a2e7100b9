import json
import os
import subprocess
import sys

import pytest

from liouville_lab import cli
from liouville_lab.errors import ConfigError


def _run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _files(root):
    found = {}
    for dirpath, _, names in os.walk(root):
        for name in names:
            if name.endswith((".json", ".csv")):
                path = os.path.join(dirpath, name)
                with open(path, "rb") as fh:
                    found[os.path.relpath(path, root)] = fh.read()
    return found


def test_blowup_artifacts(tmp_path, capsys):
    code, out, _ = _run(["blowup", "--f", "pow(s,2)", "--out", str(tmp_path)], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["subcommand"] == "blowup"
    assert (tmp_path / "config.txt").exists()
    data = json.loads((tmp_path / "blowup.json").read_text())
    assert abs(data["T"] - 1.0) < 1e-10
    assert "config_hash" in data and data["tool_version"] == cli._io.VERSION
    first = next(p for p in tmp_path.iterdir() if p.suffix == ".csv").read_text().splitlines()[0]
    assert first.startswith("# liouville_lab") and "config_hash=" in first


def test_classify_and_shoot(tmp_path, capsys):
    assert _run(["classify", "--f", "pow(s,2)*log(2+s)", "--out", str(tmp_path / "c")],
                capsys)[0] == 0
    rep = json.loads((tmp_path / "c" / "classify.json").read_text())
    assert rep["verdict"] == "regular"
    assert _run(["shoot", "--f", "pow(s,5)*log(1+s)", "--n", "3", "--out", str(tmp_path / "s")],
                capsys)[0] == 0


def test_singular_estimate(tmp_path, capsys):
    code, out, _ = _run(["verify-estimate", "--source", "singular", "--out", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads((tmp_path / "estimate.json").read_text())
    assert data["min"] == pytest.approx(2 / 9, rel=1e-10)
    assert data["max"] == pytest.approx(2 / 9, rel=1e-10)


@pytest.mark.parametrize("argv,code", [
    (["blowup", "--f", "pow(s,"], 2),
    (["blowup", "--f", "pow(s,2)", "--bogus", "1"], 2),
    (["nope"], 2),
    (["blowup", "--f", "s"], 3),
    (["blowup", "--f", "pow(s,2)", "--y0", "-1"], 4),
])
def test_exit_codes(tmp_path, capsys, argv, code):
    got, _, err = _run(argv + ["--out", str(tmp_path)], capsys)
    assert got == code
    assert json.loads(err)["exit_code"] == code


def test_config_round_trip_and_run(tmp_path, capsys):
    cfg = cli.ExperimentConfig("blowup", cli.resolve_params("blowup", {"f": "pow(s,3)"}),
                               str(tmp_path / "a"))
    again = cli.ExperimentConfig.from_text(cfg.to_text())
    assert again.params == cfg.params and again.hash() == cfg.hash()
    moved = cli.ExperimentConfig("blowup", cfg.params, "elsewhere")
    assert moved.hash() == cfg.hash()
    path = tmp_path / "exp.txt"
    path.write_text(cfg.to_text())
    assert _run(["run", str(path)], capsys)[0] == 0
    data = json.loads((tmp_path / "a" / "blowup.json").read_text())
    assert data["T"] == pytest.approx(0.5, abs=1e-10)


def test_config_rejects_unknown_and_duplicate_keys():
    with pytest.raises(ConfigError):
        cli.resolve_params("blowup", {"f": "pow(s,2)", "colour": 1})
    with pytest.raises(ConfigError):
        cli.parse_config_text("f = 'pow(s,2)'\nf = 'pow(s,3)'\n")
    with pytest.raises(ConfigError):
        cli.resolve_params("blowup", {"f": "pow(s,2)", "y0": "one"})


def test_environment_overrides_output(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert _run(["blowup", "--f", "pow(s,2)", "--out", str(tmp_path / "flag")], capsys)[0] == 0
    assert (tmp_path / "env" / "blowup.json").exists()
    assert not (tmp_path / "flag").exists()


@pytest.mark.parametrize("argv", [
    ["blowup", "--f", "pow(s,2)*log(2+s)"],
    ["classify", "--catalog", "oscillating_exponent", "--catalog-params", "{'p': 2.0, 'a': 0.5}"],
    ["doubling-demo", "--instances", "20", "--n-max", "30"],
])
def test_reruns_are_byte_identical(tmp_path, capsys, argv):
    assert _run(argv + ["--out", str(tmp_path / "1")], capsys)[0] == 0
    assert _run(argv + ["--out", str(tmp_path / "2")], capsys)[0] == 0
    a, b = _files(tmp_path / "1"), _files(tmp_path / "2")
    assert a and a == b


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "liouville_lab.cli", "blowup", "--f", "pow(s,2)",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["subcommand"] == "blowup"
