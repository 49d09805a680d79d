import json
import math
import subprocess
import sys

import pytest

from ineqforge import cli


def _write(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_registry_matches_configs():
    from pathlib import Path

    shipped = {p.stem for p in (Path(__file__).parents[1] / "docs" / "configs").glob("*.json")}
    assert shipped == set(cli.REGISTRY)


def test_invalid_p_is_a_usage_error(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {"experiment": "bsy-1d", "p": 0.5})
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "p >= 1" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("cfg", [{"experiment": "no-such-thing"}, {"experiment": "bsy-1d", "bogus": 1},
                                 {"experiment": "bsy-1d", "x_cells": 0}, {"experiment": "cs-bsy", "s": 1.5}])
def test_bad_configs(tmp_path, cfg):
    assert cli.main(["run", "--config", _write(tmp_path, "c.json", cfg), "--out", str(tmp_path)]) == 2


def test_unreadable_config_and_bad_arguments(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "broken.json").write_text("{")
    assert cli.main(["run", "--config", str(tmp_path / "broken.json")]) == 2
    assert cli.main(["frobnicate"]) == 2
    cfg = _write(tmp_path, "c.json", {"experiment": "mixed-norm-suite", "trials": 2})
    assert cli.main(["run", "--config", cfg, "--workers", "0"]) == 2


def test_mixed_norm_suite_runs_and_is_deterministic(tmp_path):
    cfg = _write(tmp_path, "c.json", {"experiment": "mixed-norm-suite", "seed": 1, "trials": 20})
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
        outs.append(out)
    for ext in ("csv", "json"):
        a = (outs[0] / f"mixed-norm-suite.{ext}").read_bytes()
        assert a == (outs[1] / f"mixed-norm-suite.{ext}").read_bytes()
    assert b"\r" not in a
    rep = json.loads((outs[0] / "mixed-norm-suite.json").read_text())
    assert rep["passed"] and rep["measured"] == rep["target"] == 20
    assert "wall_time_s" in json.loads((outs[0] / "mixed-norm-suite.timing.json").read_text())
    lines = (outs[0] / "mixed-norm-suite.csv").read_text().splitlines()
    assert lines[0] == "param,value,stderr" and len(lines) == 21


def test_seed_environment_override(tmp_path, monkeypatch):
    cfg = _write(tmp_path, "c.json", {"experiment": "mixed-norm-suite", "seed": 1, "trials": 5})
    monkeypatch.setenv("INEQFORGE_SEED", "77")
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert json.loads((tmp_path / "a" / "mixed-norm-suite.json").read_text())["config"]["seed"] == 77
    monkeypatch.setenv("INEQFORGE_SEED", "x")
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "b")]) == 2


def test_constants(capsys):
    assert cli.main(["constants", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    table = {(r["p"], r["N"]): r for r in rows}
    assert table[(2, 2)]["k"] == pytest.approx(math.pi, rel=1e-12)
    assert table[(1, 1)]["kappa_N"] == pytest.approx(2.0)
    assert table[(2, 3)]["kappa_N"] == pytest.approx(4 * math.pi / 3)
    assert cli.main(["constants"]) == 0
    assert "kappa_N" in capsys.readouterr().out


def test_report(tmp_path):
    assert cli.main(["report"]) == 0
    ok = {"experiment": "a", "measured": 1.0, "target": 1.0, "rel_error": 0.0, "passed": True}
    bad = dict(ok, experiment="b", passed=False)
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    pa.write_text(json.dumps(ok))
    pb.write_text(json.dumps(bad))
    assert cli.main(["report", str(pa)]) == 0
    assert cli.main(["report", str(pa), str(pb)]) == 1
    (tmp_path / "c.json").write_text("not json")
    assert cli.main(["report", str(tmp_path / "c.json")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ineqforge", "constants"], capture_output=True, text=True)
    assert proc.returncode == 0 and "k(p,N)" in proc.stdout
