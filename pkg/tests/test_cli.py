import json
import subprocess
import sys

import pytest

from qerlab.cli import ConfigError, ExperimentConfig, main


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_circle_example_exit_zero_and_artifacts(tmp_path):
    assert main(["circle-example", "--out", str(tmp_path)]) == 0
    d = tmp_path / "circle-example"
    summary = json.loads((d / "summary.json").read_text())
    assert summary["passed"] is True
    assert summary["checks"]["peak_mode_k10"]["value"] == [-1.0, 0.0]
    assert (d / "tu.csv").read_text().startswith("k,x,xi,re,im\n")
    assert (d / "tu_k10.psf").read_bytes()[:4] == b"PSF1"


def test_general_position_json_has_negative_integral(tmp_path):
    cfg = _write(tmp_path, {"kind": "general-position", "hypersurface": {"kind": "vertical", "axis": 0}})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "general-position" / "summary.json").read_text())
    assert summary["checks"]["integral_negative"]["value"] < 0


def test_missing_field_is_named(tmp_path, capsys):
    cfg = _write(tmp_path, {"seed": 3})
    assert main(["run", "--config", str(cfg)]) == 1
    assert "'kind'" in capsys.readouterr().err
    cfg = _write(tmp_path, {"kind": "multiplier"})
    assert main(["run", "--config", str(cfg)]) == 1
    assert "'h_list'" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [
    {"kind": "f-analysis", "colour": "red"},
    {"kind": "nope"},
    {"kind": "f-analysis", "resolution": -4},
    {"kind": "f-analysis", "n": 3},
    {"kind": "multiplier", "h_list": [0.05, 0.1, 0.2]},
    {"kind": "f-analysis", "ensemble": {"draws": 2, "r2": 25}},
    {"kind": "f-analysis", "hypersurface": {"kind": "sphere"}},
])
def test_invalid_configs_exit_one(tmp_path, bad):
    assert main(["run", "--config", str(_write(tmp_path, bad)), "--out", str(tmp_path)]) == 1


def test_unreadable_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "broken.json").write_text("{")
    assert main(["run", "--config", str(tmp_path / "broken.json")]) == 1


def test_subcommand_kind_mismatch(tmp_path):
    cfg = _write(tmp_path, {"kind": "f-analysis"})
    assert main(["holomorphy", "--config", str(cfg)]) == 1


def test_bad_h_list_flag(tmp_path):
    assert main(["multiplier", "--h-list", "0.1,abc", "--out", str(tmp_path)]) == 1


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["f-analysis", "--out", str(blocker / "sub")]) == 1


def test_failing_check_exits_two(tmp_path):
    # the vertical slice does not satisfy the local corner-avoidance condition
    cfg = _write(tmp_path, {"kind": "ellipticity-scan", "hypersurface": {"kind": "vertical"}})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_flags_override_config(tmp_path):
    cfg = _write(tmp_path, {"kind": "f-analysis", "resolution": 50})
    assert main(["run", "--config", str(cfg), "--resolution", "101", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "f-analysis" / "summary.json").read_text())
    assert summary["config"]["resolution"] == 101


def test_env_output_root_and_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("QERLAB_OUT", str(tmp_path / "a"))
    assert main(["circle-example"]) == 0
    monkeypatch.setenv("QERLAB_OUT", str(tmp_path / "b"))
    assert main(["circle-example"]) == 0
    for name in ("tu.csv", "ft_profile.csv", "tu_k40.psf"):
        assert (tmp_path / "a/circle-example" / name).read_bytes() == (tmp_path / "b/circle-example" / name).read_bytes()
    sa = json.loads((tmp_path / "a/circle-example/summary.json").read_text())
    sb = json.loads((tmp_path / "b/circle-example/summary.json").read_text())
    sa["config"].pop("out"), sb["config"].pop("out")
    assert sa == sb


def test_repeated_run_is_byte_identical(tmp_path):
    cfg = _write(tmp_path, {"kind": "general-position", "out": str(tmp_path / "o"), "seed": 11})
    assert main(["run", "--config", str(cfg)]) == 0
    first = {p.name: p.read_bytes() for p in (tmp_path / "o/general-position").iterdir()}
    assert main(["run", "--config", str(cfg)]) == 0
    second = {p.name: p.read_bytes() for p in (tmp_path / "o/general-position").iterdir()}
    assert first == second


def test_config_validation_unit():
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="wavefront", h_list=[0.1, 0.1]).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="wavefront", seed=-1).validate()
    c = ExperimentConfig(kind="wavefront", h_list=[0.1, 0.05], ensemble={"draws": 4}).validate()
    assert c.driver_kwargs()["h_list"] == (0.1, 0.05)
    assert c.driver_kwargs()["draws"] == 4


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "qerlab", "f-analysis", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "f-analysis: PASS" in r.stdout
