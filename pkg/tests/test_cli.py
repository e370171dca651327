import json

import pytest

from capiso.cli import main
from capiso.config import ConfigError, RunConfig, parse_config


def test_parse_config_values():
    cfg = parse_config("n = 3\nlambda = 0.25, -0.25  # comment\ncone.omega = pi/4, pi/2\n")
    assert cfg["n"] == [3]
    assert cfg["lambda"] == [0.25, -0.25]
    assert cfg["cone.omega"][0] == pytest.approx(0.7853981633974483)


@pytest.mark.parametrize("text", ["bogus = 1", "lambda = 1.5", "grid.resolution = 15",
                                  "select.k_list = 4, 8, 16, 32, 64", "n = three", "just text"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_overrides():
    cfg = RunConfig().with_overrides(grid__resolution=64)
    assert cfg["grid.resolution"] == 64
    assert len(cfg.params) == 6


def test_eval_bubble(tmp_path):
    code = main(["eval", "--out", str(tmp_path)])
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["schema_version"] == 1
    assert abs(rep["report"]["deficit"]) < 1e-10


def test_eval_cone(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("eval.target = cone\neval.graph = perturbed\nn = 3\ncone.omega = pi/3\n")
    assert main(["eval", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["report"]["deficit_C"] > 0


def test_invalid_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("lambda = 1.5\n")
    assert main(["identities", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert main(["identities", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_cone_suite_writes_outputs(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n = 3\nlambda = 0.0\n")
    code = main(["cone", "--config", str(cfg), "--out", str(tmp_path), "--resolution", "64"])
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["passed"] and rep["failed"] == []


def test_failing_criterion_exit_code(tmp_path, monkeypatch):
    from capiso import acceptance, cli

    def fake(ids, cfg, echo=print):
        return [acceptance.Criterion("C99", "forced failure", False, "")]

    monkeypatch.setattr(cli, "run_criteria", fake)
    assert main(["oracle", "--out", str(tmp_path)]) == 1
