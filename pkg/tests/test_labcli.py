import csv
import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from fkdyn.labcli import (EXPERIMENTS, SCHEMAS, ConfigError, ExperimentConfig, Report,
                          emit_report, load_config, main, run_experiment)


def write_cfg(tmp_path, data, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return p


def test_config_merges_defaults_and_rejects_unknown():
    cfg = ExperimentConfig("fixed-points", params={"q": 4.0})
    assert cfg.params["q"] == 4.0 and cfg.params["delta"] == 3
    with pytest.raises(ConfigError):
        ExperimentConfig("fixed-points", params={"qq": 4.0})
    with pytest.raises(ConfigError):
        ExperimentConfig("nope")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"experiment": "validate"}, "fixed-points")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"experiment": "validate", "extra": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({})


def test_load_config(tmp_path):
    p = write_cfg(tmp_path, {"seed": 3, "params": {"q_values": [3.0], "delta_values": [3]}})
    cfg = load_config(p, "phase-diagram")
    assert cfg.seed == 3 and cfg.experiment == "phase-diagram"
    bad = tmp_path / "bad.yaml"
    bad.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(bad, "phase-diagram")


def test_every_experiment_has_schema():
    assert set(SCHEMAS) == set(EXPERIMENTS)


def test_phase_diagram_has_p_s_row():
    rep = run_experiment(ExperimentConfig("phase-diagram",
                                          params={"q_values": [3.0], "delta_values": [3]}))
    rows = rep.tables["thresholds"]
    assert any(abs(r["p_s"] - 0.75) < 1e-12 for r in rows)
    assert rep.passed


def _grid_root_count(p, q, d, k=200_001):
    # independent count: sign changes of g(y) - y on a dense grid, plus y = 1
    y = np.linspace(1.0, (1 - p) ** -d, k)[1:]
    c = (q - 1) * (1 - p)
    h = ((y + c) / ((1 - p) * y + p + c)) ** d - y
    return 1 + int(np.sum(np.sign(h[:-1]) != np.sign(h[1:])))


def test_fixed_points_sweep():
    rep = run_experiment(ExperimentConfig("fixed-points"))
    rows = rep.tables["points"]
    assert [r["p"] for r in rows] == [0.70, 0.74, 0.76, 0.90]
    # p_u ~ 0.7388 < 0.74 < p_s = 0.75, so 0.74 sits in the three-root band
    assert [r["regime"] for r in rows] == ["below-p_u", "between", "above-p_s", "above-p_s"]
    assert [r["count"] for r in rows] == [1, 3, 2, 2]
    for r in rows:
        assert r["count"] == _grid_root_count(r["p"], 3.0, 2)
    assert rep.passed


def test_validate_small_suite():
    rep = run_experiment(ExperimentConfig("validate", seed=0,
                                          params={"max_edges": 8, "trials": 200}))
    assert rep.passed
    assert all(r["ok"] for r in rep.tables["trials"])


def test_report_json_is_stable(tmp_path):
    cfg = ExperimentConfig("sharper-bound", seed=1)
    a = emit_report(run_experiment(cfg), "json", tmp_path / "a.json")
    b = emit_report(run_experiment(cfg), "json", tmp_path / "b.json")
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    da.pop("timing")
    db.pop("timing")
    assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)
    assert da["schema_version"] == 1 and "code_version" in da
    assert da["config"]["experiment"] == "sharper-bound"


def test_report_bytes_identical_with_same_timing(tmp_path):
    rep = run_experiment(ExperimentConfig("phase-diagram"))
    a = emit_report(rep, "json", tmp_path / "a.json").read_bytes()
    b = emit_report(rep, "json", tmp_path / "b.json").read_bytes()
    assert a == b


def test_csv_header_and_empty_table(tmp_path):
    rep = run_experiment(ExperimentConfig("fixed-points"))
    path = emit_report(rep, "csv", tmp_path / "fp.csv")
    rows = list(csv.reader(open(path)))
    assert rows[0] == SCHEMAS["fixed-points"]["points"]
    assert len(rows) == 5
    empty = Report("validate", {}, {"trials": []}, {}, {})
    rows = list(csv.reader(open(emit_report(empty, "csv", tmp_path / "e.csv"))))
    assert rows == [SCHEMAS["validate"]["trials"]]
    with pytest.raises(KeyError):
        emit_report(rep, "csv", tmp_path / "x.csv", table="nope")
    with pytest.raises(ValueError):
        emit_report(rep, "xml", tmp_path / "x.xml")


def test_nonfinite_values_serialize(tmp_path):
    rep = Report("coupling-time", {}, {"profile": [{"median": float("inf")}]}, {"x": float("nan")},
                 {"ok": True})
    doc = json.loads(emit_report(rep, "json", tmp_path / "r.json").read_text())
    assert doc["tables"]["profile"][0]["median"] == "inf" and doc["summary"]["x"] == "nan"


def test_main_writes_outputs_and_exit_codes(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"params": {"q_values": [3.0], "delta_values": [3]}})
    out = tmp_path / "out"
    assert main(["phase-diagram", "--config", str(cfg), "--out", str(out), "--seed", "5"]) == 0
    assert (out / "phase-diagram.json").exists() and (out / "phase-diagram.csv").exists()
    assert json.loads((out / "phase-diagram.json").read_text())["config"]["seed"] == 5
    assert "PASS" in capsys.readouterr().out
    bad = write_cfg(tmp_path, {"params": {"bogus": 1}}, "bad.yaml")
    assert main(["phase-diagram", "--config", str(bad)]) == 2
    assert main(["phase-diagram", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_main_reports_failure(tmp_path):
    cfg = write_cfg(tmp_path, {"params": {"depths": [3, 4, 5], "replicas": 4,
                                          "tolerance": 1e-9}})
    assert main(["wsm-decay", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_rrg_pipeline_writes_second_table(tmp_path):
    cfg = write_cfg(tmp_path, {"params": {"n": 300, "n_seeds": 1, "n_balls": 5}})
    code = main(["rrg-pipeline", "--config", str(cfg), "--out", str(tmp_path)])
    assert code in (0, 1)
    rows = list(csv.reader(open(tmp_path / "rrg-pipeline-burn_in.csv")))
    assert rows[0] == SCHEMAS["rrg-pipeline"]["burn_in"] and len(rows) == 2


def test_console_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, {"params": {"cases": [[2, 9.0, 1.0]]}})
    res = subprocess.run([sys.executable, "-m", "fkdyn.labcli", "sharper-bound", "--config",
                          str(cfg), "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "PASS" in res.stdout
