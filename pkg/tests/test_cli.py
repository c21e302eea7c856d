import csv
import json

import numpy as np
import pytest

from rfkahler.cli import main
from rfkahler.errors import ParameterError
from rfkahler.registry import RadialParams
from rfkahler.report import (CSV_COLUMNS, FAIL, PASS, SKIPPED, CheckResult, GridSpec, RunConfig, VerificationReport,
                             parse_sweep, report_json, run_verify)


def test_grid_parse():
    g = GridSpec.parse("1e-3:8:50:log")
    pts = g.points()
    assert len(pts) == 50 and pts[0] == pytest.approx(1e-3) and pts[-1] == pytest.approx(8)
    assert GridSpec.parse("1:2:3:linear").points().tolist() == [1.0, 1.5, 2.0]
    for bad in ("0:1:5", "1:2", "2:1:5", "1:2:1", "1:2:5:cubic", "a:b:c"):
        with pytest.raises(ParameterError):
            GridSpec.parse(bad)


def test_config_validation():
    with pytest.raises(ParameterError):
        RunConfig("cpn", 2, checks=("structure", "bogus"))
    with pytest.raises(ParameterError):
        RunConfig("cpn", 2, tolerances={"w_oracle": -1})


def test_overall_rule():
    cfg = RunConfig("cpn", 2)
    assert VerificationReport(cfg, [CheckResult("a", SKIPPED)]).overall == FAIL
    assert VerificationReport(cfg, [CheckResult("a", SKIPPED), CheckResult("b", PASS)]).overall == PASS
    assert VerificationReport(cfg, [CheckResult("a", FAIL), CheckResult("b", PASS)]).overall == FAIL


def test_verify_cp2_pass():
    r = run_verify(RunConfig("cpn", 2, RadialParams(1, 0, 0.5)))
    v = r.verdicts()
    assert r.overall == PASS and v["extension"] == PASS and v["z2_invariance"] == SKIPPED


def test_verify_sphere_with_C1():
    r = run_verify(RunConfig("sphere", 4, RadialParams(2, 3)))
    v = r.verdicts()
    assert v["extension"] == FAIL and r.overall == FAIL
    for k in ("structure", "commutation", "positivity", "w_oracle", "det_constancy"):
        assert v[k] == PASS


def test_verify_cayley():
    r = run_verify(RunConfig("cayley", 2))
    v = r.verdicts()
    assert v["w_oracle"] == SKIPPED and v["structure"] == SKIPPED
    assert v["det_constancy"] == PASS and v["positivity"] == PASS
    assert r.overall == PASS


def test_report_json_shape_and_determinism():
    cfg = RunConfig("cpn", 1, RadialParams(1, 0, 0.5), seed=7)
    a = report_json(run_verify(cfg), timings=False)
    b = report_json(run_verify(cfg), timings=False)
    assert a == b
    data = json.loads(a)
    assert list(data) == ["schema_version", "version", "seed", "config", "checks", "verdicts", "overall"]
    assert data["seed"] == 7
    res = data["checks"]["det_constancy"]["residuals"]["constant"]
    assert isinstance(res, str) and float(res) == pytest.approx(4.0)


def test_parse_sweep():
    assert parse_sweep(["C=0.5,1", "cZ=0,2"]) == {"C": [0.5, 1.0], "cZ": [0.0, 2.0]}
    for bad in (["X=1"], ["C"], ["C=a"], ["C="]):
        with pytest.raises(ParameterError):
            parse_sweep(bad)


# -- command line -------------------------------------------------------------------

def test_cli_verify(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["verify", "--space", "cpn", "--n", "2", "--C", "1", "--C1", "0", "--cZ", "0.5", "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["overall"] == "PASS" and data["config"]["params"]["cZ"] == 0.5
    assert "overall" in capsys.readouterr().out


def test_cli_fail_exit_code(tmp_path):
    assert main(["verify", "--space", "sphere", "--n", "4", "--C", "2", "--C1", "3", "--out",
                 str(tmp_path / "r.json")]) == 1


@pytest.mark.parametrize("argv", [
    ["verify", "--space", "sphere", "--n", "3", "--cZ", "1"],
    ["verify", "--space", "torus", "--n", "3"],
    ["verify", "--space", "cpn", "--n", "2", "--C", "abc"],
    ["verify", "--space", "cpn", "--n", "2", "--bogus"],
    ["verify", "--space", "cpn"],
    ["profile", "--space", "hpn", "--n", "1", "--grid", "1:0:3"],
    ["frobnicate"],
])
def test_cli_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_cli_io_error(tmp_path):
    assert main(["verify", "--space", "cayley", "--n", "2", "--out", str(tmp_path / "no" / "r.json")]) == 3
    assert main(["verify", "--config", str(tmp_path / "missing.json")]) == 3


def test_cli_profile(tmp_path):
    out = tmp_path / "prof.csv"
    assert main(["profile", "--space", "hpn", "--n", "1", "--grid", "1e-3:8:100:log", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert len(lines) == 101 and tuple(lines[0].split(",")) == CSV_COLUMNS
    rows = list(csv.DictReader(lines))
    det = np.array([float(r["det_product"]) for r in rows])
    assert np.max(np.abs(det / det[0] - 1)) < 1e-8
    h = np.array([float(r["h"]) for r in rows])
    assert np.all(np.diff(h) > 0)


def test_cli_profile_empty_wstar(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["profile", "--space", "rpn", "--n", "2", "--grid", "0.1:1:3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert all(r["wStar_min_eig"] == "nan" for r in rows)


def test_cli_config_file_and_overrides(tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"space": "cpn", "n": 1, "C": 2.0, "cZ": 0.5, "checks": ["det_constancy"],
                               "seed": 5}))
    out = tmp_path / "r.json"
    assert main(["verify", "--config", str(cfg), "--C", "3", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["config"]["params"] == {"C": 3.0, "C1": 0.0, "cZ": 0.5}
    assert list(data["checks"]) == ["det_constancy"] and data["seed"] == 5
    monkeypatch.setenv("RFK_SEED", "0x10")
    assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["seed"] == 16
    assert main(["verify", "--config", str(cfg), "--seed", "9", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["seed"] == 9


def test_cli_bad_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"space": "cpn", "n": 2, "colour": "red"}))
    assert main(["verify", "--config", str(bad)]) == 2


def test_cli_sweep(tmp_path, capsys):
    code = main(["sweep", "--space", "sphere", "--n", "3", "--sweep", "C=0.5,1", "--sweep", "C1=0,1",
                 "--checks", "det_constancy,extension", "--out-dir", str(tmp_path)])
    assert code == 1
    assert len(list(tmp_path.glob("report_*.json"))) == 4
    lines = capsys.readouterr().out.strip().splitlines()
    assert sum(line.endswith("PASS") for line in lines) == 2


def test_cli_completeness(capsys):
    assert main(["completeness", "--space", "cpn", "--n", "2", "--cZ", "0.5"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["divergent"] and float(data["growth_exponent"]) == pytest.approx(0.5, rel=1e-3)
