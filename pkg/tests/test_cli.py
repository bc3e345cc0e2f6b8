from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import pytest

from levyito.cli import bundled_scenarios, fmt, main, resolve_seed

SCEN = Path(__file__).resolve().parents[1] / "src" / "levyito" / "scenarios"


def _write(tmp_path: Path, doc: dict, name: str = "s.json") -> Path:
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def _rows(p: Path) -> list[dict]:
    with p.open() as fh:
        return list(csv.DictReader(fh))


def test_seed_precedence(monkeypatch):
    monkeypatch.setenv("LEVYITO_SEED", "17")
    assert resolve_seed(5, 9) == 5
    assert resolve_seed(None, 9) == 9
    assert resolve_seed(None, None) == 17
    monkeypatch.delenv("LEVYITO_SEED")
    assert resolve_seed(None, None) == 0


def test_float_format_round_trips():
    for v in (0.1, 1 / 3, 1e-300, math.pi * 1e10):
        assert float(fmt(v)) == v
    assert fmt(True) == "true" and fmt(3) == "3"


def test_bundled_scenarios_listed(capsys):
    assert main(["--list"]) == 0
    out = capsys.readouterr().out.split()
    assert {"vasicek_classical", "chaos_flat_curve", "fx_gbm_3ccy", "validate"} <= set(out)
    assert out == bundled_scenarios()


def test_vasicek_classical_bundle(tmp_path):
    assert main(["--config", "vasicek_classical", "--out", str(tmp_path), "--quiet"]) == 0
    rows = _rows(tmp_path / "bonds.csv")
    assert len(rows) == 5
    assert all(float(r["abs_diff"]) <= 1e-12 and r["pass"] == "true" for r in rows)


def test_chaos_flat_bundle(tmp_path):
    assert main(["--config", str(SCEN / "chaos_flat_curve.json"), "--out", str(tmp_path), "--quiet"]) == 0
    assert max(float(r["abs_error"]) for r in _rows(tmp_path / "calibration.csv")) <= 1e-8
    assert (tmp_path / "abc.csv").is_file()


def test_fx_gbm_bundle(tmp_path):
    assert main(["--config", "fx_gbm_3ccy", "--out", str(tmp_path), "--quiet", "--paths", "20000"]) == 0
    rows = _rows(tmp_path / "siegel.csv")
    assert len(rows) == 6
    assert all(abs(float(r["excess_rate"]) - 1.5) <= 1e-12 for r in rows)


def test_curve_csv_relative_to_config(tmp_path):
    (tmp_path / "zc.csv").write_text("tenor_years,zero_rate\n1,0.02\n5,0.03\n10,0.032\n")
    cfg = _write(tmp_path, {"model": {"kind": "symmetric-bernoulli"},
                            "task": {"name": "calibrate-chaos"},
                            "io": {"curve_csv": "zc.csv", "output_dir": str(tmp_path / "o")}})
    assert main(["--config", str(cfg), "--quiet"]) == 0
    rows = _rows(tmp_path / "o" / "calibration.csv")
    assert float(rows[0]["input_discount"]) == pytest.approx(math.exp(-0.02))


def test_seed_changes_output_and_paths_override(tmp_path):
    cfg = SCEN / "simulate_vg.json"
    main(["--config", str(cfg), "--out", str(tmp_path / "a"), "--quiet", "--seed", "1", "--paths", "500"])
    main(["--config", str(cfg), "--out", str(tmp_path / "b"), "--quiet", "--seed", "2", "--paths", "500"])
    a = (tmp_path / "a" / "paths.csv").read_bytes()
    assert a != (tmp_path / "b" / "paths.csv").read_bytes()


def test_env_seed_used_when_config_has_none(tmp_path, monkeypatch):
    doc = {"model": {"kind": "merton", "intensity": 2.0}, "task": {"name": "simulate", "paths_out": 2},
           "mc": {"paths": 300}}
    cfg = _write(tmp_path, doc)
    monkeypatch.setenv("LEVYITO_SEED", "44")
    main(["--config", str(cfg), "--out", str(tmp_path / "env"), "--quiet"])
    main(["--config", str(cfg), "--out", str(tmp_path / "cli"), "--quiet", "--seed", "44"])
    assert (tmp_path / "env" / "paths.csv").read_bytes() == (tmp_path / "cli" / "paths.csv").read_bytes()


@pytest.mark.parametrize("doc", [
    {"task": {"name": "validate"}, "extra": 1},
    {"task": {"name": "simulate", "horizon": 1.0, "typo": 2}, "model": {"kind": "merton", "intensity": 1}},
    {"task": {"name": "unknown"}},
    {"model": {"kind": "bogus"}, "task": {"name": "simulate"}},
    {"task": {"name": "simulate"}},
    {"model": {"kind": "symmetric-bernoulli"}, "task": {"name": "calibrate-chaos"}},
])
def test_config_errors_exit_2(tmp_path, doc):
    assert main(["--config", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o"), "--quiet"]) == 2


def test_missing_or_invalid_config(tmp_path):
    assert main(["--config", str(tmp_path / "absent.json")]) == 2
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["--config", str(tmp_path / "bad.json")]) == 2
    assert main([]) == 2


def test_data_error_exit_3(tmp_path):
    (tmp_path / "c.csv").write_text("tenor_years,discount_factor\n1,0.9\n2,0.95\n")
    doc = {"model": {"kind": "symmetric-bernoulli"}, "task": {"name": "calibrate-chaos"},
           "io": {"curve_csv": "c.csv"}}
    assert main(["--config", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o"), "--quiet"]) == 3
    doc["io"]["curve_csv"] = "missing.csv"
    assert main(["--config", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o"), "--quiet"]) == 3


def test_numerics_error_exit_4(tmp_path):
    doc = {"model": {"kind": "vg2d", "m": 1.0},
           "task": {"name": "siegel-check", "system": {"family": "vg", "angles_deg": [0, 90], "length": 1.5}}}
    assert main(["--config", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o"), "--quiet"]) == 4


def test_failed_check_exit_1(tmp_path):
    doc = {"model": {"kind": "symmetric-bernoulli"},
           "task": {"name": "calibrate-chaos", "flat_rate": 0.02, "tolerance": -1.0}}
    assert main(["--config", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o"), "--quiet"]) == 1


def test_validate_prints_table(tmp_path, capsys):
    assert main(["--config", "validate", "--out", str(tmp_path), "--paths", "20000"]) == 0
    out = capsys.readouterr().out
    assert "exponential-formula/cp-linear" in out and "FAIL" not in out
    assert out.count("PASS") == len(_rows(tmp_path / "validate.csv"))
