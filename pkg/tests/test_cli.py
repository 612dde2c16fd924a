from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from leo_cho.cli import SWEEP_COLUMNS, main
from leo_cho.config import default_document, validate_config
from leo_cho.errors import ConfigError

FIXTURE = {
    "constellation": {"static_positions": [[45.78, 1.75, 550000.0]]},
    "simulation": {"T": 120},
}
ONE_CELL = {
    "simulation": {"T": 300},
    "sweep": {"ttt_s": [3.0], "hom_db": [5.0], "splits": ["gnb"], "beams": [19]},
}


def write_config(tmp_path: Path, doc: dict, name="cfg.json") -> Path:
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return p


def read_rows(path: Path) -> list[dict]:
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def test_default_config_reproduces_reference_parameters():
    cfg = validate_config({})
    b = cfg.base
    assert (b.constellation.plane_count, b.constellation.sats_per_plane) == (72, 22)
    assert (b.constellation.altitude, b.constellation.inclination) == (550_000.0, 53.0)
    assert (b.radio.tx_power, b.radio.rx_gain, b.radio.rlf_threshold) == (23.0, 39.7, -120.0)
    assert (b.antenna.max_gain, b.antenna.aperture_radius) == (30.5, 0.1)
    assert (b.T, b.dt, b.beam_diameter) == (1200, 1.0, 50_000.0)
    assert b.ground_stations[0].position.latitude == 38.33458
    assert [g.gs_id for g in b.ground_stations if g.hosts_core] == [1, 4]
    assert len(cfg.grid.cells()) == 264
    assert "radio.tx_power_dbw" in cfg.defaulted


def test_explicit_fields_are_not_reported_as_defaulted():
    cfg = validate_config({"radio": {"tx_power_dbw": 20.0}})
    assert "radio.tx_power_dbw" not in cfg.defaulted
    assert "radio.rx_gain_dbi" in cfg.defaulted


def test_every_violation_is_listed():
    counts = default_document()["delay_profiles"]["counts"]
    del counts["split2"]["C2"]
    raw = {
        "beams": {"beam_count": 20},
        "delay_profiles": {"counts": counts},
        "ho_params": {"ttt_s": -1.0},
        "ground_segment": {"stations": []},
        "typo": 1,
    }
    with pytest.raises(ConfigError) as err:
        validate_config(raw)
    text = str(err.value)
    for needle in ("beam_count", "(split2, C2)", "ttt_s", "ground station", "typo"):
        assert needle in text


def test_core_host_required():
    doc = default_document()
    for st in doc["ground_segment"]["stations"]:
        st["hosts_core"] = False
    with pytest.raises(ConfigError, match="core"):
        validate_config(doc)


def test_validate_command(tmp_path, capsys):
    assert main(["validate"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "ok"
    bad = write_config(tmp_path, {"beams": {"beam_count": 20}})
    assert main(["validate", "--config", str(bad)]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert main(["validate", "--config", str(broken)]) == 2


def test_simulate_default(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--split", "gnb", "--beams", "127", "--ttt", "0", "--hom", "0", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert 0 < report["kpis"]["availability"] <= 1
    rows = read_rows(out / "events.csv")
    assert rows and list(rows[0]) == [
        "t", "kind", "source_sat", "source_beam", "target_sat", "target_beam", "scenario", "cho_delay_s",
    ]


def test_simulate_fixture_and_determinism(tmp_path):
    cfg = write_config(tmp_path, FIXTURE)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(b)]) == 0
    assert json.loads((a / "report.json").read_text())["kpis"]["availability"] == 1.0
    for name in ("report.json", "events.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_rlf_rows_leave_target_fields_empty(tmp_path):
    doc = dict(FIXTURE, radio={"rlf_threshold_dbm": 0.0})
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(write_config(tmp_path, doc)), "--out", str(out)]) == 0
    rows = read_rows(out / "events.csv")
    assert len(rows) == 120
    assert all(r["kind"] == "RLF" and r["target_sat"] == r["scenario"] == r["cho_delay_s"] == "" for r in rows)


def test_bad_overrides_exit_2(tmp_path):
    assert main(["simulate", "--beams", "20", "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--ttt", "-3", "--out", str(tmp_path)]) == 2


def test_single_cell_sweep_and_plots(tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(write_config(tmp_path, ONE_CELL)), "--out", str(out)]) == 0
    rows = read_rows(out / "sweep.csv")
    assert len(rows) == 1 and list(rows[0]) == SWEEP_COLUMNS
    assert len(json.loads((out / "optimum.json").read_text())) == 1
    assert main(["plots", str(out / "sweep.csv"), "--out", str(out / "plots")]) == 0
    mats = sorted(p.name for p in (out / "plots").iterdir())
    assert len(mats) == 5
    m = list(csv.reader((out / "plots" / "availability_gnb_b19.csv").open()))
    assert len(m) == 2 and len(m[1]) == 2
    assert m[1][1] == rows[0]["availability"]


def test_refined_margin_grid(tmp_path):
    doc = {"simulation": {"T": 60}, "sweep": {"ttt_s": [0.0], "hom_db": [0.0, 3.0], "splits": ["gnb"], "beams": [19]}}
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(write_config(tmp_path, doc)), "--out", str(out)]) == 0
    assert [(r["ttt_s"], r["hom_db"]) for r in read_rows(out / "sweep.csv")] == [("0.0", "0.0"), ("0.0", "3.0")]


def test_plots_rejects_malformed_csv(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("split,beams\ngnb,19\n", encoding="utf-8")
    assert main(["plots", str(bad), "--out", str(tmp_path / "p")]) == 2
    assert main(["plots", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "p")]) == 2


def test_plots_flags_split_dependent_radio_kpis(tmp_path):
    header = ",".join(SWEEP_COLUMNS)
    row = "{},19,0.0,0.0,0,{},0,0.0,0,0.0,0,0,0.0,0.0,1200.0,1.0"
    text = "\n".join([header, row.format("gnb", "0.0"), row.format("split2", "0.5")]) + "\n"
    p = tmp_path / "s.csv"
    p.write_text(text, encoding="utf-8")
    assert main(["plots", str(p), "--out", str(tmp_path / "p")]) == 3
