from __future__ import annotations

import logging
import math

import numpy as np
import orjson
import pandas as pd

from hyperbolic_scattering.reporting import config_hash, dumps, write_csv, write_json, write_manifest
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.telemetry import get_logger, timed


def test_settings_read_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("HSP_OUTPUT_DIR", str(tmp_path / "elsewhere"))
    monkeypatch.setenv("HSP_TRANSFER_NODES", "40")
    s = get_settings()
    assert s.output_dir == str(tmp_path / "elsewhere")
    assert s.transfer_nodes == 40
    assert s.workers == 1
    assert s.max_geodesics == 2_000_000


def test_dumps_is_sorted_and_nan_safe():
    raw = dumps({"b": math.nan, "a": np.float64(1.5), "c": 2.0 + 1.0j, "d": np.arange(2)})
    assert raw.endswith(b"\n")
    data = orjson.loads(raw)
    assert list(data) == ["a", "b", "c", "d"]
    assert data["b"] is None
    assert data["c"] == [2.0, 1.0]
    assert data["d"] == [0, 1]


def test_csv_writes_shortest_round_trip_floats(tmp_path):
    path = write_csv(tmp_path / "out" / "t.csv", pd.DataFrame({"z": [0.1], "s": [1.0 / 3.0]}))
    header, row = path.read_text().strip().split("\n")
    assert header == "z,s"
    assert row.split(",")[0] == "0.1"
    assert float(row.split(",")[1]) == 1.0 / 3.0


def test_manifest_records_config_hash(tmp_path):
    config = {"command": "spectrum", "cutoff": 30.0}
    write_json(tmp_path / "config.json", config)
    path = write_manifest(tmp_path, "spectrum", config, ["spectrum.csv", "config.json"], 1.25)
    manifest = orjson.loads(path.read_bytes())
    assert manifest["config_hash"] == config_hash(config)
    assert manifest["artifacts"] == ["config.json", "spectrum.csv"]
    assert manifest["tool"] == "hyperbolic-scattering"
    assert config_hash({"cutoff": 30.0, "command": "spectrum"}) == manifest["config_hash"]


def test_timed_logs_wall_time(caplog):
    log = get_logger("test")
    with caplog.at_level(logging.INFO, logger="hsp.test"):
        with timed(log, "stage_done", stage="zeta") as ev:
            ev["rows"] = 3
    (record,) = [r for r in caplog.records if r.name == "hsp.test"]
    assert record.getMessage() == "stage_done"
    assert record.stage == "zeta"
    assert record.rows == 3
    assert record.wall_time_s >= 0.0
