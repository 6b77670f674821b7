from __future__ import annotations

import math
from pathlib import Path

import orjson
import pytest
from typer.testing import CliRunner

from hyperbolic_scattering import pipeline
from hyperbolic_scattering.cli import app
from hyperbolic_scattering.pipeline import RunConfig

runner = CliRunner()

VOLATILE_MANIFEST_KEYS = ("created_at", "wall_time_s")


def _report(out: Path, cache: Path) -> dict[str, bytes]:
    with pytest.MonkeyPatch.context() as mp:
        mp.setenv("HSP_SPECTRUM_CACHE_DIR", str(cache))
        mp.setenv("HSP_WORKERS", "1")
        result = runner.invoke(
            app, ["report", "--surface", "three_funnel", "--out", str(out), "--seed", "7", "--workers", "1"]
        )
    assert result.exit_code == 0, result.output
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()}


@pytest.fixture(scope="module")
def report_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("report")
    out = root / "three_funnel"
    first = _report(out, root / "cache-first")
    second = _report(out, root / "cache-second")
    return first, second


@pytest.fixture(scope="module")
def report(report_runs):
    return orjson.loads(report_runs[1]["report.json"])


def _delta(report: dict) -> float:
    return report["delta_refinement"] if report["delta_refinement"] is not None else report["delta_poincare"]


def test_report_rerun_is_byte_identical(report_runs):
    first, second = report_runs
    assert set(first) == set(second)
    assert {"config.json", "manifest.json", "report.json", "escape.csv", "phase.csv", "resonances.csv"} <= set(first)
    for name in first:
        if name == "manifest.json":
            continue
        assert first[name] == second[name], name
    m1, m2 = orjson.loads(first["manifest.json"]), orjson.loads(second["manifest.json"])
    for key in VOLATILE_MANIFEST_KEYS:
        m1.pop(key)
        m2.pop(key)
    assert m1 == m2


def test_report_weyl_law(report):
    weyl = report["stages"]["weyl"]
    delta = _delta(report)
    assert weyl["expected_coefficient"] == pytest.approx(report["volume"] / (4.0 * math.pi))
    assert weyl["relative_error"] < 0.02
    assert weyl["remainder_at_floor"] or weyl["remainder_exponent"] <= delta + 0.1
    assert weyl["integrated_at_floor"] or weyl["integrated_remainder_exponent"] <= delta + 0.1


def test_report_dynamics_chain(report):
    escape = report["stages"]["escape"]
    delta = _delta(report)
    rate, lam = escape["fitted_rate"], escape["lambda_max"]
    assert escape["sample_count"] == 100_000
    assert abs(rate - (delta - 1.0)) < 0.05
    assert 0.95 <= lam <= 1.0 + 1e-12
    assert abs(1.0 + rate / lam - delta) < 0.1
    assert report["lambda_max"] == lam


def test_breit_wigner_windows(tmp_path):
    config = RunConfig.from_settings("breit-wigner", "three_funnel", out=str(tmp_path / "bw"), workers=1)
    result = pipeline.run(config)
    windows = result.summary["windows"]
    assert len(windows) == 3
    assert [w["sigma"] for w in windows] == [1.0, 1.0, 1.0]
    assert result.artifacts == ["breit_wigner.json"]
    on_disk = orjson.loads((tmp_path / "bw" / "breit_wigner.json").read_bytes())
    assert len(on_disk["windows"]) == 3

    delta = pipeline.PipelineContext(config, tmp_path / "bw").delta
    if "linear_window_exponent" in result.summary:
        assert result.summary["linear_window_exponent"] <= delta + 0.1
    else:
        assert all(w["linear_reading"]["at_floor"] for w in windows)


def test_escape_command_writes_table_and_summary(tmp_path):
    out = tmp_path / "escape"
    result = runner.invoke(
        app,
        ["escape", "--surface", "three_funnel_thick", "--out", str(out), "--samples", "20000", "--workers", "1"],
    )
    assert result.exit_code == 0, result.output
    lines = (out / "escape.csv").read_text().strip().split("\n")
    assert lines[0] == "t,fraction,stderr"
    assert lines[1].startswith("0.0,1.0,")
    summary = orjson.loads((out / "escape.json").read_bytes())
    assert summary["fitted_rate"] < 0.0
    assert summary["lambda_max"] == pytest.approx(1.0, rel=0.05)
    assert summary["predicted_delta"] == pytest.approx(1.0 + summary["fitted_rate"] / summary["lambda_max"])
    manifest = orjson.loads((out / "manifest.json").read_bytes())
    assert set(manifest["artifacts"]) == {"config.json", "escape.csv", "escape.json"}


def test_weyl_command_reports_fit(tmp_path):
    out = tmp_path / "weyl"
    result = runner.invoke(app, ["weyl", "--surface", "three_funnel", "--out", str(out), "--workers", "1"])
    assert result.exit_code == 0, result.output
    summary = orjson.loads((out / "weyl.json").read_bytes())
    assert summary["relative_error"] < 0.02
    assert summary["expected_coefficient"] == pytest.approx(2.0 * math.pi / (4.0 * math.pi))
