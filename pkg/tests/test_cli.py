from __future__ import annotations

import orjson
from typer.testing import CliRunner

from hyperbolic_scattering.cli import app

runner = CliRunner()


def test_validate_writes_report_and_manifest(tmp_path):
    out = tmp_path / "validate"
    result = runner.invoke(app, ["validate", "--surface", "three_funnel", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert orjson.loads((out / "validation.json").read_bytes())["ok"] is True
    manifest = orjson.loads((out / "manifest.json").read_bytes())
    assert manifest["command"] == "validate"
    assert set(manifest["artifacts"]) == {"config.json", "validation.json"}
    config = orjson.loads((out / "config.json").read_bytes())
    assert config["surface"] == "three_funnel"


def test_spectrum_command_and_cache(tmp_path):
    out = tmp_path / "spectrum"
    result = runner.invoke(app, ["spectrum", "--surface", "cylinder", "--cutoff", "10", "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = (out / "spectrum.csv").read_text().strip().split("\n")
    assert lines[0] == "canonical_word,word_length,trace,length"
    assert len(lines) == 2

    listed = runner.invoke(app, ["cache-list"])
    assert listed.exit_code == 0
    assert len(orjson.loads(listed.stdout)) == 1


def test_budget_violation_exits_with_code_3(tmp_path):
    result = runner.invoke(
        app, ["spectrum", "--surface", "three_funnel", "--cutoff", "10000", "--out", str(tmp_path / "big")]
    )
    assert result.exit_code == 3


def test_bad_surface_file_exits_with_code_2(tmp_path):
    path = tmp_path / "both.toml"
    path.write_text('generators = [[[2.0, 0.0], [0.0, 0.5]]]\n[recipe]\nrank = 1\nfunnel_lengths = 3.0\n')
    result = runner.invoke(app, ["validate", "--surface", str(path), "--out", str(tmp_path / "bad")])
    assert result.exit_code == 2


def test_list_examples():
    result = runner.invoke(app, ["list-examples"])
    assert result.exit_code == 0
    names = {row["name"] for row in orjson.loads(result.stdout)}
    assert {"cylinder", "three_funnel", "four_funnel"} <= names
