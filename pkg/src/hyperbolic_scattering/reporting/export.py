from __future__ import annotations

import hashlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import orjson
import pandas as pd

from hyperbolic_scattering import __version__
from hyperbolic_scattering.telemetry import get_logger, log_event

logger = get_logger("cli")

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def _default(obj: Any) -> Any:
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def dumps(payload: Any) -> bytes:
    """Sorted-key JSON; NaN and infinities become null."""
    return orjson.dumps(payload, default=_default, option=JSON_OPTIONS) + b"\n"


def write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(payload))
    return path


def write_csv(path: Path, frame: pd.DataFrame) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    log_event(logger, "artifact_written", path=str(path), rows=len(frame))
    return path


def config_hash(config: dict[str, Any]) -> str:
    raw = orjson.dumps(config, default=_default, option=orjson.OPT_SORT_KEYS)
    return hashlib.sha256(raw).hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    config: dict[str, Any],
    artifacts: list[str],
    wall_time_s: float,
) -> Path:
    manifest = {
        "tool": "hyperbolic-scattering",
        "version": __version__,
        "command": command,
        "config_hash": config_hash(config),
        "artifacts": sorted(artifacts),
        "wall_time_s": wall_time_s,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    return write_json(out_dir / "manifest.json", manifest)
