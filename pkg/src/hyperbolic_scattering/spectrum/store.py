from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import joblib
import orjson

from hyperbolic_scattering.spectrum.enumerate import LengthSpectrum, Orientation
from hyperbolic_scattering.telemetry import get_logger, log_event

logger = get_logger("spectrum")

REQUIRED_ARTIFACTS = ("spectrum.joblib", "metadata.json")


@dataclass(frozen=True)
class SpectrumInfo:
    key: str
    metadata: dict[str, Any] | None


def spectrum_key(fingerprint: str, cutoff: float, orientation: Orientation | str) -> str:
    return f"{fingerprint}_L{cutoff:g}_{Orientation(orientation).value}"


def spectrum_dir(cache_dir: str | Path, key: str) -> Path:
    return Path(cache_dir) / key


def save_spectrum(spec: LengthSpectrum, cache_dir: str | Path) -> Path:
    key = spectrum_key(spec.surface_fingerprint, spec.cutoff, spec.orientation)
    d = spectrum_dir(cache_dir, key)
    d.mkdir(parents=True, exist_ok=True)
    joblib.dump(spec, d / "spectrum.joblib")
    metadata = {
        "surface": spec.surface_name,
        "fingerprint": spec.surface_fingerprint,
        "cutoff": spec.cutoff,
        "orientation": spec.orientation.value,
        "rank": spec.rank,
        "count": len(spec),
        "certificate": asdict(spec.certificate) if spec.certificate is not None else None,
    }
    (d / "metadata.json").write_bytes(orjson.dumps(metadata, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS))
    log_event(logger, "spectrum_saved", key=key, count=len(spec), path=str(d))
    return d


def assert_spectrum_ready(cache_dir: str | Path, key: str) -> None:
    d = spectrum_dir(cache_dir, key)
    if not d.exists():
        raise FileNotFoundError(f"Spectrum not found: {key} in {cache_dir}")
    for required in REQUIRED_ARTIFACTS:
        if not (d / required).exists():
            raise FileNotFoundError(f"Missing required artifact: {d / required}")


def load_spectrum(cache_dir: str | Path, key: str) -> LengthSpectrum:
    assert_spectrum_ready(cache_dir, key)
    spec = joblib.load(spectrum_dir(cache_dir, key) / "spectrum.joblib")
    if not isinstance(spec, LengthSpectrum):
        raise TypeError(f"{key}: cached object is {type(spec).__name__}, not a LengthSpectrum")
    return spec


def list_spectra(cache_dir: str | Path) -> list[SpectrumInfo]:
    d = Path(cache_dir)
    if not d.exists():
        return []
    out: list[SpectrumInfo] = []
    for child in sorted([p for p in d.iterdir() if p.is_dir()], key=lambda p: p.name):
        md_path = child / "metadata.json"
        md = orjson.loads(md_path.read_bytes()) if md_path.exists() else None
        out.append(SpectrumInfo(key=child.name, metadata=md))
    return out


def find_cached(
    cache_dir: str | Path,
    fingerprint: str,
    cutoff: float,
    orientation: Orientation | str,
) -> LengthSpectrum | None:
    """Smallest stored spectrum of the same surface and orientation reaching `cutoff`, truncated to it."""
    orientation = Orientation(orientation)
    best: tuple[float, str] | None = None
    for info in list_spectra(cache_dir):
        md = info.metadata or {}
        if md.get("fingerprint") != fingerprint or md.get("orientation") != orientation.value:
            continue
        stored = float(md.get("cutoff", 0.0))
        if stored >= cutoff and (best is None or stored < best[0]):
            best = (stored, info.key)
    if best is None:
        return None
    try:
        spec = load_spectrum(cache_dir, best[1])
    except (FileNotFoundError, TypeError):
        return None
    log_event(logger, "spectrum_cache_hit", key=best[1], cutoff=cutoff)
    return spec if spec.cutoff == cutoff else spec.truncate(cutoff)
