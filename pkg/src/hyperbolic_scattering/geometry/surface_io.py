from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path
from typing import Any, Literal

import orjson
from pydantic import BaseModel, Field, ValidationError, model_validator

from hyperbolic_scattering.errors import SurfaceError
from hyperbolic_scattering.geometry.moebius import MoebiusMap
from hyperbolic_scattering.geometry.schottky import (
    Disk,
    Model,
    PairedDisks,
    SchottkySurface,
    require_valid,
    surface_from_generators,
    symmetric_surface,
)
from hyperbolic_scattering.geometry.words import parse_word
from hyperbolic_scattering.telemetry import get_logger, log_event

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

logger = get_logger("geometry")

DATA_PACKAGE = "hyperbolic_scattering.data"


class DiskSpec(BaseModel):
    center: float
    radius: float = Field(..., gt=0.0)


class DiskPairSpec(BaseModel):
    source: DiskSpec = Field(..., description="Disk whose exterior the generator maps inward")
    target: DiskSpec = Field(..., description="Disk receiving the exterior of the source")


class RecipeSpec(BaseModel):
    kind: Literal["symmetric"] = "symmetric"
    rank: int = Field(..., ge=1)
    funnel_lengths: float | list[float] = Field(..., description="One length, or one per funnel (rank + 1)")


class SurfaceFile(BaseModel):
    """Schema of a surface definition file (JSON or TOML)."""

    name: str | None = None
    model: Model = Model.HALF_PLANE
    recipe: RecipeSpec | None = None
    generators: list[list[list[float]]] | None = None
    disks: list[DiskPairSpec] | None = None
    boundary_words: list[str] = Field(default_factory=list)
    funnel_lengths: list[float] | None = None

    @model_validator(mode="after")
    def _one_source(self) -> "SurfaceFile":
        if (self.recipe is None) == (self.generators is None):
            raise ValueError("give exactly one of 'recipe' or 'generators'")
        if self.disks is not None and self.generators is not None and len(self.disks) != len(self.generators):
            raise ValueError("one disk pair per generator required")
        return self


def surface_from_spec(spec: SurfaceFile, default_name: str = "surface") -> SchottkySurface:
    name = spec.name or default_name
    if spec.recipe is not None:
        return symmetric_surface(spec.recipe.rank, spec.recipe.funnel_lengths, name=name, model=spec.model)

    assert spec.generators is not None
    try:
        gens = [MoebiusMap.from_matrix(m) for m in spec.generators]
    except ValueError as e:
        raise SurfaceError(f"Invalid generator matrix in {name!r}: {e}") from e
    disks, arcs = None, None
    if spec.disks is not None:
        pairs = [
            (Disk(p.source.center, p.source.radius), Disk(p.target.center, p.target.radius)) for p in spec.disks
        ]
        if spec.model is Model.DISK:
            arcs = pairs
        else:
            disks = PairedDisks(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))
    try:
        words = [parse_word(w, len(gens)) for w in spec.boundary_words]
    except ValueError as e:
        raise SurfaceError(str(e)) from e
    return surface_from_generators(
        gens,
        disks=disks,
        boundary_words=words,
        funnel_lengths=spec.funnel_lengths,
        name=name,
        model=spec.model,
        arcs=arcs,
    )


def _parse_bytes(raw: bytes, suffix: str, origin: str) -> dict[str, Any]:
    try:
        if suffix == ".toml":
            return tomllib.loads(raw.decode("utf-8"))
        if suffix == ".json":
            data = orjson.loads(raw)
            if not isinstance(data, dict):
                raise SurfaceError(f"{origin}: top level must be an object")
            return data
    except (tomllib.TOMLDecodeError, orjson.JSONDecodeError, UnicodeDecodeError) as e:
        raise SurfaceError(f"{origin}: cannot parse surface file: {e}") from e
    raise SurfaceError(f"{origin}: unsupported surface file type {suffix!r} (use .json or .toml)")


def parse_surface(data: dict[str, Any], default_name: str = "surface", validate: bool = True) -> SchottkySurface:
    try:
        spec = SurfaceFile.model_validate(data)
    except ValidationError as e:
        raise SurfaceError(f"Surface {default_name!r} does not match the schema: {e}") from e
    surface = surface_from_spec(spec, default_name=default_name)
    if validate:
        report = require_valid(surface)
        log_event(
            logger,
            "surface_validated",
            surface=surface.name,
            rank=surface.rank,
            checks=len(report.checks),
            min_disk_gap=next((c.margin for c in report.checks if c.name == "disks_disjoint"), None),
        )
    return surface


def load_surface(path: str | Path, validate: bool = True) -> SchottkySurface:
    p = Path(path)
    if not p.exists():
        raise SurfaceError(f"Surface file not found: {p}")
    data = _parse_bytes(p.read_bytes(), p.suffix.lower(), str(p))
    surface = parse_surface(data, default_name=p.stem, validate=validate)
    log_event(logger, "surface_loaded", path=str(p), surface=surface.name, fingerprint=surface.fingerprint())
    return surface


def list_bundled() -> list[str]:
    root = resources.files(DATA_PACKAGE)
    return sorted(
        entry.name.rsplit(".", 1)[0]
        for entry in root.iterdir()
        if entry.name.endswith((".toml", ".json"))
    )


def bundled_surface(name: str, validate: bool = True) -> SchottkySurface:
    root = resources.files(DATA_PACKAGE)
    for suffix in (".toml", ".json"):
        entry = root / f"{name}{suffix}"
        if entry.is_file():
            data = _parse_bytes(entry.read_bytes(), suffix, f"bundled:{name}")
            return parse_surface(data, default_name=name, validate=validate)
    raise SurfaceError(f"No bundled surface named {name!r}; available: {', '.join(list_bundled())}")


def resolve_surface(ref: str | Path, validate: bool = True) -> SchottkySurface:
    """A path to a surface file, or the name of a bundled example."""
    p = Path(ref)
    if p.suffix.lower() in (".json", ".toml") or p.exists():
        return load_surface(p, validate=validate)
    return bundled_surface(str(ref), validate=validate)
