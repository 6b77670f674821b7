from __future__ import annotations

import time
from pathlib import Path
from typing import Any, Optional

import typer
from pydantic import ValidationError
from rich.console import Console

from hyperbolic_scattering.errors import ScatteringError, SurfaceError
from hyperbolic_scattering.geometry import bundled_surface, list_bundled
from hyperbolic_scattering.phase import PhaseRoute
from hyperbolic_scattering.pipeline import RunConfig, run
from hyperbolic_scattering.reporting import dumps, write_json, write_manifest
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.spectrum import Orientation
from hyperbolic_scattering.spectrum.store import list_spectra
from hyperbolic_scattering.telemetry import configure_logging

app = typer.Typer(help="Scattering phase toolkit for convex co-compact hyperbolic surfaces.")
console = Console()
err_console = Console(stderr=True)

SURFACE = typer.Option(..., "--surface", help="Surface file (TOML/JSON) or bundled example name.")
OUT = typer.Option(None, "--out", help="Output directory (default: HSP_OUTPUT_DIR or 'runs').")
SEED = typer.Option(None, "--seed", help="Monte Carlo seed.")
WORKERS = typer.Option(None, "--workers", help="Worker processes (default: CPU count).")
CUTOFF = typer.Option(None, "--cutoff", help="Length cutoff L for the geodesic spectrum.")


def _parse_window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise typer.BadParameter(f"window {text!r} must read 'lo,hi'") from exc
    if not lo < hi:
        raise typer.BadParameter(f"window {text!r} is empty")
    return lo, hi


def _execute(command: str, surface: str, out: Optional[str], **params: Any) -> None:
    """Resolve the config, run the command and map library errors to exit codes."""
    settings = get_settings()
    configure_logging(settings.log_level)
    try:
        config = RunConfig.from_settings(command, surface, out, **params)
    except ValidationError as exc:
        raise typer.BadParameter(str(exc)) from exc

    out_dir = Path(config.out)
    config_dump = config.model_dump(mode="json")
    write_json(out_dir / "config.json", config_dump)

    t0 = time.perf_counter()
    try:
        result = run(config)
    except SurfaceError as exc:
        err_console.print(f"[red]surface error:[/red] {exc}")
        if exc.report is not None:
            err_console.print_json(dumps(exc.report.to_dict()).decode())
        raise typer.Exit(code=exc.exit_code) from exc
    except ScatteringError as exc:
        err_console.print(f"[red]{type(exc).__name__}:[/red] {exc}")
        raise typer.Exit(code=exc.exit_code) from exc

    wall = round(time.perf_counter() - t0, 3)
    write_manifest(out_dir, command, config_dump, ["config.json", *result.artifacts], wall)
    console.print_json(dumps(result.summary).decode())
    console.print(f"[green]{command}[/green] wrote {len(result.artifacts)} artifact(s) to {out_dir} in {wall:.2f}s")


@app.command()
def validate(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
) -> None:
    """Check disjointness, pairing and ping-pong for a surface definition."""
    _execute("validate", surface, out)


@app.command()
def spectrum(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
    workers: Optional[int] = WORKERS,
    cutoff: Optional[float] = CUTOFF,
    orientation: Optional[Orientation] = typer.Option(None, help="Count oriented or unoriented geodesics."),
) -> None:
    """Enumerate primitive closed geodesics up to the cutoff and write spectrum.csv."""
    _execute("spectrum", surface, out, workers=workers, cutoff=cutoff, orientation=orientation)


@app.command()
def dimension(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
    word_cutoff: Optional[int] = typer.Option(None, help="Word length for the Poincare series."),
    refinement_depth: Optional[int] = typer.Option(None, help="Disk refinement depth."),
) -> None:
    """Hausdorff dimension of the limit set by both methods."""
    _execute("dimension", surface, out, word_cutoff=word_cutoff, refinement_depth=refinement_depth)


@app.command()
def zeta(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
    workers: Optional[int] = WORKERS,
    cutoff: Optional[float] = CUTOFF,
    sigma: Optional[float] = typer.Option(None, help="Real part of s."),
    z_min: Optional[float] = typer.Option(None, help="Smallest frequency."),
    z_max: Optional[float] = typer.Option(None, help="Largest frequency."),
    points: Optional[int] = typer.Option(None, help="Number of frequencies."),
) -> None:
    """Selberg zeta table by the Euler product and the continued determinant."""
    _execute(
        "zeta", surface, out, workers=workers, cutoff=cutoff, sigma=sigma, z_min=z_min, z_max=z_max, z_points=points
    )


@app.command()
def resonances(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
    workers: Optional[int] = WORKERS,
    cutoff: Optional[float] = CUTOFF,
    re_min: float = typer.Option(-1.5, help="Smallest Re(lambda)."),
    re_max: float = typer.Option(1.0, help="Largest Re(lambda)."),
    im_max: float = typer.Option(12.0, help="Search |Im(lambda)| up to this height."),
    strips: Optional[int] = typer.Option(None, help="Horizontal strips searched in parallel."),
    nodes: Optional[int] = typer.Option(None, help="Collocation nodes per disk."),
) -> None:
    """Locate resonances in a box of the lambda-plane."""
    _execute(
        "resonances",
        surface,
        out,
        workers=workers,
        cutoff=cutoff,
        box=(re_min, re_max, -im_max, im_max),
        strips=strips,
        transfer_nodes=nodes,
    )


@app.command()
def phase(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
    workers: Optional[int] = WORKERS,
    cutoff: Optional[float] = CUTOFF,
    z_max: Optional[float] = typer.Option(None, help="Largest frequency."),
    samples: Optional[int] = typer.Option(None, help="Points on the frequency grid."),
    route: Optional[PhaseRoute] = typer.Option(None, help="Phase route (default: chosen from delta)."),
) -> None:
    """Scattering phase s(z) on a uniform grid from 0."""
    _execute(
        "phase", surface, out, workers=workers, cutoff=cutoff, phase_z_max=z_max, phase_samples=samples, phase_route=route
    )


@app.command()
def weyl(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
    workers: Optional[int] = WORKERS,
    cutoff: Optional[float] = CUTOFF,
    fit_min: float = typer.Option(5.0, help="Lower end of the fit window."),
    fit_max: float = typer.Option(50.0, help="Upper end of the fit window."),
    samples: Optional[int] = typer.Option(None, help="Points on the frequency grid."),
    route: Optional[PhaseRoute] = typer.Option(None, help="Phase route (default: chosen from delta)."),
) -> None:
    """Weyl-law fit of the scattering phase and the remainder growth exponents."""
    _execute(
        "weyl",
        surface,
        out,
        workers=workers,
        cutoff=cutoff,
        weyl_window=(fit_min, fit_max),
        phase_z_max=fit_max,
        phase_samples=samples,
        phase_route=route,
    )


@app.command("breit-wigner")
def breit_wigner(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
    workers: Optional[int] = WORKERS,
    cutoff: Optional[float] = CUTOFF,
    window: Optional[list[str]] = typer.Option(None, help="Frequency window 'lo,hi'; repeatable."),
    sigma: Optional[float] = typer.Option(None, help="Resonance disc offset."),
    route: Optional[PhaseRoute] = typer.Option(None, help="Phase route (default: chosen from delta)."),
) -> None:
    """Compare ds/dz with the resonance Lorentzians in frequency windows."""
    windows = [_parse_window(w) for w in window] if window else None
    _execute(
        "breit-wigner", surface, out, workers=workers, cutoff=cutoff, bw_windows=windows, bw_sigma=sigma, phase_route=route
    )


@app.command()
def escape(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
    seed: Optional[int] = SEED,
    workers: Optional[int] = WORKERS,
    samples: Optional[int] = typer.Option(None, help="Liouville samples."),
    t_max: Optional[float] = typer.Option(None, help="Last time on the escape grid."),
    dt: Optional[float] = typer.Option(None, help="Escape grid spacing."),
    lambda_t_max: Optional[float] = typer.Option(None, help="Time for the expansion-rate estimate."),
) -> None:
    """Monte Carlo escape rate, expansion rate and the exponent chain."""
    _execute(
        "escape",
        surface,
        out,
        seed=seed,
        workers=workers,
        n_samples=samples,
        t_max=t_max,
        dt=dt,
        lambda_t_max=lambda_t_max,
    )


@app.command()
def report(
    surface: str = SURFACE,
    out: Optional[str] = OUT,
    seed: Optional[int] = SEED,
    workers: Optional[int] = WORKERS,
    cutoff: Optional[float] = CUTOFF,
    samples: Optional[int] = typer.Option(None, help="Liouville samples for the escape stage."),
) -> None:
    """Full pipeline: dimension, spectrum, zeta, resonances, phase, Weyl and escape."""
    _execute("report", surface, out, seed=seed, workers=workers, cutoff=cutoff, n_samples=samples)


@app.command("list-examples")
def list_examples() -> None:
    rows = []
    for name in list_bundled():
        s = bundled_surface(name, validate=False)
        rows.append({"name": name, "rank": s.rank, "funnels": s.funnel_count, "volume": s.volume})
    console.print_json(dumps(rows).decode())


@app.command("cache-list")
def cache_list(cache_dir: Optional[str] = typer.Option(None, help="Spectrum cache directory.")) -> None:
    d = cache_dir or get_settings().spectrum_cache_dir
    console.print_json(dumps([{"key": i.key, "metadata": i.metadata} for i in list_spectra(d)]).decode())


if __name__ == "__main__":
    app()
