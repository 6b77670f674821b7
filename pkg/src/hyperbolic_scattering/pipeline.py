"""
Command runners shared by the CLI: each takes a resolved RunConfig, writes its
artifacts into the output directory and returns a JSON-ready summary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.stats import linregress

from hyperbolic_scattering.contour import ComplexBox
from hyperbolic_scattering.continuation import (
    ResonanceSet,
    TransferDiscretization,
    calibrate,
    converged_discretization,
    find_resonances_parallel,
    leading_resonance,
)
from hyperbolic_scattering.dimension import DimensionEstimate, delta_poincare, delta_refinement
from hyperbolic_scattering.dynamics import (
    exponent_chain,
    lambda_max_estimate,
    pressure_from_escape,
    trapped_fraction,
)
from hyperbolic_scattering.errors import LocalizationError, MethodNotApplicableError, SurfaceError
from hyperbolic_scattering.geometry import SchottkySurface, resolve_surface, validate_schottky
from hyperbolic_scattering.phase import PhaseCurve, PhaseRoute, breit_wigner_check, scattering_phase, weyl_fit
from hyperbolic_scattering.phase.weyl import exponent_chain_residual
from hyperbolic_scattering.reporting import write_csv, write_json
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.spectrum import LengthSpectrum, Orientation, counting_exponent, enumerate_geodesics
from hyperbolic_scattering.spectrum.store import find_cached, save_spectrum
from hyperbolic_scattering.telemetry import get_logger, timed
from hyperbolic_scattering.zeta import (
    argument_curve_determinant,
    argument_curve_euler,
    argument_growth,
    log_modulus_growth,
    zeta_euler,
)

logger = get_logger("cli")

Command = Literal[
    "validate",
    "spectrum",
    "dimension",
    "zeta",
    "resonances",
    "phase",
    "weyl",
    "breit-wigner",
    "escape",
    "report",
]


class RunConfig(BaseModel):
    """Fully resolved run parameters; echoed verbatim as config.json."""

    command: Command
    surface: str = Field(description="Surface file path or bundled example name.")
    out: str = Field(description="Output directory.")
    seed: int = Field(default=7, description="Monte Carlo seed.")
    workers: int = Field(default=1, ge=1, description="Worker processes.")

    cutoff: float = Field(default=30.0, gt=0, description="Length cutoff L for the geodesic spectrum.")
    orientation: Orientation = Field(default=Orientation.UNORIENTED, description="Spectrum counting convention.")
    word_cutoff: int = Field(default=10, ge=8, description="Word length for the Poincare series.")
    refinement_depth: int = Field(default=12, ge=3, description="Disk refinement depth.")

    sigma: float = Field(default=0.5, description="Real part of s for the zeta table.")
    z_min: float = Field(default=1.0, description="Smallest frequency in the zeta table.")
    z_max: float = Field(default=20.0, description="Largest frequency in the zeta table.")
    z_points: int = Field(default=20, ge=2, description="Number of zeta table frequencies.")

    transfer_nodes: int = Field(default=24, ge=4, description="Collocation nodes per disk.")
    resolution_tol: float = Field(default=1e-6, gt=0, description="Mesh-doubling tolerance.")
    box: tuple[float, float, float, float] = Field(
        default=(-1.5, 1.0, -12.0, 12.0), description="Resonance box (Re min, Re max, Im min, Im max) in lambda."
    )
    strips: int = Field(default=4, ge=1, description="Horizontal strips searched in parallel.")

    phase_route: PhaseRoute | None = Field(default=None, description="Phase route; chosen from delta when unset.")
    phase_z_max: float = Field(default=50.0, gt=0, description="Largest frequency on the phase grid.")
    phase_samples: int = Field(default=1001, ge=100, description="Points on the phase grid.")
    weyl_window: tuple[float, float] = Field(default=(5.0, 50.0), description="Frequency window of the Weyl fit.")

    bw_windows: list[tuple[float, float]] = Field(
        default=[(4.0, 6.0), (6.5, 8.5), (8.0, 10.0)], description="Breit-Wigner frequency windows."
    )
    bw_sigma: float = Field(default=1.0, gt=0, description="Breit-Wigner disc radius offset.")
    bw_samples: int = Field(default=121, ge=24, description="Phase samples per Breit-Wigner window.")

    n_samples: int = Field(default=100_000, ge=10_000, description="Liouville samples for escape.")
    t_max: float = Field(default=12.0, gt=0, description="Last time on the escape grid.")
    dt: float = Field(default=0.25, gt=0, description="Escape grid spacing.")
    lambda_t_max: float = Field(default=10.0, ge=10.0, description="Time used for the expansion-rate estimate.")

    @classmethod
    def from_settings(cls, command: str, surface: str, out: str | None = None, **overrides: Any) -> "RunConfig":
        settings = get_settings()
        base: dict[str, Any] = {
            "command": command,
            "surface": surface,
            "out": out or settings.output_dir,
            "workers": settings.workers,
            "word_cutoff": settings.poincare_word_cutoff,
            "refinement_depth": settings.refinement_depth,
            "transfer_nodes": settings.transfer_nodes,
            "resolution_tol": settings.resolution_tol,
        }
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


@dataclass
class RunResult:
    summary: dict[str, Any]
    artifacts: list[str] = field(default_factory=list)


@dataclass
class PipelineContext:
    """Lazily computed shared inputs: each stage pulls what it needs once."""

    config: RunConfig
    out_dir: Path

    @cached_property
    def surface(self) -> SchottkySurface:
        return resolve_surface(self.config.surface, validate=True)

    @cached_property
    def dimension(self) -> dict[str, DimensionEstimate]:
        est = {"poincare": delta_poincare(self.surface, word_cutoff=self.config.word_cutoff)}
        try:
            est["refinement"] = delta_refinement(self.surface, refinement_depth=self.config.refinement_depth)
        except MethodNotApplicableError as exc:
            logger.info("refinement_skipped", extra={"reason": str(exc)})
        return est

    @property
    def delta(self) -> float:
        est = self.dimension.get("refinement") or self.dimension["poincare"]
        return est.delta

    @property
    def delta_hint(self) -> float:
        est = self.dimension.get("refinement") or self.dimension["poincare"]
        return est.delta + est.uncertainty

    def spectrum(self, orientation: Orientation) -> LengthSpectrum:
        cache = get_settings().spectrum_cache_dir
        spec = find_cached(cache, self.surface.fingerprint(), self.config.cutoff, orientation)
        if spec is None:
            spec = enumerate_geodesics(self.surface, self.config.cutoff, orientation, workers=self.config.workers)
            save_spectrum(spec, cache)
        return spec

    @cached_property
    def oriented_spectrum(self) -> LengthSpectrum:
        return self.spectrum(Orientation.ORIENTED)

    @cached_property
    def disc(self) -> TransferDiscretization:
        re_min, _, _, im_max = self.config.box
        probes = [complex(0.5, 1.0), complex(0.5, im_max), complex(re_min, im_max)]
        disc = converged_discretization(
            self.surface, probes, nodes=self.config.transfer_nodes, resolution_tol=self.config.resolution_tol
        )
        return calibrate(disc, self.oriented_spectrum, self.delta_hint)

    @cached_property
    def resonances(self) -> ResonanceSet:
        return find_resonances_parallel(
            ComplexBox(*self.config.box), self.disc, self.config.strips, workers=self.config.workers
        )

    @property
    def phase_route(self) -> PhaseRoute:
        if self.config.phase_route is not None:
            return self.config.phase_route
        return PhaseRoute.EXACT_SERIES if self.delta_hint < 0.5 else PhaseRoute.ARGUMENT_INTEGRAL

    def phase(self, z: np.ndarray) -> PhaseCurve:
        route = self.phase_route
        if route is PhaseRoute.EXACT_SERIES:
            return scattering_phase(z, self.surface, route, spec=self.oriented_spectrum, delta=self.delta_hint)
        return scattering_phase(z, self.surface, route, disc=self.disc)

    @cached_property
    def phase_curve(self) -> PhaseCurve:
        z = np.linspace(0.0, self.config.phase_z_max, self.config.phase_samples)
        return self.phase(z)


def run_validate(ctx: PipelineContext) -> RunResult:
    surface = resolve_surface(ctx.config.surface, validate=False)
    report = validate_schottky(surface)
    write_json(ctx.out_dir / "validation.json", report.to_dict())
    if not report.ok:
        raise SurfaceError(f"surface {surface.name!r} failed validation", report=report)
    return RunResult({"surface": surface.describe(), "valid": True}, ["validation.json"])


def run_spectrum(ctx: PipelineContext) -> RunResult:
    spec = ctx.spectrum(ctx.config.orientation)
    write_csv(ctx.out_dir / "spectrum.csv", spec.to_frame())
    summary: dict[str, Any] = {
        "count": len(spec),
        "cutoff": spec.cutoff,
        "orientation": spec.orientation.value,
        "word_length_bound": spec.certificate.word_length_bound if spec.certificate else None,
    }
    if ctx.surface.rank > 1 and len(spec) >= 200:
        fit = counting_exponent(spec)
        summary["counting_exponent"] = fit.exponent
        summary["counting_fit_range"] = list(fit.fit_range)
    return RunResult(summary, ["spectrum.csv"])


def run_dimension(ctx: PipelineContext) -> RunResult:
    payload = {
        name: {"delta": e.delta, "uncertainty": e.uncertainty, "method": e.method.value, "diagnostics": e.diagnostics}
        for name, e in ctx.dimension.items()
    }
    write_json(ctx.out_dir / "dimension.json", payload)
    summary = {name: e.delta for name, e in ctx.dimension.items()}
    if len(ctx.dimension) == 2:
        summary["agreement"] = abs(ctx.dimension["poincare"].delta - ctx.dimension["refinement"].delta)
    return RunResult(summary, ["dimension.json"])


def run_zeta(ctx: PipelineContext) -> RunResult:
    """Zeta table along Re s = sigma by both routes where both apply, plus Arg Z on the critical line."""
    cfg = ctx.config
    z = np.linspace(cfg.z_min, cfg.z_max, cfg.z_points)
    spec = ctx.oriented_spectrum
    det_log = np.log(np.array([ctx.disc(complex(cfg.sigma, t)) for t in z]))
    columns: dict[str, Any] = {"z": z, "re_s": np.full(z.size, cfg.sigma), "log_abs_det": det_log.real}
    summary: dict[str, Any] = {"sigma": cfg.sigma, "points": int(z.size)}

    if cfg.sigma > ctx.delta_hint:
        values = [zeta_euler(complex(cfg.sigma, t), spec, ctx.delta_hint, strict=False) for t in z]
        euler_log = np.array([v.log_value for v in values])
        # the two logs agree modulo 2 pi i
        gap = np.abs(np.exp(euler_log - det_log) - 1.0)
        columns.update(log_abs_euler=euler_log.real, tail_bound=[v.tail_bound for v in values], route_gap=gap)
        summary["max_route_gap"] = float(gap.max())

    if ctx.delta_hint < 0.5:
        args = argument_curve_euler(z, spec, ctx.delta_hint)
        summary["argument_route"] = "euler"
    else:
        args = argument_curve_determinant(z, ctx.disc)
        summary["argument_route"] = "determinant"
    columns["arg_z"] = args
    write_csv(ctx.out_dir / "zeta.csv", pd.DataFrame(columns, columns=list(columns)))

    if z.size >= 24 and z[0] > 0.0:
        summary["argument_exponent"] = argument_growth(z, args).exponent
        if cfg.sigma > ctx.delta_hint:
            summary["log_modulus_exponent"] = log_modulus_growth(spec, ctx.delta_hint, cfg.sigma, z).exponent
    return RunResult(summary, ["zeta.csv"])


def run_resonances(ctx: PipelineContext) -> RunResult:
    res = ctx.resonances
    write_csv(ctx.out_dir / "resonances.csv", res.to_frame())
    summary: dict[str, Any] = {
        "count": len(res),
        "total_multiplicity": res.total_multiplicity,
        "nodes_per_disk": res.nodes_per_disk,
        "box": list(ctx.config.box),
    }
    try:
        summary["leading_resonance"] = leading_resonance(ctx.disc)
        summary["leading_minus_delta"] = summary["leading_resonance"] - ctx.delta
    except LocalizationError as exc:
        logger.warning("leading_resonance_failed", extra={"error": str(exc)})
    return RunResult(summary, ["resonances.csv"])


def run_phase(ctx: PipelineContext) -> RunResult:
    curve = ctx.phase_curve
    write_csv(ctx.out_dir / "phase.csv", curve.to_frame())
    summary = {
        "route": ctx.phase_route.value,
        "samples": len(curve.samples),
        "critical_multiplicity": curve.critical.multiplicity,
        "critical_ambiguous": curve.critical.ambiguous,
        "funnel_sup": curve.funnel_sup,
        "series_bound": curve.series_bound,
    }
    return RunResult(summary, ["phase.csv"])


def _weyl(ctx: PipelineContext) -> dict[str, Any]:
    lo, hi = ctx.config.weyl_window
    samples = [p for p in ctx.phase_curve.samples if lo <= p.z <= hi]
    return weyl_fit(samples, ctx.delta, volume=ctx.surface.volume).summary()


def run_weyl(ctx: PipelineContext) -> RunResult:
    summary = _weyl(ctx)
    write_json(ctx.out_dir / "weyl.json", summary)
    return RunResult(summary, ["weyl.json"])


def run_breit_wigner(ctx: PipelineContext) -> RunResult:
    cfg = ctx.config
    reports = []
    for lo, hi in cfg.bw_windows:
        curve = ctx.phase(np.linspace(lo, hi, cfg.bw_samples))
        rep = breit_wigner_check(
            (lo, hi), ctx.resonances, cfg.bw_sigma, curve.z, curve.ds_dz, ctx.surface.volume, disc=ctx.disc
        )
        reports.append(rep)
    centers = np.array([0.5 * sum(r.window) for r in reports])
    summary: dict[str, Any] = {"windows": [r.to_dict() for r in reports]}
    for reading, attr in (("linear", "linear_residual"), ("quadratic", "quadratic_residual")):
        peaks = np.array([float(np.max(np.abs(getattr(r, attr)))) for r in reports])
        if len(reports) >= 2 and np.all(peaks > 0.0):
            summary[f"{reading}_window_exponent"] = float(linregress(np.log(centers), np.log(peaks)).slope)
    write_json(ctx.out_dir / "breit_wigner.json", summary)
    return RunResult(summary, ["breit_wigner.json"])


def _escape(ctx: PipelineContext) -> tuple[dict[str, Any], Any]:
    cfg = ctx.config
    times = np.arange(0.0, cfg.t_max + 0.5 * cfg.dt, cfg.dt)
    est = trapped_fraction(ctx.surface, times, cfg.n_samples, cfg.seed, workers=cfg.workers)
    lam = lambda_max_estimate(ctx.surface, cfg.lambda_t_max, cfg.n_samples, cfg.seed, workers=cfg.workers)
    summary = {**est.summary(), "lambda_max": lam, "pressure": pressure_from_escape(est)}
    summary["predicted_delta"] = exponent_chain(est.fitted_rate, lam)
    return summary, est


def run_escape(ctx: PipelineContext) -> RunResult:
    summary, est = _escape(ctx)
    summary["delta"] = ctx.delta
    summary["chain_defect"] = abs(summary["predicted_delta"] - ctx.delta)
    write_csv(ctx.out_dir / "escape.csv", est.to_frame())
    write_json(ctx.out_dir / "escape.json", summary)
    return RunResult(summary, ["escape.csv", "escape.json"])


def run_report(ctx: PipelineContext) -> RunResult:
    stages: list[tuple[str, Callable[[PipelineContext], RunResult]]] = [
        ("dimension", run_dimension),
        ("spectrum", run_spectrum),
        ("zeta", run_zeta),
        ("resonances", run_resonances),
        ("phase", run_phase),
        ("weyl", run_weyl),
        ("escape", run_escape),
    ]
    parts: dict[str, dict[str, Any]] = {}
    artifacts: list[str] = []
    for name, stage in stages:
        with timed(logger, "pipeline_stage", stage=name):
            result = stage(ctx)
        parts[name] = result.summary
        artifacts.extend(result.artifacts)

    weyl, escape = parts["weyl"], parts["escape"]
    report = {
        "surface": ctx.surface.name,
        "delta_poincare": parts["dimension"].get("poincare"),
        "delta_refinement": parts["dimension"].get("refinement"),
        "volume": ctx.surface.volume,
        "weyl_leading_coefficient": weyl["leading_coefficient"],
        "weyl_expected_coefficient": weyl["expected_coefficient"],
        "remainder_exponent": weyl["remainder_exponent"],
        "integrated_remainder_exponent": weyl["integrated_remainder_exponent"],
        "escape_rate": escape["fitted_rate"],
        "escape_rate_interval": escape["confidence_interval"],
        "lambda_max": escape["lambda_max"],
        "exponent_chain_residual": _chain_residual(weyl["remainder_exponent"], escape),
        "stages": parts,
    }
    write_json(ctx.out_dir / "report.json", report)
    artifacts.append("report.json")
    return RunResult(report, artifacts)


def _chain_residual(remainder_exponent: float, escape: dict[str, Any]) -> float | None:
    if not math.isfinite(remainder_exponent):
        return None
    return exponent_chain_residual(remainder_exponent, escape["pressure"], escape["lambda_max"])


RUNNERS: dict[str, Callable[[PipelineContext], RunResult]] = {
    "validate": run_validate,
    "spectrum": run_spectrum,
    "dimension": run_dimension,
    "zeta": run_zeta,
    "resonances": run_resonances,
    "phase": run_phase,
    "weyl": run_weyl,
    "breit-wigner": run_breit_wigner,
    "escape": run_escape,
    "report": run_report,
}


def run(config: RunConfig) -> RunResult:
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = PipelineContext(config, out_dir)
    with timed(logger, "command_finished", command=config.command, surface=config.surface) as ev:
        result = RUNNERS[config.command](ctx)
        ev["artifacts"] = len(result.artifacts)
    return result
