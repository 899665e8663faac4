"""End-to-end processing of one or more flight logs."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyInputError, FitError
from ..model import DEFAULT_ENVIRONMENT, DEFAULT_JET, FAR_FIELD_THRESHOLD, DroneSpec, Environment, JetParameters
from .binning import GriddedField, bin_grid, lateral_profiles, radial_profiles
from .fitting import BimodalFit, SliceFit, fit_bimodal, fit_jet_parameters, fit_slice, merge_distance
from .records import drop_before, estimate_ambient, filter_hover, subtract_ambient
from .stats import ResidualTest, residual_test


@dataclass
class PipelineConfig:
    resolution_norm: float = 0.33
    slice_thickness_norm: float | None = None
    radial_bin_norm: float | None = None
    v_max: float = 0.1
    ambient: float | None = None  # None: estimate from the pre-takeoff window
    pre_takeoff_window: float = 0.0
    weighting: str = "rms"
    merge_threshold: float = 0.05
    s_min_norm: float = FAR_FIELD_THRESHOLD


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@dataclass
class PipelineResult:
    drone: DroneSpec
    ambient: float
    n_records: int
    n_hover: int
    grid: GriddedField
    slices: list[SliceFit]
    jet_parameters: JetParameters | None
    bimodal: list[BimodalFit] = field(default_factory=list)
    merge_distance: float | None = None
    residual_tests: list[ResidualTest] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self, reference: JetParameters = DEFAULT_JET) -> dict:
        out = {
            "drone": self.drone.to_dict(),
            "ambient_mps": self.ambient,
            "n_records": self.n_records,
            "n_hover_records": self.n_hover,
            "slices": [s.to_dict() for s in self.slices],
            "jet_parameters": self.jet_parameters.to_dict() if self.jet_parameters else None,
            "bimodal_fits": [b.to_dict() for b in self.bimodal],
            "merge_distance_norm": self.merge_distance,
            "residual_tests": [t.to_dict() for t in self.residual_tests],
            "diagnostics": list(self.diagnostics),
        }
        if self.jet_parameters is not None:
            ref = reference.to_dict()
            fit = self.jet_parameters.to_dict()
            out["reference_delta"] = {
                k: {"fitted": fit[k], "reference": ref[k], "relative": (fit[k] - ref[k]) / abs(ref[k])}
                for k in ref
            }
        return out

    def to_json(self, **extra) -> str:
        d = self.to_dict()
        d.update(extra)
        return json.dumps(d, indent=2)


def residual_samples(grid: GriddedField, params: JetParameters, s_min_norm: float = FAR_FIELD_THRESHOLD):
    """``(xi, speed / centerline speed)`` for every far-field grid cell."""
    s, r, u = grid.s_norm, grid.r_norm, grid.u_norm
    far = s >= s_min_norm
    d = s[far] - params.s0_norm
    return r[far] / (params.spreading_rate * d), u[far] / (params.bd / d)


def run_pipeline(
    records,
    drone: DroneSpec,
    env: Environment = DEFAULT_ENVIRONMENT,
    config: PipelineConfig | None = None,
) -> PipelineResult:
    """Ambient correction, hover filter, gridding, slice fits, jet fit, merge and residual tests.

    The jet fit is required; the near-field merge analysis is best effort and
    only reported in ``diagnostics`` when it cannot be done.
    """
    cfg = config or PipelineConfig()
    diagnostics = []
    if not records:
        raise PipelineError("load", EmptyInputError("no records"))

    try:
        if cfg.ambient is None:
            if cfg.pre_takeoff_window > 0:
                ambient = estimate_ambient(records, cfg.pre_takeoff_window)
            else:
                ambient = 0.0
                diagnostics.append("no ambient flow given or estimated; assuming 0")
        else:
            ambient = cfg.ambient
    except EmptyInputError as exc:
        raise PipelineError("estimate_ambient", exc) from exc
    if cfg.pre_takeoff_window > 0:
        records = drop_before(records, records[0].time + cfg.pre_takeoff_window)

    hover = filter_hover(subtract_ambient(records, ambient), cfg.v_max)
    if not hover:
        raise PipelineError("filter_hover", EmptyInputError(f"no samples with drone speed <= {cfg.v_max} m/s"))

    grid = bin_grid(hover, drone, cfg.resolution_norm, env)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        profiles = radial_profiles(grid, cfg.slice_thickness_norm, cfg.radial_bin_norm)
    diagnostics.extend(str(w.message) for w in caught)

    slices = []
    for prof in profiles:
        try:
            slices.append(fit_slice(prof))
        except FitError as exc:
            diagnostics.append(f"fit_slice: {exc}")

    try:
        jet = fit_jet_parameters(slices, cfg.s_min_norm, cfg.weighting).params
    except FitError as exc:
        raise PipelineError("fit_jet_parameters", exc) from exc

    bimodal = []
    for lp in lateral_profiles(grid):
        if lp.s_norm >= 2 * FAR_FIELD_THRESHOLD:
            continue
        try:
            bimodal.append(fit_bimodal(lp.y_norm, lp.speed_norm, lp.s_norm))
        except FitError as exc:
            diagnostics.append(f"fit_bimodal at s/l = {lp.s_norm:.3g}: {exc}")
    merge = None
    if len(bimodal) >= 3:
        merge = merge_distance(bimodal, cfg.merge_threshold)
        if merge is None:
            diagnostics.append("no merge observed in the sampled depth range")
    else:
        diagnostics.append("too few lateral profiles for the merge analysis")

    xi, ratio = residual_samples(grid, jet, cfg.s_min_norm)
    tests = residual_test(xi, ratio)

    return PipelineResult(
        drone=drone,
        ambient=float(ambient),
        n_records=len(records),
        n_hover=len(hover),
        grid=grid,
        slices=slices,
        jet_parameters=jet,
        bimodal=bimodal,
        merge_distance=merge,
        residual_tests=tests,
        diagnostics=diagnostics,
    )


def merge_logs(logs) -> list:
    """Concatenate record lists, keeping input order."""
    out = []
    for recs in logs:
        out.extend(recs)
    return out


__all__ = [
    "PipelineConfig",
    "PipelineError",
    "PipelineResult",
    "residual_samples",
    "run_pipeline",
    "merge_logs",
]
