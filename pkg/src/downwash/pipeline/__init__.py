"""Measurement processing: from raw probe logs to fitted jet parameters."""

from .binning import GriddedField, LateralProfile, RadialBin, RadialProfile, bin_grid, lateral_profiles, radial_profiles
from .fitting import (
    BimodalFit,
    bimodal_model,
    JetFit,
    SliceFit,
    fit_bimodal,
    fit_jet_parameters,
    fit_slice,
    merge_distance,
    profile_model,
)
from .lsq import LSQResult, levenberg_marquardt
from .records import (
    MeasurementRecord,
    ParsedLog,
    estimate_ambient,
    filter_hover,
    load_log,
    subtract_ambient,
    write_log,
)
from .run import PipelineConfig, PipelineError, PipelineResult, residual_samples, run_pipeline
from .stats import ResidualTest, one_sided_t_test, residual_test, t_quantile, t_sf
from .synth import NearFieldSurrogate, campaign_log, grid_flight_plan, synthesize_log
