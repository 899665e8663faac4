"""Closed-form far-field downwash of hovering multirotors.

>>> from downwash import get_preset, evaluate_far_field, FlowPoint, DEFAULT_ENVIRONMENT, DEFAULT_JET
>>> kolibri = get_preset("kolibri")
>>> round(evaluate_far_field(kolibri, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(s=3 * 0.118, r=0.0)), 2)
8.5
"""

from .errors import (
    ConfigError,
    DomainError,
    EmptyInputError,
    FitError,
    FormatError,
    NearFieldRequest,
    PlantError,
    QualitativeOnlyWarning,
    UnavailableError,
)
from .model import (
    DEFAULT_ENVIRONMENT,
    DEFAULT_JET,
    FAR_FIELD_THRESHOLD,
    Cant,
    DroneSpec,
    Environment,
    FieldEvaluation,
    FlowPoint,
    JetParameters,
    air_density,
    body_to_flow,
    centerline_velocity_norm,
    evaluate_far_field,
    evaluate_point,
    far_field_speed,
    half_width_norm,
    hover_velocity,
    in_near_field,
    induced_hover_velocity,
    jet_diagnostics,
    reynolds_number,
    scaled_radial_position,
    similarity_profile,
)
from .presets import get_preset, presets

__version__ = "0.1.0"
