"""
Time-averaged downwash below a hovering multirotor, modelled as a round
turbulent jet.

All lengths are normalized by the diagonal motor distance ``l`` and all
velocities by the momentum-theory induced velocity ``U_H``. In those units the
far field is drone independent and fully described by three constants
(:class:`JetParameters`).

The public entry point is :func:`evaluate_far_field`; the building blocks are
exposed so that they can be fitted and tested separately.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, NearFieldRequest, QualitativeOnlyWarning, UnavailableError

MOLAR_MASS_AIR = 0.028966  # kg/mol, dry air
GAS_CONSTANT = 8.3144  # J/(K mol)
STANDARD_GRAVITY = 9.80665  # m/s^2

FAR_FIELD_THRESHOLD = 2.5  # motor distances below the rotor plane
PROFILE_COEFF = math.sqrt(2.0) - 1.0
_THRESHOLD_RTOL = 1e-12  # absorbs round-off from s = s_norm * l followed by s / l


def in_near_field(s_norm):
    """True where ``s_norm`` lies above the far-field threshold (beyond round-off)."""
    return np.asarray(s_norm) < FAR_FIELD_THRESHOLD * (1.0 - _THRESHOLD_RTOL)


class Cant(str, Enum):
    """Tilt of the propeller axes relative to the body z-axis."""

    UNCANTED = "uncanted"
    INWARD = "inward"
    OUTWARD = "outward"


@dataclass(frozen=True)
class DroneSpec:
    """Physical identity of a multirotor.

    Parameters
    ----------
    name : str
        Identifier.
    mass : float
        Take-off mass in kg.
    propeller_radius : float
        Propeller radius in m.
    motor_distance : float
        Diagonal motor-to-motor distance ``l`` in m. This is the length scale
        of the model.
    n_propellers : int
        Number of propellers sharing the weight.
    cant : Cant
        Propeller cant class. Only uncanted vehicles are covered
        quantitatively.
    """

    name: str
    mass: float
    propeller_radius: float
    motor_distance: float
    n_propellers: int = 4
    cant: Cant = Cant.UNCANTED

    def __post_init__(self):
        object.__setattr__(self, "cant", Cant(self.cant))
        if not self.mass > 0:
            raise DomainError(f"{self.name}: mass must be positive, got {self.mass}")
        if not self.propeller_radius > 0:
            raise DomainError(f"{self.name}: propeller radius must be positive")
        if not self.motor_distance > 0:
            raise DomainError(f"{self.name}: motor distance must be positive")
        if int(self.n_propellers) != self.n_propellers or self.n_propellers < 1:
            raise DomainError(f"{self.name}: need at least one propeller")
        if 2 * self.propeller_radius >= 2 * self.motor_distance:
            raise DomainError(f"{self.name}: propellers do not fit the motor distance")

    @property
    def propeller_diameter(self) -> float:
        return 2.0 * self.propeller_radius

    @property
    def disk_area(self) -> float:
        """Total rotor disk area of all propellers (m^2)."""
        return math.pi * self.propeller_radius**2 * self.n_propellers

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mass_kg": self.mass,
            "propeller_diameter_m": self.propeller_diameter,
            "motor_distance_m": self.motor_distance,
            "n_propellers": self.n_propellers,
            "cant": self.cant.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DroneSpec":
        return cls(
            name=d["name"],
            mass=float(d["mass_kg"]),
            propeller_radius=float(d["propeller_diameter_m"]) / 2.0,
            motor_distance=float(d["motor_distance_m"]),
            n_propellers=int(d.get("n_propellers", 4)),
            cant=Cant(d.get("cant", "uncanted")),
        )


@dataclass(frozen=True)
class Environment:
    """Ambient conditions.

    ``viscosity`` is only used by :func:`reynolds_number`. ``g`` is exposed so
    that tests can vary it; presets never change it.
    """

    pressure: float = 101325.0
    temperature: float = 293.15
    viscosity: float | None = None
    g: float = STANDARD_GRAVITY

    def __post_init__(self):
        if not self.pressure > 0:
            raise DomainError(f"pressure must be positive, got {self.pressure}")
        if not self.temperature > 0:
            raise DomainError(f"temperature must be positive, got {self.temperature}")
        if self.viscosity is not None and not self.viscosity > 0:
            raise DomainError("viscosity must be positive when given")
        if not self.g > 0:
            raise DomainError("g must be positive")

    @property
    def density(self) -> float:
        return air_density(self)


DEFAULT_ENVIRONMENT = Environment()


@dataclass(frozen=True)
class JetParameters:
    """Normalized jet constants.

    Parameters
    ----------
    bd : float
        Product of the decay constant and the exit diameter, in motor
        distances, with the exit velocity set to one.
    spreading_rate : float
        Slope of the half-width growth.
    s0_norm : float
        Virtual origin in motor distances (negative: above the rotor plane).
    """

    bd: float = 10.11
    spreading_rate: float = 0.07668
    s0_norm: float = -5.817

    def __post_init__(self):
        if not self.bd > 0:
            raise DomainError(f"bd must be positive, got {self.bd}")
        if not self.spreading_rate > 0:
            raise DomainError(f"spreading rate must be positive, got {self.spreading_rate}")
        if not math.isfinite(self.s0_norm) or FAR_FIELD_THRESHOLD - self.s0_norm == 0:
            raise DomainError("virtual origin coincides with the far-field threshold")

    def to_dict(self) -> dict:
        return {"bd": self.bd, "spreading_rate": self.spreading_rate, "s0_norm": self.s0_norm}

    @classmethod
    def from_dict(cls, d: dict) -> "JetParameters":
        return cls(float(d["bd"]), float(d["spreading_rate"]), float(d["s0_norm"]))


DEFAULT_JET = JetParameters()


@dataclass(frozen=True)
class FlowPoint:
    """Point in the cylindrical flow frame (s down the axis, r radial)."""

    s: float
    r: float
    theta: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise DomainError(f"radial distance must be non-negative, got {self.r}")
        if not 0.0 <= self.theta < 2 * math.pi:
            raise DomainError(f"azimuth must lie in [0, 2pi), got {self.theta}")


def air_density(env: Environment) -> float:
    """Ideal-gas density of dry air in kg/m^3."""
    if env.pressure <= 0 or env.temperature <= 0:
        raise DomainError("pressure and temperature must be positive")
    return env.pressure * MOLAR_MASS_AIR / (GAS_CONSTANT * env.temperature)


def induced_hover_velocity(drone: DroneSpec, density: float, g: float = STANDARD_GRAVITY) -> float:
    """Momentum-theory induced velocity of a hovering vehicle (m/s)."""
    if not density > 0:
        raise DomainError(f"density must be positive, got {density}")
    if not drone.propeller_radius > 0:
        raise DomainError("propeller radius must be positive")
    return math.sqrt(drone.mass * g / (2.0 * density * drone.disk_area))


def hover_velocity(drone: DroneSpec, env: Environment = DEFAULT_ENVIRONMENT) -> float:
    """Shorthand for :func:`induced_hover_velocity` at the given environment."""
    return induced_hover_velocity(drone, env.density, env.g)


def _check_downstream(s_norm, params: JetParameters):
    s_norm = np.asarray(s_norm, dtype=float)
    if np.any(s_norm <= params.s0_norm):
        raise DomainError(
            f"s/l must lie downstream of the virtual origin s0/l = {params.s0_norm}"
        )
    return s_norm


def _check_apex(s_norm, params: JetParameters):
    s_norm = np.asarray(s_norm, dtype=float)
    if np.any(s_norm < params.s0_norm):
        raise DomainError(
            f"s/l must not lie upstream of the virtual origin s0/l = {params.s0_norm}"
        )
    return s_norm


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def centerline_velocity_norm(s_norm, params: JetParameters = DEFAULT_JET):
    """Normalized centerline speed ``bd / (s - s0)``."""
    s_norm = _check_downstream(s_norm, params)
    return _out(params.bd / (s_norm - params.s0_norm))


def half_width_norm(s_norm, params: JetParameters = DEFAULT_JET):
    """Normalized jet half-width ``S (s - s0)``; zero at the cone apex."""
    s_norm = _check_apex(s_norm, params)
    return _out(params.spreading_rate * (s_norm - params.s0_norm))


def similarity_profile(xi, centerline_velocity):
    """Mean axial speed at rescaled radius ``xi = r / r_half``."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise DomainError("rescaled radius must be non-negative")
    return _out(np.asarray(centerline_velocity, dtype=float) / (1.0 + PROFILE_COEFF * xi**2) ** 2)


def scaled_radial_position(r_norm, s_norm, params: JetParameters = DEFAULT_JET):
    """``xi = r / r_half(s)`` from normalized coordinates."""
    r_norm = np.asarray(r_norm, dtype=float)
    return _out(r_norm / half_width_norm(_check_downstream(s_norm, params), params))


@dataclass(frozen=True)
class FieldEvaluation:
    """Intermediate and final quantities of one far-field evaluation."""

    speed: float
    u_hover: float
    s_norm: float
    r_norm: float
    u_c_norm: float
    r_half_norm: float
    xi: float
    clamped: bool = False
    qualitative_only: bool = False

    @property
    def u_c(self) -> float:
        return self.u_c_norm * self.u_hover


def evaluate_point(
    drone: DroneSpec,
    env: Environment,
    params: JetParameters,
    point: FlowPoint,
    clamp_near_field: bool = False,
) -> FieldEvaluation:
    """Run the six-step far-field algorithm and keep every intermediate.

    Near-field points raise :class:`NearFieldRequest` unless
    ``clamp_near_field`` is set, in which case the point is moved down to the
    ``s/l = 2.5`` slice at unchanged radius.
    """
    u_hover = induced_hover_velocity(drone, air_density(env), env.g)
    l = drone.motor_distance
    s_norm = point.s / l
    r_norm = point.r / l
    clamped = False
    if in_near_field(s_norm):
        if not clamp_near_field:
            raise NearFieldRequest(s_norm, FAR_FIELD_THRESHOLD)
        s_norm = FAR_FIELD_THRESHOLD
        clamped = True
    u_c_norm = centerline_velocity_norm(s_norm, params)
    r_half = half_width_norm(s_norm, params)
    xi = r_norm / r_half
    u_c = u_c_norm * u_hover
    return FieldEvaluation(
        speed=similarity_profile(xi, u_c),
        u_hover=u_hover,
        s_norm=s_norm,
        r_norm=r_norm,
        u_c_norm=u_c_norm,
        r_half_norm=r_half,
        xi=xi,
        clamped=clamped,
        qualitative_only=drone.cant is not Cant.UNCANTED,
    )


def evaluate_far_field(
    drone: DroneSpec,
    env: Environment,
    params: JetParameters,
    point: FlowPoint,
    clamp_near_field: bool = False,
) -> float:
    """Time-averaged downwash speed (m/s) at ``point`` below ``drone``.

    Canted vehicles are evaluated like uncanted ones but a
    :class:`QualitativeOnlyWarning` is emitted.
    """
    ev = evaluate_point(drone, env, params, point, clamp_near_field)
    if ev.qualitative_only:
        warnings.warn(
            f"{drone.name} has {drone.cant.value}-canted propellers; "
            "the jet model is qualitative only for this vehicle",
            QualitativeOnlyWarning,
            stacklevel=2,
        )
    return ev.speed


def far_field_speed(
    drone: DroneSpec,
    env: Environment,
    params: JetParameters,
    s,
    r,
    clamp_near_field: bool = False,
):
    """Vectorized :func:`evaluate_far_field` over arrays of ``s`` and ``r`` (m)."""
    u_hover = induced_hover_velocity(drone, air_density(env), env.g)
    l = drone.motor_distance
    s_norm = np.asarray(s, dtype=float) / l
    r_norm = np.asarray(r, dtype=float) / l
    if np.any(r_norm < 0):
        raise DomainError("radial distance must be non-negative")
    near = in_near_field(s_norm)
    if np.any(near):
        if not clamp_near_field:
            raise NearFieldRequest(float(np.min(s_norm)), FAR_FIELD_THRESHOLD)
        s_norm = np.where(near, FAR_FIELD_THRESHOLD, s_norm)
    xi = r_norm / half_width_norm(s_norm, params)
    return similarity_profile(xi, centerline_velocity_norm(s_norm, params) * u_hover)


def body_to_flow(body_offset) -> FlowPoint:
    """Map an offset from the rotor plane (body frame, z up) to the flow frame."""
    x, y, z = (float(c) for c in body_offset)
    if z > 0:
        raise DomainError("point lies above the rotor plane; the downwash model is undefined there")
    theta = math.atan2(y, x) % (2 * math.pi)
    if theta >= 2 * math.pi:  # -0.0 % 2pi rounds up
        theta = 0.0
    return FlowPoint(s=-z, r=math.hypot(x, y), theta=theta)


def reynolds_number(env: Environment, speed: float, length: float) -> float:
    """Jet Reynolds number ``rho U d / mu``. Diagnostic only."""
    if env.viscosity is None:
        raise UnavailableError("Reynolds number needs Environment.viscosity")
    return air_density(env) * speed * length / env.viscosity


@dataclass(frozen=True)
class JetDiagnostics:
    spreading_rate: float
    cone_angle_rad: float
    slope_cone_angle_rad: float
    centerline_at_threshold: float
    half_width_at_threshold: float

    @property
    def cone_angle_deg(self) -> float:
        return math.degrees(self.cone_angle_rad)


def jet_diagnostics(params: JetParameters = DEFAULT_JET) -> JetDiagnostics:
    """Derived quantities of a parameter set.

    The cone angle is reported twice: from the spreading rate directly and
    from the slope of :func:`half_width_norm` between two far-field stations.
    """
    s1, s2 = FAR_FIELD_THRESHOLD, FAR_FIELD_THRESHOLD + 1.0
    slope = (half_width_norm(s2, params) - half_width_norm(s1, params)) / (s2 - s1)
    return JetDiagnostics(
        spreading_rate=params.spreading_rate,
        cone_angle_rad=2.0 * math.atan(params.spreading_rate),
        slope_cone_angle_rad=2.0 * math.atan(slope),
        centerline_at_threshold=centerline_velocity_norm(s1, params),
        half_width_at_threshold=half_width_norm(s1, params),
    )
