"""
Feed-forward downwash compensation for a drone passing below another one.

A hovering upper drone is treated as a fixed downwash source. The lower drone
moves laterally at constant speed along a prescribed line and only its
vertical motion is simulated. Its altitude controller is PD plus hover
throttle; the compensated variant multiplies the throttle by ``sqrt(beta)``,
where ``beta`` is the power ratio of hovering inside the downwash.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, DomainError, NearFieldRequest, PlantError
from .model import (
    DEFAULT_ENVIRONMENT,
    DEFAULT_JET,
    FAR_FIELD_THRESHOLD,
    DroneSpec,
    Environment,
    JetParameters,
    air_density,
    body_to_flow,
    evaluate_point,
    half_width_norm,
    hover_velocity,
    in_near_field,
)

XI_CUTOFF = 6.0
SETTLING_FACTOR = 5.834  # 2 % settling time of a critically damped 2nd-order system, in 1/omega_n


def downwash_at_relative_position(
    upper: DroneSpec,
    env: Environment,
    params: JetParameters,
    delta_p,
    clamp_near_field: bool = False,
    xi_cutoff: float = XI_CUTOFF,
) -> float:
    """Downwash speed (m/s) of ``upper`` at offset ``delta_p`` (m, lower minus upper, z up).

    Points more than ``xi_cutoff`` half-widths off the axis get zero flow,
    also inside the near field.
    """
    point = body_to_flow(delta_p)
    l = upper.motor_distance
    s_norm, r_norm = point.s / l, point.r / l
    if s_norm <= params.s0_norm or r_norm > xi_cutoff * half_width_norm(s_norm, params):
        return 0.0
    if in_near_field(s_norm) and not clamp_near_field:
        raise NearFieldRequest(s_norm, FAR_FIELD_THRESHOLD)
    return evaluate_point(upper, env, params, point, clamp_near_field).speed


def induced_velocity_in_downwash(u_d: float, u_h: float) -> float:
    """Induced velocity through a rotor whose inflow already moves down at ``u_d``."""
    if u_d < 0 or not u_h > 0:
        raise DomainError("need u_d >= 0 and u_h > 0")
    return u_d / 2.0 + math.sqrt((u_d / 2.0) ** 2 + u_h**2)


def power_ratio(alpha: float) -> float:
    """Hover power inside downwash relative to still air, for ``alpha = U_D / U_H``."""
    if alpha < 0:
        raise DomainError(f"relative induced velocity must be non-negative, got {alpha}")
    return alpha / 2.0 + math.sqrt(alpha**2 + 4.0) / 2.0


def throttle_compensation(beta: float) -> float:
    """Throttle scale ``sqrt(beta)`` for an ESC whose power is quadratic in throttle."""
    if beta < 1.0:
        warnings.warn(f"power ratio {beta} < 1 clamped to 1", RuntimeWarning, stacklevel=2)
        beta = 1.0
    return math.sqrt(beta)


def hover_power(drone: DroneSpec, env: Environment = DEFAULT_ENVIRONMENT) -> float:
    """Still-air aerodynamic hover power ``m g U_H`` (W); throttle 1 delivers it."""
    return drone.mass * env.g * hover_velocity(drone, env)


def plant_thrust(
    throttle: float,
    u_d: float,
    plant: DroneSpec,
    env: Environment = DEFAULT_ENVIRONMENT,
    throttle_max: float = 2.0,
) -> float:
    """Total rotor thrust (N) produced at ``throttle`` with inflow ``u_d``.

    Power is ``P = P_hover * throttle**2``; thrust solves
    ``P = T * (u_d/2 + sqrt((u_d/2)**2 + T / (2 rho A)))`` on a bracket.
    """
    if not 0.0 <= throttle <= throttle_max:
        raise DomainError(f"throttle {throttle} outside [0, {throttle_max}]")
    if u_d < 0:
        raise DomainError("inflow must be non-negative")
    power = hover_power(plant, env) * throttle**2
    if power == 0.0:
        return 0.0
    k = 2.0 * air_density(env) * plant.disk_area
    half = u_d / 2.0

    def excess(t):
        return t * (half + math.sqrt(half * half + t / k)) - power

    t_hi = 1.001 * (power * power * k) ** (1.0 / 3.0)  # above the still-air thrust
    try:
        thrust, info = brentq(excess, 0.0, t_hi, xtol=1e-300, rtol=1e-14, maxiter=200, full_output=True)
    except (ValueError, RuntimeError) as exc:
        raise PlantError(f"thrust solve failed: {exc}") from exc
    if not info.converged:
        raise PlantError("thrust solve did not converge")
    return thrust


@dataclass(frozen=True)
class ControllerGains:
    """PD gains on height error (throttle per m) and vertical speed (throttle per m/s)."""

    kp: float
    kd: float

    @classmethod
    def critically_damped(cls, settling_time: float = 1.0, g: float = 9.80665) -> "ControllerGains":
        # still air: thrust ~ throttle**(4/3), so d(accel)/d(throttle) = 4/3 g at hover
        omega = SETTLING_FACTOR / settling_time
        b = 4.0 / 3.0 * g
        return cls(kp=omega**2 / b, kd=2.0 * omega / b)


@dataclass(frozen=True)
class SimConfig:
    """Pass-under scenario.

    The lower drone flies along the body x-axis of the upper drone from
    ``-horizontal_span/2`` to ``+horizontal_span/2`` at
    ``upper_height - vertical_separation``. ``crossing_speed`` defaults to one
    upper-drone motor distance per second. ``upper_drone=None`` removes the
    downwash source entirely.
    """

    upper_drone: DroneSpec | None
    lower_drone: DroneSpec
    env: Environment = DEFAULT_ENVIRONMENT
    params: JetParameters = DEFAULT_JET
    vertical_separation: float = 2.0
    crossing_speed: float | None = None
    horizontal_span: float = 4.0
    timestep: float = 0.002
    control_period: float = 0.01
    gains: ControllerGains | None = None
    compensation_enabled: bool = True
    seed: int = 0
    upper_height: float = 3.0
    height_noise: float = 0.0
    initial_height_offset: float = 0.0
    throttle_max: float = 2.0
    clamp_near_field: bool = False
    xi_cutoff: float = XI_CUTOFF

    def __post_init__(self):
        if self.upper_drone is not None:
            ratio = self.vertical_separation / self.upper_drone.motor_distance
            if ratio < FAR_FIELD_THRESHOLD and not self.clamp_near_field:
                raise ConfigError(
                    f"separation is {ratio:.3g} motor distances; need >= {FAR_FIELD_THRESHOLD}",
                    "vertical_separation",
                )
        if not self.vertical_separation > 0:
            raise ConfigError("must be positive", "vertical_separation")
        if not self.timestep > 0:
            raise ConfigError("must be positive", "timestep")
        steps = self.control_period / self.timestep
        if not self.control_period > 0 or abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ConfigError("must be a positive integer multiple of timestep", "control_period")
        if self.crossing_speed is not None and not self.crossing_speed > 0:
            raise ConfigError("must be positive", "crossing_speed")
        if not self.horizontal_span > 0:
            raise ConfigError("must be positive", "horizontal_span")
        if self.height_noise < 0:
            raise ConfigError("must be non-negative", "height_noise")
        if not self.throttle_max > 1:
            raise ConfigError("must exceed the hover throttle 1", "throttle_max")

    @property
    def speed(self) -> float:
        if self.crossing_speed is not None:
            return self.crossing_speed
        ref = self.upper_drone or self.lower_drone
        return ref.motor_distance

    @property
    def controller_gains(self) -> ControllerGains:
        return self.gains or ControllerGains.critically_damped(1.0, self.env.g)

    @property
    def reference_height(self) -> float:
        return self.upper_height - self.vertical_separation


@dataclass
class SimResult:
    t: np.ndarray
    x: np.ndarray
    z: np.ndarray
    z_err: np.ndarray
    u_d: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    throttle: np.ndarray
    compensation_enabled: bool = True
    power: np.ndarray = field(default=None, repr=False)

    @property
    def rmse_mm(self) -> float:
        return float(np.sqrt(np.mean(self.z_err**2)) * 1e3)

    @property
    def mean_error_mm(self) -> float:
        return float(np.mean(self.z_err) * 1e3)

    @property
    def max_abs_error_mm(self) -> float:
        return float(np.max(np.abs(self.z_err)) * 1e3)

    def metrics(self) -> dict:
        return {"rmse_mm": self.rmse_mm, "mean_err_mm": self.mean_error_mm, "max_abs_err_mm": self.max_abs_error_mm}

    def write_csv(self, dest, header_lines=()) -> None:
        own = not hasattr(dest, "write")
        fh = open(dest, "w", newline="") if own else dest
        try:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["t_s", "x_m", "z_m", "z_err_m", "u_d_mps", "alpha", "beta", "throttle"])
            for row in zip(self.t, self.x, self.z, self.z_err, self.u_d, self.alpha, self.beta, self.throttle):
                w.writerow([f"{v:.12g}" for v in row])
        finally:
            if own:
                fh.close()


def run_passunder(config: SimConfig) -> SimResult:
    """Integrate the lower drone's height with fixed-step RK4.

    The controller runs every ``control_period`` and holds its throttle in
    between; the plant sees the downwash at the instantaneous position.
    """
    cfg = config
    lower, env = cfg.lower_drone, cfg.env
    m, g = lower.mass, env.g
    gains = cfg.controller_gains
    u_h = hover_velocity(lower, env)
    z_ref = cfg.reference_height
    v = cfg.speed
    x0 = -cfg.horizontal_span / 2.0
    dt = cfg.timestep
    n_steps = int(round(cfg.horizontal_span / v / dt))
    hold = int(round(cfg.control_period / dt))
    rng = np.random.default_rng(cfg.seed)

    def downwash(t, z):
        if cfg.upper_drone is None:
            return 0.0
        dp = (x0 + v * t, 0.0, z - cfg.upper_height)
        return downwash_at_relative_position(
            cfg.upper_drone, env, cfg.params, dp, cfg.clamp_near_field, cfg.xi_cutoff
        )

    def accel(t, z, throttle):
        return plant_thrust(throttle, downwash(t, z), lower, env, cfg.throttle_max) / m - g

    n = n_steps + 1
    out = {k: np.empty(n) for k in ("t", "x", "z", "u_d", "alpha", "beta", "throttle", "power")}
    z, vz = z_ref + cfg.initial_height_offset, 0.0
    throttle = 1.0
    p_hover = hover_power(lower, env)
    for i in range(n):
        t = i * dt
        u_d = downwash(t, z)
        alpha = u_d / u_h
        beta = power_ratio(alpha)
        if i % hold == 0:
            z_meas = z + (cfg.height_noise * rng.standard_normal() if cfg.height_noise else 0.0)
            cmd = 1.0 + gains.kp * (z_ref - z_meas) - gains.kd * vz
            if cfg.compensation_enabled:
                cmd *= throttle_compensation(beta)
            throttle = min(max(cmd, 0.0), cfg.throttle_max)
        out["t"][i], out["x"][i], out["z"][i] = t, x0 + v * t, z
        out["u_d"][i], out["alpha"][i], out["beta"][i] = u_d, alpha, beta
        out["throttle"][i] = throttle
        out["power"][i] = p_hover * throttle**2
        if i == n_steps:
            break
        k1z, k1v = vz, accel(t, z, throttle)
        k2z, k2v = vz + 0.5 * dt * k1v, accel(t + 0.5 * dt, z + 0.5 * dt * k1z, throttle)
        k3z, k3v = vz + 0.5 * dt * k2v, accel(t + 0.5 * dt, z + 0.5 * dt * k2z, throttle)
        k4z, k4v = vz + dt * k3v, accel(t + dt, z + dt * k3z, throttle)
        z += dt / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z)
        vz += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)

    return SimResult(
        t=out["t"],
        x=out["x"],
        z=out["z"],
        z_err=out["z"] - z_ref,
        u_d=out["u_d"],
        alpha=out["alpha"],
        beta=out["beta"],
        throttle=out["throttle"],
        compensation_enabled=cfg.compensation_enabled,
        power=out["power"],
    )


@dataclass
class Comparison:
    compensated: SimResult
    uncompensated: SimResult | None = None

    @property
    def improvement_ratio(self) -> float | None:
        """RMSE without compensation over RMSE with it (1 if both are zero)."""
        if self.uncompensated is None:
            return None
        on, off = self.compensated.rmse_mm, self.uncompensated.rmse_mm
        if on == 0.0:
            return 1.0 if off == 0.0 else math.inf
        return off / on


def compare(config: SimConfig, with_uncompensated: bool = True) -> Comparison:
    on = run_passunder(replace(config, compensation_enabled=True))
    off = run_passunder(replace(config, compensation_enabled=False)) if with_uncompensated else None
    return Comparison(on, off)


# -- JSON configuration --------------------------------------------------------

def _drone_from_json(value, path: str) -> DroneSpec | None:
    from .presets import get_preset

    if value is None:
        return None
    try:
        if isinstance(value, str):
            return get_preset(value)
        return DroneSpec.from_dict(value)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from exc


_SCALARS = {
    "vertical_separation_m": "vertical_separation",
    "crossing_speed_mps": "crossing_speed",
    "horizontal_span_m": "horizontal_span",
    "timestep_s": "timestep",
    "control_period_s": "control_period",
    "compensation_enabled": "compensation_enabled",
    "seed": "seed",
    "upper_height_m": "upper_height",
    "height_noise_m": "height_noise",
    "initial_height_offset_m": "initial_height_offset",
    "throttle_max": "throttle_max",
    "clamp_near_field": "clamp_near_field",
    "xi_cutoff": "xi_cutoff",
}


def config_from_dict(d: dict) -> SimConfig:
    """Build a :class:`SimConfig` from its JSON form; errors name the offending field."""
    if "lower_drone" not in d:
        raise ConfigError("missing", "lower_drone")
    kwargs = {
        "upper_drone": _drone_from_json(d.get("upper_drone"), "upper_drone"),
        "lower_drone": _drone_from_json(d["lower_drone"], "lower_drone"),
    }
    try:
        if "environment" in d:
            kwargs["env"] = Environment(**d["environment"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "environment") from exc
    try:
        if "jet_parameters" in d:
            kwargs["params"] = JetParameters.from_dict(d["jet_parameters"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "jet_parameters") from exc
    if d.get("gains") is not None:
        try:
            kwargs["gains"] = ControllerGains(float(d["gains"]["kp"]), float(d["gains"]["kd"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "gains") from exc
    for key, attr in _SCALARS.items():
        if key in d and d[key] is not None:
            kwargs[attr] = d[key]
    unknown = set(d) - set(_SCALARS) - {"upper_drone", "lower_drone", "environment", "jet_parameters", "gains", "name"}
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)}", sorted(unknown)[0])
    try:
        return SimConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(cfg: SimConfig) -> dict:
    out = {
        "upper_drone": cfg.upper_drone.to_dict() if cfg.upper_drone else None,
        "lower_drone": cfg.lower_drone.to_dict(),
        "environment": {"pressure": cfg.env.pressure, "temperature": cfg.env.temperature},
        "jet_parameters": cfg.params.to_dict(),
        "gains": {"kp": cfg.controller_gains.kp, "kd": cfg.controller_gains.kd},
    }
    for key, attr in _SCALARS.items():
        out[key] = getattr(cfg, attr)
    return out


def load_config(path: str | Path) -> SimConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return config_from_dict(data)


def bundled_config(name: str) -> SimConfig:
    """Load one of the shipped scenarios, ``"passunder_1m"`` or ``"passunder_2m"``."""
    from importlib import resources

    text = resources.files("downwash").joinpath(f"data/sim/{name}.json").read_text()
    return config_from_dict(json.loads(text))


__all__ = [
    "ControllerGains",
    "Comparison",
    "SimConfig",
    "SimResult",
    "bundled_config",
    "compare",
    "config_from_dict",
    "config_to_dict",
    "downwash_at_relative_position",
    "hover_power",
    "induced_velocity_in_downwash",
    "load_config",
    "plant_thrust",
    "power_ratio",
    "run_passunder",
    "throttle_compensation",
]
