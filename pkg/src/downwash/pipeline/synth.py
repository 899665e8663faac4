"""Synthetic grid-flight logs generated from the jet model.

These mirror a probe campaign: the drone visits grid points, hovers at each
for a few anemometer samples and translates to the next point. They are the
test oracle for the processing pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NearFieldRequest
from ..model import (
    FAR_FIELD_THRESHOLD,
    DroneSpec,
    Environment,
    JetParameters,
    far_field_speed,
    hover_velocity,
    in_near_field,
)
from .records import MeasurementRecord


@dataclass(frozen=True)
class NearFieldSurrogate:
    """Stand-in for the near field: two Gaussian jets approaching the axis.

    In normalized units the speed at depth ``s`` and radius ``r`` is
    ``amplitude * (g(r - delta) + g(r + delta))`` with ``g`` a Gaussian of
    width ``width0 + width_growth * s`` and ``delta`` shrinking linearly from
    ``delta0`` at the rotor plane to zero at ``merge_at``. Deeper than
    ``merge_at`` (but above the far-field threshold) the two Gaussians
    coincide.
    """

    merge_at: float = 2.5
    delta0: float = 0.5
    width0: float = 0.08
    width_growth: float = 0.03
    amplitude: float = 0.6

    def delta(self, s_norm):
        return self.delta0 * np.clip(1.0 - np.asarray(s_norm) / self.merge_at, 0.0, None)

    def width(self, s_norm):
        return self.width0 + self.width_growth * np.asarray(s_norm)

    def speed_norm(self, s_norm, r_norm):
        d, w = self.delta(s_norm), self.width(s_norm)
        r = np.asarray(r_norm)
        return self.amplitude * (np.exp(-((r - d) ** 2) / (2 * w**2)) + np.exp(-((r + d) ** 2) / (2 * w**2)))


def grid_flight_plan(
    drone: DroneSpec,
    resolution_norm: float,
    half_extent_norm: float,
    s_levels_norm,
    y_only: bool = False,
) -> np.ndarray:
    """Drone positions (m, probe at origin, z up) on a square lattice.

    Lattice nodes sit on multiples of ``resolution_norm`` so that they coincide
    with grid-cell centers in :func:`bin_grid`. ``y_only`` restricts the plan
    to the ``x = 0`` line.
    """
    n = int(np.floor(half_extent_norm / resolution_norm + 1e-9))
    ticks = np.arange(-n, n + 1) * resolution_norm
    xs = np.array([0.0]) if y_only else ticks
    pts = []
    for k, s in enumerate(s_levels_norm):
        # serpentine ordering keeps transits short
        for i, x in enumerate(xs if k % 2 == 0 else xs[::-1]):
            ys = ticks if i % 2 == 0 else ticks[::-1]
            for y in ys:
                pts.append((-x, -y, s))
    return np.array(pts, dtype=float) * drone.motor_distance


def _probe_speed(drone, env, params, positions, near_field, u_hover):
    """Model speed at the probe for an array of drone positions (m)."""
    positions = np.atleast_2d(positions)
    s = positions[:, 2]
    r = np.hypot(positions[:, 0], positions[:, 1])
    s_norm = s / drone.motor_distance
    near = in_near_field(s_norm)
    out = np.zeros(len(s))
    far = ~near
    if np.any(far):
        out[far] = far_field_speed(drone, env, params, s[far], r[far])
    if np.any(near):
        if near_field is None:
            raise NearFieldRequest(float(np.min(s_norm)), FAR_FIELD_THRESHOLD)
        out[near] = u_hover * near_field.speed_norm(s_norm[near], r[near] / drone.motor_distance)
    return out


def synthesize_log(
    drone: DroneSpec,
    env: Environment,
    params: JetParameters,
    plan,
    noise: float = 0.0,
    seed: int | None = 0,
    ambient: float = 0.0,
    hover_samples: int = 5,
    sample_period: float = 1.0,
    transit_speed: float = 0.5,
    transit_samples: int = 1,
    pre_takeoff_samples: int = 0,
    near_field: NearFieldSurrogate | None = None,
) -> list[MeasurementRecord]:
    """Generate a deterministic grid-flight log.

    Parameters
    ----------
    plan : array_like, shape (n, 3)
        Drone hover positions in m (probe at origin, z up), e.g. from
        :func:`grid_flight_plan`.
    noise : float
        Standard deviation of the multiplicative Gaussian measurement noise.
    ambient : float
        Constant background flow added to every reading (m/s).
    pre_takeoff_samples : int
        Samples recorded before take-off with the drone parked far from the
        probe; they read the ambient flow only.
    near_field : NearFieldSurrogate, optional
        Model used for plan points above the far-field threshold. Without it
        such points raise :class:`NearFieldRequest`.

    Hover samples carry ``drone_speed = 0``; transit samples carry
    ``transit_speed`` (> 0.1 m/s) and are meant to be filtered out.
    """
    plan = np.atleast_2d(np.asarray(plan, dtype=float))
    rng = np.random.default_rng(seed)
    u_hover = hover_velocity(drone, env)
    hover_u = _probe_speed(drone, env, params, plan, near_field, u_hover)

    def measure(u):
        u = np.asarray(u, dtype=float)
        if noise:
            u = u * (1.0 + noise * rng.standard_normal(u.shape))
        return np.clip(u, 0.0, None) + ambient

    records = []
    t = 0.0
    if pre_takeoff_samples:
        parked = (1000.0 * drone.motor_distance, 0.0, 0.0)
        for u in measure(np.zeros(pre_takeoff_samples)):
            records.append(MeasurementRecord(t, parked, 0.0, float(u)))
            t += sample_period

    for i, p in enumerate(plan):
        pos = tuple(float(c) for c in p)
        for u in measure(np.full(hover_samples, hover_u[i])):
            records.append(MeasurementRecord(t, pos, 0.0, float(u)))
            t += sample_period
        if i + 1 < len(plan) and transit_samples:
            frac = (np.arange(transit_samples) + 1) / (transit_samples + 1)
            mids = p + frac[:, None] * (plan[i + 1] - p)
            # transit samples may cross the near field; clamp rather than fail
            s, r = mids[:, 2], np.hypot(mids[:, 0], mids[:, 1])
            below = s > 0
            u_mid = np.zeros(len(mids))
            if np.any(below):
                u_mid[below] = far_field_speed(drone, env, params, s[below], r[below], clamp_near_field=True)
            for m, u in zip(mids, measure(u_mid)):
                records.append(MeasurementRecord(t, tuple(float(c) for c in m), transit_speed, float(u)))
                t += sample_period
    return records


def campaign_log(
    drone: DroneSpec,
    env: Environment,
    params: JetParameters,
    seed: int = 0,
    noise: float = 0.03,
    ambient: float = 0.08,
) -> list[MeasurementRecord]:
    """The standard synthetic campaign behind the bundled log fixtures.

    A 0.33 l lattice over +-2.64 l at far-field depths 2.64 ... 6.6 l, plus
    lateral lines through the near field (0.33 ... 2.31 l) produced by the
    default :class:`NearFieldSurrogate`; 30 s of pre-takeoff ambient
    readings, three hover samples per node.
    """
    res = 0.33
    far = grid_flight_plan(drone, res, 2.64, [res * k for k in range(8, 21, 2)])
    near = grid_flight_plan(drone, res, 2.64, [res * k for k in range(1, 8)], y_only=True)
    return synthesize_log(
        drone, env, params, np.vstack([near, far]),
        noise=noise, seed=seed, ambient=ambient, hover_samples=3,
        pre_takeoff_samples=30, near_field=NearFieldSurrogate(),
    )
