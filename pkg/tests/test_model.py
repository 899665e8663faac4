import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from downwash import (
    DEFAULT_ENVIRONMENT,
    DEFAULT_JET,
    Cant,
    DomainError,
    DroneSpec,
    Environment,
    FlowPoint,
    JetParameters,
    NearFieldRequest,
    QualitativeOnlyWarning,
    UnavailableError,
    air_density,
    body_to_flow,
    centerline_velocity_norm,
    evaluate_far_field,
    evaluate_point,
    far_field_speed,
    get_preset,
    half_width_norm,
    hover_velocity,
    in_near_field,
    induced_hover_velocity,
    jet_diagnostics,
    reynolds_number,
    similarity_profile,
)

KOLIBRI = get_preset("kolibri")


def _drone(mass=1.0, radius=0.1, l=0.4):
    return DroneSpec("test", mass, radius, l)


# -- types ------------------------------------------------------------------

def test_drone_spec_rejects_unphysical_values():
    with pytest.raises(DomainError):
        DroneSpec("x", 0.0, 0.1, 0.4)
    with pytest.raises(DomainError):
        DroneSpec("x", 1.0, -0.1, 0.4)
    with pytest.raises(DomainError):
        DroneSpec("x", 1.0, 0.1, 0.0)
    with pytest.raises(DomainError):
        DroneSpec("x", 1.0, 0.1, 0.4, n_propellers=0)
    with pytest.raises(DomainError):
        DroneSpec("x", 1.0, 0.5, 0.4)  # propellers wider than the frame


def test_drone_spec_round_trips_through_dict():
    d = DroneSpec("x", 1.5, 0.12, 0.45, 6, "inward")
    assert d.cant is Cant.INWARD
    assert DroneSpec.from_dict(d.to_dict()) == d
    assert d.to_dict()["propeller_diameter_m"] == pytest.approx(0.24)


def test_jet_parameters_validation_and_json_keys():
    with pytest.raises(DomainError):
        JetParameters(bd=-1.0)
    with pytest.raises(DomainError):
        JetParameters(spreading_rate=0.0)
    with pytest.raises(DomainError):
        JetParameters(s0_norm=2.5)
    assert set(DEFAULT_JET.to_dict()) == {"bd", "spreading_rate", "s0_norm"}
    assert JetParameters.from_dict(DEFAULT_JET.to_dict()) == DEFAULT_JET


def test_flow_point_invariants():
    with pytest.raises(DomainError):
        FlowPoint(1.0, -0.1)
    with pytest.raises(DomainError):
        FlowPoint(1.0, 0.1, 2 * math.pi)


# -- air density --------------------------------------------------------------

def test_air_density_standard_conditions():
    assert air_density(Environment(101325.0, 293.15)) == pytest.approx(1.2041, abs=1e-4)


def test_air_density_linear_in_pressure_inverse_in_temperature():
    rho = air_density(Environment(101325.0, 293.15))
    assert air_density(Environment(2 * 101325.0, 293.15)) == pytest.approx(2 * rho, rel=1e-15)
    assert air_density(Environment(101325.0, 586.30)) == pytest.approx(rho / 2, rel=1e-15)


def test_environment_rejects_non_positive_state():
    with pytest.raises(DomainError):
        Environment(0.0, 293.15)
    with pytest.raises(DomainError):
        Environment(101325.0, -1.0)


# -- induced velocity -----------------------------------------------------------

@pytest.mark.parametrize("name, mass, radius, expected", [
    ("kolibri", 0.230, 0.03685, 7.41),
    ("matrice300", 6.300, 0.2667, 5.36),
])
def test_induced_velocity_reference_values(name, mass, radius, expected):
    d = DroneSpec(name, mass, radius, 1.0)
    assert induced_hover_velocity(d, 1.2041, 9.81) == pytest.approx(expected, rel=5e-3)


def test_induced_velocity_square_root_mass_scaling():
    assert induced_hover_velocity(_drone(mass=4.0), 1.2) == pytest.approx(
        2 * induced_hover_velocity(_drone(mass=1.0), 1.2), rel=1e-15)


def test_induced_velocity_rejects_bad_density():
    with pytest.raises(DomainError):
        induced_hover_velocity(KOLIBRI, 0.0)


# -- centerline and half-width ------------------------------------------------

def test_centerline_spot_value():
    assert centerline_velocity_norm(3.0) == pytest.approx(10.11 / 8.817, abs=1e-12)
    assert centerline_velocity_norm(3.0) == pytest.approx(1.1467, abs=1e-4)


def test_centerline_equals_one_at_definition_point():
    p = DEFAULT_JET
    assert centerline_velocity_norm(p.s0_norm + p.bd) == pytest.approx(1.0, abs=1e-15)


def test_centerline_inverse_distance_ratio():
    p = DEFAULT_JET
    s1 = 2.5
    s2 = 5.0 + 0.5 * (s1 - p.s0_norm)
    ratio = centerline_velocity_norm(s1) / centerline_velocity_norm(s2)
    assert ratio == pytest.approx((s2 - p.s0_norm) / (s1 - p.s0_norm), rel=1e-14)


def test_centerline_upstream_of_origin_is_domain_error():
    with pytest.raises(DomainError):
        centerline_velocity_norm(DEFAULT_JET.s0_norm)
    with pytest.raises(DomainError):
        centerline_velocity_norm(DEFAULT_JET.s0_norm - 1.0)


def test_half_width_spot_value_apex_and_linearity():
    p = DEFAULT_JET
    assert half_width_norm(3.0) == pytest.approx(0.6761, abs=1e-4)
    assert half_width_norm(p.s0_norm) == 0.0
    d = 4.0
    assert half_width_norm(p.s0_norm + 2 * d) == pytest.approx(2 * half_width_norm(p.s0_norm + d), rel=1e-14)
    with pytest.raises(DomainError):
        half_width_norm(p.s0_norm - 0.1)


def test_similarity_profile_examples():
    assert similarity_profile(0.0, 5.0) == 5.0
    assert similarity_profile(1.0, 8.0) == pytest.approx(4.0, rel=1e-15)
    # 1 / (1 + 4 (sqrt 2 - 1))^2 = 1 / 7.058875...
    assert similarity_profile(2.0, 1.0) == pytest.approx(1 / (1 + 0.41421356 * 4) ** 2, abs=1e-8)
    assert similarity_profile(2.0, 1.0) == pytest.approx(0.141666, abs=1e-6)
    with pytest.raises(DomainError):
        similarity_profile(-0.1, 1.0)


# -- six-step evaluation -----------------------------------------------------------

def test_kolibri_on_axis_spot_value():
    env = Environment(101325.0, 293.15, g=9.81)
    u = evaluate_far_field(KOLIBRI, env, DEFAULT_JET, FlowPoint(3 * 0.118, 0.0))
    assert u == pytest.approx(1.1467 * 7.41, rel=1e-2)
    assert u == pytest.approx(8.50, rel=1e-2)


def test_evaluate_point_exposes_intermediates():
    ev = evaluate_point(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(0.354, 0.05))
    assert ev.s_norm == pytest.approx(3.0)
    assert ev.r_norm == pytest.approx(0.05 / 0.118)
    assert ev.xi == pytest.approx(ev.r_norm / ev.r_half_norm)
    assert ev.u_c == pytest.approx(ev.u_c_norm * ev.u_hover)
    assert ev.speed == pytest.approx(similarity_profile(ev.xi, ev.u_c))
    assert not ev.clamped


def test_near_field_request_carries_threshold():
    with pytest.raises(NearFieldRequest) as info:
        evaluate_far_field(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(0.118, 0.0))
    assert info.value.threshold == 2.5
    assert info.value.s_norm == pytest.approx(1.0)
    assert "2.5" in str(info.value)


def test_threshold_slice_survives_length_round_trip():
    l = 0.0546875 * 2.219832200632511
    assert not in_near_field(2.5 * l / l)
    assert in_near_field(2.4999)


def test_clamp_moves_query_to_threshold_slice():
    l = KOLIBRI.motor_distance
    clamped = evaluate_point(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(0.5 * l, 0.1 * l),
                             clamp_near_field=True)
    at_threshold = evaluate_point(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(2.5 * l, 0.1 * l))
    assert clamped.clamped
    assert clamped.speed == pytest.approx(at_threshold.speed, rel=1e-14)


def test_canted_drone_warns_qualitative_only():
    mavic = get_preset("Mavic 3E")
    with pytest.warns(QualitativeOnlyWarning):
        evaluate_far_field(mavic, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(3 * mavic.motor_distance, 0.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        evaluate_far_field(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(0.4, 0.0))


def test_offboard1_matrice_ratio_matches_hover_velocities():
    a, b = get_preset("Offboard 1"), get_preset("Matrice 300")
    s_norm, xi = 4.0, 0.7
    r_norm = xi * half_width_norm(s_norm)
    ua = evaluate_far_field(a, DEFAULT_ENVIRONMENT, DEFAULT_JET,
                            FlowPoint(s_norm * a.motor_distance, r_norm * a.motor_distance))
    ub = evaluate_far_field(b, DEFAULT_ENVIRONMENT, DEFAULT_JET,
                            FlowPoint(s_norm * b.motor_distance, r_norm * b.motor_distance))
    assert ua / ub == pytest.approx(hover_velocity(a) / hover_velocity(b), rel=1e-12)
    assert ua / ub == pytest.approx(6.66 / 5.36, rel=1e-2)


def test_vectorized_speed_matches_scalar():
    s = np.array([0.3, 0.5, 1.0])
    r = np.array([0.0, 0.05, 0.2])
    vec = far_field_speed(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, s, r)
    ref = [evaluate_far_field(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(a, b)) for a, b in zip(s, r)]
    np.testing.assert_allclose(vec, ref, rtol=1e-15)


# -- frames, Reynolds, diagnostics ---------------------------------------------------

def test_body_to_flow_examples():
    p = body_to_flow((0.0, 0.0, -1.0))
    assert (p.s, p.r, p.theta) == (1.0, 0.0, 0.0)
    p = body_to_flow((0.3, 0.4, -2.0))
    assert p.s == 2.0
    assert p.r == pytest.approx(0.5)
    assert p.theta == pytest.approx(math.atan2(0.4, 0.3))
    assert body_to_flow((0.0, -1.0, -1.0)).theta == pytest.approx(1.5 * math.pi)
    with pytest.raises(DomainError):
        body_to_flow((0.0, 0.0, 0.1))


def test_reynolds_number():
    env = Environment(101325.0, 293.15, viscosity=1.81e-5)
    re = reynolds_number(env, 7.41, 0.118)
    assert re == pytest.approx(5.82e4, rel=5e-3)
    assert reynolds_number(env, 0.0, 0.118) == 0.0
    assert reynolds_number(env, 7.41, 0.236) == pytest.approx(2 * re, rel=1e-15)
    with pytest.raises(UnavailableError):
        reynolds_number(DEFAULT_ENVIRONMENT, 7.41, 0.118)


def test_cone_angle_diagnostics_agree():
    diag = jet_diagnostics(DEFAULT_JET)
    assert diag.cone_angle_rad == pytest.approx(diag.slope_cone_angle_rad, rel=1e-14)
    assert diag.cone_angle_deg == pytest.approx(8.77, abs=5e-3)


# -- properties ---------------------------------------------------------------------

drones = st.builds(
    lambda m, rp, k: DroneSpec("h", m, rp, rp * k),
    st.floats(0.05, 20.0),
    st.floats(0.01, 0.5),
    st.floats(1.2, 5.0),
)
params = st.builds(
    JetParameters,
    st.floats(1.0, 30.0),
    st.floats(0.02, 0.3),
    st.floats(-15.0, 2.0),
)
depths = st.floats(2.5, 10.0)


@given(drones, params, depths)
def test_half_width_identity(drone, p, s_norm):
    l = drone.motor_distance
    on_axis = evaluate_far_field(drone, DEFAULT_ENVIRONMENT, p, FlowPoint(s_norm * l, 0.0))
    r = half_width_norm(s_norm, p) * l
    at_half = evaluate_far_field(drone, DEFAULT_ENVIRONMENT, p, FlowPoint(s_norm * l, r))
    assert at_half == pytest.approx(0.5 * on_axis, rel=1e-12)


@given(drones, depths, st.floats(0.0, 5.0), st.floats(1e-3, 1.0))
def test_radial_decay_is_strict(drone, s_norm, r_norm, dr):
    l = drone.motor_distance
    u1, u2 = far_field_speed(drone, DEFAULT_ENVIRONMENT, DEFAULT_JET, [s_norm * l] * 2,
                             [r_norm * l, (r_norm + dr) * l])
    assert u2 < u1


@given(params, st.floats(-10.0, 20.0), st.floats(1e-3, 5.0))
def test_centerline_decay_is_strict(p, s_norm, ds):
    if s_norm <= p.s0_norm:
        s_norm = p.s0_norm + 0.1
    assert centerline_velocity_norm(s_norm + ds, p) < centerline_velocity_norm(s_norm, p)


@given(drones, drones, depths, st.floats(0.0, 6.0))
def test_normalized_field_is_drone_independent(a, b, s_norm, xi):
    r_norm = xi * half_width_norm(s_norm)
    ua = evaluate_far_field(a, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(s_norm * a.motor_distance,
                                                                           r_norm * a.motor_distance))
    ub = evaluate_far_field(b, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(s_norm * b.motor_distance,
                                                                           r_norm * b.motor_distance))
    assert ua / ub == pytest.approx(hover_velocity(a) / hover_velocity(b), rel=1e-12)


@given(drones, depths, st.floats(0.0, 3.0), st.floats(1e-3, 1e3))
def test_consistent_length_rescaling_keeps_speed(drone, s_norm, r_norm, k):
    # keep disk loading fixed so the hover velocity is unchanged
    scaled = DroneSpec("h", drone.mass * k**2, drone.propeller_radius * k, drone.motor_distance * k)
    l, lk = drone.motor_distance, scaled.motor_distance
    u = evaluate_far_field(drone, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(s_norm * l, r_norm * l))
    uk = evaluate_far_field(scaled, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(s_norm * lk, r_norm * lk))
    assert uk == pytest.approx(u, rel=1e-12)


@settings(max_examples=50)
@given(depths, st.floats(0.0, 3.0), st.floats(0.0, 2 * math.pi, exclude_max=True))
def test_axisymmetry(s_norm, r_norm, theta):
    l = KOLIBRI.motor_distance
    ref = evaluate_far_field(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(s_norm * l, r_norm * l))
    u = evaluate_far_field(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, FlowPoint(s_norm * l, r_norm * l, theta))
    assert u == ref
