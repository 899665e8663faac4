import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from downwash import DEFAULT_ENVIRONMENT, DEFAULT_JET, DroneSpec, get_preset, hover_velocity, far_field_speed
from downwash.pipeline import (
    MeasurementRecord,
    bin_grid,
    grid_flight_plan,
    lateral_profiles,
    radial_profiles,
    synthesize_log,
)
from downwash.pipeline.fitting import profile_model
from downwash.model import half_width_norm, centerline_velocity_norm

KOLIBRI = get_preset("kolibri")


def _drone_with_hover_velocity(u_h):
    # pick the mass so that U_H equals u_h exactly at the default environment
    d = DroneSpec("unit", 1.0, 0.1, 1.0)
    return DroneSpec("unit", (u_h / hover_velocity(d)) ** 2, 0.1, 1.0)


def _rec(pos, u):
    return MeasurementRecord(0.0, tuple(pos), 0.0, u)


def test_median_of_a_cell_is_normalized():
    drone = _drone_with_hover_velocity(8.0)
    g = bin_grid([_rec((0, 0, 3.0), 2.0), _rec((0.01, 0, 3.0), 4.0)], drone, 0.5)
    assert len(g) == 1
    assert g.u_norm[0] == pytest.approx(0.375)
    assert g.count[0] == 2
    assert g.iqr[0] == pytest.approx(0.125)


def test_single_record_cell():
    drone = _drone_with_hover_velocity(8.0)
    g = bin_grid([_rec((0.2, 0.1, 2.0), 3.0)], drone, 0.5)
    assert g.u_norm[0] == pytest.approx(3.0 / 8.0)
    assert g.sem[0] == 0.0


def test_cells_are_centred_on_multiples_of_the_resolution():
    drone = DroneSpec("unit", 1.0, 0.1, 1.0)
    # probe sits at minus the drone position; cell [lo, hi) around the center
    g = bin_grid([_rec((-0.24, 0.0, 1.0), 1.0), _rec((-0.25, 0.0, 1.0), 1.0)], drone, 0.5)
    assert sorted(g.center[:, 0].tolist()) == [0.0, 0.5]
    assert np.all(g.s_norm == 1.0)


def test_empty_input_gives_empty_grid():
    g = bin_grid([], KOLIBRI, 0.33)
    assert len(g) == 0
    assert radial_profiles(g) == []
    assert lateral_profiles(g) == []


def test_rejects_non_positive_resolution():
    with pytest.raises(ValueError):
        bin_grid([], KOLIBRI, 0.0)


def test_noiseless_grid_matches_model_at_cell_centres():
    res = 0.33
    plan = grid_flight_plan(KOLIBRI, res, 1.65, [res * k for k in range(8, 12)])
    recs = [r for r in synthesize_log(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, plan) if r.drone_speed == 0]
    g = bin_grid(recs, KOLIBRI, res)
    l = KOLIBRI.motor_distance
    model = far_field_speed(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, g.s_norm * l, g.r_norm * l)
    np.testing.assert_allclose(g.u_norm * g.u_hover, model, rtol=1e-9, atol=0)


def test_radial_profile_matches_similarity_shape():
    res = 0.33
    plan = grid_flight_plan(KOLIBRI, res, 3.3, [res * 10])
    recs = [r for r in synthesize_log(KOLIBRI, DEFAULT_ENVIRONMENT, DEFAULT_JET, plan) if r.drone_speed == 0]
    (prof,) = radial_profiles(bin_grid(recs, KOLIBRI, res))
    assert prof.s_norm == pytest.approx(3.3)
    assert np.all(np.diff(prof.r_norm) > 0)
    expected = profile_model(prof.r_norm, centerline_velocity_norm(3.3), half_width_norm(3.3))
    # bins pool cells at slightly different radii
    np.testing.assert_allclose(prof.speed_norm, expected, rtol=5e-3)
    assert all(b.count >= 1 for b in prof.bins)


def test_azimuthal_pooling_is_independent_of_contributing_azimuth():
    # the same radius sampled on the x axis only or on the y axis only
    drone = DroneSpec("unit", 1.0, 0.1, 1.0)
    u_h = hover_velocity(drone)
    radii = [0.0, 0.5, 1.0, 1.5]
    speeds = [4.0, 3.0, 2.0, 1.0]
    on_x = [_rec((-r, 0.0, 3.0), u) for r, u in zip(radii, speeds)]
    on_y = [_rec((0.0, -r, 3.0), u) for r, u in zip(radii, speeds)]
    (px,) = radial_profiles(bin_grid(on_x, drone, 0.5))
    (py,) = radial_profiles(bin_grid(on_y, drone, 0.5))
    np.testing.assert_allclose(px.speed_norm, py.speed_norm)
    np.testing.assert_allclose(px.speed_norm * u_h, speeds)


def test_slice_with_too_few_radial_bins_is_dropped_with_warning():
    drone = DroneSpec("unit", 1.0, 0.1, 1.0)
    recs = [_rec((0.0, 0.0, 3.0), 1.0), _rec((0.5, 0.0, 3.0), 0.5)]
    with pytest.warns(UserWarning, match="radial bins"):
        assert radial_profiles(bin_grid(recs, drone, 0.5)) == []


def test_lateral_profile_extracts_the_x_zero_row():
    drone = DroneSpec("unit", 1.0, 0.1, 1.0)
    recs = [_rec((0.0, y, 1.0), 1.0 + abs(y)) for y in np.arange(-1.0, 1.01, 0.5)]
    recs.append(_rec((0.5, 0.0, 1.0), 9.0))  # off the row
    (lp,) = lateral_profiles(bin_grid(recs, drone, 0.5))
    assert lp.s_norm == pytest.approx(1.0)
    np.testing.assert_allclose(lp.y_norm, [-1.0, -0.5, 0.0, 0.5, 1.0])
    assert np.all(lp.speed_norm < 9.0 / hover_velocity(drone))


def test_csv_export_columns():
    drone = DroneSpec("unit", 1.0, 0.1, 1.0)
    g = bin_grid([_rec((0.0, 0.0, 3.0), 2.0)], drone, 0.5)
    buf = io.StringIO()
    g.write_csv(buf, cylindrical=True, header_lines=["manifest: {}"])
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# manifest: {}"
    assert lines[1] == "s_norm,r_norm,u_norm,count,iqr,sem"
    buf = io.StringIO()
    g.write_csv(buf)
    assert buf.getvalue().splitlines()[0] == "x_norm,y_norm,z_norm,u_norm,count,iqr,sem"


@given(st.lists(st.floats(0.0, 20.0), min_size=1, max_size=15), st.randoms())
def test_median_binning_ignores_record_order(speeds, rnd):
    drone = DroneSpec("unit", 1.0, 0.1, 1.0)
    recs = [_rec((0.01 * (i % 3), 0.0, 2.0), u) for i, u in enumerate(speeds)]
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    a, b = bin_grid(recs, drone, 0.5), bin_grid(shuffled, drone, 0.5)
    np.testing.assert_array_equal(a.index, b.index)
    np.testing.assert_array_equal(a.u_norm, b.u_norm)
    np.testing.assert_array_equal(a.iqr, b.iqr)
