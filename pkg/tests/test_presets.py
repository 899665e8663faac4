import json

import pytest

from downwash import DEFAULT_ENVIRONMENT, Cant, get_preset, hover_velocity, presets
from downwash.presets import dump_jet_parameters, dump_registry, load_jet_parameters, load_registry
from downwash.model import DEFAULT_JET, JetParameters

REFERENCE_HOVER_VELOCITY = {
    "Kolibri": 7.41,
    "Offboard 1": 6.66,
    "Offboard 2": 9.66,
    "Matrice 300": 5.36,
    "Mavic 3E": 4.67,
    "Elios 3": 13.89,
}


def test_registry_has_the_six_reference_vehicles():
    names = {d.name for d in presets().values()}
    assert names == set(REFERENCE_HOVER_VELOCITY)


@pytest.mark.parametrize("name", sorted(REFERENCE_HOVER_VELOCITY))
def test_preset_hover_velocity_matches_reference(name):
    assert hover_velocity(get_preset(name), DEFAULT_ENVIRONMENT) == pytest.approx(
        REFERENCE_HOVER_VELOCITY[name], rel=5e-3)


def test_lookup_ignores_case_and_punctuation():
    assert get_preset("offboard-2") == get_preset("Offboard 2")
    assert get_preset("MATRICE_300").name == "Matrice 300"
    with pytest.raises(KeyError, match="known"):
        get_preset("hindenburg")


def test_canted_vehicles_are_flagged():
    assert get_preset("Mavic 3E").cant is not Cant.UNCANTED
    assert get_preset("Elios 3").cant is not Cant.UNCANTED
    assert get_preset("Kolibri").cant is Cant.UNCANTED


def test_registry_json_round_trip(tmp_path):
    path = tmp_path / "reg.json"
    dump_registry(presets().values(), path)
    keys = set(json.loads(path.read_text())[0])
    assert keys == {"name", "mass_kg", "propeller_diameter_m", "motor_distance_m", "n_propellers", "cant"}
    assert load_registry(path) == presets()


def test_jet_parameter_json_round_trip(tmp_path):
    path = tmp_path / "jet.json"
    p = JetParameters(9.5, 0.08, -4.0)
    dump_jet_parameters(p, path)
    assert load_jet_parameters(path) == p
    # a fit report with a nested block is accepted too
    path.write_text(json.dumps({"jet_parameters": DEFAULT_JET.to_dict(), "slices": []}))
    assert load_jet_parameters(path) == DEFAULT_JET
