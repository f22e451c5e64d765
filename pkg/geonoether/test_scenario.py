import numpy as np
import pytest

from geonoether.base import CheckSettings, ScenarioError
from geonoether.collineation import flat_projective_catalog, sphere_killing_catalog
from geonoether.geometry import ForceField, Metric
from geonoether.scenario import (
    SCENARIO_FACTORIES,
    Scenario,
    combine,
    count_noether_symmetries,
    format_number,
    load_scenario,
    parse_address,
    time_translation_entry,
)
from geonoether.symmetry import noether_conditions


# ======================================================================================================================
# ADDRESSES
# ======================================================================================================================


def test_parse_keyword_address():
    assert parse_address("sphere:K=1:V=cos(theta)*sin(phi)") == ("sphere", [], {"K": 1, "V": "cos(theta)*sin(phi)"})


def test_parse_positional_address():
    family, args, kwargs = parse_address("bianchi:IX:constant:V0=0.5")
    assert family == "bianchi"
    assert args == ["IX", "constant"]
    assert kwargs == {"V0": 0.5}


def test_numeric_parts_become_numbers():
    assert parse_address("newtonian:lie-first:3") == ("newtonian", ["lie-first", 3], {})


@pytest.mark.parametrize("address", [":K=1", "sphere:K=1:3", "sphere:=1"])
def test_malformed_addresses(address):
    with pytest.raises(ScenarioError):
        parse_address(address)


def test_unknown_family():
    with pytest.raises(ScenarioError, match="Unknown scenario family"):
        load_scenario("torus:1")


def test_missing_factory_arguments():
    with pytest.raises(ScenarioError, match="Bad arguments"):
        load_scenario("newtonian:lie-first")


def test_every_family_loads_with_its_defaults():
    addresses = {
        "sphere": "sphere:K=1",
        "newtonian": "newtonian:noether-second:1",
        "ermakov": "ermakov:m=4",
        "bianchi": "bianchi:I:vacuum",
    }
    assert set(addresses) == set(SCENARIO_FACTORIES)
    for family, address in addresses.items():
        assert load_scenario(address).family == ("newtonian" if family == "ermakov" else family)


# ======================================================================================================================
# BUILDING BLOCKS
# ======================================================================================================================


@pytest.mark.parametrize("value, text", [(2.0, "2"), (-3, "-3"), (0.5, "0.5"), (1 / 3, repr(1 / 3))])
def test_format_number(value, text):
    assert format_number(value) == text


def test_combination_names():
    catalog = sphere_killing_catalog(1)
    assert combine(catalog, {"Y2": 1, "Y3": 2}).name == "Y2 + 2*Y3"
    assert combine(catalog, {"Y1": 1, "Y3": -1}).name == "Y1 - Y3"
    assert combine(catalog, {"Y1": 1}, time=2).name == "2*t∂t + Y1"


def test_combination_components():
    catalog = flat_projective_catalog(2)
    names = catalog.names[:2]
    X = combine(catalog, {names[0]: 2, names[1]: -1}, time=1)
    points = np.array([[0.3, -0.7], [1.1, 0.4]])
    times = np.array([0.5, 2.0])
    jet = X.jet(points, times)
    first = catalog[names[0]].vector.jet(points, times).eta
    second = catalog[names[1]].vector.jet(points, times).eta
    np.testing.assert_allclose(jet.eta, 2 * first - second, atol=1e-14)
    np.testing.assert_allclose(jet.xi, times, atol=1e-14)


def test_time_translation_entry():
    entry = time_translation_entry(Metric.flat([1, 1]), "flat / energy")
    assert entry.case == "autonomous"
    assert entry.name == "∂t"
    assert entry.holds


# ======================================================================================================================
# SCENARIOS
# ======================================================================================================================


def test_entry_lookup():
    scenario = load_scenario("sphere:row=1:K=1")
    assert scenario.entry("Y1").kind == "noether"
    with pytest.raises(KeyError):
        scenario.entry("Y1", "lie")


def test_fresh_samples_are_a_disjoint_block():
    scenario = load_scenario("sphere:K=1")
    settings = CheckSettings(samples=50)
    first = scenario.samples(settings)
    second = scenario.samples(settings, fresh=True)
    assert first.points.shape == second.points.shape == (50, 2)
    assert not np.allclose(first.points, second.points)
    np.testing.assert_array_equal(first.points, scenario.samples(settings).points)


def test_with_potential_keeps_the_geometry():
    scenario = load_scenario("sphere:K=1")
    changed = scenario.with_potential("cos(theta)*Sinn(phi)")
    assert changed.expected == []
    assert changed.catalog is scenario.catalog
    assert changed.name == f"sphere:K=1:V={changed.potential}"
    report = noether_conditions(
        scenario.catalog["Y1"].vector, changed.metric, changed.potential, 0, changed.samples()
    )
    assert report.passed


def test_energy_needs_a_potential():
    scenario = load_scenario("newtonian:lie-first:1")
    assert scenario.potential is None
    with pytest.raises(ScenarioError):
        scenario.energy()
    with pytest.raises(ScenarioError):
        scenario.integral(scenario.lie_entries()[0])


def test_count_needs_a_catalog():
    scenario = load_scenario("sphere:K=1").model_copy(update={"catalog": None})
    with pytest.raises(ScenarioError):
        count_noether_symmetries(scenario)


def test_charts_must_agree():
    scenario = load_scenario("sphere:K=1")
    other = Metric.flat([1, 1])
    with pytest.raises(ScenarioError):
        Scenario(
            name="mismatch",
            family="sphere",
            metric=scenario.metric,
            potential=scenario.potential,
            force=ForceField.zero(other.chart),
            box=scenario.box,
        )
