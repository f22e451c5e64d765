import itertools
import math

import numpy as np
import pytest

from geonoether.base import ScenarioError
from geonoether.bianchi import (
    STRUCTURE_CONSTANTS,
    BianchiModel,
    bianchi_scenario,
    curvature_scalar,
    exponential_potential,
    generate_scenario,
)
from geonoether.collineation import bianchi_metric
from geonoether.dynamics import conservation_drift, integrate
from geonoether.expr import evaluate, is_zero
from geonoether.scenario import combine, load_scenario
from geonoether.symmetry import (
    find_lie_symmetries,
    find_noether_case1,
    find_noether_symmetries,
    noether_conditions,
    span_dimension,
)


TYPES = list(STRUCTURE_CONSTANTS)
POTENTIALS = ["vacuum", "zero", "constant", "arbitrary", "exponential"]
CELLS = list(itertools.product(TYPES, POTENTIALS))


def scenario_for(bianchi_type: str, potential: str, **parameters):
    return bianchi_scenario(BianchiModel(type=bianchi_type, potential=potential, **parameters))


# ======================================================================================================================
# POTENTIAL
# ======================================================================================================================


def test_bianchi_one_has_flat_hypersurfaces():
    chart = bianchi_metric().chart
    assert is_zero(curvature_scalar(STRUCTURE_CONSTANTS["I"], chart))


def test_curvature_scalar_of_bianchi_two():
    chart = bianchi_metric().chart
    R = curvature_scalar(STRUCTURE_CONSTANTS["II"], chart)
    point = [0.3, -0.2, 0.1, 0.5]
    assert evaluate(R, point) == pytest.approx(-0.5 * math.exp(-0.6 - 0.8))


def test_curvature_scalar_of_bianchi_nine_at_the_isotropic_point():
    # Q = 1 + 4 − 4 = 1 at β = 0, and n = 2
    chart = bianchi_metric().chart
    R = curvature_scalar(STRUCTURE_CONSTANTS["IX"], chart)
    assert evaluate(R, [0.0, 0.0, 0.0, 0.0]) == pytest.approx(-0.5 + 1.0)


def test_effective_potential_of_the_constant_model():
    scenario = scenario_for("I", "constant", V0=0.25)
    assert evaluate(scenario.potential, [0.2, 0.0, 0.0, 0.0]) == pytest.approx(-0.25 * math.exp(0.6))


def test_exponential_potential():
    V = exponential_potential(2, V0=3)
    assert evaluate(V, [0.0, 0.0, 0.0, 0.5]) == pytest.approx(3 * math.exp(-1.0))
    with pytest.raises(ScenarioError):
        exponential_potential(0)


def test_vacuum_models_drop_the_scalar_field():
    scenario = scenario_for("VIII", "vacuum")
    assert scenario.metric.chart.names == ("lambda", "b1", "b2")
    assert "Y3" not in scenario.catalog.names


def test_model_validation():
    with pytest.raises(ScenarioError):
        BianchiModel(type="I", potential="constant", V0=-1)
    with pytest.raises(ScenarioError):
        BianchiModel(type="I", potential="exponential", d=0)
    with pytest.raises(ScenarioError):
        scenario_for("I", "arbitrary", arbitrary="phi^2 + lambda")
    with pytest.raises(ScenarioError):
        generate_scenario("X", "zero")


# ======================================================================================================================
# SYMMETRY TABLES
# ======================================================================================================================


@pytest.mark.parametrize("bianchi_type, potential", CELLS)
def test_listed_symmetries_pass(bianchi_type, potential):
    scenario = scenario_for(bianchi_type, potential)
    samples = scenario.samples()
    for entry in scenario.noether_entries() + scenario.lie_entries():
        report = scenario.check(entry, samples)
        assert report.passed, f"{scenario.name} {entry.kind} {entry.name}: {report.residuals()}"


@pytest.mark.parametrize("bianchi_type, potential", CELLS)
def test_negative_controls_fail(bianchi_type, potential):
    scenario = scenario_for(bianchi_type, potential)
    controls = scenario.noether_entries(holds=False)
    assert len(controls) == 1
    report = scenario.check(controls[0], scenario.samples())
    assert report.maximum >= 1e-2


@pytest.mark.parametrize("bianchi_type, potential", CELLS)
def test_noether_search_agrees_with_the_table(bianchi_type, potential):
    scenario = scenario_for(bianchi_type, potential)
    samples = scenario.samples()
    found = find_noether_symmetries(scenario.catalog, scenario.potential, samples, scenario.samples(fresh=True))
    found = [s.vector for s in found]
    expected = [e.vector for e in scenario.noether_entries()]
    assert span_dimension(found, samples) == span_dimension(expected, samples) == len(expected)
    assert span_dimension(found + expected, samples) == len(expected)


@pytest.mark.parametrize("bianchi_type, potential", CELLS)
def test_lie_search_agrees_with_the_table(bianchi_type, potential):
    scenario = scenario_for(bianchi_type, potential)
    samples = scenario.samples()
    found = find_lie_symmetries(scenario.catalog, scenario.force, samples, scenario.samples(fresh=True))
    # the search covers a t∂t + Y only
    expected = [e.vector for e in scenario.lie_entries() if not any(c.uses_time for c in e.vector.eta)]
    assert span_dimension(found, samples) == len(expected)
    assert span_dimension(found + expected, samples) == len(expected)


def test_table_rows():
    assert [e.name for e in scenario_for("I", "vacuum").noether_entries()] == [
        "∂t",
        "Y1",
        "Y2",
        "Y4",
        "2*t∂t + H",
        "t²∂t + tH",
    ]
    assert [e.name for e in scenario_for("II", "zero").noether_entries()] == [
        "∂t",
        "Y2",
        "Y3",
        "Y6",
        "6*t∂t + 3*H - 2*Y1",
    ]
    assert [e.name for e in scenario_for("IX", "arbitrary").noether_entries()] == ["∂t"]
    assert [e.name for e in scenario_for("VIII", "vacuum").lie_entries()] == ["∂t", "2*t∂t + 3*H"]


def test_corrected_rows_are_flagged():
    scenario = scenario_for("II", "vacuum")
    assert scenario.entry("6*t∂t + 3*H - 2*Y1").provenance == "corrected"
    assert scenario_for("II", "constant").entry("3*H + Y1", "lie").provenance == "listed"
    assert {e.provenance for e in scenario_for("VI0", "vacuum").noether_entries()[1:]} == {"corrected"}
    assert scenario_for("VIII", "exponential").lie_entries()[1].provenance == "derived"


def test_cataloged_bianchi_two_coefficient_fails():
    scenario = scenario_for("II", "zero")
    printed = combine(scenario.catalog, {"H": 3, "Y1": -5}, time=6)
    report = noether_conditions(printed, scenario.metric, scenario.potential, 0, scenario.samples())
    assert report.maximum >= 1e-2


def test_exponential_rate_flips_with_the_sign_of_d():
    ratios = []
    for d in (2, -2):
        scenario = scenario_for("I", "exponential", d=d)
        found = find_noether_case1(scenario.catalog, scenario.potential, scenario.samples())
        homothetic = [s for s in found if "H" in s.coefficients]
        assert len(homothetic) == 1
        coefficients = homothetic[0].coefficients
        ratios.append(coefficients["H"] / coefficients["Y3"])
    assert ratios == [pytest.approx(0.5), pytest.approx(-0.5)]


def test_constant_potential_case_two_rate():
    scenario = scenario_for("I", "constant", V0=1 / 6)
    found = find_noether_symmetries(scenario.catalog, scenario.potential, scenario.samples())
    rates = [s.m for s in found if s.case == "II"]
    assert rates
    assert all(m == pytest.approx(0.25) for m in rates)


# ======================================================================================================================
# DYNAMICS
# ======================================================================================================================


def bianchi_two_oracle(state):
    """Euler-Lagrange equations of Bianchi II with V = φ²."""
    lam, b1, b2, phi, dlam, db1, db2, dphi = state
    E = math.exp(-2 * lam + 4 * b1)
    return np.array(
        [
            -1.5 * dlam**2 - 3 / 8 * (db1**2 + db2**2) - 0.25 * dphi**2 - E / 24 + 0.25 * phi**2,
            -3 * dlam * db1 + 2 / 3 * E,
            -3 * dlam * db2,
            -3 * dlam * dphi - phi,
        ]
    )


def test_equations_of_motion_match_the_bianchi_two_oracle():
    e = scenario_for("II", "arbitrary").equations_of_motion()
    rng = np.random.default_rng(7)
    for _ in range(100):
        x = rng.uniform(-0.5, 0.5, 4)
        v = rng.uniform(-1.0, 1.0, 4)
        expected = bianchi_two_oracle(np.concatenate([x, v]))
        np.testing.assert_allclose(e.acceleration(x, v), expected, rtol=0, atol=1e-10)


def test_vacuum_bianchi_one_is_kasner_like():
    # λ̈ = −1.5λ̇² − (3/8)(β̇₁² + β̇₂²) without curvature or potential
    e = scenario_for("I", "vacuum").equations_of_motion()
    a = e.acceleration([0.1, 0.2, 0.3], [0.4, -0.2, 0.1])
    np.testing.assert_allclose(a[0], -1.5 * 0.16 - 3 / 8 * 0.05, atol=1e-12)
    np.testing.assert_allclose(a[1:], [-3 * 0.4 * -0.2, -3 * 0.4 * 0.1], atol=1e-12)


def test_constant_potential_integrals_are_conserved():
    scenario = scenario_for("I", "constant", V0=1 / 6)
    integrals = [scenario.integral(e) for e in scenario.noether_entries() if e.case == "II"]
    assert len(integrals) == 2
    trajectory = integrate(
        scenario.equations_of_motion(),
        [0.0, 0.0, 0.0, 0.0],
        [-0.1, 0.05, -0.05, 0.1],
        (0.0, 5.0),
        method="RK45",
        tol=1e-10,
    )
    report = conservation_drift(trajectory, integrals)
    assert report.drifts[0].initial == pytest.approx(0.818, abs=1e-3)
    assert report.maximum_relative <= 1e-7


# ======================================================================================================================
# ADDRESSES
# ======================================================================================================================


def test_load_by_address():
    scenario = load_scenario("bianchi:IX:constant")
    assert scenario.name == "bianchi:IX:constant:V0=0.16666666666666666"
    assert [e.name for e in scenario.noether_entries()] == ["∂t", "Y3"]


def test_exponential_by_address():
    scenario = load_scenario("bianchi:II:exponential:d=3")
    assert scenario.parameters["d"] == 3
    assert scenario.name.endswith(":d=3")
