import pytest

from geonoether.base import ScenarioError
from geonoether.dynamics import conservation_drift, integrate
from geonoether.geometry import ForceField, SymmetryVector
from geonoether.newtonian import NEWTONIAN_ROWS, ermakov_scenario, newtonian_row, newtonian_scenario
from geonoether.scenario import load_scenario
from geonoether.symmetry import find_lie_symmetries, lie_conditions, span_dimension


ROW_IDS = [(r.family, r.row) for r in NEWTONIAN_ROWS]


# ======================================================================================================================
# CATALOG ROWS
# ======================================================================================================================


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("family, row", ROW_IDS)
def test_listed_generators_pass(family, row, n):
    scenario = newtonian_scenario(family, row, n)
    samples = scenario.samples()
    entries = scenario.noether_entries() + scenario.lie_entries()
    assert len(entries) >= 1
    for entry in entries:
        report = scenario.check(entry, samples)
        assert report.passed, f"{scenario.name} {entry.name}: {report.residuals()}"


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize(
    "family, row, parameters",
    [
        ("noether-first", 1, {"d": 1}),
        ("noether-first", 3, {"d": 0}),
        ("noether-first", 3, {"d": 6}),
        ("noether-first", 4, {}),
        ("noether-first", 5, {}),
    ],
)
def test_generators_outside_the_homothetic_algebra_fail(family, row, parameters, n):
    scenario = newtonian_scenario(family, row, n, **parameters)
    controls = scenario.noether_entries(holds=False)
    assert controls
    for entry in controls:
        report = scenario.check(entry, scenario.samples())
        assert not report.passed
        assert report.maximum >= 1e-2


@pytest.mark.parametrize("family, row, d", [("lie-first", 1, 4), ("lie-first", 3, 5), ("lie-first", 5, 1)])
def test_first_lie_family_for_other_exponents(family, row, d):
    scenario = newtonian_scenario(family, row, d=d)
    samples = scenario.samples()
    for entry in scenario.lie_entries():
        assert scenario.check(entry, samples).passed, entry.name


def test_shear_row_with_the_cataloged_placement_fails():
    scenario = newtonian_scenario("lie-first", 5)
    # exponential on the μ component only
    printed = ForceField(scenario.metric.chart, ["-exp(-2*x/y)*((x/y)*z + 1)", "-z", "-y"])
    X = scenario.entry("t∂t + A_xy", "lie").vector
    assert lie_conditions(X, scenario.metric, printed, scenario.samples()).maximum >= 1e-2


@pytest.mark.parametrize("row", [1, 2, 3])
def test_lie_search_recovers_the_homothetic_rows(row):
    scenario = newtonian_scenario("lie-first", row)
    samples = scenario.samples()
    found = find_lie_symmetries(scenario.catalog, scenario.force, samples, scenario.samples(fresh=True))
    expected = [e.vector for e in scenario.lie_entries()]
    dimension = span_dimension(found, samples)
    assert dimension == len(expected) == 2
    assert span_dimension(found + expected, samples) == dimension


def test_noether_generators_are_lie_generators():
    for family_row in [("noether-second", 1), ("noether-second", 2), ("noether-second", 3), ("noether-second", 4)]:
        scenario = newtonian_scenario(*family_row)
        samples = scenario.samples()
        for entry in scenario.noether_entries():
            assert lie_conditions(entry.vector, scenario.metric, scenario.force, samples).passed, entry.name


def test_oscillator_gauges():
    scenario = newtonian_scenario("noether-second", 3)
    plus, minus = scenario.noether_entries()[1:]
    assert plus.case == minus.case == "II"
    assert str(plus.gauge) != "0"
    assert plus.gauge.uses_time


def test_oscillator_for_another_rate():
    scenario = newtonian_scenario("noether-second", 3, m=2.25)
    samples = scenario.samples()
    for entry in scenario.noether_entries():
        assert scenario.check(entry, samples).passed, entry.name


# ======================================================================================================================
# ERMAKOV
# ======================================================================================================================


def test_ermakov_generators_pass():
    scenario = ermakov_scenario(m=4)
    samples = scenario.samples()
    for entry in scenario.lie_entries():
        report = scenario.check(entry, samples, tol=1e-9)
        assert report.passed, f"{entry.name}: {report.maximum:.3e}"
    assert [e.provenance for e in scenario.lie_entries()] == ["listed", "corrected", "corrected"]


def test_ermakov_cataloged_normalisation_fails():
    scenario = ermakov_scenario(m=4)
    chart = scenario.metric.chart
    printed = SymmetryVector(chart, "exp(2*t)/2", ["exp(2*t)*x", "exp(2*t)*y", "exp(2*t)*z"])
    report = lie_conditions(printed, scenario.metric, scenario.force, scenario.samples())
    assert report.maximum >= 1e-2


def test_ermakov_with_a_perturbed_force_fails():
    scenario = ermakov_scenario(m=4, force_m=4.1)
    controls = scenario.lie_entries(holds=False)
    assert len(controls) == 2
    for entry in controls:
        assert scenario.check(entry, scenario.samples()).maximum >= 1e-2


def test_ermakov_by_address():
    scenario = load_scenario("ermakov:m=4:n=2")
    assert scenario.name == "ermakov:m=4:n=2"
    assert scenario.dimension == 2


# ======================================================================================================================
# CONSERVATION
# ======================================================================================================================


def test_oscillator_integrals_are_conserved():
    scenario = newtonian_scenario("noether-second", 3)
    integrals = [scenario.integral(e) for e in scenario.noether_entries()]
    trajectory = integrate(
        scenario.equations_of_motion(), [1.2, 1.0, 0.8], [0.1, -0.2, 0.3], (0.0, 2.0), method="RK45", tol=1e-10
    )
    report = conservation_drift(trajectory, integrals)
    assert report.maximum_relative <= 1e-7


def test_galilean_integral_is_conserved():
    scenario = newtonian_scenario("noether-second", 1)
    entry = scenario.noether_entries()[1]
    trajectory = integrate(scenario.equations_of_motion(), [1.0, 1.0, 1.0], [0.5, 0.2, -0.1], (0.0, 3.0))
    assert conservation_drift(trajectory, [scenario.integral(entry)]).maximum_relative <= 1e-8


# ======================================================================================================================
# ERRORS AND ADDRESSES
# ======================================================================================================================


def test_no_d_equals_two_column():
    with pytest.raises(ScenarioError):
        newtonian_scenario("noether-first", 1, d=2)


@pytest.mark.parametrize(
    "family, row, n, parameters",
    [
        ("lie-first", 6, 3, {}),
        ("hamiltonian", 1, 3, {}),
        ("lie-first", 1, 4, {}),
        ("lie-second", 3, 3, {"m": -1}),
        ("lie-second", 1, 3, {"m": 2}),
        ("noether-first", 4, 3, {"d": 1}),
        ("lie-first", 2, 3, {"d": 1}),
    ],
)
def test_invalid_rows(family, row, n, parameters):
    with pytest.raises(ScenarioError):
        newtonian_scenario(family, row, n, **parameters)


def test_row_titles():
    assert newtonian_row("noether-second", 1).title == "Newtonian Noether, second family / t∂μ"


def test_load_by_address():
    scenario = load_scenario("newtonian:lie-first:3:d=5:n=2")
    assert scenario.name == "newtonian:lie-first:3:n=2:d=5"
    assert scenario.parameters == {"family": "lie-first", "row": 3, "n": 2, "d": 5.0}
    assert [e.name for e in scenario.lie_entries()] == ["∂t", "5/2*t∂t + H"]


def test_galilean_row_by_address():
    scenario = load_scenario("newtonian:noether-second:1")
    entry = scenario.entry("t∂x")
    assert str(entry.gauge) == str(scenario.metric.chart.parse("x - t^2/2"))
