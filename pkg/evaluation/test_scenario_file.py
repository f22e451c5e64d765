import json

import pytest
from pydantic import ValidationError

from evaluation.scenario_file import SCHEMA_VERSION, ScenarioFile, load_scenario_file
from geonoether.base import ScenarioError
from geonoether.collineation import CollineationBasis


SPHERE_DOCUMENT = {
    "schema_version": 1,
    "name": "sphere-rotation",
    "metric": {
        "coordinates": ["phi", "theta"],
        "diagonal": ["1", "Sinn(phi)^2"],
        "curvature": 1,
        "excluded_locus": ["sin(phi)"],
    },
    "potential": "cos(theta)*sin(phi)",
    "catalog": {"_target_": "geonoether.collineation.sphere_killing_catalog", "curvature": 1},
    "vectors": [
        {"name": "Y1", "eta": ["sin(theta)", "cos(theta)*cos(phi)/sin(phi)"]},
        {"name": "Y3", "eta": ["0", "1"], "holds": False},
    ],
    "simulate": {"x0": [1.3, 2.5], "v0": [0.3, -0.2], "t_span": [0, 2]},
    "check": {"samples": 120, "seed": 4, "box": {"lower": [0.3, -3], "upper": [2.8, 3]}},
}


def document(**changes) -> dict:
    return {**json.loads(json.dumps(SPHERE_DOCUMENT)), **changes}


def write(tmp_path, content) -> str:
    path = tmp_path / "scenario.json"
    path.write_text(content if isinstance(content, str) else json.dumps(content), encoding="utf-8")
    return str(path)


def test_sphere_document_builds_a_scenario():
    scenario = ScenarioFile.model_validate(SPHERE_DOCUMENT).to_scenario("sphere.json")
    assert scenario.family == "file"
    assert scenario.dimension == 2
    assert isinstance(scenario.catalog, CollineationBasis)
    assert [e.name for e in scenario.noether_entries(holds=None)] == ["Y1", "Y3"]
    assert scenario.entry("Y1").case == "I"
    assert scenario.entry("Y1").provenance == "derived"


def test_listed_vector_passes_and_control_fails():
    file = ScenarioFile.model_validate(SPHERE_DOCUMENT)
    scenario = file.to_scenario()
    samples = scenario.samples(file.settings())
    assert scenario.check(scenario.entry("Y1"), samples).passed
    assert scenario.check(scenario.entry("Y3"), samples).maximum >= 1e-2


def test_check_section_sets_the_sampling():
    settings = ScenarioFile.model_validate(SPHERE_DOCUMENT).settings()
    assert settings.samples == 120
    assert settings.seed == 4
    assert settings.tol == 1e-8


def test_time_dependent_vectors_are_case_two():
    data = document(
        metric={"coordinates": ["x"], "diagonal": ["1"]},
        potential="0",
        catalog=None,
        vectors=[{"name": "t∂x", "eta": ["t"], "gauge": "x"}],
        simulate=None,
        check={},
    )
    scenario = ScenarioFile.model_validate(data).to_scenario()
    assert scenario.entry("t∂x").case == "II"
    assert scenario.check(scenario.entry("t∂x"), scenario.samples()).passed


def test_force_without_potential():
    data = document(
        metric={"coordinates": ["x", "y"], "components": [[1, 0], [0, 1]]},
        potential=None,
        force=["-x", "-y"],
        catalog=None,
        vectors=[{"name": "rotation", "eta": ["y", "-x"], "kind": "lie"}],
        simulate=None,
        check={},
    )
    scenario = ScenarioFile.model_validate(data).to_scenario()
    assert scenario.potential is None
    assert scenario.check(scenario.entry("rotation", "lie"), scenario.samples()).passed


def test_potential_factory_receives_the_chart():
    data = document(
        metric={"coordinates": ["lambda", "b1", "b2", "phi"], "diagonal": ["1", "1", "1", "1"]},
        potential={"_target_": "geonoether.bianchi.exponential_potential", "d": 2, "V0": 0.5},
        catalog=None,
        vectors=[],
        simulate=None,
        check={},
    )
    scenario = ScenarioFile.model_validate(data).to_scenario()
    assert scenario.potential.uses_time is False
    assert "phi" in str(scenario.potential)


def test_schema_version_is_checked(tmp_path):
    assert SCHEMA_VERSION == 1
    with pytest.raises(ValidationError):
        load_scenario_file(write(tmp_path, document(schema_version=2)))


def test_unparseable_json(tmp_path):
    with pytest.raises(ValidationError):
        load_scenario_file(write(tmp_path, '{"schema_version": 1, "metric": '))


@pytest.mark.parametrize(
    "changes",
    [
        {"metric": {"coordinates": ["phi", "theta"], "diagonal": ["1"]}},
        {"metric": {"coordinates": ["phi", "theta"]}},
        {"potential": None},
        {"vectors": [{"name": "Y1", "eta": ["1"]}]},
        {"simulate": {"x0": [1.0], "v0": [0.0, 0.0]}},
    ],
)
def test_inconsistent_dimensions(changes):
    with pytest.raises(ValidationError):
        ScenarioFile.model_validate(document(**changes))


def test_errors_name_the_section():
    file = ScenarioFile.model_validate(document(potential="cos(theta"))
    with pytest.raises(ScenarioError, match="sphere.json: potential"):
        file.to_scenario("sphere.json")


def test_unknown_identifier_in_a_vector():
    file = ScenarioFile.model_validate(document(vectors=[{"name": "bad", "eta": ["psi", "0"]}]))
    with pytest.raises(ScenarioError, match=r"vectors\[0\]"):
        file.to_scenario("sphere.json")


def test_catalog_must_build_a_basis():
    file = ScenarioFile.model_validate(document(catalog={"_target_": "geonoether.scenario.format_number", "value": 1}))
    with pytest.raises(ScenarioError, match="expected a CollineationBasis"):
        file.to_scenario("sphere.json")


def test_load_from_disk(tmp_path):
    file = load_scenario_file(write(tmp_path, SPHERE_DOCUMENT))
    assert file.name == "sphere-rotation"
    assert file.simulate.t_span == (0.0, 2.0)
