"""Custom scenarios declared in JSON documents.

```
{
  "schema_version": 1,
  "name": "sphere-rotation",
  "metric": {"coordinates": ["phi", "theta"], "diagonal": ["1", "Sinn(phi)^2"], "curvature": 1,
             "excluded_locus": ["sin(phi)"]},
  "potential": "cos(theta)*sin(phi)",
  "catalog": {"_target_": "geonoether.collineation.sphere_killing_catalog", "curvature": 1},
  "vectors": [{"name": "Y1", "eta": ["sin(theta)", "cos(theta)*cos(phi)/sin(phi)"], "kind": "noether"}],
  "simulate": {"x0": [1.3, 2.5], "v0": [0.3, -0.2], "t_span": [0, 20]},
  "check": {"samples": 200, "box": {"lower": [0.3, -3], "upper": [2.8, 3]}}
}
```

`potential` and `catalog` may be `_target_` nodes; a potential factory is called with the file's chart as the
`chart` keyword.
"""

from typing import Any, Literal

from loguru import logger
from pydantic import BaseModel, Field, model_validator

from geonoether.base import CheckSettings, GeonoetherError, ScenarioError, instantiate
from geonoether.collineation import CollineationBasis
from geonoether.dynamics import DEFAULT_STEP, DEFAULT_TOLERANCE, IntegrationMethod
from geonoether.expr import CoordinateChart, Expression
from geonoether.geometry import ForceField, Metric, SampleBox, SymmetryVector
from geonoether.scenario import ExpectedSymmetry, Scenario, SymmetryKind


SCHEMA_VERSION = 1


class MetricSection(BaseModel):
    coordinates: list[str]
    components: list[list[str | float]] | None = Field(description="Full symmetric matrix", default=None)
    diagonal: list[str | float] | None = Field(description="Diagonal entries of a diagonal metric", default=None)
    signature: list[int] | None = None
    curvature: Literal[1, -1] | None = Field(description="Sign K that expands Sinn/Cosn", default=None)
    excluded_locus: list[str] = Field(description="Expressions whose zero sets the chart excludes", default=[])

    @model_validator(mode="after")
    def _check_shape(self) -> "MetricSection":
        n = len(self.coordinates)
        if (self.components is None) == (self.diagonal is None):
            raise ValueError("metric needs exactly one of 'components' or 'diagonal'")
        if self.components is not None and (len(self.components) != n or any(len(r) != n for r in self.components)):
            raise ValueError(f"metric components must be {n}x{n}")
        if self.diagonal is not None and len(self.diagonal) != n:
            raise ValueError(f"metric diagonal needs {n} entries")
        if self.signature is not None and len(self.signature) != n:
            raise ValueError(f"metric signature needs {n} entries")
        return self


class VectorSection(BaseModel):
    name: str
    xi: str | float = "0"
    eta: list[str | float]
    kind: SymmetryKind = "noether"
    gauge: str | float = "0"
    holds: bool = Field(description="False marks a negative control", default=True)


class SimulateSection(BaseModel):
    x0: list[float]
    v0: list[float]
    t_span: tuple[float, float] = (0.0, 1.0)
    method: IntegrationMethod = "RK4"
    step: float = DEFAULT_STEP
    tol: float = DEFAULT_TOLERANCE


class CheckSection(BaseModel):
    tol: float | None = None
    samples: int | None = None
    seed: int | None = None
    margin: float | None = None
    box: SampleBox | None = None

    def settings(self) -> CheckSettings:
        overrides = {k: v for k, v in self.model_dump(exclude={"box"}).items() if v is not None}
        return CheckSettings(**overrides)


class ScenarioFile(BaseModel):
    schema_version: Literal[1]
    name: str = "custom"
    metric: MetricSection
    potential: str | float | dict[str, Any] | None = None
    force: list[str | float] | None = None
    catalog: dict[str, Any] | None = Field(description="`_target_` node building a CollineationBasis", default=None)
    vectors: list[VectorSection] = []
    simulate: SimulateSection | None = None
    check: CheckSection = CheckSection()

    @model_validator(mode="after")
    def _check_dimensions(self) -> "ScenarioFile":
        n = len(self.metric.coordinates)
        if self.potential is None and self.force is None:
            raise ValueError("a scenario needs a potential or a force")
        if self.force is not None and len(self.force) != n:
            raise ValueError(f"force needs {n} components")
        for v in self.vectors:
            if len(v.eta) != n:
                raise ValueError(f"vector {v.name} needs {n} components")
            if v.kind == "noether" and self.potential is None:
                raise ValueError(f"Noether vector {v.name} needs a potential")
        if self.simulate is not None and (len(self.simulate.x0) != n or len(self.simulate.v0) != n):
            raise ValueError(f"simulate needs {n} positions and {n} velocities")
        box = self.check.box
        if box is not None and (len(box.lower) != n or len(box.upper) != n):
            raise ValueError(f"check.box needs {n} lower and {n} upper bounds")
        return self

    def settings(self) -> CheckSettings:
        return self.check.settings()

    def to_scenario(self, source: str | None = None) -> Scenario:
        source = source or self.name
        m = self.metric
        chart = _located(source, "metric", lambda: CoordinateChart(m.coordinates, m.excluded_locus))
        curvature = m.curvature

        def build_metric() -> Metric:
            if m.diagonal is not None:
                return Metric.diagonal(chart, [str(e) for e in m.diagonal], m.signature, curvature=curvature)
            return Metric(chart, [[str(e) for e in row] for row in m.components], m.signature, curvature=curvature)

        metric = _located(source, "metric", build_metric)

        potential = None
        if self.potential is not None:
            potential = _located(source, "potential", lambda: self._potential(chart))
        if self.force is not None:
            components = [str(c) for c in self.force]
            force = _located(source, "force", lambda: ForceField(chart, components, curvature=curvature))
        else:
            force = _located(source, "potential", lambda: ForceField.from_potential(metric, potential))

        catalog = None
        if self.catalog is not None:
            catalog = _located(source, "catalog", lambda: instantiate(self.catalog))
            if not isinstance(catalog, CollineationBasis):
                raise ScenarioError(f"{source}: catalog: expected a CollineationBasis, got {type(catalog).__name__}")

        expected = []
        for index, v in enumerate(self.vectors):
            where = f"vectors[{index}]"
            vector = _located(
                source,
                where,
                lambda: SymmetryVector(chart, str(v.xi), [str(e) for e in v.eta], v.name, curvature=curvature),
            )
            gauge = _located(source, f"{where}.gauge", lambda: chart.parse(str(v.gauge), curvature=curvature))
            case = "lie" if v.kind == "lie" else ("II" if vector.uses_time else "I")
            expected.append(
                ExpectedSymmetry(
                    vector=vector,
                    kind=v.kind,
                    case=case,
                    gauge=gauge,
                    source=f"{source} / {v.name}",
                    provenance="derived",
                    holds=v.holds,
                )
            )

        n = chart.dimension
        box = self.check.box or SampleBox(lower=[-1.0] * n, upper=[1.0] * n)
        scenario = _located(
            source,
            "scenario",
            lambda: Scenario(
                name=self.name,
                family="file",
                metric=metric,
                potential=potential,
                force=force,
                catalog=catalog,
                expected=expected,
                box=box,
                parameters={"source": source},
                description=f"Scenario file {source}",
            ),
        )
        logger.debug(f"Built {scenario.name} from {source}: {len(expected)} vectors")
        return scenario

    def _potential(self, chart: CoordinateChart) -> Expression:
        if isinstance(self.potential, dict):
            node = {**self.potential, "chart": chart} if "_target_" in self.potential else self.potential
            value = instantiate(node)
            if isinstance(value, Expression):
                return value
            return chart.parse(str(value), curvature=self.metric.curvature)
        return chart.parse(str(self.potential), curvature=self.metric.curvature)


def _located(source: str, where: str, build):
    """Run `build`, prefixing library errors with the file and section they come from."""
    try:
        return build()
    except ScenarioError:
        raise
    except (GeonoetherError, ValueError, ImportError) as exc:
        raise ScenarioError(f"{source}: {where}: {exc}") from exc


def load_scenario_file(path: str) -> ScenarioFile:
    """Read and validate a scenario file; JSON and schema errors surface as pydantic ValidationError."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    document = ScenarioFile.model_validate_json(text)
    logger.debug(f"Loaded scenario file {path} (schema {document.schema_version})")
    return document
