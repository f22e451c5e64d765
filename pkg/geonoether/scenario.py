"""Named constructions wiring a metric, a potential or force, a collineation catalog and the symmetries expected of
them.

A scenario is addressed from the command line as `family:positional:key=value:...`, for example
`sphere:K=1:V=cos(theta)*sin(phi)` or `bianchi:IX:constant`. Each family module exposes a `generate_scenario`
factory taking the address parts as arguments.
"""

from fractions import Fraction
from typing import Any, Literal, Mapping

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from geonoether.base import CheckSettings, ConditionReport, ScenarioError, omni_import
from geonoether.collineation import CollineationBasis
from geonoether.dynamics import EquationsOfMotion
from geonoether.expr import ZERO, Const, Expression, T, mul, total
from geonoether.geometry import ForceField, Metric, SampleBox, Samples, SymmetryVector, halton_blocks, halton_samples
from geonoether.symmetry import (
    NoetherIntegral,
    combination_name,
    find_noether_symmetries,
    hamiltonian,
    lie_conditions,
    noether_conditions,
    span_dimension,
)


SymmetryKind = Literal["noether", "lie"]
Provenance = Literal["listed", "corrected", "derived"]

SCENARIO_FACTORIES = {
    "sphere": "geonoether.sphere.generate_scenario",
    "newtonian": "geonoether.newtonian.generate_scenario",
    "ermakov": "geonoether.newtonian.generate_ermakov_scenario",
    "bianchi": "geonoether.bianchi.generate_scenario",
}


class ExpectedSymmetry(BaseModel):
    """A generator the scenario is expected to admit, or to reject when `holds` is False."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    vector: SymmetryVector
    kind: SymmetryKind
    case: Literal["autonomous", "I", "II", "lie"] = Field(description="Which construction produces the generator")
    gauge: Expression = Field(description="Gauge function of a Noether symmetry", default=ZERO)
    source: str = Field(description="Catalog row the entry comes from, e.g. 'Bianchi II / zero potential'")
    provenance: Provenance = Field(
        description="listed: as cataloged; corrected: coefficients fixed by substitution; derived: not cataloged",
        default="listed",
    )
    holds: bool = Field(description="False for negative controls, which must fail their checker", default=True)

    @property
    def name(self) -> str:
        return self.vector.name


class Scenario(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    family: str
    metric: Metric
    potential: Expression | None = Field(description="V of L = T − V; None for a force without potential")
    force: ForceField = Field(description="Force of ẍ + Γẋẋ = F; −∇V when a potential is given")
    catalog: CollineationBasis | None = Field(description="Collineations the finders search over", default=None)
    expected: list[ExpectedSymmetry] = []
    box: SampleBox
    parameters: dict[str, Any] = Field(description="Arguments the scenario was generated from", default={})
    description: str = ""

    @model_validator(mode="after")
    def _check_charts(self) -> "Scenario":
        chart = self.metric.chart
        if self.force.chart != chart:
            raise ScenarioError(f"{self.name}: force lives on {self.force.chart.names}, metric on {chart.names}")
        if self.catalog is not None and self.catalog.metric.chart != chart:
            raise ScenarioError(f"{self.name}: catalog chart {self.catalog.metric.chart.names} differs")
        for entry in self.expected:
            if entry.vector.chart != chart:
                raise ScenarioError(f"{self.name}: expected {entry.name} lives on {entry.vector.chart.names}")
            if entry.kind == "noether" and self.potential is None:
                raise ScenarioError(f"{self.name}: Noether entry {entry.name} needs a potential")
        return self

    @property
    def dimension(self) -> int:
        return self.metric.dimension

    def noether_entries(self, holds: bool | None = True) -> list[ExpectedSymmetry]:
        return [e for e in self.expected if e.kind == "noether" and (holds is None or e.holds == holds)]

    def lie_entries(self, holds: bool | None = True) -> list[ExpectedSymmetry]:
        return [e for e in self.expected if e.kind == "lie" and (holds is None or e.holds == holds)]

    def entry(self, name: str, kind: SymmetryKind = "noether") -> ExpectedSymmetry:
        for e in self.expected:
            if e.name == name and e.kind == kind:
                return e
        raise KeyError(f"{self.name} lists no {kind} symmetry {name!r}")

    def equations_of_motion(self) -> EquationsOfMotion:
        return EquationsOfMotion(self.metric, self.force)

    def energy(self) -> NoetherIntegral:
        if self.potential is None:
            raise ScenarioError(f"{self.name} has no potential, so no energy integral")
        return hamiltonian(self.metric, self.potential)

    def integral(self, entry: ExpectedSymmetry) -> NoetherIntegral:
        """I = ξE − g_ij η^i ẋ^j + G of a Noether entry."""
        if entry.kind != "noether" or self.potential is None:
            raise ScenarioError(f"{self.name}: {entry.name} is not a Noether symmetry with an integral")
        return NoetherIntegral(self.metric, self.potential, entry.vector, entry.gauge, f"I[{entry.name}]")

    def with_potential(self, potential: str | Expression) -> "Scenario":
        """Same metric, catalog and box under another potential; expected entries do not carry over."""
        curvature = self.parameters.get("K")
        V = self.metric.chart.parse(potential, curvature=curvature) if isinstance(potential, str) else potential
        force = ForceField.from_potential(self.metric, V)
        name = f"{self.name.split(':V=')[0]}:V={V}"
        return self.model_copy(update={"name": name, "potential": V, "force": force, "expected": []})

    def samples(self, settings: CheckSettings | None = None, fresh: bool = False) -> Samples:
        """Halton samples in the scenario box; `fresh` draws the next disjoint block of the same sequence."""
        settings = settings or CheckSettings()
        box = self.box.model_copy(update={"margin": settings.margin})
        if fresh:
            return halton_blocks(self.metric.chart, box, settings.samples, 2, seed=settings.seed)[1]
        return halton_samples(self.metric.chart, box, settings.samples, seed=settings.seed)

    def check(self, entry: ExpectedSymmetry, samples: Samples, tol: float = 1e-8) -> ConditionReport:
        if entry.kind == "noether":
            return noether_conditions(entry.vector, self.metric, self.potential, entry.gauge, samples, tol)
        return lie_conditions(entry.vector, self.metric, self.force, samples, tol)


# ======================================================================================================================
# BUILDING BLOCKS
# ======================================================================================================================


def combine(
    catalog: CollineationBasis,
    coefficients: Mapping[str, int | Fraction | float],
    time: int | Fraction | float = 0,
    name: str | None = None,
) -> SymmetryVector:
    """a t∂t + Σ c_Y Y over named catalog vectors, named like '2*t∂t + H - 2/3*Y1' unless `name` is given."""
    chart = catalog.metric.chart
    eta = [
        total(mul(Const(c), catalog[n].vector.eta[i]) for n, c in coefficients.items()) for i in range(chart.dimension)
    ]
    name = name or combination_name({n: float(c) for n, c in coefficients.items()}, float(time))
    return SymmetryVector(chart, mul(Const(time), T), eta, name)


def format_number(value: float) -> str:
    """Expression text for a number: integers without a decimal point, other values at full precision."""
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def time_translation_entry(metric: Metric, source: str) -> ExpectedSymmetry:
    vector = SymmetryVector.time_translation(metric.chart)
    return ExpectedSymmetry(vector=vector, kind="noether", case="autonomous", source=source)


def count_noether_symmetries(scenario: Scenario, settings: CheckSettings | None = None) -> int:
    """Dimension of the span of every Noether point symmetry found, ∂t included."""
    if scenario.catalog is None or scenario.potential is None:
        raise ScenarioError(f"{scenario.name} has no catalog or potential to search")
    settings = settings or CheckSettings()
    samples = scenario.samples(settings)
    fresh = scenario.samples(settings, fresh=True)
    found = find_noether_symmetries(scenario.catalog, scenario.potential, samples, fresh, settings.tol)
    return span_dimension([s.vector for s in found], samples)


# ======================================================================================================================
# ADDRESSES
# ======================================================================================================================


def _coerce(value: str) -> Any:
    for kind in (int, float):
        try:
            return kind(value)
        except ValueError:
            pass
    return value


def parse_address(address: str) -> tuple[str, list[Any], dict[str, Any]]:
    """`family:a:b:key=value` → (family, [a, b], {key: value}); numeric parts become int or float."""
    family, *parts = address.strip().split(":")
    if not family:
        raise ScenarioError(f"Scenario address {address!r} has no family")
    args: list[Any] = []
    kwargs: dict[str, Any] = {}
    for part in parts:
        key, sep, value = part.partition("=")
        if sep:
            if not key:
                raise ScenarioError(f"Empty parameter name in {address!r}")
            kwargs[key] = _coerce(value)
        elif kwargs:
            raise ScenarioError(f"Positional part {part!r} follows a keyword in {address!r}")
        else:
            args.append(_coerce(part))
    return family, args, kwargs


def load_scenario(address: str) -> Scenario:
    family, args, kwargs = parse_address(address)
    if family not in SCENARIO_FACTORIES:
        raise ScenarioError(f"Unknown scenario family {family!r}; known: {sorted(SCENARIO_FACTORIES)}")
    factory = omni_import(SCENARIO_FACTORIES[family])
    try:
        scenario = factory(*args, **kwargs)
    except TypeError as exc:
        raise ScenarioError(f"Bad arguments for {family}: {exc}") from exc
    logger.debug(f"Loaded scenario {scenario.name} from {address!r}")
    return scenario
