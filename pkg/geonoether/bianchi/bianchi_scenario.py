"""
Class A Bianchi cosmologies with a minimally coupled scalar field

L = e^{3λ}(6λ̇² − (3/2)β̇₁² − (3/2)β̇₂² − φ̇²) + e^{3λ}(V(φ) + R*) over (λ, β₁, β₂, φ), which is motion in the
mini-superspace metric e^{3λ} diag(12, −3, −3, −2) under the potential U = −e^{3λ}(V + R*). R* is the Ricci
scalar of the spatial hypersurfaces, fixed by the structure triple (N₁, N₂, N₃) of the Bianchi type. The vacuum
models drop φ.
"""

import math
from fractions import Fraction
from typing import Literal, NamedTuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from geonoether.base import ScenarioError
from geonoether.collineation import bianchi_metric, bianchi_symmetry_catalog
from geonoether.expr import ZERO, Const, CoordinateChart, Expression, add, differentiate, exp, is_zero, mul, neg
from geonoether.geometry import ForceField, SampleBox, SymmetryVector
from geonoether.scenario import (
    ExpectedSymmetry,
    Provenance,
    Scenario,
    SymmetryKind,
    combine,
    format_number,
    time_translation_entry,
)


BianchiType = Literal["I", "II", "VI0", "VII0", "VIII", "IX"]
PotentialFamily = Literal["vacuum", "zero", "constant", "arbitrary", "exponential"]

STRUCTURE_CONSTANTS: dict[str, tuple[int, int, int]] = {
    "I": (0, 0, 0),
    "II": (1, 0, 0),
    "VI0": (0, 1, -1),
    "VII0": (0, 1, 1),
    "VIII": (1, 1, -1),
    "IX": (1, 1, 1),
}

SAMPLE_BOX = SampleBox(lower=[-0.5, -0.5, -0.5, 0.2], upper=[0.5, 0.5, 0.5, 1.2])


class BianchiModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    type: BianchiType
    potential: PotentialFamily = "vacuum"
    V0: float = Field(description="Scale of the constant and exponential potentials", default=1 / 6)
    d: float = Field(description="Rate of the exponential potential V₀e^{−dφ}", default=2.0)
    arbitrary: str = Field(description="V(φ) standing in for an arbitrary potential", default="phi^2")

    @model_validator(mode="after")
    def _check_parameters(self) -> "BianchiModel":
        if self.potential == "exponential" and self.d == 0:
            raise ScenarioError("The exponential potential needs d ≠ 0")
        if self.potential == "constant" and self.V0 <= 0:
            raise ScenarioError(f"The constant potential needs V0 > 0 for the exponential generators, got {self.V0}")
        return self

    @property
    def structure(self) -> tuple[int, int, int]:
        return STRUCTURE_CONSTANTS[self.type]

    @property
    def vacuum(self) -> bool:
        return self.potential == "vacuum"

    @property
    def rate(self) -> float:
        """C of the exponential Case II generators of the constant potential, C² = (3/2)V₀."""
        return math.sqrt(1.5 * self.V0)


# ======================================================================================================================
# POTENTIAL
# ======================================================================================================================


def _hypersurface_terms(N1: int, N2: int, N3: int) -> str:
    """Q = N₁²e^{4β₁} + e^{−2β₁}W² − 2N₁e^{β₁}W with W = N₂e^{√3β₂} − N₃e^{−√3β₂}; empty when Q vanishes."""
    w_terms = []
    if N2:
        w_terms.append(f"{N2}*exp(sqrt(3)*b2)")
    if N3:
        w_terms.append(f"({-N3})*exp(-sqrt(3)*b2)")
    W = f"({' + '.join(w_terms)})" if w_terms else ""
    terms = []
    if N1:
        terms.append(f"{N1 * N1}*exp(4*b1)")
    if W:
        terms.append(f"exp(-2*b1)*{W}^2")
    if N1 and W:
        terms.append(f"({-2 * N1})*exp(b1)*{W}")
    return " + ".join(terms)


def curvature_scalar(structure: tuple[int, int, int], chart: CoordinateChart) -> Expression:
    """R* = −½e^{−2λ}Q + ½n with n = N₁N₂N₃(1 + N₁N₂N₃)."""
    N1, N2, N3 = structure
    product = N1 * N2 * N3
    half_n = format_number(product * (1 + product) / 2)
    Q = _hypersurface_terms(N1, N2, N3)
    if not Q:
        return chart.parse(half_n)
    return chart.parse(f"-1/2*exp(-2*lambda)*({Q}) + {half_n}")


def exponential_potential(d: float, V0: float = 1.0, chart: CoordinateChart | None = None) -> Expression:
    """V(φ) = V₀e^{−dφ}, the single-exponential family for which 2t∂t + H + (4/d)Y³ is a Noether symmetry."""
    if d == 0:
        raise ScenarioError("The exponential potential needs d ≠ 0")
    chart = chart or bianchi_metric().chart
    return chart.parse(f"{format_number(V0)}*exp({format_number(-d)}*phi)")


def scalar_potential(model: BianchiModel, chart: CoordinateChart) -> Expression:
    match model.potential:
        case "vacuum" | "zero":
            return ZERO
        case "constant":
            return Const(Fraction(model.V0).limit_denominator(10**6))
        case "arbitrary":
            V = chart.parse(model.arbitrary)
            phi = chart.index("phi")
            if V.uses_time or any(not is_zero(differentiate(V, i)) for i in range(chart.dimension) if i != phi):
                raise ScenarioError(f"The scalar field potential must depend on phi only, got {model.arbitrary!r}")
            return V
        case "exponential":
            return exponential_potential(model.d, model.V0, chart)


def effective_potential(model: BianchiModel, chart: CoordinateChart) -> Expression:
    """U = −e^{3λ}(V + R*)."""
    volume = exp(mul(Const(3), chart.variable("lambda")))
    return neg(mul(volume, add(scalar_potential(model, chart), curvature_scalar(model.structure, chart))))


# ======================================================================================================================
# SYMMETRY TABLES
# ======================================================================================================================


class _Row(NamedTuple):
    """a t∂t + Σ c_Y Y, or one of the Case II families."""

    time: float | Fraction = 0
    coefficients: dict[str, float | Fraction] = {}
    provenance: Provenance = "listed"
    special: Literal["projective", "exponential"] | None = None


def _kvs(*names: str) -> list[_Row]:
    return [_Row(coefficients={n: 1}) for n in names]


PROJECTIVE = _Row(special="projective")
EXPONENTIAL = _Row(special="exponential", provenance="corrected")


def _bianchi_one(potential: PotentialFamily, d: float) -> tuple[list[_Row], list[_Row]]:
    homothety = [_Row(time=2, coefficients={"H": 1}), PROJECTIVE]
    lie_homothety = [_Row(time=1), _Row(coefficients={"H": 1}), PROJECTIVE]
    match potential:
        case "vacuum":
            return _kvs("Y1", "Y2", "Y4") + homothety, _kvs("Y1", "Y2", "Y4") + lie_homothety
        case "zero":
            every = _kvs("Y1", "Y2", "Y3", "Y4", "Y5", "Y6")
            return every + homothety, every + lie_homothety
        case "constant":
            every = _kvs("Y1", "Y2", "Y3", "Y4", "Y5", "Y6")
            return every + [EXPONENTIAL], every + [_Row(coefficients={"H": 1}), EXPONENTIAL]
        case "arbitrary":
            return _kvs("Y1", "Y2", "Y4"), _kvs("Y1", "Y2", "Y4", "H")
        case "exponential":
            noether = [_Row(time=2, coefficients={"H": 1, "Y3": 4 / d})]
            lie = [_Row(coefficients={"H": 1}), _Row(time=1, coefficients={"Y3": 2 / d})]
            return _kvs("Y1", "Y2", "Y4") + noether, _kvs("Y1", "Y2", "Y4") + lie


def _bianchi_two(potential: PotentialFamily, d: float) -> tuple[list[_Row], list[_Row]]:
    noether_homothety = _Row(time=6, coefficients={"H": 3, "Y1": -2}, provenance="corrected")
    lie_rows = [
        _Row(time=2, coefficients={"Y1": -1}, provenance="corrected"),
        _Row(coefficients={"H": 3, "Y1": 1}, provenance="corrected"),
    ]
    match potential:
        case "vacuum":
            return _kvs("Y2") + [noether_homothety], _kvs("Y2") + lie_rows
        case "zero":
            return _kvs("Y2", "Y3", "Y6") + [noether_homothety], _kvs("Y2", "Y3", "Y6") + lie_rows
        case "constant":
            return _kvs("Y2", "Y3", "Y6"), _kvs("Y2", "Y3", "Y6") + [_Row(coefficients={"H": 3, "Y1": 1})]
        case "arbitrary":
            return _kvs("Y2"), _kvs("Y2") + [_Row(coefficients={"H": 3, "Y1": 1})]
        case "exponential":
            noether = _Row(
                time=2, coefficients={"H": 1, "Y1": Fraction(-2, 3), "Y3": 4 / d}, provenance="corrected"
            )
            lie = [
                _Row(coefficients={"H": 3, "Y1": 1}),
                _Row(time=2, coefficients={"Y1": -1, "Y3": 4 / d}, provenance="corrected"),
            ]
            return _kvs("Y2") + [noether], _kvs("Y2") + lie


def _bianchi_six_seven(potential: PotentialFamily, d: float) -> tuple[list[_Row], list[_Row]]:
    noether_homothety = _Row(time=6, coefficients={"H": 3, "Y1": 4}, provenance="corrected")
    scaling = _Row(coefficients={"H": 3, "Y1": -2}, provenance="corrected")
    lie_rows = [scaling, _Row(time=1, coefficients={"Y1": 1}, provenance="corrected")]
    match potential:
        case "vacuum":
            return [noether_homothety], lie_rows
        case "zero":
            return _kvs("Y3") + [noether_homothety], _kvs("Y3") + lie_rows
        case "constant":
            return _kvs("Y3"), _kvs("Y3") + [scaling]
        case "arbitrary":
            return [], [scaling]
        case "exponential":
            noether = _Row(time=6, coefficients={"H": 3, "Y1": 4, "Y3": 12 / d}, provenance="corrected")
            lie = _Row(time=1, coefficients={"Y1": 1, "Y3": 2 / d}, provenance="corrected")
            return [noether], [scaling, lie]


def _bianchi_eight(potential: PotentialFamily, d: float) -> tuple[list[_Row], list[_Row]]:
    scaling = _Row(time=2, coefficients={"H": 3})
    match potential:
        case "vacuum":
            return [], [scaling]
        case "zero":
            return _kvs("Y3"), _kvs("Y3") + [scaling]
        case "constant":
            return _kvs("Y3"), _kvs("Y3")
        case "arbitrary":
            return [], []
        case "exponential":
            return [], [_Row(time=2, coefficients={"H": 3, "Y3": 4 / d}, provenance="derived")]


def _bianchi_nine(potential: PotentialFamily, d: float) -> tuple[list[_Row], list[_Row]]:
    if potential in ("zero", "constant"):
        return _kvs("Y3"), _kvs("Y3")
    return [], []


TABLES = {
    "I": _bianchi_one,
    "II": _bianchi_two,
    "VI0": _bianchi_six_seven,
    "VII0": _bianchi_six_seven,
    "VIII": _bianchi_eight,
    "IX": _bianchi_nine,
}


# ======================================================================================================================
# SCENARIOS
# ======================================================================================================================


def _source(model: BianchiModel) -> str:
    family = "vacuum" if model.vacuum else f"{model.potential} potential"
    return f"Bianchi {model.type} / {family}"


def _case_two_entries(
    row: _Row, model: BianchiModel, chart: CoordinateChart, kind: SymmetryKind, source: str
) -> list[ExpectedSymmetry]:
    """t²∂t + tH with gauge h, or (1/C)e^{±Ct}∂t ± ½e^{±Ct}H with gauge (C/2)e^{±Ct}h, h = (8/3)e^{3λ}."""
    rest = ["0"] * (chart.dimension - 1)
    case = "II" if kind == "noether" else "lie"
    if row.special == "projective":
        vector = SymmetryVector(chart, "t^2", ["2/3*t", *rest], "t²∂t + tH")
        gauge = chart.parse("8/3*exp(3*lambda)") if kind == "noether" else ZERO
        return [ExpectedSymmetry(vector=vector, kind=kind, case=case, gauge=gauge, source=source)]

    c = format_number(model.rate)
    entries = []
    for sign, label in (("", "+"), ("-", "-")):
        e = f"exp({sign}{c}*t)"
        vector = SymmetryVector(chart, f"{e}/{c}", [f"{sign}{e}/3", *rest], f"e^({label}Ct)(∂t/C {label} H/2)")
        gauge = chart.parse(f"{format_number(4 * model.rate / 3)}*{e}*exp(3*lambda)") if kind == "noether" else ZERO
        entries.append(
            ExpectedSymmetry(
                vector=vector, kind=kind, case=case, gauge=gauge, source=source, provenance=row.provenance
            )
        )
    return entries


def _entries(rows: list[_Row], model: BianchiModel, catalog, kind: SymmetryKind) -> list[ExpectedSymmetry]:
    chart = catalog.metric.chart
    source = _source(model)
    entries = []
    for row in rows:
        if row.special is not None:
            entries += _case_two_entries(row, model, chart, kind, source)
            continue
        vector = combine(catalog, row.coefficients, row.time)
        case = "lie" if kind == "lie" else "I"
        entries.append(
            ExpectedSymmetry(vector=vector, kind=kind, case=case, source=source, provenance=row.provenance)
        )
    return entries


def _negative_controls(model: BianchiModel, catalog) -> list[ExpectedSymmetry]:
    """Y¹ for every type with a β₁-dependent curvature term, t∂t for Bianchi I."""
    source = f"{_source(model)} / negative control"
    if model.type == "I":
        vector = combine(catalog, {}, time=1)
    else:
        vector = catalog["Y1"].vector
    return [ExpectedSymmetry(vector=vector, kind="noether", case="I", source=source, holds=False)]


def bianchi_scenario(model: BianchiModel) -> Scenario:
    catalog = bianchi_symmetry_catalog(model.vacuum)
    metric = catalog.metric
    chart = metric.chart
    U = effective_potential(model, chart)
    noether, lie = TABLES[model.type](model.potential, model.d)

    expected = [time_translation_entry(metric, _source(model))]
    expected += _entries(noether, model, catalog, "noether")
    expected.append(
        ExpectedSymmetry(
            vector=SymmetryVector.time_translation(chart), kind="lie", case="autonomous", source=_source(model)
        )
    )
    expected += _entries(lie, model, catalog, "lie")
    expected += _negative_controls(model, catalog)

    dimension = metric.dimension
    box = SAMPLE_BOX.model_copy(update={"lower": SAMPLE_BOX.lower[:dimension], "upper": SAMPLE_BOX.upper[:dimension]})
    parameters = model.model_dump()
    name = f"bianchi:{model.type}:{model.potential}"
    if model.potential in ("constant", "exponential"):
        name += f":V0={format_number(model.V0)}"
    if model.potential == "exponential":
        name += f":d={format_number(model.d)}"
    if model.potential == "arbitrary":
        name += f":V={model.arbitrary}"

    return Scenario(
        name=name,
        family="bianchi",
        metric=metric,
        potential=U,
        force=ForceField.from_potential(metric, U),
        catalog=catalog,
        expected=expected,
        box=box,
        parameters=parameters,
        description=f"Bianchi {model.type} cosmology, {_source(model).split(' / ')[1]}",
    )


def generate_scenario(type: str = "I", potential: str = "vacuum", **parameters) -> Scenario:
    """Address form: `bianchi:IX:constant`, `bianchi:II:exponential:d=3` or `bianchi:I:arbitrary:arbitrary=phi^4`."""
    try:
        model = BianchiModel(type=str(type), potential=str(potential), **parameters)
    except ValidationError as exc:
        raise ScenarioError(f"Bad Bianchi model: {exc}") from exc
    return bianchi_scenario(model)
