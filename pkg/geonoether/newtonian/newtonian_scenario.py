"""
Newtonian motion ẍ = F(x) in flat 2d or 3d Euclidean space

The catalog has four families of rows: two list a force P = −F admitting a Lie symmetry, two list a potential V
admitting a Noether symmetry. Each row is instantiated with concrete free functions over the coordinates (x, y, z),
with μ = x, ν = y, σ = z. In 2d the z terms are dropped.
"""

import math
from typing import Any, Callable, Literal

from pydantic import BaseModel, ConfigDict, Field

from geonoether.base import ScenarioError
from geonoether.collineation import flat_projective_catalog
from geonoether.geometry import ForceField, SampleBox, SymmetryVector
from geonoether.scenario import ExpectedSymmetry, Provenance, Scenario, format_number, time_translation_entry
from geonoether.symmetry import combination_name


NewtonianFamily = Literal["lie-first", "lie-second", "noether-first", "noether-second"]

FAMILY_TITLES = {
    "lie-first": "Newtonian Lie, first family",
    "lie-second": "Newtonian Lie, second family",
    "noether-first": "Newtonian Noether, first family",
    "noether-second": "Newtonian Noether, second family",
}

BOX_BOUNDS = (0.5, 2.0)


class Generator(BaseModel):
    """A generator of a row instance, as expression text over (t, x, y[, z])."""

    xi: str = "0"
    eta: list[str]
    name: str
    gauge: str = "0"
    case: Literal["autonomous", "I", "II", "lie"] = "lie"
    holds: bool = True
    provenance: Provenance = "listed"


class RowInstance(BaseModel):
    P: list[str] | None = Field(description="Force term of ẍ + P = 0, for the Lie families", default=None)
    potential: str | None = Field(description="V of L = T − V, for the Noether families", default=None)
    generators: list[Generator]


class NewtonianRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: NewtonianFamily
    row: int
    generator: str = Field(description="The row's generator in catalog notation")
    defaults: dict[str, float] = Field(description="Row parameters and their default values", default={})
    build: Callable[..., RowInstance] = Field(description="(n, **parameters) → RowInstance")

    @property
    def title(self) -> str:
        return f"{FAMILY_TITLES[self.family]} / {self.generator}"


# ======================================================================================================================
# EXPRESSION HELPERS
# ======================================================================================================================


def _pow(var: str, k: float) -> str:
    if k == 0:
        return "1"
    if k == 1:
        return var
    return f"{var}^({format_number(k)})"


def _coordinates(n: int) -> list[str]:
    return ["x", "y", "z"][:n]


def _radius_squared(n: int) -> str:
    return " + ".join(f"{c}^2" for c in _coordinates(n))


def _along_x(n: int, component: str) -> list[str]:
    return [component] + ["0"] * (n - 1)


def _dilation(n: int, factor: str = "") -> list[str]:
    return [f"{factor}{c}" for c in _coordinates(n)]


def _pick(n: int, three: list[str], two: list[str]) -> list[str]:
    return three if n == 3 else two


def _time_part(a: float) -> str:
    return f"{format_number(a)}*t" if a else "0"


# ======================================================================================================================
# LIE, FIRST FAMILY: (d/2) t∂t + Y
# ======================================================================================================================


def _lie_translation(n: int, d: float) -> RowInstance:
    e = f"exp(-{format_number(d)}*x)"
    P = _pick(n, [f"{e}*(1 + y^2)", f"{e}*z", e], [f"{e}*(1 + y^2)", e])
    name = combination_name({"S_x": 1}, d / 2)
    return RowInstance(P=P, generators=[Generator(xi=_time_part(d / 2), eta=_along_x(n, "1"), name=name)])


def _lie_rotation(n: int, d: float) -> RowInstance:
    if d != 0:
        raise ScenarioError("The rotation row is instantiated for d = 0 only (e^{-dθ} needs the polar angle)")
    r2 = "(x^2 + y^2)"
    P = _pick(n, [f"x*{r2}", f"y*{r2}", "z"], [f"x*{r2}", f"y*{r2}"])
    eta = _pick(n, ["y", "-x", "0"], ["y", "-x"])
    return RowInstance(P=P, generators=[Generator(eta=eta, name="X_xy")])


def _lie_dilation(n: int, d: float) -> RowInstance:
    # every component homogeneous of degree 1 − d
    P = _pick(
        n,
        [_pow("x", 1 - d), f"y*{_pow('x', -d)}", f"z^2*{_pow('x', -1 - d)}"],
        [_pow("x", 1 - d), f"y*{_pow('x', -d)}"],
    )
    name = combination_name({"H": 1}, d / 2)
    return RowInstance(P=P, generators=[Generator(xi=_time_part(d / 2), eta=_dilation(n), name=name)])


def _lie_axis_dilation(n: int, d: float) -> RowInstance:
    P = _pick(
        n,
        [f"{_pow('x', 1 - d)}*(1 + y^2)", f"z*{_pow('x', -d)}", "0"],
        [f"{_pow('x', 1 - d)}*(1 + y^2)", _pow("x", -d)],
    )
    name = combination_name({"A_xx": 1}, d / 2)
    return RowInstance(P=P, generators=[Generator(xi=_time_part(d / 2), eta=_along_x(n, "x"), name=name)])


def _lie_shear(n: int, d: float) -> RowInstance:
    # the exponential multiplies every component
    e = f"exp(-{format_number(d)}*x/y)"
    P = _pick(n, [f"{e}*((x/y)*z + 1)", f"{e}*z", f"{e}*y"], [f"{e}*(x*y + 1)", f"{e}*y^2"])
    name = combination_name({"A_xy": 1}, d / 2)
    generator = Generator(xi=_time_part(d / 2), eta=_along_x(n, "y"), name=name, provenance="corrected")
    return RowInstance(P=P, generators=[generator])


# ======================================================================================================================
# LIE, SECOND FAMILY: time-dependent generators
# ======================================================================================================================


def _lie_galilean(n: int) -> RowInstance:
    P = _pick(n, ["y*z", "1", "z^2"], ["y^2", "1"])
    return RowInstance(P=P, generators=[Generator(eta=_along_x(n, "t"), name="t∂x")])


def _lie_projective(n: int) -> RowInstance:
    P = _pick(n, ["x^(-3)", "y*x^(-4)", "z^2*x^(-5)"], ["x^(-3)", "y*x^(-4)"])
    return RowInstance(P=P, generators=[Generator(xi="t^2", eta=_dilation(n, "t*"), name="t²∂t + tH")])


def _exponential_translations(n: int, m: float) -> list[Generator]:
    c = format_number(math.sqrt(m))
    return [
        Generator(eta=_along_x(n, f"exp({c}*t)"), name="e^(t√m)∂x"),
        Generator(eta=_along_x(n, f"exp(-{c}*t)"), name="e^(-t√m)∂x"),
    ]


def _lie_oscillator(n: int, m: float) -> RowInstance:
    _check_positive(m)
    P = _pick(n, [f"-{format_number(m)}*x + 1", "z", "y"], [f"-{format_number(m)}*x + 1", "y"])
    return RowInstance(P=P, generators=_exponential_translations(n, m))


def _ermakov_generators(n: int, m: float, gauge: bool = False) -> list[Generator]:
    """(1/√m)e^{±t√m}∂t ± ½e^{±t√m}H, with gauge (√m/4)e^{±t√m}R² when built for the potential form."""
    c = math.sqrt(m)
    generators = []
    for sign, label in (("", "+"), ("-", "-")):
        e = f"exp({sign}{format_number(c)}*t)"
        generators.append(
            Generator(
                xi=f"{e}/{format_number(c)}",
                eta=_dilation(n, f"{sign}{e}/2*"),
                name=f"e^({label}t√m)(∂t/√m {label} H/2)",
                gauge=f"{format_number(c / 4)}*{e}*({_radius_squared(n)})" if gauge else "0",
                case="II" if gauge else "lie",
                provenance="corrected",
            )
        )
    return generators


def _lie_ermakov(n: int, m: float, force_m: float | None = None) -> RowInstance:
    _check_positive(m)
    quarter = format_number((force_m if force_m is not None else m) / 4)
    P = [f"-{quarter}*{c} + {c}^(-3)" for c in _coordinates(n)]
    generators = _ermakov_generators(n, m)
    if force_m is not None and force_m != m:
        generators = [g.model_copy(update={"holds": False}) for g in generators]
    return RowInstance(P=P, generators=generators)


# ======================================================================================================================
# NOETHER, FIRST FAMILY: (d/2) t∂t + Y with the d = 0 and d ≠ 2 columns
# ======================================================================================================================


def _check_column(d: float) -> None:
    if d == 2:
        raise ScenarioError("The first Noether family has no d = 2 column")


def _noether_translation(n: int, d: float) -> RowInstance:
    _check_column(d)
    if d == 0:
        V = _pick(n, ["x + y^2 + z"], ["x + y^2"])[0]
        return RowInstance(potential=V, generators=[Generator(eta=_along_x(n, "1"), name="S_x", gauge="-t", case="I")])
    # (d/2) t∂t + ∂x is outside the homothetic algebra
    V = f"exp(-{format_number(d)}*x)*(1 + y^2)"
    name = combination_name({"S_x": 1}, d / 2)
    generator = Generator(xi=_time_part(d / 2), eta=_along_x(n, "1"), name=name, case="I", holds=False)
    return RowInstance(potential=V, generators=[generator])


def _noether_rotation(n: int, d: float) -> RowInstance:
    _check_column(d)
    if d != 0:
        raise ScenarioError("The rotation row is instantiated for d = 0 only (e^{-dθ} needs the polar angle)")
    V = _pick(n, ["(x^2 + y^2)*z"], ["(x^2 + y^2)^2"])[0]
    eta = _pick(n, ["y", "-x", "0"], ["y", "-x"])
    return RowInstance(potential=V, generators=[Generator(eta=eta, name="X_xy", case="I")])


def _noether_dilation(n: int, d: float) -> RowInstance:
    _check_column(d)
    V = f"{_pow('x', 2 - d)} + y^2*{_pow('x', -d)}"
    name = combination_name({"H": 1}, d / 2)
    generator = Generator(xi=_time_part(d / 2), eta=_dilation(n), name=name, case="I", holds=d == 4)
    return RowInstance(potential=V, generators=[generator])


def _noether_axis_dilation(n: int, d: float) -> RowInstance:
    _check_column(d)
    if d != 0:
        raise ScenarioError("The x_μ∂_μ row has no potential for d ≠ 0")
    V = _pick(n, ["x^2 + y*z"], ["x^2 + y"])[0]
    return RowInstance(potential=V, generators=[Generator(eta=_along_x(n, "x"), name="A_xx", case="I", holds=False)])


def _noether_shear(n: int, d: float) -> RowInstance:
    _check_column(d)
    if d != 0:
        raise ScenarioError("The x_ν∂_μ row has no potential for d ≠ 0")
    V = _pick(n, ["x + (x^2 + y^2) + z^2"], ["x + (x^2 + y^2)"])[0]
    return RowInstance(potential=V, generators=[Generator(eta=_along_x(n, "y"), name="A_xy", case="I", holds=False)])


# ======================================================================================================================
# NOETHER, SECOND FAMILY: Case II generators
# ======================================================================================================================


def _noether_galilean(n: int) -> RowInstance:
    generator = Generator(eta=_along_x(n, "t"), name="t∂x", gauge="x - t^2/2", case="II")
    return RowInstance(potential="x + y^2", generators=[generator])


def _noether_projective(n: int) -> RowInstance:
    V = _pick(n, ["x^(-2) + y*z*x^(-4)"], ["x^(-2) + y^2*x^(-4)"])[0]
    gauge = f"({_radius_squared(n)})/2"
    generator = Generator(xi="t^2", eta=_dilation(n, "t*"), name="t²∂t + tH", gauge=gauge, case="II")
    return RowInstance(potential=V, generators=[generator])


def _noether_oscillator(n: int, m: float) -> RowInstance:
    _check_positive(m)
    c = math.sqrt(m)
    V = _pick(n, [f"-{format_number(m / 2)}*x^2 + x + y*z"], [f"-{format_number(m / 2)}*x^2 + x + y^2"])[0]
    plus, minus = _exponential_translations(n, m)
    # G = ±e^{±ct}(c x − 1/c)
    linear = f"({format_number(c)}*x - {format_number(1 / c)})"
    generators = [
        plus.model_copy(update={"gauge": f"exp({format_number(c)}*t)*{linear}", "case": "II"}),
        minus.model_copy(update={"gauge": f"-exp(-{format_number(c)}*t)*{linear}", "case": "II"}),
    ]
    return RowInstance(potential=V, generators=generators)


def _noether_ermakov(n: int, m: float) -> RowInstance:
    _check_positive(m)
    V = f"-{format_number(m / 8)}*({_radius_squared(n)}) + x^(-2)"
    return RowInstance(potential=V, generators=_ermakov_generators(n, m, gauge=True))


def _check_positive(m: float) -> None:
    if m <= 0:
        raise ScenarioError(f"The exponential rows need m > 0, got {m}")


NEWTONIAN_ROWS = [
    NewtonianRow(family="lie-first", row=1, generator="(d/2)t∂t + ∂μ", defaults={"d": 2}, build=_lie_translation),
    NewtonianRow(family="lie-first", row=2, generator="(d/2)t∂t + ∂θ", defaults={"d": 0}, build=_lie_rotation),
    NewtonianRow(family="lie-first", row=3, generator="(d/2)t∂t + R∂R", defaults={"d": 3}, build=_lie_dilation),
    NewtonianRow(
        family="lie-first", row=4, generator="(d/2)t∂t + x_μ∂_μ", defaults={"d": 2}, build=_lie_axis_dilation
    ),
    NewtonianRow(family="lie-first", row=5, generator="(d/2)t∂t + x_ν∂_μ", defaults={"d": 2}, build=_lie_shear),
    NewtonianRow(family="lie-second", row=1, generator="t∂μ", build=_lie_galilean),
    NewtonianRow(family="lie-second", row=2, generator="t²∂t + tR∂R", build=_lie_projective),
    NewtonianRow(family="lie-second", row=3, generator="e^{±t√m}∂μ", defaults={"m": 1}, build=_lie_oscillator),
    NewtonianRow(
        family="lie-second",
        row=4,
        generator="(1/√m)e^{±t√m}∂t ± ½e^{±t√m}R∂R",
        defaults={"m": 4},
        build=_lie_ermakov,
    ),
    NewtonianRow(
        family="noether-first", row=1, generator="(d/2)t∂t + ∂μ", defaults={"d": 0}, build=_noether_translation
    ),
    NewtonianRow(
        family="noether-first", row=2, generator="(d/2)t∂t + ∂θ", defaults={"d": 0}, build=_noether_rotation
    ),
    NewtonianRow(
        family="noether-first", row=3, generator="(d/2)t∂t + R∂R", defaults={"d": 4}, build=_noether_dilation
    ),
    NewtonianRow(
        family="noether-first",
        row=4,
        generator="(d/2)t∂t + x_μ∂_μ",
        defaults={"d": 0},
        build=_noether_axis_dilation,
    ),
    NewtonianRow(
        family="noether-first", row=5, generator="(d/2)t∂t + x_ν∂_μ", defaults={"d": 0}, build=_noether_shear
    ),
    NewtonianRow(family="noether-second", row=1, generator="t∂μ", build=_noether_galilean),
    NewtonianRow(family="noether-second", row=2, generator="t²∂t + tR∂R", build=_noether_projective),
    NewtonianRow(
        family="noether-second", row=3, generator="e^{±t√m}∂μ", defaults={"m": 1}, build=_noether_oscillator
    ),
    NewtonianRow(
        family="noether-second",
        row=4,
        generator="(1/√m)e^{±t√m}∂t ± ½e^{±t√m}R∂R",
        defaults={"m": 4},
        build=_noether_ermakov,
    ),
]


def newtonian_row(family: str, row: int) -> NewtonianRow:
    for r in NEWTONIAN_ROWS:
        if r.family == family and r.row == row:
            return r
    families = sorted(FAMILY_TITLES)
    raise ScenarioError(f"No Newtonian row {family}:{row}; families are {families} with rows 1..5 or 1..4")


# ======================================================================================================================
# SCENARIOS
# ======================================================================================================================


def _scenario_from_instance(
    name: str, n: int, title: str, instance: RowInstance, parameters: dict[str, Any], description: str
) -> Scenario:
    catalog = flat_projective_catalog(n)
    metric = catalog.metric
    chart = metric.chart
    if instance.potential is not None:
        force = ForceField.from_potential(metric, instance.potential)
        potential = force.potential
        expected = [time_translation_entry(metric, f"{title} / energy")]
        kind = "noether"
    else:
        force = ForceField(chart, [f"-({p})" for p in instance.P or []])
        potential = None
        expected = [
            ExpectedSymmetry(
                vector=SymmetryVector.time_translation(chart), kind="lie", case="autonomous", source=title
            )
        ]
        kind = "lie"

    for g in instance.generators:
        expected.append(
            ExpectedSymmetry(
                vector=SymmetryVector(chart, g.xi, g.eta, g.name),
                kind=kind,
                case=g.case,
                gauge=chart.parse(g.gauge),
                source=title,
                provenance=g.provenance,
                holds=g.holds,
            )
        )

    low, high = BOX_BOUNDS
    return Scenario(
        name=name,
        family="newtonian",
        metric=metric,
        potential=potential,
        force=force,
        catalog=catalog,
        expected=expected,
        box=SampleBox(lower=[low] * n, upper=[high] * n),
        parameters=parameters,
        description=description,
    )


def _check_dimension(n: int) -> None:
    if n not in (2, 3):
        raise ScenarioError(f"Newtonian rows are cataloged in 2 or 3 dimensions, got n={n}")


def newtonian_scenario(family: str, row: int, n: int = 3, **parameters: float) -> Scenario:
    """Row `row` of a Newtonian catalog family in n = 2 or 3 dimensions.

    Parameters default to the row's representative instance (`d` for the first families, `m` for the
    exponential rows of the second).
    """
    _check_dimension(n)
    r = newtonian_row(family, row)
    unknown = sorted(set(parameters) - set(r.defaults))
    if unknown:
        raise ScenarioError(f"Row {family}:{row} takes {sorted(r.defaults) or 'no parameters'}, got {unknown}")
    values = {**r.defaults, **{k: float(v) for k, v in parameters.items()}}
    instance = r.build(n, **values)
    suffix = "".join(f":{k}={format_number(v)}" for k, v in values.items())
    return _scenario_from_instance(
        f"newtonian:{family}:{row}:n={n}{suffix}",
        n,
        r.title,
        instance,
        {"family": family, "row": row, "n": n, **values},
        FAMILY_TITLES[r.family],
    )


def ermakov_scenario(m: float = 4, n: int = 3, force_m: float | None = None) -> Scenario:
    """ẍ^i = (m/4)x^i − (x^i)^{-3}, with the exponential Lie generators built for `m`.

    `force_m` builds the force with a different constant, for which the generators must fail.
    """
    _check_dimension(n)
    instance = _lie_ermakov(n, float(m), None if force_m is None else float(force_m))
    parameters = {"m": m, "n": n} | ({"force_m": force_m} if force_m is not None else {})
    suffix = f":force_m={format_number(force_m)}" if force_m is not None else ""
    return _scenario_from_instance(
        f"ermakov:m={format_number(m)}:n={n}{suffix}",
        n,
        f"{FAMILY_TITLES['lie-second']} / Ermakov system",
        instance,
        parameters,
        "Ermakov system",
    )


def generate_scenario(family: str, row: int, n: int = 3, **parameters) -> Scenario:
    """Address form: `newtonian:noether-second:1` or `newtonian:lie-first:3:d=5:n=2`."""
    return newtonian_scenario(str(family), int(row), int(n), **parameters)


def generate_ermakov_scenario(m: float = 4, n: int = 3, force_m: float | None = None) -> Scenario:
    """Address form: `ermakov:m=4` or `ermakov:m=4:force_m=4.1`."""
    return ermakov_scenario(m, int(n), force_m)
