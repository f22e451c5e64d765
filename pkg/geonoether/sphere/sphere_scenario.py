"""
Motion on the two dimensional sphere (K = 1) or hyperbolic plane (K = −1)

L = ½(φ̇² + Sinn²φ θ̇²) − V(θ, φ) in the chart (φ, θ). The Noether point symmetries beyond ∂t are generated by
the three non-gradient KVs, so a potential admits none, one, or (when constant) all three of them.
"""

import math
from typing import Callable

from pydantic import BaseModel, ConfigDict, Field

from geonoether.base import ScenarioError
from geonoether.collineation import sphere_killing_catalog
from geonoether.expr import Const
from geonoether.geometry import ExpressionLike, ForceField, SampleBox, to_expression
from geonoether.scenario import ExpectedSymmetry, Provenance, Scenario, combine, time_translation_entry


def default_box(curvature: int) -> SampleBox:
    upper_phi = 2.8 if curvature > 0 else 2.0
    return SampleBox(lower=[0.3, -3.0], upper=[upper_phi, 3.0])


class SphereRow(BaseModel):
    """One family V = F(u) of the rotational catalog, instantiated with F the identity."""

    model_config = ConfigDict(frozen=True)

    row: int
    family: str = Field(description="The argument u of F, in catalog notation")
    template: Callable[[int, int, int, int], str] = Field(description="(K, a, b, c) → potential text")
    generator: Callable[[int, int, int], dict[str, int]] = Field(description="(a, b, c) → KV coefficients")
    provenance: Provenance = "listed"
    theta: Callable[[int, int], tuple[float, float]] | None = Field(
        description="(a, b) → θ range of the sample box, when the default range meets a singularity", default=None
    )

    def potential(self, curvature: int, a: int = 1, b: int = 2, c: int = 1) -> str:
        return self.template(curvature, a, b, c)


SPHERE_ROWS = [
    SphereRow(
        row=1,
        family="cosθ Sinnφ",
        template=lambda K, a, b, c: "cos(theta)*Sinn(phi)",
        generator=lambda a, b, c: {"Y1": 1},
    ),
    SphereRow(
        row=2,
        family="sinθ Sinnφ",
        template=lambda K, a, b, c: "sin(theta)*Sinn(phi)",
        generator=lambda a, b, c: {"Y2": 1},
    ),
    SphereRow(row=3, family="φ", template=lambda K, a, b, c: "phi^2", generator=lambda a, b, c: {"Y3": 1}),
    SphereRow(
        row=4,
        family="(1 + tan²θ) / (Sinn²φ (a − b tanθ)²)",
        # same function, written without the poles of tanθ
        template=lambda K, a, b, c: f"1/(Sinn(phi)*({a}*cos(theta) - {b}*sin(theta)))^2",
        generator=lambda a, b, c: {"Y1": a, "Y2": b},
        theta=lambda a, b: (math.atan2(a, b) + 0.3, math.atan2(a, b) + math.pi - 0.3),
    ),
    SphereRow(
        row=5,
        family="a cosθ Sinnφ − K b Cosnφ",
        template=lambda K, a, b, c: f"{a}*cos(theta)*Sinn(phi) - ({K * b})*Cosn(phi)",
        generator=lambda a, b, c: {"Y1": a, "Y3": b},
    ),
    SphereRow(
        row=6,
        family="a sinθ Sinnφ − K b Cosnφ",
        template=lambda K, a, b, c: f"{a}*sin(theta)*Sinn(phi) - ({K * b})*Cosn(phi)",
        generator=lambda a, b, c: {"Y2": a, "Y3": -b},
        provenance="corrected",
    ),
    SphereRow(
        row=7,
        family="(a cosθ − b sinθ) Sinnφ − K c Cosnφ",
        template=lambda K, a, b, c: f"({a}*cos(theta) - {b}*sin(theta))*Sinn(phi) - ({K * c})*Cosn(phi)",
        generator=lambda a, b, c: {"Y1": a, "Y2": b, "Y3": c},
    ),
]


def sphere_row(row: int) -> SphereRow:
    for r in SPHERE_ROWS:
        if r.row == row:
            return r
    raise ScenarioError(f"No rotational catalog row {row}; rows are 1..{len(SPHERE_ROWS)}")


def sphere_scenario(K: int, V: ExpressionLike, *, box: SampleBox | None = None) -> Scenario:
    """Sphere (K = 1) or hyperbolic plane (K = −1) with potential V(θ, φ).

    Expected Noether symmetries are attached when V is a catalog row instance with its default parameters, or a
    constant (all three KVs).
    """
    if K not in (1, -1):
        raise ScenarioError(f"Curvature sign must be 1 or -1, got {K}")
    catalog = sphere_killing_catalog(K)
    metric = catalog.metric
    potential = to_expression(V, metric.chart, curvature=K)

    source = "rotations / energy"
    expected = [time_translation_entry(metric, source)]
    if isinstance(potential, Const):
        source = "rotations / constant potential"
        expected += [
            ExpectedSymmetry(vector=catalog[n].vector, kind="noether", case="I", source=source) for n in catalog.names
        ]
    else:
        for r in SPHERE_ROWS:
            if to_expression(r.potential(K), metric.chart, curvature=K) == potential:
                expected += _row_entries(r, K, 1, 2, 1)
                box = box or _row_box(r, K, 1, 2)
                break

    return Scenario(
        name=f"sphere:K={K}:V={potential}",
        family="sphere",
        metric=metric,
        potential=potential,
        force=ForceField.from_potential(metric, potential),
        catalog=catalog,
        expected=expected,
        box=box or default_box(K),
        parameters={"K": K, "V": str(potential)},
        description="Motion on the sphere" if K > 0 else "Motion on the hyperbolic plane",
    )


def _row_box(r: SphereRow, curvature: int, a: int, b: int) -> SampleBox:
    box = default_box(curvature)
    if r.theta is None:
        return box
    low, high = r.theta(a, b)
    return box.model_copy(update={"lower": [box.lower[0], low], "upper": [box.upper[0], high]})


def _row_entries(r: SphereRow, curvature: int, a: int, b: int, c: int) -> list[ExpectedSymmetry]:
    catalog = sphere_killing_catalog(curvature)
    vector = combine(catalog, r.generator(a, b, c))
    source = f"rotations / V = F({r.family})"
    return [ExpectedSymmetry(vector=vector, kind="noether", case="I", source=source, provenance=r.provenance)]


def sphere_row_scenario(row: int, K: int = 1, a: int = 1, b: int = 2, c: int = 1) -> Scenario:
    """Catalog row `row` with F the identity and parameters (a, b, c)."""
    r = sphere_row(row)
    if a == b == 0:
        raise ScenarioError("The rotational rows need a and b not both zero")
    text = r.potential(K, a, b, c)
    scenario = sphere_scenario(K, text, box=_row_box(r, K, a, b))
    metric = scenario.metric
    expected = [time_translation_entry(metric, "rotations / energy"), *_row_entries(r, K, a, b, c)]
    parameters = {"row": row, "K": K, "a": a, "b": b, "c": c}
    update = {"name": f"sphere:row={row}:K={K}", "expected": expected, "parameters": parameters}
    return scenario.model_copy(update=update)


def generate_scenario(K: int = 1, V: ExpressionLike | None = None, row: int | None = None, **parameters) -> Scenario:
    """Address form: `sphere:K=1:V=...` or `sphere:row=5:K=-1:a=2:b=1`."""
    if row is not None:
        return sphere_row_scenario(int(row), int(K), **{k: int(v) for k, v in parameters.items()})
    if parameters:
        raise ScenarioError(f"Unknown sphere parameters {sorted(parameters)}")
    return sphere_scenario(int(K), V if V is not None else 0)
