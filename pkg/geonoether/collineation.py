"""Collineation algebras: cataloged generators, numeric verification of claims, exact determining-equation solver.

A collineation claim states that a time-independent vector field X satisfies one defining equation:

    KV   ℒ_X g = 0                  AC   ℒ_X Γ = 0
    HV   ℒ_X g = 2ψ g, ψ constant   PC   ℒ_X Γ^i_jk = δ^i_j φ,k + δ^i_k φ,j
    CKV  ℒ_X g = 2ψ(x) g            SPC  as PC with φ;jk = 0

plus, optionally, that its lowered form g_ij X^j is the gradient of a stated function.
"""

import itertools
from fractions import Fraction
from functools import singledispatch
from typing import Iterator, Literal, Mapping, Sequence

import numpy as np
import sympy
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from sympy.polys.monomials import itermonomials
from sympy.polys.orderings import monomial_key

from geonoether.base import ConditionReport, DimensionMismatchError, NonConstantMetricError, ResidualBlock
from geonoether.expr import (
    ONE,
    ZERO,
    Add,
    Const,
    CoordinateChart,
    Div,
    Expression,
    Function,
    IntPow,
    Mul,
    Neg,
    RealPow,
    Sub,
    Time,
    Var,
    cos,
    cosn,
    div,
    exp,
    is_zero,
    mul,
    neg,
    postvisitor,
    power,
    sin,
    sinn,
    total,
)
from geonoether.geometry import (
    ExpressionLike,
    Metric,
    Samples,
    ScalarField,
    SymmetryVector,
    lie_derivative_connection_values,
    lie_derivative_metric_values,
    usable_samples,
)


CollineationKind = Literal["KV", "HV", "CKV", "AC", "PC", "SPC"]

METRIC_KINDS = ("KV", "HV", "CKV")
CONNECTION_KINDS = ("AC", "PC", "SPC")
SOLVABLE_KINDS = ("KV", "HV", "AC", "SPC")

# smallest polynomial degree at which the flat-space generators of each kind appear
MINIMUM_DEGREE = {"KV": 1, "HV": 1, "AC": 1, "SPC": 2}


class CollineationClaim(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    vector: SymmetryVector = Field(description="Time-independent vector field")
    kind: CollineationKind = Field(description="Defining equation the vector is claimed to satisfy")
    psi: Expression = Field(description="Homothetic (constant) or conformal factor; zero for KVs", default=ZERO)
    phi: Expression = Field(description="Projective function of PC/SPC claims; zero otherwise", default=ZERO)
    gradient_function: Expression | None = Field(
        description="Function whose differential is g_ij X^j, when the vector is claimed gradient", default=None
    )

    @model_validator(mode="after")
    def _check_kind(self) -> "CollineationClaim":
        if self.vector.uses_time:
            raise ValueError(f"Collineation {self.name} must not depend on t")
        if self.kind == "KV" and not is_zero(self.psi):
            raise ValueError(f"Killing vector {self.name} cannot carry a homothetic factor")
        if self.kind == "HV" and not isinstance(self.psi, Const):
            raise ValueError(f"Homothetic factor of {self.name} must be a constant")
        if self.kind in ("KV", "HV", "CKV", "AC") and not is_zero(self.phi):
            raise ValueError(f"Only projective collineations carry a projective function, not {self.kind}")
        return self

    @property
    def name(self) -> str:
        return self.vector.name

    @property
    def is_gradient(self) -> bool:
        return self.gradient_function is not None

    @property
    def psi_value(self) -> float:
        """ψ of a KV or HV claim as a float."""
        if not isinstance(self.psi, Const):
            raise ValueError(f"{self.name} has a non-constant factor {self.psi}")
        return float(self.psi.value)


class CollineationBasis(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    claims: list[CollineationClaim]
    metric: Metric
    kind: CollineationKind | None = Field(description="Kind solved for; None for a catalog of mixed kinds")
    provenance: Literal["catalog", "solver"]

    def __len__(self) -> int:
        return len(self.claims)

    def __iter__(self) -> Iterator[CollineationClaim]:  # type: ignore[override]
        return iter(self.claims)

    def __getitem__(self, name: str) -> CollineationClaim:
        for claim in self.claims:
            if claim.name == name:
                return claim
        raise KeyError(f"No collineation named {name!r} in {[c.name for c in self.claims]}")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.claims]

    def of_kind(self, *kinds: CollineationKind) -> list[CollineationClaim]:
        return [c for c in self.claims if c.kind in kinds]

    def homothetic_algebra(self) -> list[CollineationClaim]:
        return self.of_kind("KV", "HV")

    def counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for claim in self.claims:
            counts[claim.kind] = counts.get(claim.kind, 0) + 1
        return counts

    def rank(self, samples: Samples) -> int:
        """Numeric rank of the claims' component values stacked over the sample points."""
        if not self.claims:
            return 0
        rows = [c.vector.jet(samples.points, samples.times).eta.reshape(-1) for c in self.claims]
        return int(np.linalg.matrix_rank(np.array(rows)))

    def is_independent(self, samples: Samples) -> bool:
        return self.rank(samples) == len(self.claims)


# ======================================================================================================================
# VERIFICATION
# ======================================================================================================================


class CollineationReport(ConditionReport):
    kind: CollineationKind


def verify_collineation(
    claim: CollineationClaim, metric: Metric, samples: Samples, tol: float = 1e-8
) -> CollineationReport:
    """Residuals of the claim's defining equation (and gradient statement) at the sample points."""
    vector = claim.vector
    if vector.chart != metric.chart:
        raise DimensionMismatchError(f"{claim.name} lives on {vector.chart.names}, metric on {metric.chart.names}")
    n = metric.dimension
    points, times = samples
    jet = vector.jet(points, times)
    g = metric.values(points)

    residuals: dict[str, np.ndarray] = {}
    if claim.kind in METRIC_KINDS:
        psi, _, _ = ScalarField(claim.psi, n).values(points)
        lie = lie_derivative_metric_values(jet, g, metric.derivative_values(points))
        residuals["metric"] = lie - 2 * psi[:, None, None] * g
    else:
        connection = metric.christoffel
        gamma = connection.values(points)
        _, dphi, ddphi = ScalarField(claim.phi, n).values(points)
        delta = np.eye(n)
        expected = np.einsum("ij,nk->nijk", delta, dphi) + np.einsum("ik,nj->nijk", delta, dphi)
        lie = lie_derivative_connection_values(jet, gamma, connection.derivative_values(points))
        residuals["connection"] = lie - expected
        if claim.kind == "SPC":
            residuals["projective_hessian"] = ddphi - np.einsum("nmjk,nm->njk", gamma, dphi)

    if claim.gradient_function is not None:
        _, dfunction, _ = ScalarField(claim.gradient_function, n).values(points)
        residuals["gradient"] = np.einsum("nij,nj->ni", g, jet.eta) - dfunction

    mask = usable_samples(samples, claim.name, *residuals.values())
    report = CollineationReport(
        subject=claim.name,
        kind=claim.kind,
        blocks=[ResidualBlock.from_values(name, values[mask]) for name, values in residuals.items()],
        tol=tol,
        evaluated=int(mask.sum()),
        skipped=int((~mask).sum()),
    )
    verdict = "pass" if report.passed else "fail"
    logger.debug(f"{claim.kind} {claim.name}: max residual {report.maximum:.3e} ({verdict})")
    return report


def verify_basis(basis: CollineationBasis, samples: Samples, tol: float = 1e-8) -> list[CollineationReport]:
    return [verify_collineation(claim, basis.metric, samples, tol) for claim in basis]


def bracket_residual(
    basis: CollineationBasis,
    structure: Mapping[tuple[str, str], Mapping[str, ExpressionLike]],
    samples: Samples,
) -> float:
    """Largest deviation of [Y_a, Y_b] from the stated combination Σ c_k Y_k over the samples."""
    worst = 0.0
    for (a, b), combination in structure.items():
        bracket = basis[a].vector.bracket(basis[b].vector)
        expected = (
            SymmetryVector.combination(list(combination.values()), [basis[k].vector for k in combination])
            if combination
            else SymmetryVector.spatial(bracket.chart, [ZERO] * bracket.dimension)
        )
        difference = (bracket - expected).jet(samples.points, samples.times).eta
        mask = usable_samples(samples, f"[{a}, {b}]", difference)
        worst = max(worst, float(np.abs(difference[mask]).max(initial=0.0)))
    return worst


# ======================================================================================================================
# CATALOGS
# ======================================================================================================================


def flat_projective_catalog(n: int, signature: Sequence[int] | None = None) -> CollineationBasis:
    """Projective algebra of a flat metric diag(signature) in Cartesian coordinates.

    Generators, with x_J = g_JJ x^J the lowered coordinates:

    - S_I = ∂_I, gradient KVs (function x_I);
    - X_IJ = x_J ∂_I − x_I ∂_J, non-gradient KVs (rotations, or boosts in Lorentzian planes);
    - H = x^i ∂_i, gradient HV with ψ = 1 (function ½ g_ij x^i x^j);
    - A_IJ = x^J ∂_I, affine collineations (A_II gradient);
    - P_I = x^I H, special projective collineations with φ = x^I.
    """
    if n < 2:
        raise ValueError(f"Flat projective catalog needs n >= 2, got {n}")
    signature = list(signature) if signature is not None else [1] * n
    if len(signature) != n or any(s not in (1, -1) for s in signature):
        raise ValueError(f"Signature must hold {n} entries of ±1, got {signature}")

    metric = Metric.flat(signature)
    chart = metric.chart
    x = chart.variables()
    names = chart.names
    g = [Const(s) for s in signature]
    lowered = [mul(g[i], x[i]) for i in range(n)]
    half = Const(Fraction(1, 2))

    def field(components: dict[int, Expression]) -> list[Expression]:
        return [components.get(i, ZERO) for i in range(n)]

    claims: list[CollineationClaim] = []
    for i in range(n):
        claims.append(
            CollineationClaim(
                vector=SymmetryVector.spatial(chart, field({i: ONE}), f"S_{names[i]}"),
                kind="KV",
                gradient_function=lowered[i],
            )
        )
    for i, j in itertools.combinations(range(n), 2):
        claims.append(
            CollineationClaim(
                vector=SymmetryVector.spatial(
                    chart, field({i: lowered[j], j: neg(lowered[i])}), f"X_{names[i]}{names[j]}"
                ),
                kind="KV",
            )
        )
    claims.append(
        CollineationClaim(
            vector=SymmetryVector.spatial(chart, list(x), "H"),
            kind="HV",
            psi=ONE,
            gradient_function=total(mul(half, mul(lowered[i], x[i])) for i in range(n)),
        )
    )
    for i, j in itertools.product(range(n), repeat=2):
        claims.append(
            CollineationClaim(
                vector=SymmetryVector.spatial(chart, field({i: x[j]}), f"A_{names[i]}{names[j]}"),
                kind="AC",
                gradient_function=mul(half, mul(lowered[i], x[i])) if i == j else None,
            )
        )
    for i in range(n):
        claims.append(
            CollineationClaim(
                vector=SymmetryVector.spatial(chart, [mul(x[i], x[k]) for k in range(n)], f"P_{names[i]}"),
                kind="SPC",
                phi=x[i],
            )
        )
    return CollineationBasis(claims=claims, metric=metric, kind=None, provenance="catalog")


def sphere_metric(curvature: int) -> Metric:
    """g = diag(1, Sinn²φ) in the chart (φ, θ), singular where Sinn φ = 0."""
    if curvature not in (1, -1):
        raise ValueError(f"Curvature sign must be 1 or -1, got {curvature}")
    chart = CoordinateChart(["phi", "theta"])
    phi = chart.variable("phi")
    chart = chart.with_excluded_locus(sinn(phi, curvature))
    return Metric.diagonal(chart, [ONE, power(sinn(phi, curvature), 2)], [1, 1])


def sphere_killing_catalog(curvature: int) -> CollineationBasis:
    """Y₁ = sinθ ∂φ + cosθ (Cosnφ/Sinnφ) ∂θ, Y₂ = cosθ ∂φ − sinθ (Cosnφ/Sinnφ) ∂θ, Y₃ = ∂θ."""
    metric = sphere_metric(curvature)
    chart = metric.chart
    phi, theta = chart.variables()
    ratio = div(cosn(phi, curvature), sinn(phi, curvature))
    vectors = [
        SymmetryVector.spatial(chart, [sin(theta), mul(cos(theta), ratio)], "Y1"),
        SymmetryVector.spatial(chart, [cos(theta), neg(mul(sin(theta), ratio))], "Y2"),
        SymmetryVector.spatial(chart, [ZERO, ONE], "Y3"),
    ]
    claims = [CollineationClaim(vector=v, kind="KV") for v in vectors]
    return CollineationBasis(claims=claims, metric=metric, kind="KV", provenance="catalog")


def sphere_structure_constants(curvature: int) -> dict[tuple[str, str], dict[str, int]]:
    return {
        ("Y1", "Y2"): {"Y3": curvature},
        ("Y2", "Y3"): {"Y1": 1},
        ("Y3", "Y1"): {"Y2": 1},
    }


BIANCHI_COORDINATES = ("lambda", "b1", "b2", "phi")
BIANCHI_METRIC_FACTORS = (12, -3, -3, -2)


def bianchi_metric(vacuum: bool = False) -> Metric:
    """e^{3λ} diag(12, −3, −3, −2) over (λ, β₁, β₂, φ); the vacuum models drop φ."""
    dimension = 3 if vacuum else 4
    chart = CoordinateChart(BIANCHI_COORDINATES[:dimension])
    scale = exp(mul(Const(3), chart.variable("lambda")))
    return Metric.diagonal(
        chart, [mul(Const(f), scale) for f in BIANCHI_METRIC_FACTORS[:dimension]], [1, -1, -1, -1][:dimension]
    )


def bianchi_symmetry_catalog(vacuum: bool = False) -> CollineationBasis:
    """Y¹ … Y⁶ (non-gradient KVs) and the gradient HV H = (2/3)∂λ with ψ = 1 and function (8/3)e^{3λ}.

    In the vacuum chart (λ, β₁, β₂) only Y¹, Y², Y⁴ and H exist.
    """
    metric = bianchi_metric(vacuum)
    chart = metric.chart
    lam, b1, b2 = (chart.variable(name) for name in ("lambda", "b1", "b2"))
    three_halves = Const(Fraction(3, 2))

    def field(name: str, **components: Expression) -> SymmetryVector:
        return SymmetryVector.spatial(chart, [components.get(c, ZERO) for c in chart.names], name)

    vectors = [field("Y1", b1=ONE), field("Y2", b2=ONE)]
    if not vacuum:
        vectors.append(field("Y3", phi=ONE))
    vectors.append(field("Y4", b1=b2, b2=neg(b1)))
    if not vacuum:
        phi = chart.variable("phi")
        vectors.append(field("Y5", b1=phi, phi=neg(mul(three_halves, b1))))
        vectors.append(field("Y6", b2=phi, phi=neg(mul(three_halves, b2))))

    claims = [CollineationClaim(vector=v, kind="KV") for v in vectors]
    claims.append(
        CollineationClaim(
            vector=field("H", **{"lambda": Const(Fraction(2, 3))}),
            kind="HV",
            psi=ONE,
            gradient_function=mul(Const(Fraction(8, 3)), exp(mul(Const(3), lam))),
        )
    )
    return CollineationBasis(claims=claims, metric=metric, kind=None, provenance="catalog")


# ======================================================================================================================
# EXACT SOLVER
# ======================================================================================================================


@singledispatch
def _sympy_node(e: Expression, *operands, symbols):
    raise NotImplementedError(f"No sympy form for a {type(e).__name__}")


@_sympy_node.register
def _(e: Const, *operands, symbols):
    if isinstance(e.value, Fraction):
        return sympy.Rational(e.value.numerator, e.value.denominator)
    return sympy.Rational(e.value)


@_sympy_node.register
def _(e: Var, *operands, symbols):
    return symbols[e.index]


@_sympy_node.register
def _(e: Time, *operands, symbols):
    return sympy.Symbol("t")


@_sympy_node.register
def _(e: Neg, a, *, symbols):
    return -a


@_sympy_node.register
def _(e: Add, a, b, *, symbols):
    return a + b


@_sympy_node.register
def _(e: Sub, a, b, *, symbols):
    return a - b


@_sympy_node.register
def _(e: Mul, a, b, *, symbols):
    return a * b


@_sympy_node.register
def _(e: Div, a, b, *, symbols):
    return a / b


@_sympy_node.register
def _(e: IntPow, a, *, symbols):
    return a**e.exponent


@_sympy_node.register
def _(e: RealPow, a, b, *, symbols):
    return a**b


_SYMPY_FUNCTIONS = {
    "sin": sympy.sin,
    "cos": sympy.cos,
    "sinh": sympy.sinh,
    "cosh": sympy.cosh,
    "tan": sympy.tan,
    "exp": sympy.exp,
    "ln": sympy.log,
    "sqrt": sympy.sqrt,
}


@_sympy_node.register
def _(e: Function, a, *, symbols):
    return _SYMPY_FUNCTIONS[e.name](a)


def to_sympy(e: Expression, symbols: Sequence[sympy.Symbol]) -> sympy.Expr:
    return postvisitor(e, _sympy_node, symbols=symbols)


def _fraction(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


class _Ansatz:
    """Polynomial components X^i = Σ_α c_iα x^α of degree <= d, monomials in graded lexicographic order."""

    def __init__(self, chart: CoordinateChart, degree: int):
        self.chart = chart
        self.symbols = sympy.symbols(f"x0:{chart.dimension}")
        monomials = sorted(itermonomials(self.symbols, degree), key=monomial_key("grlex", list(self.symbols)))
        self.exponents = [sympy.Poly(m, *self.symbols).monoms()[0] for m in monomials]
        self.monomials = monomials
        n, k = chart.dimension, len(monomials)
        self.unknowns = [sympy.Symbol(f"c_{i}_{a}") for i in range(n) for a in range(k)]
        self.components = [sum(self.unknowns[i * k + a] * monomials[a] for a in range(k)) for i in range(n)]

    @property
    def size(self) -> int:
        return len(self.unknowns)

    def polynomial(self, coefficients: Sequence) -> list[Expression]:
        """Components of the field whose ansatz coefficients are `coefficients`."""
        k = len(self.monomials)
        x = self.chart.variables()
        components = []
        for i in range(self.chart.dimension):
            terms = []
            for a, exponents in enumerate(self.exponents):
                c = _fraction(coefficients[i * k + a])
                if c == 0:
                    continue
                monomial = ONE
                for var, e in zip(x, exponents):
                    monomial = mul(monomial, power(var, e))
                terms.append(mul(Const(c), monomial))
            components.append(total(terms))
        return components

    def coefficients(self, vector: SymmetryVector) -> list[sympy.Rational]:
        """Ansatz coefficients of a polynomial vector field; raises if it is not in the ansatz space."""
        index = {e: a for a, e in enumerate(self.exponents)}
        row = [sympy.Integer(0)] * self.size
        k = len(self.monomials)
        for i, component in enumerate(vector.eta):
            poly = sympy.Poly(sympy.expand(to_sympy(component, self.symbols)), *self.symbols)
            for exponents, c in poly.terms():
                if exponents not in index:
                    raise ValueError(f"{vector.name} has a monomial of degree {sum(exponents)} outside the ansatz")
                row[i * k + index[exponents]] = sympy.Rational(c)
        return row


def _constant_matrix(m: Metric) -> sympy.Matrix:
    if not m.is_constant:
        raise NonConstantMetricError(f"Determining equations are solved for constant metrics only: {m}")
    return sympy.Matrix(m.dimension, m.dimension, lambda i, j: to_sympy(m.components[i][j], ()))


def _solution_rows(equations: list[sympy.Expr], unknowns: list[sympy.Symbol]) -> sympy.Matrix:
    """Rows spanning the solution space of the homogeneous linear system."""
    equations = [e for e in equations if e != 0]
    if not equations:
        return sympy.eye(len(unknowns))
    matrix, _ = sympy.linear_eq_to_matrix(equations, unknowns)
    nullspace = matrix.nullspace()
    if not nullspace:
        return sympy.zeros(0, len(unknowns))
    return sympy.Matrix.hstack(*nullspace).T


def _rref(rows: sympy.Matrix) -> tuple[sympy.Matrix, tuple[int, ...]]:
    if rows.rows == 0:
        return rows, ()
    reduced, pivots = rows.rref()
    return reduced[: len(pivots), :], tuple(pivots)


def _complement(sub: sympy.Matrix, full: sympy.Matrix) -> list[sympy.Matrix]:
    """Rows of rref(sub + full) whose pivots are not pivots of rref(sub): a basis of full modulo sub."""
    _, sub_pivots = _rref(sub)
    reduced, pivots = _rref(sympy.Matrix.vstack(sub, full) if sub.rows else full)
    return [reduced.row(r) for r, p in enumerate(pivots) if p not in sub_pivots]


def _determining_equations(
    kind: str, g: sympy.Matrix, ansatz: _Ansatz, extras: list[sympy.Symbol]
) -> list[sympy.Expr]:
    n = g.rows
    x, X = ansatz.symbols, ansatz.components
    expressions = []
    if kind in ("KV", "HV"):
        for i in range(n):
            for j in range(i, n):
                lie = sum(g[k, j] * sympy.diff(X[k], x[i]) + g[i, k] * sympy.diff(X[k], x[j]) for k in range(n))
                expressions.append(lie - (2 * extras[0] * g[i, j] if kind == "HV" else 0))
    else:
        for i in range(n):
            for j in range(n):
                for k in range(j, n):
                    second = sympy.diff(X[i], x[j], x[k])
                    if kind == "SPC":
                        second -= (extras[k] if i == j else 0) + (extras[j] if i == k else 0)
                    expressions.append(second)

    equations = []
    for e in expressions:
        e = sympy.expand(e)
        if e == 0:
            continue
        equations.extend(sympy.Poly(e, *x).coeffs())
    return equations


def solve_determining_equations(m: Metric, kind: str, max_degree: int = 2) -> CollineationBasis:
    """Exact basis of the collineations of `kind` of a constant metric, with polynomial components.

    Each kind is reported modulo the smaller algebra it contains: KVs in full, the HV modulo KVs, ACs modulo
    translations (the linear part, n² fields) and SPCs modulo ACs. The basis rows are in reduced row echelon
    form over the ansatz coefficients.
    """
    if kind not in SOLVABLE_KINDS:
        raise ValueError(f"Cannot solve for {kind}; choose one of {SOLVABLE_KINDS}")
    if max_degree < 0:
        raise ValueError(f"max_degree must be non-negative, got {max_degree}")
    if max_degree < MINIMUM_DEGREE[kind]:
        logger.warning(f"Degree {max_degree} is below the {MINIMUM_DEGREE[kind]} needed for flat-space {kind}s")

    g = _constant_matrix(m)
    n = m.dimension
    ansatz = _Ansatz(m.chart, max_degree)
    size = ansatz.size
    if kind == "HV":
        extras = [sympy.Symbol("psi")]
    elif kind == "SPC":
        extras = list(sympy.symbols(f"b0:{n}"))
    else:
        extras = []
    unknowns = ansatz.unknowns + extras

    equations = _determining_equations(kind, g, ansatz, extras)
    full = _solution_rows(equations, unknowns)

    # columns forced to zero to obtain the contained algebra
    if kind == "HV":
        forced = [size]
    elif kind == "SPC":
        forced = list(range(size, size + n))
    elif kind == "AC":
        k = len(ansatz.monomials)
        forced = [i * k + a for i in range(n) for a, e in enumerate(ansatz.exponents) if sum(e) > 0]
    else:
        forced = []

    if kind != "KV":
        sub = _solution_rows(equations + [unknowns[f] for f in forced], unknowns)
        rows = _complement(sub, full)
    else:
        reduced, _ = _rref(full)
        rows = [reduced.row(r) for r in range(reduced.rows)]

    claims = []
    for index, row in enumerate(rows):
        values = list(row)
        if kind == "HV":
            values = [v / values[size] for v in values]
        vector = SymmetryVector.spatial(m.chart, ansatz.polynomial(values[:size]), f"{kind}{index + 1}")
        if kind == "HV":
            claims.append(CollineationClaim(vector=vector, kind="HV", psi=Const(_fraction(values[size]))))
        elif kind == "SPC":
            phi = total(mul(Const(_fraction(b)), x) for b, x in zip(values[size:], m.chart.variables()))
            claims.append(CollineationClaim(vector=vector, kind="SPC", phi=phi))
        else:
            claims.append(CollineationClaim(vector=vector, kind=kind))

    if not claims:
        logger.warning(f"No {kind} found up to degree {max_degree}")
    logger.debug(f"Solved {kind} of {m.chart.names} at degree {max_degree}: {len(claims)} generators")
    return CollineationBasis(claims=claims, metric=m, kind=kind, provenance="solver")


def span_rank(vectors: Sequence[SymmetryVector], max_degree: int = 2) -> int:
    """Exact rank of the polynomial coefficient vectors of `vectors`."""
    if not vectors:
        return 0
    ansatz = _Ansatz(vectors[0].chart, max_degree)
    return sympy.Matrix([ansatz.coefficients(v) for v in vectors]).rank()


def same_span(first: Sequence[SymmetryVector], second: Sequence[SymmetryVector], max_degree: int = 2) -> bool:
    """Whether two sets of polynomial vector fields span the same space (exact)."""
    a, b = span_rank(first, max_degree), span_rank(second, max_degree)
    return a == b == span_rank([*first, *second], max_degree)
