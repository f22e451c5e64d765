"""Lie and Noether point symmetries of ẍ^i + Γ^i_jk ẋ^j ẋ^k = F^i(x) and their conserved integrals.

Lie conditions. With P = −F, a generator X = ξ(t, x)∂t + η^i(t, x)∂_i is a Lie point symmetry when the
coefficients of every power of the velocity vanish:

    order 0   ℒ_η P^i + 2ξ,t P^i + η^i,tt
    order 1   (ξ,k P^k) δ^i_j + 2ξ,j P^i + 2(η^i,tj + Γ^i_jk η^k,t) − ξ,tt δ^i_j
    order 2   ℒ_η Γ^i_jk − ξ,tj δ^i_k − ξ,tk δ^i_j
    order 3   ξ;(jk δ^i_d)

Noether conditions. For L = ½ g_ij ẋ^i ẋ^j − V and a gauge function f(t, x), X with ξ = ξ(t) is a Noether
point symmetry when

    ℒ_η g_ij = ξ,t g_ij,    V,k η^k + V ξ,t + f,t = 0,    g_ij η^j,t = f,i.

The conserved integral is I = ξ E − g_ij η^i ẋ^j + f with E = ½ g_ij ẋ^i ẋ^j + V. The gauge function is called
f in the conditions and G in the integrals; they are the same object. Physics texts often flip the sign of I.

Noether symmetries generated by the homothetic algebra come in two shapes:

    Case I   X = 2ψ t ∂t + Y,          G = p t,                 ℒ_Y V + 2ψ V + p = 0
    Case II  X = 2ψ (∫T) ∂t + T H,     G = T,t h + p ∫T,        ℒ_H V + 2ψ V + m h + p = 0,  T,tt = m T

where Y is a KV/HV with factor ψ, H a gradient KV/HV with H_i = h,i.
"""

import math
from fractions import Fraction
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
import sympy
from beartype import beartype
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from geonoether.base import ConditionReport, DimensionMismatchError, ResidualBlock
from geonoether.collineation import CollineationBasis, CollineationClaim
from geonoether.expr import (
    ONE,
    TIME,
    ZERO,
    T,
    Const,
    Expression,
    compile_expressions,
    cos,
    differentiate,
    div,
    exp,
    is_zero,
    mul,
    neg,
    sin,
    total,
)
from geonoether.geometry import (
    ExpressionLike,
    ForceField,
    Metric,
    Samples,
    ScalarField,
    SymmetryVector,
    lie_derivative_connection_values,
    lie_derivative_metric_values,
    to_expression,
    usable_samples,
)


RANK_THRESHOLD = 1e-9
AMBIGUITY_FACTOR = 10.0
SNAP_DENOMINATOR = 1000


def snap(value: float, tol: float = 1e-9) -> Fraction | float:
    """Nearest rational with a small denominator when within `tol` (relative), else the float itself."""
    fraction = Fraction(value).limit_denominator(SNAP_DENOMINATOR)
    if abs(float(fraction) - value) <= tol * max(1.0, abs(value)):
        return fraction
    return float(value)


# ======================================================================================================================
# LIE CONDITIONS
# ======================================================================================================================


LIE_BLOCKS = ("order_0", "order_1", "order_2", "order_3")


class LieConditionReport(ConditionReport):
    path: Literal["direct", "alternative"] = Field(description="Which form of the order 0 and 1 blocks was used")


def _check_compatible(X: SymmetryVector, m: Metric, F: ForceField | None = None) -> None:
    if X.chart != m.chart:
        raise DimensionMismatchError(f"{X.name} lives on {X.chart.names}, metric on {m.chart.names}")
    if F is not None and F.chart != m.chart:
        raise DimensionMismatchError(f"Force lives on {F.chart.names}, metric on {m.chart.names}")


def lie_condition_values(
    X: SymmetryVector, m: Metric, F: ForceField, samples: Samples, *, alternative: bool = False
) -> dict[str, np.ndarray]:
    """Signed residual arrays of the four Lie blocks at every sample, keyed by `LIE_BLOCKS`."""
    _check_compatible(X, m, F)
    if F.uses_time:
        raise ValueError("Lie conditions are implemented for time-independent forces only")
    n = m.dimension
    points, times = samples
    jet = X.jet(points, times)
    connection = m.christoffel
    gamma = connection.values(points)
    delta = np.eye(n)
    P = -F.values(points)
    dP = -F.derivative_values(points)

    if alternative:
        order_0, order_1 = _alternative_blocks(jet, m, P, dP, gamma, points)
    else:
        lie_P = np.einsum("nj,nij->ni", jet.eta, dP) - np.einsum("nj,nij->ni", P, jet.eta_x)
        order_0 = lie_P + 2 * jet.xi_t[:, None] * P + jet.eta_tt
        xi_dot_P = np.einsum("nk,nk->n", jet.xi_x, P)
        order_1 = (
            xi_dot_P[:, None, None] * delta
            + 2 * np.einsum("ni,nj->nij", P, jet.xi_x)
            + 2 * (jet.eta_tx + np.einsum("nijk,nk->nij", gamma, jet.eta_t))
            - jet.xi_tt[:, None, None] * delta
        )

    lie_gamma = lie_derivative_connection_values(jet, gamma, connection.derivative_values(points))
    order_2 = lie_gamma - np.einsum("nj,ik->nijk", jet.xi_tx, delta) - np.einsum("nk,ij->nijk", jet.xi_tx, delta)

    xi_hessian = jet.xi_xx - np.einsum("nmjk,nm->njk", gamma, jet.xi_x)
    order_3 = (
        np.einsum("njk,id->nijkd", xi_hessian, delta)
        + np.einsum("nkd,ij->nijkd", xi_hessian, delta)
        + np.einsum("ndj,ik->nijkd", xi_hessian, delta)
    ) / 3
    return dict(zip(LIE_BLOCKS, (order_0, order_1, order_2, order_3)))


def _alternative_blocks(jet, m: Metric, P, dP, gamma, points) -> tuple[np.ndarray, np.ndarray]:
    """Order 0 through the lowered force and ℒ_η g^ij; order 1 in its expanded covariant form.

    Both agree with the direct form whenever ξ depends on t only.
    """
    n = m.dimension
    g = m.values(points)
    dg = m.derivative_values(points)
    ginv = m.inverse_values(points)
    dginv = -np.einsum("nia,nabk,nbj->nijk", ginv, dg, ginv)
    delta = np.eye(n)

    P_lower = np.einsum("njk,nk->nj", g, P)
    dP_lower = np.einsum("njlk,nl->njk", dg, P) + np.einsum("njl,nlk->njk", g, dP)
    lie_P_lower = np.einsum("nk,njk->nj", jet.eta, dP_lower) + np.einsum("nk,nkj->nj", P_lower, jet.eta_x)
    lie_ginv = (
        np.einsum("nk,nijk->nij", jet.eta, dginv)
        - np.einsum("nkj,nik->nij", ginv, jet.eta_x)
        - np.einsum("nik,njk->nij", ginv, jet.eta_x)
    )
    order_0 = (
        np.einsum("nij,nj->ni", lie_ginv, P_lower)
        + np.einsum("nij,nj->ni", ginv, lie_P_lower)
        + 2 * jet.xi_t[:, None] * P
        + jet.eta_tt
    )
    xi_dot_P = np.einsum("nk,nk->n", jet.xi_x, P)
    order_1 = (
        -jet.xi_tt[:, None, None] * delta
        + np.einsum("ni,nj->nij", P, jet.xi_x)
        + 2 * xi_dot_P[:, None, None] * delta
        + 2 * jet.eta_tx
        + 2 * np.einsum("nijk,nk->nij", gamma, jet.eta_t)
    )
    return order_0, order_1


def _report(cls, subject: str, values: dict[str, np.ndarray], samples: Samples, tol: float, **extra):
    mask = usable_samples(samples, subject, *values.values())
    return cls(
        subject=subject,
        blocks=[ResidualBlock.from_values(name, v[mask]) for name, v in values.items()],
        tol=tol,
        evaluated=int(mask.sum()),
        skipped=int((~mask).sum()),
        **extra,
    )


def lie_conditions(
    X: SymmetryVector, m: Metric, F: ForceField, samples: Samples, tol: float = 1e-8
) -> LieConditionReport:
    return _report(LieConditionReport, X.name, lie_condition_values(X, m, F, samples), samples, tol, path="direct")


def lie_conditions_alternative(
    X: SymmetryVector, m: Metric, F: ForceField, samples: Samples, tol: float = 1e-8
) -> LieConditionReport:
    values = lie_condition_values(X, m, F, samples, alternative=True)
    return _report(LieConditionReport, X.name, values, samples, tol, path="alternative")


# ======================================================================================================================
# NOETHER CONDITIONS
# ======================================================================================================================


NOETHER_BLOCKS = ("metric", "potential", "gauge", "xi_spatial")


class NoetherConditionReport(ConditionReport):
    pass


def noether_condition_values(
    X: SymmetryVector, m: Metric, V: Expression, f: Expression, samples: Samples
) -> dict[str, np.ndarray]:
    _check_compatible(X, m)
    n = m.dimension
    points, times = samples
    jet = X.jet(points, times)
    g = m.values(points)
    potential, dV, _ = ScalarField(V, n).values(points, times)
    gauge = compile_expressions([differentiate(f, TIME), *(differentiate(f, i) for i in range(n))], vectorized=True)
    df = gauge(points, times)

    return {
        "metric": lie_derivative_metric_values(jet, g, m.derivative_values(points)) - jet.xi_t[:, None, None] * g,
        "potential": np.einsum("nk,nk->n", dV, jet.eta) + potential * jet.xi_t + df[:, 0],
        "gauge": np.einsum("nij,nj->ni", g, jet.eta_t) - df[:, 1:],
        "xi_spatial": jet.xi_x,
    }


def noether_conditions(
    X: SymmetryVector,
    m: Metric,
    V: ExpressionLike,
    f: ExpressionLike,
    samples: Samples,
    tol: float = 1e-8,
) -> NoetherConditionReport:
    V = to_expression(V, m.chart)
    f = to_expression(f, m.chart)
    return _report(NoetherConditionReport, X.name, noether_condition_values(X, m, V, f, samples), samples, tol)


# ======================================================================================================================
# INTEGRALS
# ======================================================================================================================


class NoetherIntegral:
    """I(t, x, ẋ) = ξ E − g_ij η^i ẋ^j + G, with E = ½ g_ij ẋ^i ẋ^j + V.

    For X = ∂t and G = 0 this is the Hamiltonian E itself.
    """

    @beartype
    def __init__(self, metric: Metric, potential: Expression, vector: SymmetryVector, gauge: Expression, name: str):
        self.metric = metric
        self.potential = potential
        self.vector = vector
        self.gauge = gauge
        self.name = name

    @cached_property
    def _compiled(self):
        return compile_expressions([self.vector.xi, *self.vector.eta, self.gauge, self.potential], vectorized=True)

    def values(self, times, points, velocities) -> np.ndarray:
        """I along a batch of states; times (N,), points and velocities (N, n)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        velocities = np.atleast_2d(np.asarray(velocities, dtype=float))
        times = np.broadcast_to(np.asarray(times, dtype=float), points.shape[:1])
        n = self.metric.dimension
        g = self.metric.values(points)
        parts = self._compiled(points, times)
        xi, eta, gauge, potential = parts[:, 0], parts[:, 1 : 1 + n], parts[:, 1 + n], parts[:, 2 + n]
        energy = 0.5 * np.einsum("nij,ni,nj->n", g, velocities, velocities) + potential
        return xi * energy - np.einsum("nij,ni,nj->n", g, eta, velocities) + gauge

    def __call__(self, t: float, x: Sequence[float], v: Sequence[float]) -> float:
        return float(self.values([t], [x], [v])[0])

    def __repr__(self) -> str:
        return f"NoetherIntegral({self.name})"


def hamiltonian(metric: Metric, potential: ExpressionLike) -> NoetherIntegral:
    V = to_expression(potential, metric.chart)
    return NoetherIntegral(metric, V, SymmetryVector.time_translation(metric.chart), ZERO, "E")


class TimeProfile(BaseModel):
    """T(t) = c₁T₁ + c₂T₂ spanning the solutions of T,tt = m T."""

    m: float = Field(description="Constant of the Case II condition")
    c1: float = Field(description="Coefficient of the first branch", default=1.0)
    c2: float = Field(description="Coefficient of the second branch", default=0.0)

    @property
    def branch(self) -> Literal["exponential", "linear", "trigonometric"]:
        if self.m > 0:
            return "exponential"
        if self.m < 0:
            return "trigonometric"
        return "linear"

    @property
    def rate(self) -> Expression:
        """√|m| as an exact constant when |m| is the square of a small rational."""
        root = math.sqrt(abs(self.m))
        return Const(snap(root, 1e-12))

    def _parts(self) -> tuple[tuple[Expression, Expression], tuple[Expression, Expression]]:
        """((T₁, ∫T₁), (T₂, ∫T₂))."""
        if self.branch == "linear":
            return (ONE, T), (T, mul(Const(Fraction(1, 2)), T**2))
        c = self.rate
        ct = mul(c, T)
        if self.branch == "exponential":
            return (exp(ct), div(exp(ct), c)), (exp(neg(ct)), neg(div(exp(neg(ct)), c)))
        return (cos(ct), div(sin(ct), c)), (sin(ct), neg(div(cos(ct), c)))

    def _combine(self, index: int) -> Expression:
        (a, b) = self._parts()
        return total(
            mul(Const(snap(coefficient)), part[index]) for coefficient, part in ((self.c1, a), (self.c2, b))
        )

    @property
    def T(self) -> Expression:
        return self._combine(0)

    @property
    def integral(self) -> Expression:
        return self._combine(1)

    @property
    def derivative(self) -> Expression:
        return differentiate(self.T, TIME)

    def residual(self, times) -> float:
        """max |T,tt − m T| over `times`."""
        times = np.asarray(times, dtype=float)
        compiled = compile_expressions([differentiate(self.derivative, TIME), self.T], vectorized=True)
        values = compiled(np.zeros((times.size, 1)), times)
        return float(np.abs(values[:, 0] - self.m * values[:, 1]).max(initial=0.0))

    def describe(self) -> str:
        return str(self.T)


NoetherCase = Literal["I", "II", "autonomous"]


class NoetherSymmetry(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    vector: SymmetryVector
    case: NoetherCase
    psi: float = Field(description="Homothetic factor of the generating collineation", default=0.0)
    p: float = Field(description="Constant of the potential condition", default=0.0)
    m: float | None = Field(description="Constant of T,tt = m T (Case II only)", default=None)
    profile: TimeProfile | None = Field(description="T(t) of a Case II symmetry", default=None)
    gauge: Expression = Field(description="Gauge function G(t, x)", default=ZERO)
    coefficients: dict[str, float] = Field(description="Combination of the generating collineations", default={})
    integral: NoetherIntegral | None = None

    def describe(self) -> str:
        return f"{self.name}: {self.vector.describe()}, G = {self.gauge}"


def autonomous_symmetry(metric: Metric, potential: ExpressionLike) -> NoetherSymmetry:
    """∂t, a Noether symmetry of every autonomous system, with the Hamiltonian as its integral."""
    s = NoetherSymmetry(name="∂t", vector=SymmetryVector.time_translation(metric.chart), case="autonomous")
    return s.model_copy(update={"integral": hamiltonian(metric, potential)})


def build_noether_integral(s: NoetherSymmetry, m: Metric, V: ExpressionLike) -> NoetherIntegral:
    """Closed-form integral of a Noether symmetry; Case I and II both reduce to ξE − g_ij η^i ẋ^j + G."""
    if s.case == "II" and s.profile is None:
        raise ValueError(f"Case II symmetry {s.name} has no time profile")
    if s.case == "I" and s.vector.eta and any(e.uses_time for e in s.vector.eta):
        raise ValueError(f"Case I symmetry {s.name} must have time-independent spatial components")
    return NoetherIntegral(m, to_expression(V, m.chart), s.vector, s.gauge, f"I[{s.name}]")


# ======================================================================================================================
# FINDERS
# ======================================================================================================================


def _nullspace(matrix: np.ndarray, what: str) -> np.ndarray:
    """Numeric nullspace (columns) of `matrix` by SVD, after scaling each column to unit norm.

    The rank threshold is RANK_THRESHOLD times the largest singular value. Singular values within
    AMBIGUITY_FACTOR of the threshold make the rank decision ambiguous; both readings are logged.
    """
    rows, cols = matrix.shape
    if rows < cols:
        raise ValueError(f"{what}: {rows} samples cannot determine {cols} unknowns")
    norms = np.linalg.norm(matrix, axis=0)
    # columns that are rounding noise stay unscaled so they read as zero
    scale = np.where(norms > RANK_THRESHOLD * norms.max(initial=0.0), norms, 1.0)
    _, singular, vt = np.linalg.svd(matrix / scale, full_matrices=True)
    threshold = RANK_THRESHOLD * max(singular.max(initial=0.0), 1.0)
    null = [k for k in range(cols) if singular[k] <= threshold]
    ambiguous = [s for s in singular if threshold / AMBIGUITY_FACTOR < s < threshold * AMBIGUITY_FACTOR]
    if ambiguous:
        below = sum(s <= threshold for s in ambiguous)
        logger.warning(
            f"{what}: rank decision ambiguous, singular values {[f'{s:.2e}' for s in ambiguous]} lie within "
            f"{AMBIGUITY_FACTOR:g}x of the threshold {threshold:.2e}; nullspace dimension {len(null)} reported, "
            f"{len(null) - below} to {len(null) + len(ambiguous) - below} possible"
        )
    return vt[null].T / scale[:, None]


def _reduced_rows(basis: np.ndarray) -> list[np.ndarray]:
    """Rows of the reduced row echelon form of the span of `basis` columns, entries snapped to small rationals."""
    if basis.shape[1] == 0:
        return []
    tol = 1e-8 * max(np.abs(basis).max(), 1.0)
    reduced, pivots = sympy.Matrix(basis.T).rref(iszerofunc=lambda x: abs(x) < tol, simplify=False)
    return [np.array([float(snap(float(v), 1e-8)) for v in reduced.row(r)]) for r in range(len(pivots))]


def _term(value: float, name: str) -> str | None:
    value = snap(value, 1e-8)
    if value == 0:
        return None
    if value == 1:
        return name
    if value == -1:
        return f"-{name}"
    return f"{value}*{name}"


def combination_name(coefficients: dict[str, float], time_coefficient: float = 0.0) -> str:
    terms = [_term(time_coefficient, "t∂t")] + [_term(c, name) for name, c in coefficients.items()]
    return " + ".join(t for t in terms if t).replace("+ -", "- ") or "0"


def _verified(
    symmetries: list[NoetherSymmetry], metric: Metric, V: Expression, fresh: Samples, tol: float
) -> list[NoetherSymmetry]:
    kept = []
    for s in symmetries:
        report = noether_conditions(s.vector, metric, V, s.gauge, fresh, tol)
        if report.passed:
            kept.append(s.model_copy(update={"integral": build_noether_integral(s, metric, V)}))
        else:
            logger.warning(f"Dropping {s.name}: residual {report.maximum:.3e} on fresh samples exceeds {tol:g}")
    return kept


@beartype
def find_noether_case1(
    basis: CollineationBasis,
    V: ExpressionLike,
    samples: Samples,
    fresh: Samples | None = None,
    tol: float = 1e-8,
) -> list[NoetherSymmetry]:
    """Noether symmetries 2ψ t∂t + Y with Y in the span of the basis' KVs and HV.

    Solves Σ_a c_a (ℒ_{Y_a} V + 2ψ_a V) + p = 0 over the samples; every solution is re-verified on `fresh`.
    """
    metric = basis.metric
    V = to_expression(V, metric.chart)
    claims = basis.homothetic_algebra()
    points, times = samples
    potential, dV, _ = ScalarField(V, metric.dimension).values(points)
    columns = [
        np.einsum("nk,nk->n", dV, claim.vector.jet(points, times).eta) + 2 * claim.psi_value * potential
        for claim in claims
    ]
    columns.append(np.ones(samples.size))
    matrix = np.stack(columns, axis=1)
    mask = usable_samples(samples, "Case I condition", matrix)
    null = _nullspace(matrix[mask], "Case I")

    found = []
    for row in _reduced_rows(null):
        c, p = row[:-1], float(row[-1])
        used = [(value, claim) for claim, value in zip(claims, c) if value != 0]
        if not used:
            continue
        coefficients = {claim.name: float(value) for value, claim in used}
        psi = float(sum(value * claim.psi_value for value, claim in used))
        Y = SymmetryVector.combination([Const(snap(v)) for v, _ in used], [claim.vector for _, claim in used])
        name = combination_name(coefficients, 2 * psi)
        vector = SymmetryVector(metric.chart, mul(Const(snap(2 * psi)), T), Y.eta, name)
        found.append(
            NoetherSymmetry(
                name=name,
                vector=vector,
                case="I",
                psi=psi,
                p=p,
                gauge=mul(Const(snap(p)), T),
                coefficients=coefficients,
            )
        )
    result = _verified(found, metric, V, fresh if fresh is not None else samples, tol)
    logger.info(f"Case I: {len(result)} Noether symmetries from {len(claims)} generators")
    return result


@beartype
def find_noether_case2(
    H: CollineationClaim,
    metric: Metric,
    V: ExpressionLike,
    samples: Samples,
    fresh: Samples | None = None,
    tol: float = 1e-8,
) -> list[NoetherSymmetry]:
    """Noether symmetries 2ψ(∫T)∂t + T H for a gradient KV/HV H with function h.

    Fits ℒ_H V + 2ψ V + m h + p = 0 for (m, p) over the samples. A consistent fit yields one symmetry per basis
    function of T,tt = m T; for m = 0 these are T = 1 and T = t.
    """
    if H.gradient_function is None or H.kind not in ("KV", "HV"):
        raise ValueError(f"Case II needs a gradient KV or HV, got {H.kind} {H.name}")
    V = to_expression(V, metric.chart)
    points, times = samples
    potential, dV, _ = ScalarField(V, metric.dimension).values(points)
    h, _, _ = ScalarField(H.gradient_function, metric.dimension).values(points)
    psi = H.psi_value

    target = np.einsum("nk,nk->n", dV, H.vector.jet(points, times).eta) + 2 * psi * potential
    design = np.stack([h, np.ones(samples.size)], axis=1)
    mask = usable_samples(samples, "Case II condition", target, design)
    target, design = target[mask], design[mask]
    (m, p), *_ = np.linalg.lstsq(design, -target, rcond=None)
    misfit = np.abs(design @ np.array([m, p]) + target).max(initial=0.0)
    if misfit > tol * max(1.0, np.abs(target).max(initial=0.0)):
        logger.debug(f"Case II with {H.name}: inconsistent, misfit {misfit:.3e}")
        return []

    m = float(snap(float(m))) if abs(m) > tol else 0.0
    p = float(snap(float(p))) if abs(p) > tol else 0.0
    found = []
    for c1, c2 in ((1.0, 0.0), (0.0, 1.0)):
        profile = TimeProfile(m=m, c1=c1, c2=c2)
        xi = mul(Const(snap(2 * psi)), profile.integral)
        gauge = total([mul(profile.derivative, H.gradient_function), mul(Const(snap(p)), profile.integral)])
        name = f"({profile.T})*{H.name}" if is_zero(xi) else f"({xi})∂t + ({profile.T})*{H.name}"
        found.append(
            NoetherSymmetry(
                name=name,
                vector=SymmetryVector(metric.chart, xi, [mul(profile.T, e) for e in H.vector.eta], name),
                case="II",
                psi=psi,
                p=p,
                m=m,
                profile=profile,
                gauge=gauge,
                coefficients={H.name: 1.0},
            )
        )
    result = _verified(found, metric, V, fresh if fresh is not None else samples, tol)
    logger.info(f"Case II with {H.name}: m = {m:g}, p = {p:g}, {len(result)} Noether symmetries")
    return result


def find_noether_symmetries(
    basis: CollineationBasis, V: ExpressionLike, samples: Samples, fresh: Samples | None = None, tol: float = 1e-8
) -> list[NoetherSymmetry]:
    """∂t, every Case I symmetry and every Case II symmetry of the basis' gradient KVs/HVs."""
    found = [autonomous_symmetry(basis.metric, V)]
    found += find_noether_case1(basis, V, samples, fresh, tol)
    for claim in basis.homothetic_algebra():
        if claim.is_gradient:
            found += find_noether_case2(claim, basis.metric, V, samples, fresh, tol)
    return found


def span_dimension(vectors: Sequence[SymmetryVector], samples: Samples) -> int:
    """Numeric dimension of the span of generators (ξ, η) with constant coefficients, over the samples."""
    if not vectors:
        return 0
    rows = []
    for v in vectors:
        jet = v.jet(samples.points, samples.times)
        rows.append(np.concatenate([jet.xi[:, None], jet.eta], axis=1).reshape(-1))
    matrix = np.array(rows)
    matrix = matrix[:, np.isfinite(matrix).all(axis=0)]
    singular = np.linalg.svd(matrix, compute_uv=False)
    return int((singular > RANK_THRESHOLD * max(singular.max(initial=0.0), 1.0)).sum())


def find_lie_symmetries(
    basis: CollineationBasis, F: ForceField, samples: Samples, fresh: Samples | None = None, tol: float = 1e-8
) -> list[SymmetryVector]:
    """Lie symmetries a t∂t + Y with Y in the span of the basis' KVs and HV, plus ∂t.

    Solves Σ_a c_a ℒ_{Y_a} F + 2a F = 0 over the samples; each solution is re-verified with `lie_conditions`.
    """
    metric = basis.metric
    if F.uses_time:
        raise ValueError("Lie symmetries are searched for time-independent forces only")
    claims = basis.homothetic_algebra()
    points, times = samples
    P = -F.values(points)
    dP = -F.derivative_values(points)
    columns = []
    for claim in claims:
        jet = claim.vector.jet(points, times)
        columns.append((np.einsum("nj,nij->ni", jet.eta, dP) - np.einsum("nj,nij->ni", P, jet.eta_x)).reshape(-1))
    columns.append((2 * P).reshape(-1))
    matrix = np.stack(columns, axis=1)
    null = _nullspace(matrix[np.isfinite(matrix).all(axis=1)], "Lie search")

    found = [SymmetryVector.time_translation(metric.chart)]
    for row in _reduced_rows(null):
        c, a = row[:-1], float(row[-1])
        used = [(value, claim) for claim, value in zip(claims, c) if value != 0]
        if used:
            eta = SymmetryVector.combination([Const(snap(v)) for v, _ in used], [cl.vector for _, cl in used]).eta
        else:
            eta = (ZERO,) * metric.dimension
        name = combination_name({claim.name: v for v, claim in used}, a)
        X = SymmetryVector(metric.chart, mul(Const(snap(a)), T), eta, name)
        report = lie_conditions(X, metric, F, fresh if fresh is not None else samples, tol)
        if report.passed:
            found.append(X)
        else:
            logger.warning(f"Dropping Lie candidate {name}: residual {report.maximum:.3e}")
    logger.info(f"Lie search: {len(found)} symmetries including ∂t")
    return found
