"""Metrics, Levi-Civita connections, point-symmetry vectors and their Lie derivatives.

Everything here evaluates in batches: a set of sample points is an array of shape (N, n) with a matching array of
N times, and every tensor comes back with the sample axis first. Points where an expression cannot be evaluated
produce non-finite entries; `finite_rows` masks them and callers log and skip them.
"""

from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from beartype import beartype
from loguru import logger
from pydantic import BaseModel, Field
from scipy.stats import qmc

from geonoether.base import DimensionMismatchError, EvaluationDomainError, SingularMetricError
from geonoether.expr import (
    TIME,
    ZERO,
    Const,
    CoordinateChart,
    Expression,
    add,
    compile_expressions,
    differentiate,
    div,
    is_zero,
    mul,
    neg,
    parse,
    sub,
    total,
)


SYMBOLIC_INVERSE_MAX_DIMENSION = 4

ExpressionLike = Expression | str | int | float


def to_expression(value: ExpressionLike, chart: CoordinateChart, curvature: int | None = None) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, str):
        return parse(value, chart, curvature=curvature)
    return Const(value)


def finite_rows(values: np.ndarray) -> np.ndarray:
    """Mask of samples (first axis) whose entries are all finite."""
    values = np.asarray(values)
    return np.isfinite(values.reshape(values.shape[0], -1)).all(axis=1)


# ======================================================================================================================
# METRIC
# ======================================================================================================================


def determinant(matrix: Sequence[Sequence[Expression]]) -> Expression:
    """Laplace expansion along the first row."""
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    terms = []
    for j in range(n):
        if is_zero(matrix[0][j]):
            continue
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = mul(matrix[0][j], determinant(minor))
        terms.append(term if j % 2 == 0 else neg(term))
    return total(terms)


class Metric:
    """Symmetric n x n matrix of expressions over a chart.

    `components[i][j]` and `components[j][i]` are the same stored object. `signature` is informational.
    """

    @beartype
    def __init__(
        self,
        chart: CoordinateChart,
        components: Sequence[Sequence[ExpressionLike]],
        signature: Sequence[int] | None = None,
        *,
        curvature: int | None = None,
    ):
        n = chart.dimension
        if len(components) != n or any(len(row) != n for row in components):
            raise DimensionMismatchError(f"Metric components must be {n}x{n} for chart {chart.names}")
        parsed = [[to_expression(value, chart, curvature) for value in row] for row in components]
        for i in range(n):
            for j in range(i):
                if parsed[i][j] != parsed[j][i]:
                    raise ValueError(f"Metric is not symmetric in ({chart.names[j]}, {chart.names[i]})")
        self.chart = chart
        self.components: tuple[tuple[Expression, ...], ...] = tuple(
            tuple(parsed[min(i, j)][max(i, j)] for j in range(n)) for i in range(n)
        )
        self.signature = tuple(signature) if signature is not None else None

    @classmethod
    def diagonal(
        cls,
        chart: CoordinateChart,
        entries: Sequence[ExpressionLike],
        signature: Sequence[int] | None = None,
        *,
        curvature: int | None = None,
    ) -> "Metric":
        n = chart.dimension
        components: list[list[ExpressionLike]] = [[ZERO] * n for _ in range(n)]
        for i, entry in enumerate(entries):
            components[i][i] = entry
        return cls(chart, components, signature, curvature=curvature)

    @classmethod
    def flat(cls, signature: Sequence[int]) -> "Metric":
        """Constant diagonal metric diag(signature) in Cartesian coordinates x, y, z (or x1..xn for n > 3)."""
        n = len(signature)
        names = ("x", "y", "z")[:n] if n <= 3 else tuple(f"x{i + 1}" for i in range(n))
        return cls.diagonal(CoordinateChart(names), [Const(s) for s in signature], signature)

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    @property
    def is_constant(self) -> bool:
        return all(isinstance(g, Const) for row in self.components for g in row)

    def constant_matrix(self) -> list[list[Const]]:
        return [[g for g in row] for row in self.components]  # type: ignore[misc]

    @cached_property
    def first_derivatives(self) -> tuple:
        """`first_derivatives[i][j][k]` is g_ij,k."""
        n = self.dimension
        return tuple(
            tuple(tuple(differentiate(self.components[i][j], k) for k in range(n)) for j in range(n)) for i in range(n)
        )

    @cached_property
    def second_derivatives(self) -> tuple:
        """`second_derivatives[i][j][k][l]` is g_ij,kl."""
        n = self.dimension
        return tuple(
            tuple(
                tuple(tuple(differentiate(self.first_derivatives[i][j][k], l) for l in range(n)) for k in range(n))
                for j in range(n)
            )
            for i in range(n)
        )

    @cached_property
    def _compiled(self):
        return compile_expressions([g for row in self.components for g in row], vectorized=True)

    @cached_property
    def _compiled_first(self):
        return compile_expressions([d for a in self.first_derivatives for b in a for d in b], vectorized=True)

    @cached_property
    def _compiled_second(self):
        return compile_expressions(
            [d for a in self.second_derivatives for b in a for c in b for d in c], vectorized=True
        )

    def values(self, points) -> np.ndarray:
        """g_ij at each point, shape (N, n, n)."""
        n = self.dimension
        return self._compiled(np.atleast_2d(points)).reshape(-1, n, n)

    def derivative_values(self, points) -> np.ndarray:
        """g_ij,k at each point, shape (N, n, n, n)."""
        n = self.dimension
        return self._compiled_first(np.atleast_2d(points)).reshape(-1, n, n, n)

    def second_derivative_values(self, points) -> np.ndarray:
        """g_ij,kl at each point, shape (N, n, n, n, n)."""
        n = self.dimension
        return self._compiled_second(np.atleast_2d(points)).reshape(-1, n, n, n, n)

    def inverse_values(self, points) -> np.ndarray:
        g = self.values(points)
        try:
            return np.linalg.inv(g)
        except np.linalg.LinAlgError as e:
            raise SingularMetricError(f"Metric is singular at one of {len(g)} points") from e

    @cached_property
    def determinant(self) -> Expression:
        return determinant(self.components)

    @cached_property
    def inverse(self) -> tuple[tuple[Expression, ...], ...]:
        """Symbolic inverse by adjugate over determinant; only for n <= 4."""
        n = self.dimension
        if n > SYMBOLIC_INVERSE_MAX_DIMENSION:
            raise SingularMetricError(f"Symbolic inversion is limited to n <= {SYMBOLIC_INVERSE_MAX_DIMENSION}")
        det = self.determinant
        if is_zero(det):
            raise SingularMetricError("Metric determinant is identically zero")
        if n == 1:
            return ((div(Const(1), det),),)

        def cofactor(i: int, j: int) -> Expression:
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(self.components) if k != i]
            c = determinant(minor)
            return c if (i + j) % 2 == 0 else neg(c)

        upper = {(i, j): div(cofactor(j, i), det) for i in range(n) for j in range(i, n)}
        return tuple(tuple(upper[min(i, j), max(i, j)] for j in range(n)) for i in range(n))

    @cached_property
    def christoffel(self) -> "ChristoffelField":
        return christoffel(self)

    def __repr__(self) -> str:
        rows = "; ".join(", ".join(str(g) for g in row) for row in self.components)
        return f"Metric({self.chart.names}, [{rows}])"


# ======================================================================================================================
# CONNECTION
# ======================================================================================================================


class ChristoffelField:
    """Levi-Civita connection Γ^i_jk of a metric.

    For n <= 4 the components are expressions (symmetric in j, k as stored objects). Above that the field is
    assembled per point from the metric's exact derivatives and a numeric inverse.
    """

    def __init__(self, metric: Metric, components: tuple | None = None):
        self.metric = metric
        self.components = components

    @property
    def dimension(self) -> int:
        return self.metric.dimension

    @property
    def is_symbolic(self) -> bool:
        return self.components is not None

    def component(self, i: int, j: int, k: int) -> Expression:
        if self.components is None:
            raise SingularMetricError("Connection of this metric has no symbolic components")
        return self.components[i][j][k]

    @cached_property
    def _compiled(self):
        assert self.components is not None
        return compile_expressions([c for a in self.components for b in a for c in b], vectorized=True)

    @cached_property
    def _compiled_derivatives(self):
        assert self.components is not None
        n = self.dimension
        return compile_expressions(
            [differentiate(c, m) for a in self.components for b in a for c in b for m in range(n)], vectorized=True
        )

    def values(self, points) -> np.ndarray:
        """Γ^i_jk at each point, shape (N, n, n, n)."""
        n = self.dimension
        points = np.atleast_2d(points)
        if self.components is not None:
            return self._compiled(points).reshape(-1, n, n, n)
        ginv = self.metric.inverse_values(points)
        return np.einsum("nil,nljk->nijk", ginv, self._lowered(self.metric.derivative_values(points)))

    def derivative_values(self, points) -> np.ndarray:
        """Γ^i_jk,m at each point, shape (N, n, n, n, n)."""
        n = self.dimension
        points = np.atleast_2d(points)
        if self.components is not None:
            return self._compiled_derivatives(points).reshape(-1, n, n, n, n)
        ginv = self.metric.inverse_values(points)
        dg = self.metric.derivative_values(points)
        ddg = self.metric.second_derivative_values(points)
        lowered = self._lowered(dg)
        # ∂_m g^il = -g^ia g_ab,m g^bl
        dginv = -np.einsum("nia,nabm,nbl->nilm", ginv, dg, ginv)
        dlowered = 0.5 * (
            np.einsum("nljkm->nljkm", ddg) + np.einsum("nlkjm->nljkm", ddg) - np.einsum("njklm->nljkm", ddg)
        )
        return np.einsum("nilm,nljk->nijkm", dginv, lowered) + np.einsum("nil,nljkm->nijkm", ginv, dlowered)

    @staticmethod
    def _lowered(dg: np.ndarray) -> np.ndarray:
        """Γ_ljk = ½(g_lj,k + g_lk,j − g_jk,l)."""
        return 0.5 * (dg + np.einsum("nlkj->nljk", dg) - np.einsum("njkl->nljk", dg))


def christoffel(m: Metric) -> ChristoffelField:
    """Γ^i_jk = ½ g^il (g_lj,k + g_lk,j − g_jk,l)."""
    n = m.dimension
    if n > SYMBOLIC_INVERSE_MAX_DIMENSION:
        logger.debug(f"Connection of {n}-dimensional metric assembled numerically per point")
        return ChristoffelField(m, None)

    ginv = m.inverse
    dg = m.first_derivatives
    half = Const(1) / Const(2)
    lowered = {}
    for l in range(n):
        for j in range(n):
            for k in range(j, n):
                lowered[l, j, k] = mul(half, sub(add(dg[l][j][k], dg[l][k][j]), dg[j][k][l]))

    upper = {}
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                upper[i, j, k] = total(mul(ginv[i][l], lowered[l, j, k]) for l in range(n))

    components = tuple(
        tuple(tuple(upper[i, min(j, k), max(j, k)] for k in range(n)) for j in range(n)) for i in range(n)
    )
    return ChristoffelField(m, components)


# ======================================================================================================================
# SYMMETRY VECTORS
# ======================================================================================================================


class VectorJet(NamedTuple):
    """Values and derivatives of X = ξ∂t + η^i∂_i at a batch of (t, x) samples.

    Spatial derivative indices come last: `eta_x[n, i, j]` is η^i,j and `eta_xx[n, i, j, k]` is η^i,jk.
    """

    xi: np.ndarray
    xi_t: np.ndarray
    xi_tt: np.ndarray
    xi_x: np.ndarray
    xi_tx: np.ndarray
    xi_xx: np.ndarray
    eta: np.ndarray
    eta_t: np.ndarray
    eta_tt: np.ndarray
    eta_x: np.ndarray
    eta_tx: np.ndarray
    eta_xx: np.ndarray


def _jet_expressions(e: Expression, n: int) -> list[Expression]:
    """[e, e_t, e_tt, e_j..., e_tj..., e_jk...] for one scalar component."""
    e_t = differentiate(e, TIME)
    first = [differentiate(e, j) for j in range(n)]
    return (
        [e, e_t, differentiate(e_t, TIME)]
        + [differentiate(e_t, j) for j in range(n)]
        + first
        + [differentiate(first[j], k) for j in range(n) for k in range(n)]
    )


class SymmetryVector:
    """A point-symmetry generator X = ξ(t, x)∂t + η^i(t, x)∂_i over a chart."""

    def __init__(
        self,
        chart: CoordinateChart,
        xi: ExpressionLike,
        eta: Sequence[ExpressionLike],
        name: str | None = None,
        *,
        curvature: int | None = None,
    ):
        if len(eta) != chart.dimension:
            raise DimensionMismatchError(
                f"Vector has {len(eta)} components, chart {chart.names} needs {chart.dimension}"
            )
        self.chart = chart
        self.xi = to_expression(xi, chart, curvature)
        self.eta: tuple[Expression, ...] = tuple(to_expression(e, chart, curvature) for e in eta)
        self.name = name or self.describe()

    @classmethod
    def spatial(
        cls, chart: CoordinateChart, eta: Sequence[ExpressionLike], name: str | None = None, **kwargs
    ) -> "SymmetryVector":
        return cls(chart, ZERO, eta, name, **kwargs)

    @classmethod
    def time_translation(cls, chart: CoordinateChart) -> "SymmetryVector":
        return cls(chart, Const(1), [ZERO] * chart.dimension, "∂t")

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    @property
    def uses_time(self) -> bool:
        return self.xi.uses_time or any(e.uses_time for e in self.eta)

    @property
    def is_spatial(self) -> bool:
        """No ∂t part and no time dependence: a plain vector field on the configuration space."""
        return is_zero(self.xi) and not self.uses_time

    def renamed(self, name: str) -> "SymmetryVector":
        return SymmetryVector(self.chart, self.xi, self.eta, name)

    def scaled(self, factor: ExpressionLike) -> "SymmetryVector":
        c = to_expression(factor, self.chart)
        return SymmetryVector(self.chart, mul(c, self.xi), [mul(c, e) for e in self.eta])

    def __add__(self, other: "SymmetryVector") -> "SymmetryVector":
        self._check_chart(other)
        return SymmetryVector(self.chart, add(self.xi, other.xi), [add(a, b) for a, b in zip(self.eta, other.eta)])

    def __sub__(self, other: "SymmetryVector") -> "SymmetryVector":
        self._check_chart(other)
        return SymmetryVector(self.chart, sub(self.xi, other.xi), [sub(a, b) for a, b in zip(self.eta, other.eta)])

    @staticmethod
    def combination(
        coefficients: Sequence[ExpressionLike], vectors: Sequence["SymmetryVector"], name: str | None = None
    ) -> "SymmetryVector":
        if not vectors or len(coefficients) != len(vectors):
            raise DimensionMismatchError("Need one coefficient per vector")
        chart = vectors[0].chart
        xi = total(mul(to_expression(c, chart), v.xi) for c, v in zip(coefficients, vectors))
        eta = [
            total(mul(to_expression(c, chart), v.eta[i]) for c, v in zip(coefficients, vectors))
            for i in range(chart.dimension)
        ]
        return SymmetryVector(chart, xi, eta, name)

    def bracket(self, other: "SymmetryVector") -> "SymmetryVector":
        """Commutator [A, B]^i = A^j B^i,j − B^j A^i,j of the spatial parts."""
        self._check_chart(other)
        n = self.dimension
        eta = [
            total(
                sub(mul(self.eta[j], differentiate(other.eta[i], j)), mul(other.eta[j], differentiate(self.eta[i], j)))
                for j in range(n)
            )
            for i in range(n)
        ]
        return SymmetryVector.spatial(self.chart, eta, f"[{self.name}, {other.name}]")

    def _check_chart(self, other: "SymmetryVector") -> None:
        if other.chart != self.chart:
            raise DimensionMismatchError(f"Vectors live on different charts: {self.chart.names} vs {other.chart.names}")

    @cached_property
    def _compiled_jet(self):
        expressions = _jet_expressions(self.xi, self.dimension)
        for e in self.eta:
            expressions += _jet_expressions(e, self.dimension)
        return compile_expressions(expressions, vectorized=True)

    def jet(self, points, times) -> VectorJet:
        n = self.dimension
        points = np.atleast_2d(np.asarray(points, dtype=float))
        times = np.broadcast_to(np.asarray(times, dtype=float), points.shape[:1])
        values = self._compiled_jet(points, times)
        size = 3 + 2 * n + n * n
        blocks = values.reshape(points.shape[0], n + 1, size)

        def split(block):
            return (
                block[:, 0],
                block[:, 1],
                block[:, 2],
                block[:, 3 + n : 3 + 2 * n],
                block[:, 3 : 3 + n],
                block[:, 3 + 2 * n :].reshape(-1, *block.shape[1:-1], n, n),
            )

        xi, xi_t, xi_tt, xi_x, xi_tx, xi_xx = split(blocks[:, 0, :])
        eta_block = blocks[:, 1:, :]
        return VectorJet(
            xi=xi,
            xi_t=xi_t,
            xi_tt=xi_tt,
            xi_x=xi_x,
            xi_tx=xi_tx,
            xi_xx=xi_xx.reshape(-1, n, n),
            eta=eta_block[:, :, 0],
            eta_t=eta_block[:, :, 1],
            eta_tt=eta_block[:, :, 2],
            eta_x=eta_block[:, :, 3 + n : 3 + 2 * n],
            eta_tx=eta_block[:, :, 3 : 3 + n],
            eta_xx=eta_block[:, :, 3 + 2 * n :].reshape(-1, n, n, n),
        )

    def describe(self) -> str:
        terms = []
        if not is_zero(self.xi):
            terms.append(f"({self.xi})∂t")
        for name, e in zip(self.chart.names, self.eta):
            if not is_zero(e):
                terms.append(f"({e})∂{name}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self) -> str:
        return f"SymmetryVector({self.name!r}: {self.describe()})"


# ======================================================================================================================
# FORCES
# ======================================================================================================================


class ForceField:
    """Force F^i(x) of the motion ẍ^i + Γ^i_jk ẋ^j ẋ^k = F^i, optionally derived from a potential as F^i = −g^ij V,j."""

    def __init__(
        self,
        chart: CoordinateChart,
        components: Sequence[ExpressionLike],
        *,
        potential: Expression | None = None,
        curvature: int | None = None,
    ):
        if len(components) != chart.dimension:
            raise DimensionMismatchError(
                f"Force has {len(components)} components, chart {chart.names} needs {chart.dimension}"
            )
        self.chart = chart
        self.components: tuple[Expression, ...] = tuple(to_expression(c, chart, curvature) for c in components)
        self.potential = potential

    @classmethod
    def from_potential(cls, metric: Metric, potential: ExpressionLike, *, curvature: int | None = None) -> "ForceField":
        V = to_expression(potential, metric.chart, curvature)
        n = metric.dimension
        dV = [differentiate(V, j) for j in range(n)]
        ginv = metric.inverse
        components = [neg(total(mul(ginv[i][j], dV[j]) for j in range(n))) for i in range(n)]
        return cls(metric.chart, components, potential=V)

    @classmethod
    def zero(cls, chart: CoordinateChart) -> "ForceField":
        return cls(chart, [ZERO] * chart.dimension, potential=ZERO)

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    @property
    def uses_time(self) -> bool:
        return any(c.uses_time for c in self.components)

    @cached_property
    def _compiled(self):
        return compile_expressions(self.components, vectorized=True)

    @cached_property
    def _compiled_derivatives(self):
        n = self.dimension
        return compile_expressions([differentiate(c, j) for c in self.components for j in range(n)], vectorized=True)

    @cached_property
    def scalar(self):
        """Compiled single-point form used by the integrators."""
        return compile_expressions(self.components)

    def values(self, points) -> np.ndarray:
        """F^i at each point, shape (N, n)."""
        return self._compiled(np.atleast_2d(points))

    def derivative_values(self, points) -> np.ndarray:
        """F^i,j at each point, shape (N, n, n)."""
        n = self.dimension
        return self._compiled_derivatives(np.atleast_2d(points)).reshape(-1, n, n)

    def __repr__(self) -> str:
        return f"ForceField({', '.join(str(c) for c in self.components)})"


# ======================================================================================================================
# LIE DERIVATIVES
# ======================================================================================================================


def lie_derivative_metric_values(jet: VectorJet, g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """(ℒ_η g)_ij = η^k g_ij,k + g_kj η^k,i + g_ik η^k,j, per sample."""
    return (
        np.einsum("nk,nijk->nij", jet.eta, dg)
        + np.einsum("nkj,nki->nij", g, jet.eta_x)
        + np.einsum("nik,nkj->nij", g, jet.eta_x)
    )


def lie_derivative_connection_values(jet: VectorJet, gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """(ℒ_η Γ)^i_jk = η^i,jk + η^m Γ^i_jk,m − η^i,m Γ^m_jk + η^m,j Γ^i_mk + η^m,k Γ^i_jm, per sample."""
    return (
        jet.eta_xx
        + np.einsum("nm,nijkm->nijk", jet.eta, dgamma)
        - np.einsum("nim,nmjk->nijk", jet.eta_x, gamma)
        + np.einsum("nmj,nimk->nijk", jet.eta_x, gamma)
        + np.einsum("nmk,nijm->nijk", jet.eta_x, gamma)
    )


def _single(values: np.ndarray, what: str, p: Sequence[float]) -> np.ndarray:
    if not np.isfinite(values).all():
        raise EvaluationDomainError(f"{what} cannot be evaluated at {tuple(p)}")
    return values[0]


def lie_derivative_metric(X: SymmetryVector, m: Metric, p: Sequence[float], t: float = 0.0) -> np.ndarray:
    """ℒ_η g at (t, p), time treated as a parameter. Returns an n x n array."""
    if X.chart != m.chart:
        raise DimensionMismatchError(f"Vector chart {X.chart.names} does not match metric chart {m.chart.names}")
    jet = X.jet([p], [t])
    values = lie_derivative_metric_values(jet, m.values([p]), m.derivative_values([p]))
    return _single(values, "ℒ_X g", p)


def lie_derivative_connection(X: SymmetryVector, c: ChristoffelField, p: Sequence[float], t: float = 0.0) -> np.ndarray:
    """ℒ_η Γ at (t, p), time treated as a parameter. Returns an n x n x n array indexed [i, j, k]."""
    if X.chart != c.metric.chart:
        raise DimensionMismatchError(f"Vector chart {X.chart.names} does not match metric chart {c.metric.chart.names}")
    jet = X.jet([p], [t])
    values = lie_derivative_connection_values(jet, c.values([p]), c.derivative_values([p]))
    return _single(values, "ℒ_X Γ", p)


# ======================================================================================================================
# SAMPLING
# ======================================================================================================================


class SampleBox(BaseModel):
    lower: list[float] = Field(description="Lower coordinate bounds, one per chart coordinate")
    upper: list[float] = Field(description="Upper coordinate bounds, one per chart coordinate")
    time: tuple[float, float] = Field(description="Time interval sampled alongside the coordinates", default=(0.0, 1.0))
    margin: float = Field(description="Minimum distance kept from the chart's excluded locus", default=0.1)


class Samples(NamedTuple):
    points: np.ndarray
    times: np.ndarray

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def subset(self, mask: np.ndarray) -> "Samples":
        return Samples(self.points[mask], self.times[mask])


def usable_samples(samples: Samples, what: str, *arrays: np.ndarray) -> np.ndarray:
    """Mask of samples where every array is finite; the others are logged and skipped."""
    mask = np.ones(samples.size, dtype=bool)
    for values in arrays:
        mask &= finite_rows(values)
    for point, time in zip(samples.points[~mask], samples.times[~mask]):
        logger.warning(f"{what} cannot be evaluated at t={time:.6g}, x={tuple(np.round(point, 6))}; point skipped")
    return mask


class ScalarField:
    """A scalar expression with its exact gradient and Hessian, evaluated in batches."""

    def __init__(self, expression: Expression, n: int):
        self.expression = expression
        self.gradient = tuple(differentiate(expression, i) for i in range(n))
        self.hessian = tuple(tuple(differentiate(d, j) for j in range(n)) for d in self.gradient)
        self._n = n
        self._compiled = compile_expressions(
            [expression, *self.gradient, *(h for row in self.hessian for h in row)], vectorized=True
        )

    def values(self, points, times=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(value (N,), gradient (N, n), Hessian (N, n, n))."""
        n = self._n
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = self._compiled(points, times)
        return out[:, 0], out[:, 1 : 1 + n], out[:, 1 + n :].reshape(-1, n, n)


def _check_box(chart: CoordinateChart, box: SampleBox) -> None:
    n = chart.dimension
    if len(box.lower) != n or len(box.upper) != n:
        raise DimensionMismatchError(f"Sample box has {len(box.lower)}/{len(box.upper)} bounds, chart needs {n}")


def _draw(sampler: qmc.Halton, chart: CoordinateChart, box: SampleBox, count: int) -> Samples:
    n = chart.dimension
    lower = [*box.lower, box.time[0]]
    upper = [*box.upper, box.time[1]]

    accepted: list[np.ndarray] = []
    found = drawn = 0
    while found < count and drawn < 50 * count:
        batch = qmc.scale(sampler.random(count), lower, upper)
        drawn += count
        keep = batch[chart.locus_distance(batch[:, :n]) >= box.margin]
        accepted.append(keep)
        found += keep.shape[0]

    if found < count:
        raise ValueError(f"Only {found} of {count} samples lie off the excluded locus of {chart.names}")
    sample = np.concatenate(accepted)[:count]
    return Samples(points=sample[:, :n], times=sample[:, n])


def halton_samples(chart: CoordinateChart, box: SampleBox, count: int, seed: int = 0, skip: int = 0) -> Samples:
    """Seeded scrambled Halton points in `box`, dropping those within `box.margin` of the excluded locus.

    `skip` fast-forwards the raw sequence, rejected points included. Use `halton_blocks` for disjoint sets.
    """
    _check_box(chart, box)
    sampler = qmc.Halton(d=chart.dimension + 1, scramble=True, seed=seed)
    if skip:
        sampler.fast_forward(skip)
    return _draw(sampler, chart, box, count)


def halton_blocks(chart: CoordinateChart, box: SampleBox, count: int, blocks: int, seed: int = 0) -> list[Samples]:
    """Consecutive blocks of `count` points from one sequence; no two blocks share a sequence index.

    The first block equals `halton_samples(chart, box, count, seed)`.
    """
    _check_box(chart, box)
    sampler = qmc.Halton(d=chart.dimension + 1, scramble=True, seed=seed)
    return [_draw(sampler, chart, box, count) for _ in range(blocks)]
