"""Equations of motion ẍ^i + Γ^i_jk ẋ^j ẋ^k = F^i, their integration, and conservation checks along trajectories."""

import csv
import io
import math
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
from beartype import beartype
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import RK45
from scipy.optimize import brentq

from geonoether.base import DimensionMismatchError, EvaluationDomainError, IntegrationHaltedError
from geonoether.expr import compile_expressions, is_zero
from geonoether.geometry import ExpressionLike, ForceField, Metric
from geonoether.symmetry import NoetherIntegral


IntegrationMethod = Literal["RK4", "RK45"]

DEFAULT_STEP = 1e-3
DEFAULT_TOLERANCE = 1e-10
DEFAULT_LOCUS_MARGIN = 1e-3


class EquationsOfMotion:
    """Second-order system of a metric and a force, evaluated one state at a time."""

    @beartype
    def __init__(self, metric: Metric, force: ForceField):
        if force.chart != metric.chart:
            raise DimensionMismatchError(f"Force lives on {force.chart.names}, metric on {metric.chart.names}")
        self.metric = metric
        self.force = force
        self.connection = metric.christoffel

    @classmethod
    def from_potential(
        cls, metric: Metric, potential: ExpressionLike, *, curvature: int | None = None
    ) -> "EquationsOfMotion":
        return cls(metric, ForceField.from_potential(metric, potential, curvature=curvature))

    @property
    def dimension(self) -> int:
        return self.metric.dimension

    @property
    def chart(self):
        return self.metric.chart

    @property
    def potential(self):
        return self.force.potential

    @cached_property
    def _connection_terms(self) -> list[tuple[int, int, int, float]]:
        """(i, j, k, multiplicity) of the non-zero Γ^i_jk with j <= k."""
        if not self.connection.is_symbolic:
            return []
        n = self.dimension
        return [
            (i, j, k, 1.0 if j == k else 2.0)
            for i in range(n)
            for j in range(n)
            for k in range(j, n)
            if not is_zero(self.connection.component(i, j, k))
        ]

    @cached_property
    def _compiled(self):
        gamma = [self.connection.component(i, j, k) for i, j, k, _ in self._connection_terms]
        return compile_expressions([*gamma, *self.force.components, *self.chart.excluded_locus])

    def _evaluate(self, t: float, x: Sequence[float]) -> tuple[tuple, tuple, tuple]:
        values = self._compiled(x, t)
        g = len(self._connection_terms)
        n = self.dimension
        return values[:g], values[g : g + n], values[g + n :]

    def acceleration(self, x: Sequence[float], v: Sequence[float], t: float = 0.0) -> np.ndarray:
        """ẍ^i = −Γ^i_jk ẋ^j ẋ^k + F^i; raises `EvaluationDomainError` off the domain."""
        gamma, force, _ = self._evaluate(t, x)
        a = np.array(force, dtype=float)
        if self.connection.is_symbolic:
            for (i, j, k, multiplicity), value in zip(self._connection_terms, gamma):
                a[i] -= multiplicity * value * v[j] * v[k]
        else:
            values = self.connection.values([x])[0]
            if not np.isfinite(values).all():
                raise EvaluationDomainError(f"Connection cannot be evaluated at {tuple(x)}")
            a -= np.einsum("ijk,j,k->i", values, v, v)
        return a

    def locus_distance(self, x: Sequence[float], t: float = 0.0) -> float:
        """Smallest |locus expression| at x; inf for charts without an excluded locus, 0 off the domain."""
        if not self.chart.excluded_locus:
            return math.inf
        try:
            _, _, locus = self._evaluate(t, x)
        except EvaluationDomainError:
            return 0.0
        return min((abs(value) for value in locus), default=math.inf)

    def rhs(self, t: float, state: np.ndarray) -> np.ndarray:
        n = self.dimension
        x, v = state[:n], state[n:]
        return np.concatenate([v, self.acceleration(x, v, t)])

    def __repr__(self) -> str:
        return f"EquationsOfMotion({self.chart.names}, {self.force})"


def eom_rhs(e: EquationsOfMotion, state: Sequence[float], t: float = 0.0) -> np.ndarray:
    """First-order form (ẋ, ẍ) of the equations of motion at `state` = (x, ẋ)."""
    state = np.asarray(state, dtype=float)
    if state.shape != (2 * e.dimension,):
        raise DimensionMismatchError(f"State has shape {state.shape}, expected ({2 * e.dimension},)")
    return e.rhs(t, state)


# ======================================================================================================================
# TRAJECTORIES
# ======================================================================================================================


class Trajectory(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: np.ndarray = Field(description="Strictly increasing time grid, shape (N,)")
    states: np.ndarray = Field(description="Rows (x^1..x^n, ẋ^1..ẋ^n), shape (N, 2n)")
    method: IntegrationMethod
    step: float | None = Field(description="Fixed step of RK4 runs", default=None)
    atol: float | None = Field(description="Absolute tolerance of RK45 runs", default=None)
    rtol: float | None = Field(description="Relative tolerance of RK45 runs", default=None)
    halted: str | None = Field(description="Why integration stopped before the end of the span", default=None)

    @model_validator(mode="after")
    def _check_shape(self) -> "Trajectory":
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0] or self.states.shape[1] % 2:
            raise ValueError(f"States of shape {self.states.shape} do not match {self.times.shape[0]} times")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing")
        return self

    @property
    def dimension(self) -> int:
        return self.states.shape[1] // 2

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, : self.dimension]

    @property
    def velocities(self) -> np.ndarray:
        return self.states[:, self.dimension :]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return self.times.shape[0]


def _rk4(e: EquationsOfMotion, y0: np.ndarray, t0: float, t1: float, step: float, margin: float) -> Trajectory:
    steps = max(1, math.ceil((t1 - t0) / step - 1e-9))
    h = (t1 - t0) / steps
    times = [t0]
    states = [y0]
    y = y0
    halted = None
    for k in range(steps):
        t = t0 + k * h
        if e.locus_distance(y[: e.dimension], t) < margin:
            halted = f"state at t={t:.6g} is within {margin:g} of the excluded locus"
            break
        try:
            k1 = e.rhs(t, y)
            k2 = e.rhs(t + h / 2, y + h / 2 * k1)
            k3 = e.rhs(t + h / 2, y + h / 2 * k2)
            k4 = e.rhs(t + h, y + h * k3)
        except EvaluationDomainError as exc:
            halted = f"step from t={t:.6g} left the domain: {exc}"
            break
        y = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        times.append(t0 + (k + 1) * h)
        states.append(y)
    return Trajectory(times=np.array(times), states=np.array(states), method="RK4", step=h, halted=halted)


def _rk45(e: EquationsOfMotion, y0: np.ndarray, t0: float, t1: float, tol: float, margin: float) -> Trajectory:
    n = e.dimension
    times, states = [t0], [y0]
    halted = None
    try:
        solver = RK45(e.rhs, t0, y0, t1, atol=tol, rtol=tol)
    except EvaluationDomainError as exc:
        solver, halted = None, f"first step from t={t0:.6g} left the domain: {exc}"

    while solver is not None and solver.status == "running":
        try:
            message = solver.step()
        except EvaluationDomainError as exc:
            halted = f"step from t={solver.t:.6g} left the domain: {exc}"
            break
        if solver.status == "failed":
            halted = f"RK45 failed at t={solver.t:.6g}: {message}"
            break
        if e.locus_distance(solver.y[:n], solver.t) < margin:
            dense = solver.dense_output()
            t_hit = brentq(lambda t: e.locus_distance(dense(t)[:n], t) - margin, solver.t_old, solver.t)
            if t_hit > times[-1]:
                times.append(t_hit)
                states.append(dense(t_hit))
            halted = f"state at t={t_hit:.6g} reached within {margin:g} of the excluded locus"
            break
        times.append(solver.t)
        states.append(solver.y.copy())

    return Trajectory(times=np.array(times), states=np.array(states), method="RK45", atol=tol, rtol=tol, halted=halted)


def integrate(
    e: EquationsOfMotion,
    x0: Sequence[float],
    v0: Sequence[float],
    t_span: tuple[float, float],
    method: IntegrationMethod = "RK4",
    step: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOLERANCE,
    margin: float = DEFAULT_LOCUS_MARGIN,
) -> Trajectory:
    """Integrate from (x0, v0) over `t_span`.

    RK4 uses a fixed step, shrunk so the grid ends exactly at the end of the span. RK45 is scipy's embedded pair
    stepped with atol = rtol = `tol`. A run that comes within `margin` of the chart's excluded locus, or whose step
    leaves the domain of the force, stops there and returns the partial trajectory with `halted` set.
    """
    n = e.dimension
    if len(x0) != n or len(v0) != n:
        raise DimensionMismatchError(f"Initial state needs {n} positions and {n} velocities")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 <= t0:
        raise ValueError(f"Empty time span {t_span}")
    if step <= 0:
        raise ValueError(f"Step must be positive, got {step}")
    if e.locus_distance(x0, t0) < margin:
        raise IntegrationHaltedError(f"Initial point {tuple(x0)} is within {margin:g} of the excluded locus")

    y0 = np.array([*x0, *v0], dtype=float)
    if method == "RK4":
        trajectory = _rk4(e, y0, t0, t1, step, margin)
    else:
        trajectory = _rk45(e, y0, t0, t1, tol, margin)

    if trajectory.halted:
        logger.warning(f"Integration stopped early: {trajectory.halted}")
    logger.debug(f"{method} run over [{t0:g}, {t1:g}] produced {len(trajectory)} states")
    return trajectory


# ======================================================================================================================
# CONSERVATION
# ======================================================================================================================


class IntegralDrift(BaseModel):
    name: str
    initial: float = Field(description="Value at the first trajectory point")
    absolute: float = Field(description="max |I(t_k) − I(t_0)|")
    relative: float = Field(description="Absolute drift divided by max(1, |I(t_0)|)")
    series: list[float] = Field(description="I(t_k) along the trajectory", default=[], exclude=True)


class DriftReport(BaseModel):
    method: IntegrationMethod
    points: int = Field(description="Number of trajectory points evaluated")
    drifts: list[IntegralDrift]

    def drift(self, name: str) -> IntegralDrift:
        for d in self.drifts:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def maximum_relative(self) -> float:
        return max((d.relative for d in self.drifts), default=0.0)


def conservation_drift(tr: Trajectory, integrals: Sequence[NoetherIntegral]) -> DriftReport:
    drifts = []
    for integral in integrals:
        if integral.metric.dimension != tr.dimension:
            raise DimensionMismatchError(
                f"{integral.name} is defined in {integral.metric.dimension} dimensions, trajectory in {tr.dimension}"
            )
        series = integral.values(tr.times, tr.positions, tr.velocities)
        if not np.isfinite(series).all():
            raise EvaluationDomainError(f"{integral.name} cannot be evaluated along the whole trajectory")
        initial = float(series[0])
        absolute = float(np.abs(series - initial).max())
        drifts.append(
            IntegralDrift(
                name=integral.name,
                initial=initial,
                absolute=absolute,
                relative=absolute / max(1.0, abs(initial)),
                series=series.tolist(),
            )
        )
    return DriftReport(method=tr.method, points=len(tr), drifts=drifts)


def trajectory_csv(tr: Trajectory, energy: NoetherIntegral, integrals: Sequence[NoetherIntegral] = ()) -> str:
    """CSV text with columns t, x1..xn, v1..vn, E, I_1..I_k and 17 significant digits."""
    n = tr.dimension
    columns = [energy.values(tr.times, tr.positions, tr.velocities)]
    columns += [integral.values(tr.times, tr.positions, tr.velocities) for integral in integrals]
    header = (
        ["t"]
        + [f"x{i + 1}" for i in range(n)]
        + [f"v{i + 1}" for i in range(n)]
        + ["E"]
        + [f"I_{k + 1}" for k in range(len(integrals))]
    )
    table = np.column_stack([tr.times, tr.states, *columns])

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in table:
        writer.writerow([f"{value:.17g}" for value in row])
    return buffer.getvalue()
