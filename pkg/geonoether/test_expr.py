import math
from fractions import Fraction

import numpy as np
import pytest

from geonoether.base import EvaluationDomainError, ExpressionSyntaxError, MissingTimeError, UnknownIdentifierError
from geonoether.expr import (
    ONE,
    TIME,
    ZERO,
    Const,
    CoordinateChart,
    Function,
    Mul,
    compile_expressions,
    cos,
    differentiate,
    evaluate,
    exp,
    ln,
    parse,
    sin,
    sqrt,
    to_text,
)


XYZ = CoordinateChart(["x", "y", "z"])


# ======================================================================================================================
# RANDOM EXPRESSIONS
# ======================================================================================================================


def random_expression(rng: np.random.Generator, depth: int):
    """Expressions bounded by about 2 on [-1, 1]^3 x [0, 1], defined everywhere there."""
    x, y, z = XYZ.variables()
    if depth == 0:
        choice = rng.integers(6)
        if choice < 3:
            return (x, y, z)[choice]
        if choice == 3:
            return parse("t", XYZ)
        return Const(Fraction(int(rng.integers(-3, 4)), 3))

    a = random_expression(rng, depth - 1)
    b = random_expression(rng, depth - 1)
    op = rng.integers(10)
    if op == 0:
        return (a + b) / 2
    if op == 1:
        return (a - b) / 2
    if op == 2:
        return a * b / 2
    if op == 3:
        return a / (1 + b * b)
    if op == 4:
        return sin(a) * b
    if op == 5:
        return cos(a) - b / 2
    if op == 6:
        return (exp(sin(a)) - b) / 2
    if op == 7:
        return ln(2 + cos(a)) * b
    if op == 8:
        return (sqrt(1 + a * a) - b) / 2
    return (a**2 - b) / 3


def random_point(rng: np.random.Generator) -> tuple[list[float], float]:
    return list(rng.uniform(-1.0, 1.0, size=3)), float(rng.uniform(0.0, 1.0))


# ======================================================================================================================
# PARSE
# ======================================================================================================================


def test_parse_examples():
    chart = CoordinateChart(["theta", "phi"])
    e = parse("cos(theta)*sin(phi)", chart)
    assert isinstance(e, Mul)
    assert evaluate(e, [0.0, math.pi / 2]) == pytest.approx(1.0)

    assert evaluate(parse("x^2 + y", CoordinateChart(["x", "y"])), [2.0, 3.0]) == 7.0

    bianchi = CoordinateChart(["lambda", "b1", "b2", "phi"])
    assert evaluate(parse("exp(3*lambda)", bianchi), [0.0, 0.4, 0.2, 0.1]) == 1.0


def test_parse_precedence_and_associativity():
    chart = CoordinateChart(["x"])
    assert evaluate(parse("-x^2", chart), [3.0]) == -9.0
    assert evaluate(parse("2^3^2", chart), [0.0]) == 512.0
    assert evaluate(parse("8/4/2", chart), [0.0]) == 1.0
    assert evaluate(parse("1 - 2 - 3", chart), [0.0]) == -4.0
    assert evaluate(parse("x^-2", chart), [2.0]) == 0.25
    assert evaluate(parse("2 * -x", chart), [1.5]) == -3.0


def test_decimal_literals_are_exact():
    e = parse("0.1 + 0.2", XYZ)
    assert isinstance(e, Const)
    assert e.value == Fraction(3, 10)
    assert parse("1.5e-3", XYZ).value == Fraction(3, 2000)


def test_parse_errors_carry_position_and_name():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse("x + * y", XYZ)
    assert info.value.position == 4

    with pytest.raises(ExpressionSyntaxError) as info:
        parse("sin(x", XYZ)
    assert info.value.position == 5

    with pytest.raises(ExpressionSyntaxError):
        parse("x $ y", XYZ)

    with pytest.raises(UnknownIdentifierError) as info:
        parse("x + w", XYZ)
    assert info.value.name == "w"

    with pytest.raises(UnknownIdentifierError):
        parse("Sinn(x)", XYZ)


def test_sinn_cosn_expand_by_curvature():
    chart = CoordinateChart(["phi", "theta"])
    assert parse("Sinn(phi)", chart, curvature=1) == sin(chart.variable("phi"))
    assert evaluate(parse("Cosn(phi)", chart, curvature=-1), [0.5, 0.0]) == pytest.approx(math.cosh(0.5))
    assert evaluate(parse("Sinn(phi)", chart, curvature=0), [0.5, 0.0]) == 0.5


def test_chart_rejects_reserved_and_duplicate_names():
    with pytest.raises(ValueError):
        CoordinateChart(["t", "x"])
    with pytest.raises(ValueError):
        CoordinateChart(["x", "x"])
    with pytest.raises(ValueError):
        CoordinateChart([])


def test_chart_without_excluded_locus():
    chart = CoordinateChart(["x"])
    np.testing.assert_array_equal(chart.locus_distance([[0.0], [2.5]]), [np.inf, np.inf])
    assert not chart.is_excluded([0.0], margin=0.1)


def test_empty_batch_compiles():
    assert compile_expressions([])([1.0, 2.0]) == ()
    assert compile_expressions([], vectorized=True)(np.zeros((4, 2))).shape == (4, 0)


# ======================================================================================================================
# DIFFERENTIATE
# ======================================================================================================================


def test_differentiate_examples():
    chart = CoordinateChart(["phi", "theta"])
    phi = chart.variable("phi")
    assert differentiate(sin(phi), 0) == cos(phi)

    xy = CoordinateChart(["x", "y"])
    d = differentiate(parse("x^2 + y", xy), 0)
    assert evaluate(d, [1.5, 9.0]) == 3.0
    assert differentiate(parse("x^2 + y", xy), 1) == ONE

    lam = CoordinateChart(["lambda"])
    e = parse("exp(3*lambda)", lam)
    h = 1e-5
    fd = (evaluate(e, [0.3 + h]) - evaluate(e, [0.3 - h])) / (2 * h)
    assert abs(evaluate(differentiate(e, 0), [0.3]) - fd) <= 1e-6


def test_derivative_of_independent_expression_is_zero():
    assert differentiate(parse("sin(y) * t", XYZ), 0) == ZERO
    assert differentiate(parse("x^3", XYZ), TIME) == ZERO


def test_time_derivative():
    e = parse("t^2 * x", XYZ)
    assert evaluate(differentiate(e, TIME), [2.0, 0.0, 0.0], time=3.0) == 12.0


def test_real_power_derivative():
    e = parse("x^1.5", XYZ)
    assert evaluate(differentiate(e, 0), [4.0, 0.0, 0.0]) == pytest.approx(3.0)
    e = parse("x^y", XYZ)
    assert evaluate(differentiate(e, 1), [2.0, 3.0, 0.0]) == pytest.approx(8.0 * math.log(2.0))


def test_derivative_matches_central_difference():
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(1000):
        e = random_expression(rng, int(rng.integers(1, 4)))
        point, time = random_point(rng)
        var = int(rng.integers(4))
        d = differentiate(e, TIME if var == 3 else var)

        if var == 3:
            plus = evaluate(e, point, time + h)
            minus = evaluate(e, point, time - h)
        else:
            shifted = list(point)
            shifted[var] += h
            plus = evaluate(e, shifted, time)
            shifted[var] -= 2 * h
            minus = evaluate(e, shifted, time)
        value = evaluate(d, point, time)
        assert abs(value - (plus - minus) / (2 * h)) <= 1e-6 * (1 + abs(value)), to_text(e)


def test_differentiate_is_linear():
    rng = np.random.default_rng(1)
    for _ in range(100):
        e1 = random_expression(rng, 2)
        e2 = random_expression(rng, 2)
        a = Const(Fraction(int(rng.integers(-5, 6)), 3))
        var = int(rng.integers(3))
        lhs = differentiate(a * e1 + e2, var)
        rhs = a * differentiate(e1, var) + differentiate(e2, var)
        point, time = random_point(rng)
        assert evaluate(lhs, point, time) == pytest.approx(evaluate(rhs, point, time), rel=1e-12, abs=1e-12)


# ======================================================================================================================
# EVALUATE
# ======================================================================================================================


def test_evaluate_examples():
    assert evaluate(ZERO, [1.0, 2.0, 3.0]) == 0.0
    assert evaluate(parse("t*x", XYZ), [2.0, 0.0, 0.0], time=3.0) == 6.0

    sphere = CoordinateChart(["phi", "theta"])
    with pytest.raises(EvaluationDomainError):
        evaluate(parse("1/Sinn(phi)", sphere, curvature=1), [0.0, 1.0])


def test_evaluate_domain_and_time_errors():
    with pytest.raises(EvaluationDomainError):
        evaluate(parse("ln(x)", XYZ), [0.0, 0.0, 0.0])
    with pytest.raises(EvaluationDomainError):
        evaluate(parse("sqrt(x)", XYZ), [-1.0, 0.0, 0.0])
    with pytest.raises(EvaluationDomainError):
        evaluate(parse("x^0.5", XYZ), [-1.0, 0.0, 0.0])
    with pytest.raises(MissingTimeError):
        evaluate(parse("t*x", XYZ), [1.0, 0.0, 0.0])


def test_constant_folding_and_identities():
    x = XYZ.variable("x")
    assert parse("0*x + 1*y - 0", XYZ) == XYZ.variable("y")
    assert parse("2*3 + 1/2", XYZ).value == Fraction(13, 2)
    assert parse("x^1", XYZ) == x
    assert parse("x^0", XYZ) == ONE
    assert parse("sin(0) + cos(0)", XYZ) == ONE
    assert isinstance(parse("sin(x)", XYZ), Function)


def test_compiled_forms_agree_with_evaluate():
    rng = np.random.default_rng(2)
    expressions = [random_expression(rng, 3) for _ in range(20)]
    scalar = compile_expressions(expressions)
    vectorized = compile_expressions(expressions, vectorized=True)

    points = rng.uniform(-1.0, 1.0, size=(50, 3))
    times = rng.uniform(0.0, 1.0, size=50)
    batch = vectorized(points, times)
    assert batch.shape == (50, 20)
    for k in range(50):
        expected = [evaluate(e, points[k], times[k]) for e in expressions]
        np.testing.assert_allclose(scalar(points[k], times[k]), expected, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(batch[k], expected, rtol=1e-13, atol=1e-13)


def test_vectorized_form_marks_domain_failures():
    compiled = compile_expressions([parse("1/x", XYZ), parse("ln(y)", XYZ)], vectorized=True)
    values = compiled(np.array([[0.0, 1.0, 0.0], [2.0, -1.0, 0.0]]))
    assert not np.isfinite(values[0, 0])
    assert not np.isfinite(values[1, 1])
    assert values[0, 1] == 0.0


# ======================================================================================================================
# PRINT
# ======================================================================================================================


def test_print_parse_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(50):
        e = random_expression(rng, 3)
        again = parse(to_text(e), XYZ)
        for _ in range(100):
            point, time = random_point(rng)
            assert evaluate(again, point, time) == pytest.approx(evaluate(e, point, time), rel=1e-12, abs=1e-12)


def test_print_keeps_negative_constants_and_fractions_readable():
    x = XYZ.variable("x")
    assert to_text(x * Const(-2)) == "x * -2"
    assert to_text(x ** (-2)) == "x^(-2)"
    assert to_text(Const(Fraction(1, 2)) * x) == "1/2 * x"
    assert evaluate(parse(to_text(x / (Const(Fraction(1, 2)) * x)), XYZ), [3.0, 0.0, 0.0]) == 2.0
