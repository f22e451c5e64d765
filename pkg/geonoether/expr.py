"""Closed-form scalar expressions over a coordinate chart.

Expressions are immutable trees. They are parsed from infix text, differentiated symbolically, evaluated at a
point, and compiled to plain Python (scalar) or numpy (vectorized) callables for the hot loops of the residual
checks and the integrators.

Grammar (whitespace is ignored)::

    expression := term (("+" | "-") term)*
    term       := unary (("*" | "/") unary)*
    unary      := ("-" | "+") unary | power
    power      := primary ("^" unary)?
    primary    := number | name | function "(" expression ")" | "(" expression ")"
    number     := digits ["." [digits]] [("e" | "E") ["+" | "-"] digits]

`t` is the time variable and `pi` the real constant. Functions: sin, cos, sinh, cosh, tan, exp, ln, sqrt.
When `parse` receives a curvature sign `K`, `Sinn` and `Cosn` are accepted and expand to sin/cos (K > 0),
sinh/cosh (K < 0) or the flat forms u and 1 (K = 0). Finite decimal literals become exact rationals.
"""

import math
import re
from fractions import Fraction
from functools import singledispatch
from typing import Callable, Iterable, Literal, Sequence, Union

import numpy as np
from beartype import beartype

from geonoether.base import EvaluationDomainError, ExpressionSyntaxError, MissingTimeError, UnknownIdentifierError


Number = Union[Fraction, float]
Variable = Union[int, Literal["t"]]

TIME = "t"

ADD_PRECEDENCE = 1
MUL_PRECEDENCE = 2
UNARY_PRECEDENCE = 3
POW_PRECEDENCE = 4
ATOM_PRECEDENCE = 5

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "tan", "exp", "ln", "sqrt")
RESERVED_NAMES = frozenset((TIME, "pi", "Sinn", "Cosn", *FUNCTIONS))


# ======================================================================================================================
# NODES
# ======================================================================================================================


class Expression:
    """Base node. Subclasses store their children in `operands` and never mutate after construction."""

    precedence = ATOM_PRECEDENCE

    def __init__(self, *operands: "Expression"):
        self.operands = operands
        self.uses_time = any(o.uses_time for o in operands)
        self._hash = hash((type(self), self._key()))

    def _key(self) -> tuple:
        return self.operands

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()  # type: ignore[attr-defined]

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"{type(self).__name__}({str(self)!r})"

    def __add__(self, other) -> "Expression":
        return add(self, as_expression(other))

    def __radd__(self, other) -> "Expression":
        return add(as_expression(other), self)

    def __sub__(self, other) -> "Expression":
        return sub(self, as_expression(other))

    def __rsub__(self, other) -> "Expression":
        return sub(as_expression(other), self)

    def __mul__(self, other) -> "Expression":
        return mul(self, as_expression(other))

    def __rmul__(self, other) -> "Expression":
        return mul(as_expression(other), self)

    def __truediv__(self, other) -> "Expression":
        return div(self, as_expression(other))

    def __rtruediv__(self, other) -> "Expression":
        return div(as_expression(other), self)

    def __neg__(self) -> "Expression":
        return neg(self)

    def __pow__(self, other) -> "Expression":
        if isinstance(other, int):
            return power(self, other)
        return real_power(self, as_expression(other))


class Const(Expression):
    def __init__(self, value: int | Fraction | float):
        self.value: Number = Fraction(value) if isinstance(value, int) else value
        super().__init__()

    def _key(self) -> tuple:
        return (self.value,)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.value, Fraction)

    @property
    def precedence(self) -> int:  # type: ignore[override]
        fractional = isinstance(self.value, Fraction) and self.value.denominator != 1
        if self.value < 0:
            return ADD_PRECEDENCE if fractional else UNARY_PRECEDENCE
        if fractional:
            return MUL_PRECEDENCE
        return ATOM_PRECEDENCE

    def __str__(self) -> str:
        if isinstance(self.value, Fraction):
            return str(self.value)
        return repr(self.value)


class Var(Expression):
    def __init__(self, index: int, name: str):
        self.index = index
        self.name = name
        super().__init__()

    def _key(self) -> tuple:
        return (self.index,)

    def __str__(self) -> str:
        return self.name


class Time(Expression):
    def __init__(self):
        super().__init__()
        self.uses_time = True

    def __str__(self) -> str:
        return TIME


class Neg(Expression):
    precedence = UNARY_PRECEDENCE

    def __str__(self) -> str:
        return f"-{_bracket(self.operands[0], UNARY_PRECEDENCE + 1)}"


class BinaryOperator(Expression):
    symbol = ""

    def __str__(self) -> str:
        left, right = self.operands
        return f"{_bracket(left, self.precedence)} {self.symbol} {_bracket(right, self.precedence + 1)}"


class Add(BinaryOperator):
    symbol = "+"
    precedence = ADD_PRECEDENCE


class Sub(BinaryOperator):
    symbol = "-"
    precedence = ADD_PRECEDENCE


class Mul(BinaryOperator):
    symbol = "*"
    precedence = MUL_PRECEDENCE


class Div(BinaryOperator):
    symbol = "/"
    precedence = MUL_PRECEDENCE


class IntPow(Expression):
    precedence = POW_PRECEDENCE

    def __init__(self, base: Expression, exponent: int):
        self.exponent = exponent
        super().__init__(base)

    def _key(self) -> tuple:
        return (self.operands[0], self.exponent)

    def __str__(self) -> str:
        exponent = str(self.exponent) if self.exponent >= 0 else f"({self.exponent})"
        return f"{_bracket(self.operands[0], ATOM_PRECEDENCE)}^{exponent}"


class RealPow(Expression):
    precedence = POW_PRECEDENCE

    def __str__(self) -> str:
        base, exponent = self.operands
        return f"{_bracket(base, ATOM_PRECEDENCE)}^{_bracket(exponent, ATOM_PRECEDENCE)}"


class Function(Expression):
    def __init__(self, name: str, argument: Expression):
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(name)
        self.name = name
        super().__init__(argument)

    def _key(self) -> tuple:
        return (self.name, self.operands[0])

    def __str__(self) -> str:
        return f"{self.name}({self.operands[0]})"


def _bracket(operand: Expression, precedence: int) -> str:
    if operand.precedence < precedence:
        return f"({operand})"
    return str(operand)


ZERO = Const(0)
ONE = Const(1)
T = Time()


def as_expression(value: "Expression | int | Fraction | float") -> Expression:
    if isinstance(value, Expression):
        return value
    return Const(value)


def to_text(e: Expression) -> str:
    """Print `e` as infix text that `parse` reads back to an evaluation-equivalent expression."""
    return str(e)


# ======================================================================================================================
# FOLDING CONSTRUCTORS
# ======================================================================================================================


def _value(e: Expression) -> Number | None:
    return e.value if isinstance(e, Const) else None


def is_zero(e: Expression) -> bool:
    return isinstance(e, Const) and e.value == 0


def is_one(e: Expression) -> bool:
    return isinstance(e, Const) and e.value == 1


def neg(a: Expression) -> Expression:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.operands[0]
    return Neg(a)


def add(a: Expression, b: Expression) -> Expression:
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None:
        return Const(va + vb)
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    return Add(a, b)


def sub(a: Expression, b: Expression) -> Expression:
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None:
        return Const(va - vb)
    if is_zero(b):
        return a
    if is_zero(a):
        return neg(b)
    return Sub(a, b)


def mul(a: Expression, b: Expression) -> Expression:
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None:
        return Const(va * vb)
    if is_zero(a) or is_zero(b):
        return ZERO
    if is_one(a):
        return b
    if is_one(b):
        return a
    if va == -1:
        return neg(b)
    if vb == -1:
        return neg(a)
    return Mul(a, b)


def div(a: Expression, b: Expression) -> Expression:
    va, vb = _value(a), _value(b)
    if vb is not None and vb != 0:
        if va is not None:
            return Const(va / vb)
        if vb == 1:
            return a
        if vb == -1:
            return neg(a)
    if is_zero(a) and vb != 0:
        return ZERO
    return Div(a, b)


def power(base: Expression, exponent: int) -> Expression:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    vb = _value(base)
    if vb is not None and not (vb == 0 and exponent < 0):
        return Const(vb**exponent)
    return IntPow(base, exponent)


def real_power(base: Expression, exponent: Expression) -> Expression:
    ve = _value(exponent)
    if isinstance(ve, Fraction) and ve.denominator == 1:
        return power(base, int(ve))
    if isinstance(ve, float) and ve.is_integer():
        return power(base, int(ve))
    return RealPow(base, exponent)


_AT_ZERO = {"sin": 0, "tan": 0, "sinh": 0, "cos": 1, "cosh": 1, "exp": 1, "sqrt": 0}


def call(name: str, argument: Expression) -> Expression:
    if is_zero(argument) and name in _AT_ZERO:
        return Const(_AT_ZERO[name])
    if name == "ln" and is_one(argument):
        return ZERO
    return Function(name, argument)


def sin(u: Expression) -> Expression:
    return call("sin", u)


def cos(u: Expression) -> Expression:
    return call("cos", u)


def sinh(u: Expression) -> Expression:
    return call("sinh", u)


def cosh(u: Expression) -> Expression:
    return call("cosh", u)


def tan(u: Expression) -> Expression:
    return call("tan", u)


def exp(u: Expression) -> Expression:
    return call("exp", u)


def ln(u: Expression) -> Expression:
    return call("ln", u)


def sqrt(u: Expression) -> Expression:
    return call("sqrt", u)


def sinn(u: Expression, curvature: int) -> Expression:
    if curvature > 0:
        return sin(u)
    if curvature < 0:
        return sinh(u)
    return u


def cosn(u: Expression, curvature: int) -> Expression:
    if curvature > 0:
        return cos(u)
    if curvature < 0:
        return cosh(u)
    return ONE


def total(terms: Iterable[Expression]) -> Expression:
    result: Expression = ZERO
    for term in terms:
        result = add(result, term)
    return result


# ======================================================================================================================
# DIFFERENTIATION
# ======================================================================================================================


@singledispatch
def _derivative(e: Expression, var: Variable) -> Expression:
    raise NotImplementedError(f"Cannot differentiate a {type(e).__name__}")


@_derivative.register
def _(e: Const, var: Variable) -> Expression:
    return ZERO


@_derivative.register
def _(e: Var, var: Variable) -> Expression:
    return ONE if var == e.index else ZERO


@_derivative.register
def _(e: Time, var: Variable) -> Expression:
    return ONE if var == TIME else ZERO


@_derivative.register
def _(e: Neg, var: Variable) -> Expression:
    return neg(_derivative(e.operands[0], var))


@_derivative.register
def _(e: Add, var: Variable) -> Expression:
    return add(*(_derivative(o, var) for o in e.operands))


@_derivative.register
def _(e: Sub, var: Variable) -> Expression:
    return sub(*(_derivative(o, var) for o in e.operands))


@_derivative.register
def _(e: Mul, var: Variable) -> Expression:
    f, g = e.operands
    return add(mul(_derivative(f, var), g), mul(f, _derivative(g, var)))


@_derivative.register
def _(e: Div, var: Variable) -> Expression:
    f, g = e.operands
    df, dg = _derivative(f, var), _derivative(g, var)
    return sub(div(df, g), div(mul(f, dg), power(g, 2)))


@_derivative.register
def _(e: IntPow, var: Variable) -> Expression:
    base = e.operands[0]
    return mul(mul(Const(e.exponent), power(base, e.exponent - 1)), _derivative(base, var))


@_derivative.register
def _(e: RealPow, var: Variable) -> Expression:
    base, exponent = e.operands
    db, de = _derivative(base, var), _derivative(exponent, var)
    if is_zero(de):
        return mul(mul(exponent, real_power(base, sub(exponent, ONE))), db)
    # d(b^e) = b^e (e' ln b + e b' / b)
    return mul(e, add(mul(de, ln(base)), div(mul(exponent, db), base)))


_CHAIN: dict[str, Callable[[Expression], Expression]] = {
    "sin": cos,
    "cos": lambda u: neg(sin(u)),
    "sinh": cosh,
    "cosh": sinh,
    "tan": lambda u: add(ONE, power(tan(u), 2)),
    "exp": exp,
    "ln": lambda u: div(ONE, u),
    "sqrt": lambda u: div(ONE, mul(Const(2), sqrt(u))),
}


@_derivative.register
def _(e: Function, var: Variable) -> Expression:
    argument = e.operands[0]
    inner = _derivative(argument, var)
    if is_zero(inner):
        return ZERO
    return mul(_CHAIN[e.name](argument), inner)


def differentiate(e: Expression, var: Variable) -> Expression:
    """Exact partial derivative with respect to a coordinate index or `"t"`."""
    return _derivative(e, var)


# ======================================================================================================================
# EVALUATION
# ======================================================================================================================


def postvisitor(expr: Expression, visitor: Callable, **kwargs):
    """Post-order traversal of an expression tree, visiting each distinct subexpression once."""
    stack = [expr]
    visited: dict[Expression, object] = {}

    while stack:
        e = stack.pop()
        unvisited = [o for o in e.operands if o not in visited]
        if unvisited:
            stack.append(e)
            stack.extend(unvisited)
        else:
            visited[e] = visitor(e, *(visited[o] for o in e.operands), **kwargs)

    return visited[expr]


def _real_power(base: float, exponent: float) -> float:
    if base < 0 or (base == 0 and exponent < 0):
        raise EvaluationDomainError(f"{base!r}^{exponent!r} is not a real number")
    return base**exponent


_MATH = {
    "sin": math.sin,
    "cos": math.cos,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}

_NUMPY = {
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tan": np.tan,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
}


@singledispatch
def _evaluate_node(e: Expression, *values: float, point: Sequence[float], time: float | None) -> float:
    raise NotImplementedError(f"Cannot evaluate a {type(e).__name__}")


@_evaluate_node.register
def _(e: Const, *values, point, time):
    return float(e.value)


@_evaluate_node.register
def _(e: Var, *values, point, time):
    return float(point[e.index])


@_evaluate_node.register
def _(e: Time, *values, point, time):
    if time is None:
        raise MissingTimeError("Expression references t but no time was supplied")
    return float(time)


@_evaluate_node.register
def _(e: Neg, a, *, point, time):
    return -a


@_evaluate_node.register
def _(e: Add, a, b, *, point, time):
    return a + b


@_evaluate_node.register
def _(e: Sub, a, b, *, point, time):
    return a - b


@_evaluate_node.register
def _(e: Mul, a, b, *, point, time):
    return a * b


@_evaluate_node.register
def _(e: Div, a, b, *, point, time):
    return a / b


@_evaluate_node.register
def _(e: IntPow, a, *, point, time):
    return a**e.exponent


@_evaluate_node.register
def _(e: RealPow, a, b, *, point, time):
    return _real_power(a, b)


@_evaluate_node.register
def _(e: Function, a, *, point, time):
    return _MATH[e.name](a)


def evaluate(e: Expression, point: Sequence[float], time: float | None = None) -> float:
    """Evaluate `e` in double precision at `point` (and `time` when `e` references `t`)."""
    if e.uses_time and time is None:
        raise MissingTimeError(f"Expression '{e}' references t but no time was supplied")
    try:
        value = postvisitor(e, _evaluate_node, point=point, time=time)
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise EvaluationDomainError(f"Cannot evaluate '{e}' at {tuple(point)}: {exc}") from exc
    if not math.isfinite(value):
        raise EvaluationDomainError(f"Non-finite value of '{e}' at {tuple(point)}")
    return value


# ======================================================================================================================
# COMPILATION
# ======================================================================================================================


@singledispatch
def _source(e: Expression, vectorized: bool) -> str:
    raise NotImplementedError(f"Cannot compile a {type(e).__name__}")


@_source.register
def _(e: Const, vectorized: bool) -> str:
    return f"({float(e.value)!r})"


@_source.register
def _(e: Var, vectorized: bool) -> str:
    return f"x[..., {e.index}]" if vectorized else f"x[{e.index}]"


@_source.register
def _(e: Time, vectorized: bool) -> str:
    return "t"


@_source.register
def _(e: Neg, vectorized: bool) -> str:
    return f"(-{_source(e.operands[0], vectorized)})"


@_source.register
def _(e: BinaryOperator, vectorized: bool) -> str:
    left, right = (_source(o, vectorized) for o in e.operands)
    return f"({left} {e.symbol} {right})"


@_source.register
def _(e: IntPow, vectorized: bool) -> str:
    return f"({_source(e.operands[0], vectorized)} ** {e.exponent})"


@_source.register
def _(e: RealPow, vectorized: bool) -> str:
    base, exponent = (_source(o, vectorized) for o in e.operands)
    return f"_rpow({base}, {exponent})"


@_source.register
def _(e: Function, vectorized: bool) -> str:
    return f"_{e.name}({_source(e.operands[0], vectorized)})"


class CompiledExpressions:
    """A batch of expressions compiled into one Python callable `(x, t) -> values`.

    The scalar form takes one point and returns a tuple of floats, raising `EvaluationDomainError` off the domain.
    The vectorized form takes an array of points with shape (..., n) and returns shape (..., k); points off the
    domain come back as nan or inf for the caller to mask.
    """

    def __init__(self, expressions: Sequence[Expression], *, vectorized: bool = False):
        self.expressions = tuple(expressions)
        self.vectorized = vectorized
        self.uses_time = any(e.uses_time for e in self.expressions)
        body = ", ".join(_source(e, vectorized) for e in self.expressions)
        namespace: dict[str, object] = {"_rpow": np.power if vectorized else _real_power}
        for name, fn in (_NUMPY if vectorized else _MATH).items():
            namespace[f"_{name}"] = fn
        source = f"lambda x, t: ({body},)" if body else "lambda x, t: ()"
        self._fn = eval(compile(source, "<geonoether.expr>", "eval"), namespace)

    def __len__(self) -> int:
        return len(self.expressions)

    def __call__(self, x, t=None):
        if self.uses_time and t is None:
            raise MissingTimeError("Compiled expressions reference t but no time was supplied")
        if self.vectorized:
            return self._call_vectorized(x, t)
        x = tuple(float(v) for v in x)
        try:
            values = self._fn(x, None if t is None else float(t))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise EvaluationDomainError(f"Cannot evaluate at {tuple(x)}: {exc}") from exc
        if not all(math.isfinite(v) for v in values):
            raise EvaluationDomainError(f"Non-finite value at {tuple(x)}")
        return values

    def _call_vectorized(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        if t is not None:
            t = np.asarray(t, dtype=float)
        if not self.expressions:
            return np.zeros(shape + (0,))
        with np.errstate(all="ignore"):
            values = self._fn(x, t)
            return np.stack([np.broadcast_to(np.asarray(v, dtype=float), shape) for v in values], axis=-1)


def compile_expressions(expressions: Sequence[Expression], *, vectorized: bool = False) -> CompiledExpressions:
    return CompiledExpressions(expressions, vectorized=vectorized)


# ======================================================================================================================
# PARSING
# ======================================================================================================================


_TOKEN = re.compile(
    r"(?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),])"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ExpressionSyntaxError(f"Unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        assert kind is not None
        tokens.append((kind, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: "CoordinateChart", curvature: int | None):
        self.tokens = _tokenize(text)
        self.index = 0
        self.chart = chart
        self.curvature = curvature

    @property
    def current(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def advance(self) -> tuple[str, str, int]:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, value: str) -> None:
        kind, text, pos = self.advance()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"Expected {value!r}, found {found}", pos)

    def parse(self) -> Expression:
        result = self.expression()
        kind, text, pos = self.current
        if kind != "end":
            raise ExpressionSyntaxError(f"Unexpected token {text!r}", pos)
        return result

    def expression(self) -> Expression:
        result = self.term()
        while self.current[1] in ("+", "-") and self.current[0] == "op":
            op = self.advance()[1]
            right = self.term()
            result = add(result, right) if op == "+" else sub(result, right)
        return result

    def term(self) -> Expression:
        result = self.unary()
        while self.current[1] in ("*", "/") and self.current[0] == "op":
            op = self.advance()[1]
            right = self.unary()
            result = mul(result, right) if op == "*" else div(result, right)
        return result

    def unary(self) -> Expression:
        if self.current[0] == "op" and self.current[1] in ("-", "+"):
            op = self.advance()[1]
            operand = self.unary()
            return neg(operand) if op == "-" else operand
        return self.power()

    def power(self) -> Expression:
        base = self.primary()
        if self.current[0] == "op" and self.current[1] == "^":
            self.advance()
            return real_power(base, self.unary())
        return base

    def primary(self) -> Expression:
        kind, text, pos = self.advance()
        if kind == "number":
            return Const(Fraction(text))
        if kind == "name":
            return self.name(text, pos)
        if kind == "op" and text == "(":
            inner = self.expression()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"Unexpected {found}", pos)

    def name(self, text: str, pos: int) -> Expression:
        if text in self.chart.names:
            return self.chart.variable(text)
        if text == TIME:
            return T
        if text == "pi":
            return Const(math.pi)
        if text in FUNCTIONS or (self.curvature is not None and text in ("Sinn", "Cosn")):
            self.expect("(")
            argument = self.expression()
            self.expect(")")
            if text == "Sinn":
                return sinn(argument, self.curvature)  # type: ignore[arg-type]
            if text == "Cosn":
                return cosn(argument, self.curvature)  # type: ignore[arg-type]
            return call(text, argument)
        raise UnknownIdentifierError(text, pos)


def parse(text: str, chart: "CoordinateChart", *, curvature: int | None = None) -> Expression:
    """Parse infix `text` over the names of `chart`.

    Raises:
        ExpressionSyntaxError: malformed text, with the 0-based character position.
        UnknownIdentifierError: a name that is neither a coordinate, `t`, `pi` nor a supported function.
    """
    return _Parser(text, chart, curvature).parse()


# ======================================================================================================================
# CHART
# ======================================================================================================================


_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


@beartype
class CoordinateChart:
    """Ordered coordinate names plus an optional excluded locus.

    The excluded locus is a list of expressions whose zero sets are singular for the chart (e.g. `sin(phi)` on
    the sphere). A point is excluded when one of them evaluates within `margin` of zero, or cannot be evaluated.
    """

    def __init__(self, names: Sequence[str], excluded_locus: Sequence[str | Expression] = ()):
        names = tuple(names)
        if not names:
            raise ValueError("A chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"Coordinate names must be unique: {names}")
        for name in names:
            if not _IDENTIFIER.match(name) or name in RESERVED_NAMES:
                raise ValueError(f"Invalid coordinate name: {name!r}")
        self.names = names
        self._variables = tuple(Var(i, name) for i, name in enumerate(names))
        self.excluded_locus = tuple(e if isinstance(e, Expression) else parse(e, self) for e in excluded_locus)
        self._locus = compile_expressions(self.excluded_locus, vectorized=True)

    @property
    def dimension(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownIdentifierError(name) from None

    def variable(self, name: str) -> Var:
        return self._variables[self.index(name)]

    def variables(self) -> tuple[Var, ...]:
        return self._variables

    def parse(self, text: str, *, curvature: int | None = None) -> Expression:
        return parse(text, self, curvature=curvature)

    def with_excluded_locus(self, *locus: str | Expression) -> "CoordinateChart":
        return CoordinateChart(self.names, self.excluded_locus + tuple(locus))

    def locus_distance(self, points) -> np.ndarray:
        """Smallest |locus expression| per point; 0 where a locus expression cannot be evaluated."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if not self.excluded_locus:
            return np.full(points.shape[0], np.inf)
        values = np.abs(self._locus(points))
        values[~np.isfinite(values)] = 0.0
        return values.min(axis=-1)

    def is_excluded(self, point: Sequence[float], margin: float) -> bool:
        return bool(self.locus_distance(point)[0] < margin)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CoordinateChart) and other.names == self.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"CoordinateChart({self.names})"
