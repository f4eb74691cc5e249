import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusrot import expr
from torusrot.errors import (
    ArityError,
    EvaluationFault,
    ExprSyntaxError,
    UnknownIdentifierError,
    UnsupportedOperationError,
)


def ev(src, x=0.3, y=0.7, params=None):
    return float(expr.evaluate(expr.parse(src, params), x, y, src))


@pytest.mark.parametrize(
    "src, expected",
    [
        ("1 + 2 * 3", 7.0),
        ("(1 + 2) * 3", 9.0),
        ("2 ^ 3 ^ 2", 512.0),  # right associative
        ("-2 ^ 2", -4.0),  # ^ binds tighter than unary minus
        ("2 ^ -1", 0.5),
        ("8 / 4 / 2", 1.0),
        ("1 - 2 - 3", -4.0),
        ("pi", math.pi),
        ("1e-3 * 1000", 1.0),
        (".5 + 1.", 1.5),
    ],
)
def test_arithmetic(src, expected):
    assert ev(src) == pytest.approx(expected, rel=1e-15)


def test_variables_and_functions():
    x, y = 0.3, 0.7
    assert ev("x + 0.25*sin(2*pi*y)", x, y) == pytest.approx(x + 0.25 * math.sin(2 * math.pi * y))
    assert ev("exp(x) * cos(y)", x, y) == pytest.approx(math.exp(x) * math.cos(y))


def test_params_bind_and_shadow_pi():
    assert ev("k * x", 2.0, 0.0, {"k": 1.5}) == 3.0
    assert ev("pi", params={"pi": 3.0}) == 3.0
    with pytest.raises(UnknownIdentifierError):
        expr.parse("x", {"x": 1.0})


def test_errors_carry_offsets():
    with pytest.raises(ExprSyntaxError, match="end of input at offset 6"):
        expr.parse("x+sin(")
    with pytest.raises(UnknownIdentifierError, match="'z' at offset 2"):
        expr.parse("x+z")
    with pytest.raises(ArityError, match="offset 0"):
        expr.parse("sin(x, y)")
    with pytest.raises(ExprSyntaxError, match="offset 2"):
        expr.parse("x $ y")
    with pytest.raises(ExprSyntaxError):
        expr.parse("(x + y")
    with pytest.raises(ExprSyntaxError):
        expr.parse("x y")


def test_vectorized_evaluation_broadcasts():
    node = expr.parse("x + y")
    out = expr.evaluate(node, np.arange(3.0), 1.0)
    assert out.tolist() == [1.0, 2.0, 3.0]
    const = expr.evaluate(expr.parse("2"), np.zeros(4), np.zeros(4))
    assert const.shape == (4,)


def test_evaluation_fault_names_subexpression_and_point():
    src = "x + 1/(y - 0.5)"
    node = expr.parse(src)
    with pytest.raises(EvaluationFault) as info:
        expr.evaluate(node, np.array([0.1, 0.2]), np.array([0.1, 0.5]), src)
    err = info.value
    assert err.point == (0.2, 0.5)
    assert "offset 5" in err.location
    assert src in err.location


def test_log_style_fault_in_power():
    with pytest.raises(EvaluationFault):
        expr.evaluate(expr.parse("(x - 1)^0.5"), 0.0, 0.0)


def test_variable_exponent_not_differentiable():
    with pytest.raises(UnsupportedOperationError):
        expr.derivative(expr.parse("x^y"), "x")


# derivatives against central differences on a fixed family of expressions
DIFF_CASES = [
    "x + 0.3*sin(2*pi*y)",
    "y + 0.2*sin(2*pi*(x + 0.1*sin(2*pi*y)))",
    "x*y - y^3 + exp(0.2*x)/(2 + cos(y))",
    "-(x^2) + 4*x*y",
    "cos(x)^2 + sin(x)^2",
    "x / (1 + y^2)",
]


@pytest.mark.parametrize("src", DIFF_CASES)
@settings(max_examples=30, deadline=None)
@given(
    x=st.floats(-2, 2, allow_nan=False),
    y=st.floats(-2, 2, allow_nan=False),
)
def test_derivative_matches_finite_difference(src, x, y):
    node = expr.parse(src)
    h = 1e-6
    for var, (dx, dy) in (("x", (h, 0.0)), ("y", (0.0, h))):
        d = float(expr.evaluate(expr.derivative(node, var), x, y))
        fd = (
            float(expr.evaluate(node, x + dx, y + dy)) - float(expr.evaluate(node, x - dx, y - dy))
        ) / (2 * h)
        assert d == pytest.approx(fd, abs=1e-6 * max(1.0, abs(fd)))


def test_derivative_simplifies_constants():
    d = expr.derivative(expr.parse("3*x + 2"), "y")
    assert isinstance(d, expr.Const) and d.value == 0.0
