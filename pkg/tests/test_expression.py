"""
    Tests for the scalar field expression parser.
"""

import numpy as np
import pytest

from vmm_solver.exceptions import ExpressionSyntaxError, FieldEvaluationError
from vmm_solver.problems import parse_scalar_field

CORPUS = [
    "2 + sin(10*x*y)/2",
    "sgnpow(2*x - y, 1/3) + 4*exp(2 - x)",
    "abs(y - 2*x)^(1/4) + 3",
    "0.5*sin(10*x*y) - 0.5*sqrt(x + 2)",
    "-x^2 + 2^-1*y",
    "cos(pi*x)*cos(pi*y) + 1.5e-1",
    "x/y/2 - (x - y)*(x + y)",
    "2^3^0.5",
]


def _at(expression, x, y):
    return float(parse_scalar_field(expression)(np.array([[x, y]]))[0])


def test_sine_coefficient_at_origin():
    assert _at("2 + sin(10*x*y)/2", 0.0, 0.0) == 2.0


def test_sign_preserving_power():
    assert _at("sgnpow(2*x - y, 1/3)", 1.0, 10.0) == pytest.approx(-2.0, rel=1e-14)


def test_fractional_power_of_absolute_value():
    assert _at("abs(y - 2*x)^(1/4) + 3", 2.0, 2.0) == pytest.approx(4.18921, abs=1e-5)


@pytest.mark.parametrize(
    "expression, expected",
    [
        ("-x^2", -9.0),
        ("2^3^2", 512.0),
        ("1 - 2 - 3", -4.0),
        ("12/3/2", 2.0),
        ("+x * -y", 6.0),
        ("pi", np.pi),
    ],
)
def test_precedence_and_associativity(expression, expected):
    assert _at(expression, 3.0, -2.0) == pytest.approx(expected, rel=1e-14)


def test_one_dimensional_fields():
    field = parse_scalar_field("2 + sin(2*pi*x)", dimension=1)
    np.testing.assert_allclose(field(np.array([[0.25], [0.0]])), [3.0, 2.0], atol=1e-14)


def test_constant_expression_broadcasts():
    values = parse_scalar_field("1")(np.zeros((4, 2)))
    np.testing.assert_array_equal(values, np.ones(4))


@pytest.mark.parametrize("expression", CORPUS)
def test_pretty_round_trip(expression, rng):
    field = parse_scalar_field(expression)
    reparsed = parse_scalar_field(field.pretty())
    points = rng.uniform(0.1, 1.9, (100, 2))
    np.testing.assert_array_equal(field.evaluate_raw(points), reparsed.evaluate_raw(points))


@pytest.mark.parametrize(
    "expression, dimension, offset",
    [
        ("1 + * 2", 2, 4),
        ("sin(x", 2, 5),
        ("2 $ 3", 2, 2),
        ("z + 1", 2, 0),
        ("x + y", 1, 4),
        ("sgnpow(x)", 2, 0),
        ("(x + 1))", 2, 7),
        ("", 2, 0),
        ("x\u00a0+ * 2", 2, 5),
        ("x\u00a0+ \u00e9", 2, 5),
        ("sin(x)\u00a0\u00a0+ ^", 2, 12),
    ],
)
def test_syntax_errors_carry_offsets(expression, dimension, offset):
    with pytest.raises(ExpressionSyntaxError) as error:
        parse_scalar_field(expression, dimension=dimension)
    assert error.value.offset == offset


def test_domain_errors_are_reported_per_point():
    field = parse_scalar_field("sqrt(x) + 1/y")
    points = np.array([[1.0, 1.0], [-1.0, 1.0], [1.0, 0.0]])
    with pytest.raises(FieldEvaluationError) as error:
        field(points)
    assert error.value.failed_points == [1, 2]
    raw = field.evaluate_raw(points)
    assert raw[0] == 2.0 and np.isnan(raw[1]) and np.isinf(raw[2])
