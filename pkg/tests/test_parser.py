"""Parser: shapes, precedence, exact literals, error positions."""

from fractions import Fraction

import pytest

from degenlag.errors import ParseError, UnknownIdentifierError
from degenlag.symbolic import (
    Add,
    Chart,
    Const,
    Coord,
    Div,
    Func,
    Mul,
    Neg,
    Pow,
    evaluate,
    parse_expr,
)


@pytest.fixture
def ch():
    return Chart.tangent(2)


def test_bilinear_shape(ch):
    e = parse_expr("q1*v2 + q2*v1", ch)
    assert e == Add(
        Mul(Coord("q1"), Coord("v2")), Mul(Coord("q2"), Coord("v1"))
    )


def test_literals_are_exact_rationals(ch):
    assert parse_expr("0.25", ch) == Const(Fraction(1, 4))
    assert parse_expr("1.5e2", ch) == Const(Fraction(150))
    assert parse_expr("3", ch) == Const(Fraction(3))
    # folding at parse time keeps rationals exact
    assert parse_expr("1/3 + 1/6", ch) == Const(Fraction(1, 2))


def test_precedence_values(ch):
    pt = {"q1": 2.0, "q2": 3.0, "v1": 0.0, "v2": 0.0}
    assert evaluate(parse_expr("2*3 + 4*5", ch), pt) == 26.0
    assert evaluate(parse_expr("2 - 3 - 4", ch), pt) == -5.0
    assert evaluate(parse_expr("12/3/2", ch), pt) == 2.0
    assert evaluate(parse_expr("2^3^2", ch), pt) == 64.0  # left associative
    assert evaluate(parse_expr("-q1^2", ch), pt) == -4.0  # ^ above unary minus
    assert evaluate(parse_expr("2*q1^2", ch), pt) == 8.0
    assert evaluate(parse_expr("q1^-2", ch), pt) == 0.25
    assert evaluate(parse_expr("q1^(-2)", ch), pt) == 0.25
    assert evaluate(parse_expr("-q1*q2", ch), pt) == -6.0


def test_unary_minus_shapes(ch):
    assert parse_expr("-q1", ch) == Neg(Coord("q1"))
    assert parse_expr("--q1", ch) == Coord("q1")
    assert parse_expr("q1*-q2", ch) == Mul(Coord("q1"), Neg(Coord("q2")))


def test_functions(ch):
    e = parse_expr("sin(q1) + cos(q2)", ch)
    assert e == Add(Func("sin", Coord("q1")), Func("cos", Coord("q2")))
    assert parse_expr("sqrt(q1^2 + 1)", ch) is not None


def test_whitespace_insensitive(ch):
    a = parse_expr("q1*v2+q2*v1", ch)
    b = parse_expr("  q1 * v2   +\tq2 * v1 ", ch)
    assert a == b


def test_parenthesized_grouping(ch):
    e = parse_expr("(q1 + q2)*v1", ch)
    assert isinstance(e, Mul) and isinstance(e.lhs, Add)


class TestErrors:
    def test_dangling_operator_position(self, ch):
        with pytest.raises(ParseError) as err:
            parse_expr("q1*", ch)
        assert err.value.position == 3

    def test_unbalanced_paren(self, ch):
        with pytest.raises(ParseError) as err:
            parse_expr("(q1", ch)
        assert err.value.position == 3

    def test_unknown_coordinate(self, ch):
        with pytest.raises(UnknownIdentifierError) as err:
            parse_expr("q1 + q7", ch)
        assert err.value.name == "q7"
        assert err.value.position == 5

    def test_unknown_function(self, ch):
        with pytest.raises(UnknownIdentifierError) as err:
            parse_expr("tan(q1)", ch)
        assert err.value.name == "tan"

    def test_unexpected_character(self, ch):
        with pytest.raises(ParseError) as err:
            parse_expr("q1 $ q2", ch)
        assert err.value.position == 3

    def test_trailing_input(self, ch):
        with pytest.raises(ParseError):
            parse_expr("q1 q2", ch)

    def test_fractional_exponent_rejected(self, ch):
        with pytest.raises(ParseError):
            parse_expr("q1^2.5", ch)

    def test_empty_input(self, ch):
        with pytest.raises(ParseError):
            parse_expr("", ch)

    def test_bare_function_name(self, ch):
        with pytest.raises(UnknownIdentifierError):
            parse_expr("sin", ch)
