from fractions import Fraction

import pytest
from hypothesis import given

from jetcalc.errors import ParseError
from jetcalc.expr import BaseVar, Const, JetVar, Parameter, apply, mul, power
from jetcalc.grammar import parse, parse_variable, to_text, variable_text

from conftest import expressions


def test_names():
    assert parse("x2", 2) == BaseVar(1)
    assert parse("u1", 2) == JetVar(0, (0, 0))
    assert parse("u2_x1x1x2", 2) == JetVar(1, (2, 1))
    assert parse("eta") == Parameter("eta")


def test_dimension_is_inferred():
    assert parse("u1_x2").index == (0, 1)


def test_precedence_and_unary_minus():
    assert parse("-x1^2") == mul(-1, power(BaseVar(0), 2))
    assert parse("2*x1^2/4") == parse("1/2*x1^2")
    assert parse("2^-1") == Const(Fraction(1, 2))


def test_decimal_literals_are_exact():
    assert parse("0.1") == Const(Fraction(1, 10))
    assert parse("1e-3") == Const(Fraction(1, 1000))


def test_functions():
    assert parse("sin(x1)") == apply("sin", BaseVar(0))
    assert parse("bump2(x1)") == apply("bump2", BaseVar(0))


@pytest.mark.parametrize("text, column", [("x1 +* 2", 5), ("sin(x1", 7), ("x1 $ 2", 4),
                                          ("x1^x1", 3), ("", 1)])
def test_errors_carry_position(text, column):
    with pytest.raises(ParseError) as info:
        parse(text, 1)
    assert info.value.line == 1
    assert info.value.column == column


def test_parse_error_line_numbers():
    with pytest.raises(ParseError) as info:
        parse("x1 +\n * 2", 1)
    assert info.value.line == 2


def test_variable_round_trip():
    for v in (BaseVar(0), JetVar(1, (0, 3)), JetVar(0, (0, 0)), Parameter("eta")):
        assert parse_variable(variable_text(v), 2) == v
    with pytest.raises(ParseError):
        parse_variable("x1 + 1")


@given(expressions(n=2, m=2, r=2, functions=("sin", "cos", "exp", "bump1")))
def test_print_parse_round_trip(e):
    assert parse(to_text(e), 2) == e
