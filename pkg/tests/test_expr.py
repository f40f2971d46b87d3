import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jetcalc.errors import DomainError, InconclusiveError, UnboundVariableError
from jetcalc.expr import (
    ONE, ZERO, BaseVar, Const, JetVar, Parameter, add, apply, canon, differentiate, div,
    equivalent, evaluate, evaluate_array, free_variables, is_polynomial, is_zero,
    jet_variables, max_order, mul, neg, power, sub, substitute,
)
from jetcalc.grammar import parse

from conftest import expressions

x1, x2 = BaseVar(0), BaseVar(1)
u = JetVar(0, (0,))
u1 = JetVar(0, (1,))
u2 = JetVar(0, (2,))


def test_differentiate_product_with_independent_jet_coordinate():
    assert differentiate(mul(u2, x1), x1) == u2


def test_differentiate_table_derivative():
    assert differentiate(apply("sin", x1), x1) == apply("cos", x1)


def test_differentiate_power_rule():
    assert differentiate(power(u, 2), u) == mul(2, u)


def test_jet_coordinates_are_independent():
    assert is_zero(differentiate(u2, u1))
    assert differentiate(u2, u2) == ONE


def test_evaluate_examples():
    assert evaluate(add(power(x1, 2), u), {x1: 2, u: 3}) == 7
    assert evaluate(apply("exp", ZERO)) == 1
    assert evaluate(mul(apply("sin", x1), u1), {x1: math.pi / 2, u1: 4}) == pytest.approx(4)


def test_evaluate_is_exact_on_rationals():
    e = add(div(ONE, Const(3)), div(ONE, Const(6)))
    assert e == Const(Fraction(1, 2))


def test_evaluate_errors():
    with pytest.raises(UnboundVariableError):
        evaluate(x1)
    with pytest.raises(DomainError):
        evaluate(apply("log", x1), {x1: -1.0})
    with pytest.raises(DomainError):
        evaluate(power(x1, -1), {x1: 0})


def test_equivalent_examples():
    assert equivalent(power(add(x1, u), 2), add(power(x1, 2), mul(2, x1, u), power(u, 2)))
    assert equivalent(add(power(apply("sin", x1), 2), power(apply("cos", x1), 2)), ONE)
    assert not equivalent(x1, add(x1, Const(Fraction(1, 1000))), trials=16, tol=1e-9)


def test_equivalent_is_inconclusive_outside_every_domain():
    e = apply("log", sub(neg(power(x1, 2)), ONE))
    with pytest.raises(InconclusiveError):
        equivalent(e, ZERO)


def test_canonical_form_merges_like_terms():
    assert add(x1, x1) == mul(2, x1)
    assert mul(x1, x1) == power(x1, 2)
    assert sub(x1, x1) == ZERO
    assert mul(0, apply("sin", x1)) == ZERO


def test_max_order_and_variables():
    e = parse("x1*u1_x1x1 + u1^2", 1)
    assert max_order(e) == 2
    assert set(jet_variables(e)) == {u, u2}
    assert max_order(x1) == -1
    assert free_variables(add(x1, Parameter("eta"))) == {x1, Parameter("eta")}


def test_is_polynomial():
    assert is_polynomial(parse("x1*u1^3 - 2*u1_x1", 1))
    assert not is_polynomial(parse("sin(u1)", 1))


def test_substitute_is_simultaneous():
    e = add(x1, mul(2, x2))
    assert substitute(e, {x1: x2, x2: x1}) == add(x2, mul(2, x1))


def test_negative_multi_index_rejected():
    with pytest.raises(ValueError):
        JetVar(0, (-1,))


def test_bump_is_smooth_and_compact():
    e = apply("bump", x1)
    assert evaluate(e, {x1: 1.0}) == 0.0
    assert evaluate(e, {x1: 0.0}) == pytest.approx(math.exp(-1))
    d = differentiate(e, x1)
    h = 1e-6
    fd = (evaluate(e, {x1: 0.3 + h}) - evaluate(e, {x1: 0.3 - h})) / (2 * h)
    assert evaluate(d, {x1: 0.3}) == pytest.approx(fd, rel=1e-6)
    assert evaluate(d, {x1: 1.5}) == 0.0


def test_evaluate_array_matches_scalar():
    e = parse("sin(x1)*u1 + bump(x1) + exp(u1)/3", 1)
    xs = np.linspace(-1.2, 1.2, 7)
    us = np.linspace(0, 1, 7)
    arr = evaluate_array(e, {x1: xs, u: us})
    scalar = [evaluate(e, {x1: a, u: b}) for a, b in zip(xs, us)]
    assert np.allclose(arr, scalar, rtol=1e-13, atol=1e-15)


@given(expressions(n=2, m=1, r=1))
def test_canon_is_idempotent(e):
    assert canon(canon(e)) == canon(e)


@given(expressions(n=2, m=1, r=1), expressions(n=2, m=1, r=1))
def test_sum_commutes(a, b):
    assert add(a, b) == add(b, a)
    assert mul(a, b) == mul(b, a)


@given(expressions(n=1, m=1, r=2), st.sampled_from([x1, u, u1, u2]))
def test_derivative_matches_central_difference(e, v):
    rng = np.random.default_rng(3)
    point = {w: float(rng.uniform(-0.5, 0.5)) for w in (x1, u, u1, u2)}
    d = differentiate(e, v)
    h = 1e-5
    plus, minus = dict(point), dict(point)
    plus[v] += h
    minus[v] -= h
    try:
        fd = (evaluate(e, plus) - evaluate(e, minus)) / (2 * h)
        exact = evaluate(d, point)
    except (DomainError, OverflowError):
        return
    assert exact == pytest.approx(fd, rel=1e-4, abs=1e-4 * (1 + abs(evaluate(e, point))))


@given(expressions(n=2, m=1, r=1), expressions(n=2, m=1, r=1))
def test_linearity_of_differentiation(a, b):
    combined = differentiate(add(a, mul(3, b)), x1)
    assert equivalent(combined, add(differentiate(a, x1), mul(3, differentiate(b, x1))))
