import pytest
from hypothesis import given, strategies as st

from jetcalc.diffop import BundleMap, LinDiffOp, apply, compose, from_bundle_map, to_bundle_map
from jetcalc.errors import NotLinearError, RankMismatchError
from jetcalc.expr import BaseVar, Const, JetVar, equivalent, mul
from jetcalc.grammar import parse
from jetcalc.jet import JetContext, Section
from jetcalc.laws import kleisli_laws
from jetcalc.panels import make_rng, random_operator, random_section

from conftest import operators, sections

x1 = BaseVar(0)
d1 = LinDiffOp.partial(1, 0)


def test_bundle_map_components():
    assert to_bundle_map(d1).components == (JetVar(0, (1,)),)
    assert to_bundle_map(LinDiffOp.identity(1)).components == (JetVar(0, (0,)),)
    assert to_bundle_map(LinDiffOp.laplacian(2)).components == (parse("u1_x1x1 + u1_x2x2", 2),)


def test_from_bundle_map():
    F = BundleMap(JetContext(1, 1, 1), (parse("x1*u1_x1"),))
    assert from_bundle_map(F) == LinDiffOp(1, 1, 1, {(0, 0, (1,)): x1})
    with pytest.raises(NotLinearError):
        from_bundle_map(BundleMap(JetContext(1, 1, 0), (parse("u1^2"),)))
    with pytest.raises(NotLinearError):
        from_bundle_map(BundleMap(JetContext(1, 1, 0), (parse("u1 + 1"),)))


@given(operators(n=2, m=2, m_out=1, order=2))
def test_bundle_map_round_trip(op):
    assert from_bundle_map(to_bundle_map(op)) == op


def test_apply_examples():
    assert apply(d1, Section.parse("sin(x1)", 1)) == Section.parse("cos(x1)", 1)
    s = Section.parse("x1^3 + exp(x1)", 1)
    assert apply(LinDiffOp.identity(1), s) == s
    assert apply(LinDiffOp.laplacian(2), Section.parse("x1^2 + x2^2", 2)) == Section.parse("4", 2)


def test_compose_examples():
    dd = compose(d1, d1)
    assert dd == LinDiffOp.partial(1, (2,))
    assert dd.order == 2
    x = LinDiffOp.multiplication(1, x1)
    assert compose(d1, x) - compose(x, d1) == LinDiffOp.identity(1)
    F = random_operator(make_rng(4), 2, 2, 1, 2)
    assert compose(LinDiffOp.identity(2), F) == F == compose(F, LinDiffOp.identity(2, 2))


def test_compose_rank_mismatch():
    with pytest.raises(RankMismatchError):
        compose(LinDiffOp.identity(1, 2), d1)


def test_operator_arithmetic():
    a = LinDiffOp(1, 1, 1, {(0, 0, (1,)): x1})
    assert (a + a) == 2 * a
    assert (a - a).is_zero()
    assert (d1 @ d1) == compose(d1, d1)
    assert a.coefficient(0, 0, (2,)) == Const(0)


def test_kleisli_suite_small():
    rng = make_rng(1)
    pairs = [(random_operator(rng, 1), random_operator(rng, 1)) for _ in range(5)]
    secs = [random_section(rng, 1) for _ in range(5)]
    assert kleisli_laws(pairs, secs).passed


def _pair(n, m):
    return st.tuples(operators(n, m, m, 2), operators(n, m, m, 2), sections(n, m))


@given(_pair(1, 1))
def test_functoriality(case):
    G, F, s = case
    lhs = apply(compose(G, F), s)
    rhs = apply(G, apply(F, s))
    assert all(equivalent(a, b) for a, b in zip(lhs.components, rhs.components))


@given(operators(2, 1, 1, 1), operators(2, 1, 1, 1), operators(2, 1, 1, 1))
def test_associativity(H, G, F):
    left = compose(H, compose(G, F))
    right = compose(compose(H, G), F)
    keys = set(left.table) | set(right.table)
    assert all(equivalent(left.coefficient(*k), right.coefficient(*k)) for k in keys)


@given(operators(1, 1, 1, 2), sections(1), sections(1), st.integers(-3, 3), st.integers(-3, 3))
def test_linearity(op, s, t, a, b):
    combined = apply(op, a * s + b * t)
    expected = a * apply(op, s) + b * apply(op, t)
    assert equivalent(combined.components[0], expected.components[0])


@given(operators(1, 1, 1, 2), operators(1, 1, 1, 2))
def test_order_bound(G, F):
    assert compose(G, F).order <= G.order + F.order


def test_variable_coefficient_composition_hand_expanded():
    # (x d)(x d) = x^2 d^2 + x d
    xd = LinDiffOp(1, 1, 1, {(0, 0, (1,)): x1})
    expected = LinDiffOp(1, 1, 1, {(0, 0, (2,)): mul(x1, x1), (0, 0, (1,)): x1})
    assert compose(xd, xd) == expected
