import threading

import pytest
from hypothesis import given, strategies as st

from jetcalc.diffop import LinDiffOp
from jetcalc.errors import NotLinearError, RankMismatchError
from jetcalc.expr import equivalent, is_zero
from jetcalc.grammar import parse
from jetcalc.jet import Section, along, prolong
from jetcalc.lpde import LPDE, check_residuals, check_solution, prolong_lpde, \
    solution_implies_prolonged
from jetcalc.numeric import Grid

from conftest import seeds

line = LPDE([parse("u1_x1x1")], 1, 1)
laplace = LPDE(LinDiffOp.laplacian(2))
points_1d = Grid.uniform(1, 11).points()
points_2d = Grid.uniform(2, 11).points()


def test_prolong_examples():
    assert prolong_lpde(line, 1) == (parse("u1_x1x1"), parse("u1_x1x1x1"))
    assert prolong_lpde(line, 0) == line.residuals
    heat = LPDE([parse("u1_x2 - u1_x1x1", 2)], 2, 1)
    expected = [parse(t, 2) for t in ("u1_x2 - u1_x1x1", "u1_x1x2 - u1_x1x1x1",
                                      "u1_x2x2 - u1_x1x1x2")]
    assert list(heat.prolonged(1)) == expected


def test_check_solution_examples():
    ok = check_solution(line, Section.parse("3*x1 + 2", 1), points_1d)
    assert ok.verdict and ok.exact and ok.residuals == (0.0,)
    bad = check_solution(line, Section.parse("x1^2", 1), points_1d)
    assert not bad.verdict and bad.residuals == (2.0,)
    harmonic = check_solution(laplace, Section.parse("x1^2 - x2^2", 2), points_2d)
    assert harmonic.verdict and harmonic.exact


def test_prolonged_solution_examples():
    result = solution_implies_prolonged(line, Section.parse("3*x1 + 2", 1), 3, points_1d)
    assert result.holds and result.is_solution and result.prolonged.verdict
    result = solution_implies_prolonged(laplace, Section.parse("x1^2 - x2^2", 2), 2, points_2d)
    assert result.holds and result.prolonged.exact
    result = solution_implies_prolonged(line, Section.parse("x1^2", 1), 1, points_1d)
    assert result.holds and not result.is_solution and result.prolonged is None


def test_inhomogeneous_equation():
    poisson = LPDE(LinDiffOp.laplacian(2), inhomogeneity=[2])
    assert not poisson.homogeneous
    s = Section.parse("(x1^2 + x2^2)/2", 2)
    assert check_solution(poisson, s, points_2d).exact
    assert check_solution(poisson, s, points_2d, level=2).exact
    assert not check_solution(poisson, Section.parse("x1^2 - x2^2", 2), points_2d).verdict


def test_rejections():
    with pytest.raises(NotLinearError):
        LPDE([parse("u1*u1_x1")], 1, 1)
    with pytest.raises(RankMismatchError):
        check_solution(line, Section.parse(["x1", "x1"], 1), points_1d)
    with pytest.raises(ValueError):
        LPDE([parse("u1")], 1, 1, inhomogeneity=[parse("u1_x1")])


def test_degenerate_zero_map_is_flagged():
    eq = LPDE(LinDiffOp.zero(1))
    assert eq.degenerate
    assert check_solution(eq, Section.parse("sin(x1)", 1), points_1d).verdict


def test_nonlinear_residuals_and_domain_points():
    # u'' = 2 u^3 has the solution 1/(x + 2)
    residual = [parse("u1_x1x1 - 2*u1^3")]
    report = check_residuals(residual, Section.parse("1/(x1 + 2)", 1), points_1d)
    assert report.verdict
    report = check_residuals([parse("u1_x1")], Section.parse("log(x1)", 1), points_1d)
    assert len(report.flagged) == 1 and report.verdict is False


def test_prolongation_cache_is_thread_safe():
    eq = LPDE(LinDiffOp.laplacian(2))
    results = []
    workers = [threading.Thread(target=lambda: results.append(eq.prolonged(3)))
               for _ in range(8)]
    for w in workers:
        w.start()
    for w in workers:
        w.join()
    assert all(r == results[0] for r in results)


biharmonic_ish = LPDE([parse("u1_x1x1 + u1_x2x2", 2), parse("u1_x1x2", 2)], 2, 1)
harmonic_pair = [Section.parse("x1^2 - x2^2", 2), Section.parse("x1 + 3*x2", 2)]


@given(st.sampled_from([0, 1, 2, 3]))
def test_exact_solution_closure(q):
    for s in harmonic_pair:
        js = prolong(s, 2 + q)
        assert all(is_zero(along(e, js)) for e in biharmonic_ish.prolonged(q))


@given(st.integers(0, 2))
def test_monotonicity(q):
    assert set(biharmonic_ish.prolonged(q)) <= set(biharmonic_ish.prolonged(q + 1))


@given(st.integers(-5, 5), st.integers(-5, 5))
def test_solution_set_is_linear(a, b):
    s, t = harmonic_pair
    combo = a * s + b * t
    assert check_solution(biharmonic_ish, combo, points_2d).exact


@given(seeds)
def test_residual_of_the_operator_image(seed):
    from jetcalc.diffop import apply
    from jetcalc.panels import make_rng, random_operator, random_section

    rng = make_rng(seed)
    op = random_operator(rng, 1, 1, 1, 2)
    s = random_section(rng, 1, 1, "poly")
    eq = LPDE(op, inhomogeneity=list(apply(op, s).components))
    assert check_solution(eq, s, points_1d).exact
    assert equivalent(eq.residuals[0], eq.residuals[0])
