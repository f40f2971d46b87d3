import os

from hypothesis import HealthCheck, settings, strategies as st

from jetcalc.expr import BaseVar, Const, JetVar, add, apply, mul, power
from jetcalc.panels import make_rng, random_operator, random_section

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


def _leaf(n, m, r):
    return st.one_of(
        st.integers(-3, 3).map(Const),
        st.integers(0, n - 1).map(BaseVar),
        st.tuples(st.integers(0, m - 1),
                  st.lists(st.integers(0, r), min_size=n, max_size=n)).map(
            lambda t: JetVar(t[0], tuple(t[1]))),
    )


def expressions(n=1, m=1, r=2, functions=("sin", "cos", "exp")):
    """Random expression trees over x, u^k_I with smooth, everywhere-defined functions."""
    def extend(children):
        return st.one_of(
            st.lists(children, min_size=2, max_size=3).map(lambda xs: add(*xs)),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: mul(*xs)),
            st.tuples(children, st.integers(0, 3)).map(lambda t: power(*t)),
            st.tuples(st.sampled_from(functions), children).map(lambda t: apply(*t)),
        )
    return st.recursive(_leaf(n, m, r), extend, max_leaves=6)


seeds = st.integers(0, 2 ** 32 - 1)


def sections(n=1, m=1, kind="mixed"):
    return seeds.map(lambda s: random_section(make_rng(s), n, m, kind))


def operators(n=1, m=1, m_out=1, order=2):
    return seeds.map(lambda s: random_operator(make_rng(s), n, m, m_out, order))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
