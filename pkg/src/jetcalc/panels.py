"""
Seeded random generators for sections, operators and Lagrangians.

Coefficients are small exact rationals so that symbolic results stay exact
and numeric checks stay well conditioned on the unit box.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .diffop import LinDiffOp
from .expr import ONE, BaseVar, Const, JetVar, add, apply, mul
from .jet import Section, multi_indices

__all__ = ["make_rng", "random_coefficient", "random_polynomial", "random_section",
           "random_operator", "random_density", "section_panel", "functional_panel",
           "variational_panel"]


def make_rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_coefficient(rng, bound: int = 3, denominators=(1, 2, 3, 4)) -> Const:
    while True:
        num = int(rng.integers(-bound, bound + 1))
        if num:
            return Const(Fraction(num, int(rng.choice(denominators))))


def _monomial(rng, variables, degree):
    factors = []
    for _ in range(int(rng.integers(0, degree + 1))):
        factors.append(variables[int(rng.integers(len(variables)))])
    return mul(*factors) if factors else ONE


def random_polynomial(rng, variables, degree: int = 2, terms: int = 3, bound: int = 3):
    """Sum of ``terms`` random monomials of degree <= ``degree``."""
    return add(*(mul(random_coefficient(rng, bound), _monomial(rng, variables, degree))
                 for _ in range(terms)))


def random_section(rng, n: int = 1, m: int = 1, kind: str = "mixed", chart=None,
                   bound: int = 3) -> Section:
    """A polynomial or trigonometric section on the unit box."""
    xs = [BaseVar(i) for i in range(n)]
    comps = []
    for _ in range(m):
        choice = kind if kind != "mixed" else ("poly", "trig")[int(rng.integers(2))]
        if choice == "poly":
            comps.append(random_polynomial(rng, xs, degree=3, terms=3, bound=bound))
        else:
            arg = add(*(mul(random_coefficient(rng, 2), x) for x in xs), random_coefficient(rng, 1))
            name = ("sin", "cos")[int(rng.integers(2))]
            comps.append(add(mul(random_coefficient(rng, 2), apply(name, arg)),
                             random_polynomial(rng, xs, degree=1, terms=1)))
    return Section(tuple(comps), n, chart)


def random_operator(rng, n: int = 1, m: int = 1, m_out: int = 1, order: int = 2,
                    density: float = 0.6) -> LinDiffOp:
    """Variable-coefficient operator of order <= ``order`` with affine coefficients."""
    xs = [BaseVar(i) for i in range(n)]
    coefficients = {}
    for row in range(m_out):
        for col in range(m):
            for alpha in multi_indices(n, order):
                if rng.random() < density:
                    coefficients[(row, col, alpha)] = random_polynomial(rng, xs, 1, 2)
    return LinDiffOp(n, m, m_out, coefficients)


def random_density(rng, n: int = 1, m: int = 1, order: int = 2, degree: int = 2,
                   terms: int = 3):
    """Polynomial density in jet coordinates up to ``order`` with x-dependent coefficients."""
    xs = [BaseVar(i) for i in range(n)]
    jets = [JetVar(k, I) for k in range(m) for I in multi_indices(n, order)]
    out = []
    for _ in range(terms):
        mono = _monomial(rng, jets, degree)
        coeff = add(random_coefficient(rng, 2), mul(random_coefficient(rng, 1),
                                                    _monomial(rng, xs, 1)))
        out.append(mul(coeff, mono))
    return add(*out)


def section_panel(rng, count: int, n: int = 1, m: int = 1, kind: str = "poly",
                  bound: int = 3) -> list:
    return [random_section(rng, n, m, kind, bound=bound) for _ in range(count)]


def functional_panel(rng, count: int, grid, n: int = 1, m: int = 1, max_order: int = 2,
                     degree: int = 2) -> list:
    """``count`` local functionals with polynomial densities of order <= ``max_order``."""
    from .functional import Lagrangian, LocalFunctional

    panel = []
    for i in range(count):
        order = i % (max_order + 1)
        density = random_density(rng, n, m, order, degree)
        panel.append(LocalFunctional(Lagrangian(density, n, m), grid))
    return panel


_VARIATIONAL_1D = (
    ("half-gradient-squared", "0.5*u1_x1^2"),
    ("u-laplacian", "u1*u1_x1x1"),
    ("u-laplacian-source", "u1*u1_x1x1 + eta*u1"),
    ("u-laplacian-quartic", "u1*u1_x1x1 + u1^4"),
    ("trivial", "u1"),
    ("quartic", "u1^4"),
    ("arc-length", "sqrt(1 + u1_x1^2)"),
    ("variable-coefficient", "x1*u1_x1^2 + u1^2"),
    ("second-order-squared", "0.5*u1_x1x1^2 - u1*u1_x1"),
    ("exponential-weighted", "exp(u1)*u1_x1^2"),
)

_VARIATIONAL_2D = (
    ("half-gradient-squared", "0.5*u1_x1^2 + 0.5*u1_x2^2"),
    ("u-laplacian", "u1*u1_x1x1 + u1*u1_x2x2"),
    ("u-laplacian-source", "u1*u1_x1x1 + u1*u1_x2x2 + eta*u1"),
    ("u-laplacian-quartic", "u1*u1_x1x1 + u1*u1_x2x2 + u1^4"),
    ("trivial", "u1"),
    ("quartic", "u1^4"),
    ("minimal-surface", "sqrt(1 + u1_x1^2 + u1_x2^2)"),
    ("variable-coefficient", "x1*u1_x1^2 + x2*u1_x2^2 + u1^2"),
    ("mixed-second-order", "0.5*u1_x1x2^2 + u1_x1*u1_x2 + u1^2"),
    ("exponential-weighted", "exp(u1)*(u1_x1^2 + u1_x2^2)"),
)


def variational_panel(n: int = 1, eta: float = 1.5) -> list:
    """Ten named (Lagrangian, s, t) cases with bump-supported directions t."""
    from .functional import Lagrangian, bump_section

    if n == 1:
        table, s = _VARIATIONAL_1D, Section.parse("x1^2 + 1/2*sin(2*x1)", 1)
    elif n == 2:
        table, s = _VARIATIONAL_2D, Section.parse("x1^2 - x1*x2 + 1/3*x2^3 + 1/4*cos(x2)", 2)
    else:
        raise ValueError("the variational panel is defined for n = 1 and n = 2")
    t = bump_section((0.5,) * n, 0.4)
    return [(name, Lagrangian.parse(text, n).bind(eta=eta), s, t) for name, text in table]
