"""
Smooth functionals, Lagrangians and the pairing of formal distributions.

Every functional can be evaluated at a point of its carrier and restricted to
an affine family ``p + sum c_i d_i`` through :meth:`SmoothFunctional.line`;
the finite-difference route differentiates that restriction.  Local
functionals with polynomial densities are also differentiated symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from numbers import Number
from typing import Callable

import numpy as np

from ..errors import ContextMismatchError, UnboundVariableError
from ..expr import (
    ONE, BaseVar, Const, Expr, JetVar, Parameter, add, canon, differentiate, evaluate,
    evaluate_array, free_variables, is_polynomial, jet_variables, max_order, mul,
    parameters, substitute,
)
from ..jet import JetContext, JetSection, Section, along, prolong
from ..numeric import (
    DEFAULT_RTOL, DEFAULT_STEPS, Grid, SampledSection, fd_derivative, jet_sample,
    quadrature, symbolic_jet_arrays,
)
from .distribution import Delta, FormalDistribution, TensorDistribution, delta, deriving

__all__ = [
    "Lagrangian", "SmoothFunctional", "LocalFunctional", "JetLocalFunctional",
    "ClosedForm", "ConstantFunctional", "Composite", "ProductFunctional", "Lifted",
    "pair", "gateaux", "bump_section", "OUTER_VARIABLE",
]

OUTER_VARIABLE = Parameter("y")


@dataclass(frozen=True)
class Lagrangian:
    """A density L(x, u^k_I) with a positive volume weight w(x)."""

    density: Expr
    n: int
    m: int = 1
    weight: Expr = ONE

    def __post_init__(self):
        density = canon(self.density if isinstance(self.density, Expr) else Const(self.density))
        weight = canon(self.weight if isinstance(self.weight, Expr) else Const(self.weight))
        for v in free_variables(density) | free_variables(weight):
            if type(v) is BaseVar and v.index >= self.n:
                raise ContextMismatchError(f"x{v.index + 1} exceeds base dimension {self.n}")
            if type(v) is JetVar and (v.fiber >= self.m or len(v.index) != self.n):
                raise ContextMismatchError(f"{v} is not a coordinate of the bundle")
        if jet_variables(weight):
            raise ValueError("the weight may only depend on base coordinates")
        object.__setattr__(self, "density", density)
        object.__setattr__(self, "weight", weight)

    @classmethod
    def parse(cls, text: str, n: int, m: int = 1, weight: str | None = None) -> "Lagrangian":
        from ..grammar import parse

        return cls(parse(text, n), n, m, parse(weight, n) if weight else ONE)

    @property
    def order(self) -> int:
        return max(0, max_order(self.density))

    @property
    def context(self) -> JetContext:
        return JetContext(self.n, self.m, self.order)

    @property
    def polynomial(self) -> bool:
        return is_polynomial(self.density)

    def bind(self, **values) -> "Lagrangian":
        """Substitute numeric values for named parameters."""
        mapping = {Parameter(k): Const(v) for k, v in values.items()}
        return Lagrangian(substitute(self.density, mapping), self.n, self.m,
                          substitute(self.weight, mapping))

    def __add__(self, other):
        if not isinstance(other, Lagrangian):
            return NotImplemented
        if (self.n, self.m, self.weight) != (other.n, other.m, other.weight):
            raise ContextMismatchError("Lagrangians on different bundles or with different weights")
        return Lagrangian(add(self.density, other.density), self.n, self.m, self.weight)

    def __mul__(self, c):
        if not isinstance(c, (Number, Expr)):
            return NotImplemented
        c = c if isinstance(c, Expr) else Const(c)
        return Lagrangian(mul(c, self.density), self.n, self.m, self.weight)

    __rmul__ = __mul__


def bump_section(center, radius, n: int | None = None, chart=None, fibers: int = 1) -> Section:
    """Smooth bump supported on the box center +- radius (one factor per axis)."""
    from ..expr import apply

    center = tuple(center) if not isinstance(center, Number) else (center,)
    n = len(center) if n is None else n
    radii = tuple(radius) if not isinstance(radius, Number) else (radius,) * n
    value = ONE
    for i in range(n):
        scaled = mul(add(BaseVar(i), Const(-_exact(center[i]))), Const(1 / _exact(radii[i])))
        value = mul(value, apply("bump", scaled))
    return Section(tuple(value for _ in range(fibers)), n, chart)


def _exact(x):
    from fractions import Fraction

    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 9)
    return Fraction(x)


# ---------------------------------------------------------------------------
# functionals


class SmoothFunctional:
    """Base class.  Subclasses implement ``__call__`` and may refine ``line``."""

    #: carrier accepted by ``__call__``: "section", "jet", "distribution" or "any"
    domain = "any"

    def __call__(self, p) -> float:
        raise NotImplementedError

    def line(self, p, directions) -> Callable[[tuple], float]:
        """c -> F(p + sum c_i d_i)."""
        directions = tuple(directions)

        def f(c):
            q = p
            for ci, d in zip(c, directions):
                q = q + ci * d
            return self(q)

        return f

    def symbolic_derivative(self, p, directions):
        """Exact mixed derivative, or None when no symbolic route exists."""
        return None

    def derivative(self, p, directions, method: str = "auto", steps=DEFAULT_STEPS,
                   rtol: float = DEFAULT_RTOL) -> float:
        """Mixed directional derivative of F at p along ``directions``."""
        directions = tuple(directions)
        if not directions:
            return float(self(p))
        if method not in ("auto", "symbolic", "fd"):
            raise ValueError(f"unknown differentiation method {method!r}")
        if method != "fd":
            value = self.symbolic_derivative(p, directions)
            if value is not None:
                return value
            if method == "symbolic":
                raise ValueError(f"{type(self).__name__} has no symbolic derivative here")
        return fd_derivative(self.line(p, directions), len(directions), steps, rtol,
                             case=f"{type(self).__name__} at order {len(directions)}")

    def accepts(self, p) -> bool:
        if self.domain == "section":
            return isinstance(p, (Section, SampledSection))
        if self.domain == "jet":
            return isinstance(p, JetSection)
        if self.domain == "distribution":
            return isinstance(p, FormalDistribution)
        return True


@lru_cache(maxsize=512)
def _section_jets(s: Section, r: int, grid: Grid) -> dict:
    return symbolic_jet_arrays(s, r, grid)


@lru_cache(maxsize=512)
def _jet_section_arrays(js: JetSection, grid: Grid) -> dict:
    env = grid.environment()
    return {v: evaluate_array(e, env, grid.shape) for v, e in js.items()}


class _GridFunctional(SmoothFunctional):
    """Shared machinery for integrals of a density over a grid."""

    def __init__(self, lagrangian: Lagrangian, grid: Grid):
        if grid.n != lagrangian.n:
            raise ContextMismatchError("grid dimension differs from the Lagrangian's base")
        unbound = parameters(lagrangian.density) + parameters(lagrangian.weight)
        if unbound:
            raise UnboundVariableError(
                f"bind parameters {sorted(p.name for p in unbound)} before integrating")
        self.lagrangian = lagrangian
        self.grid = grid
        env = grid.environment()
        self._env = env
        self._weight = evaluate_array(lagrangian.weight, env, grid.shape)

    @property
    def order(self) -> int:
        return self.lagrangian.order

    def _arrays(self, p) -> dict:
        raise NotImplementedError

    def _integrate(self, arrays: dict) -> float:
        env = dict(self._env)
        env.update(arrays)
        values = evaluate_array(self.lagrangian.density, env, self.grid.shape)
        return quadrature(values * self._weight, self.grid)

    def __call__(self, p) -> float:
        if not self.accepts(p):
            raise ContextMismatchError(f"{type(self).__name__} cannot evaluate {type(p).__name__}")
        return self._integrate(self._arrays(p))

    def line(self, p, directions):
        base = self._arrays(p)
        slopes = [self._arrays(d) for d in directions]

        def f(c):
            arrays = {}
            for v, a in base.items():
                total = a
                for ci, sl in zip(c, slopes):
                    if ci:
                        total = total + ci * sl[v]
                arrays[v] = total
            return self._integrate(arrays)

        return f

    def _pulled_derivative(self, directions_values, pull) -> float:
        """Differentiate the density symbolically along jet-valued directions."""
        e = self.lagrangian.density
        for tau in directions_values:
            terms = [mul(differentiate(e, v), tau[v]) for v in jet_variables(e)]
            e = add(*terms)
        e = pull(e)
        values = evaluate_array(e, self._env, self.grid.shape)
        return quadrature(values * self._weight, self.grid)


class LocalFunctional(_GridFunctional):
    """S(s) = integral over the grid of L(j^r s) w."""

    domain = "section"

    def _arrays(self, p) -> dict:
        r = self.order
        if isinstance(p, Section):
            if p.n != self.lagrangian.n or p.m != self.lagrangian.m:
                raise ContextMismatchError("section and Lagrangian live on different bundles")
            return _section_jets(p, r, self.grid)
        if isinstance(p, SampledSection):
            if p.grid != self.grid:
                raise ContextMismatchError("sampled section lives on another grid")
            return jet_sample(p, r).arrays
        raise ContextMismatchError(f"LocalFunctional cannot evaluate {type(p).__name__}")

    def symbolic_derivative(self, p, directions):
        if not self.lagrangian.polynomial or not isinstance(p, Section) or \
                not all(isinstance(d, Section) for d in directions):
            return None
        r = self.order
        taus = [prolong(d, r) for d in directions]
        js = prolong(p, r)
        return self._pulled_derivative(taus, lambda e: along(e, js))

    def jet_form(self) -> "JetLocalFunctional":
        """The same density read as a functional on jet sections."""
        return JetLocalFunctional(self.lagrangian, self.grid)


class JetLocalFunctional(_GridFunctional):
    """F(xi) = integral of L(xi) w for a jet section xi (not necessarily integrable)."""

    domain = "jet"

    def _arrays(self, p) -> dict:
        if not isinstance(p, JetSection):
            raise ContextMismatchError(f"JetLocalFunctional cannot evaluate {type(p).__name__}")
        ctx = p.context
        if (ctx.n, ctx.m) != (self.lagrangian.n, self.lagrangian.m) or ctx.r < self.order:
            raise ContextMismatchError("jet section does not carry the coordinates L needs")
        return _jet_section_arrays(p, self.grid)

    def symbolic_derivative(self, p, directions):
        if not self.lagrangian.polynomial or not isinstance(p, JetSection) or \
                not all(isinstance(d, JetSection) for d in directions):
            return None
        return self._pulled_derivative(directions, lambda e: along(e, p))

    def transpose(self) -> LocalFunctional:
        """The Kleisli transpose s -> F(j^r s)."""
        return LocalFunctional(self.lagrangian, self.grid)


class ClosedForm(SmoothFunctional):
    """A functional given by a Python callable on points."""

    def __init__(self, fn: Callable, name: str = "closed form", domain: str = "any"):
        self.fn = fn
        self.name = name
        self.domain = domain

    def __call__(self, p) -> float:
        return float(self.fn(p))

    def __repr__(self):
        return f"ClosedForm({self.name})"


class ConstantFunctional(SmoothFunctional):
    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, p) -> float:
        return self.value

    def symbolic_derivative(self, p, directions):
        return 0.0


class Composite(SmoothFunctional):
    """g(F(p)) for a scalar expression g in the parameter ``y``."""

    def __init__(self, outer, inner: SmoothFunctional):
        if isinstance(outer, str):
            from ..grammar import parse

            outer = parse(outer)
        outer = canon(outer)
        extra = free_variables(outer) - {OUTER_VARIABLE}
        if extra:
            raise ValueError(f"outer function may only use y, found {sorted(map(str, extra))}")
        self.outer = outer
        self.inner = inner
        self.domain = inner.domain

    def g(self, y: float) -> float:
        return evaluate(self.outer, {OUTER_VARIABLE: y})

    def g_prime(self, y: float) -> float:
        return evaluate(differentiate(self.outer, OUTER_VARIABLE), {OUTER_VARIABLE: y})

    def __call__(self, p) -> float:
        return self.g(self.inner(p))

    def line(self, p, directions):
        inner = self.inner.line(p, directions)
        return lambda c: self.g(inner(c))


class ProductFunctional(SmoothFunctional):
    """F(p) G(p); with ``split`` the point is a pair (s, s') and the value F(s) G(s')."""

    def __init__(self, F: SmoothFunctional, G: SmoothFunctional, split: int | None = None):
        self.F = F
        self.G = G
        self.split = split
        self.domain = F.domain

    def _parts(self, p):
        if self.split is None:
            return p, p
        return p.split(self.split)

    def __call__(self, p) -> float:
        a, b = self._parts(p)
        return self.F(a) * self.G(b)

    def line(self, p, directions):
        a, b = self._parts(p)
        parts = [self._parts(d) for d in directions]
        f = self.F.line(a, [x for x, _ in parts])
        g = self.G.line(b, [y for _, y in parts])
        return lambda c: f(c) * g(c)


class Lifted(SmoothFunctional):
    """G_F(xi) = pair(xi, F), a linear functional on distributions."""

    domain = "distribution"

    def __init__(self, F: SmoothFunctional, method: str = "auto"):
        self.F = F
        self.method = method

    def __call__(self, xi) -> float:
        return pair(xi, self.F, self.method)

    def line(self, xi, directions):
        base = self(xi)
        slopes = [self(eta) for eta in directions]
        return lambda c: base + math.fsum(ci * s for ci, s in zip(c, slopes))


# ---------------------------------------------------------------------------
# pairing


def _pair_generator(g, F, method):
    if not F.accepts(g.point):
        raise ContextMismatchError(
            f"{type(F).__name__} cannot be paired with a distribution over "
            f"{type(g.point).__name__}")
    if isinstance(g, Delta):
        return float(F(g.point))
    return F.derivative(g.point, g.tangents, method)


def pair(d, F, method: str = "auto") -> float:
    """<d, F>: extended linearly from delta_p -> F(p) and derivatives of delta.

    A :class:`TensorDistribution` pairs against a tuple ``(F, G)``.
    """
    if isinstance(d, TensorDistribution):
        F1, F2 = F
        return math.fsum(float(c) * _pair_generator(a, F1, method) * _pair_generator(b, F2, method)
                         for (a, b), c in d.terms)
    if not isinstance(d, FormalDistribution):
        raise TypeError(f"cannot pair {type(d).__name__}")
    return math.fsum(float(c) * _pair_generator(g, F, method) for g, c in d.terms)


def gateaux(F: SmoothFunctional, s, t, method: str = "auto") -> float:
    """dF(s, t) = d/dh F(s + h t) at h = 0, via the deriving transformation."""
    return pair(deriving(t, delta(s)), F, method)
