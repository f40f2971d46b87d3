"""
The Euler-Lagrange operator and the first-variation identity on a grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..expr import ONE, JetVar, add, canon, differentiate, evaluate_array, is_zero, mul, power
from ..jet import Section, along, multi_indices, prolong, total_derivatives
from ..numeric import Grid, quadrature, symbolic_jet_arrays
from .functionals import Lagrangian, LocalFunctional, gateaux

__all__ = ["euler_lagrange", "VariationalReport", "variational_identity_check"]


def euler_lagrange(L: Lagrangian) -> list:
    """el_a = sum over I of (-1)^|I| D_I (d(wL)/du^a_I), divided by the weight w.

    With the default weight 1 this is the textbook operator; a weight makes
    the result the density of the first variation against w dx.
    """
    weighted = mul(L.weight, L.density)
    r = L.order
    out = []
    for a in range(L.m):
        terms = []
        for I in multi_indices(L.n, r):
            partial = differentiate(weighted, JetVar(a, I))
            if is_zero(partial):
                continue
            term = total_derivatives(partial, I)
            terms.append(term if sum(I) % 2 == 0 else mul(-1, term))
        el = add(*terms)
        if L.weight != ONE:
            el = mul(el, power(L.weight, -1))
        out.append(canon(el))
    return out


@dataclass(frozen=True)
class VariationalReport:
    """Both sides of dS(s)[t] = integral of el(L)(j s) . t w."""

    gateaux: float
    el_integral: float
    absolute_gap: float
    relative_gap: float
    passed: bool
    tolerance: float
    grid: str
    euler_lagrange: tuple

    def __bool__(self):
        return self.passed


def _support_ok(t: Section, r: int, grid: Grid, tol: float = 1e-12) -> bool:
    """t and its derivatives up to order r vanish on the grid boundary."""
    arrays = symbolic_jet_arrays(t, r, grid)
    for a in arrays.values():
        for axis in range(grid.n):
            edge = np.concatenate([np.take(a, 0, axis=axis).ravel(),
                                   np.take(a, -1, axis=axis).ravel()])
            if np.max(np.abs(edge), initial=0.0) > tol:
                return False
    return True


def variational_identity_check(L: Lagrangian, s: Section, t: Section, grid: Grid,
                               tol: float = 1e-4, method: str = "auto",
                               atol: float = 1e-10) -> VariationalReport:
    """Compare the Gateaux derivative of the action with the EL pairing.

    ``t`` must vanish, together with its derivatives, on the grid boundary so
    that the total-derivative term integrates to zero.
    """
    if not _support_ok(t, L.order, grid):
        raise ValueError("the direction t must vanish with its derivatives at the grid boundary")
    S = LocalFunctional(L, grid)
    lhs = gateaux(S, s, t, method)
    el = euler_lagrange(L)
    js = prolong(s, 2 * L.order)
    env = grid.environment()
    weight = evaluate_array(L.weight, env, grid.shape)
    integrand = np.zeros(grid.shape)
    for a, e in enumerate(el):
        pulled = along(e, js)
        integrand = integrand + evaluate_array(pulled, env, grid.shape) * \
            evaluate_array(t.components[a], env, grid.shape)
    rhs = quadrature(integrand * weight, grid)
    gap = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs))
    relative = gap / scale if scale > 0 else 0.0
    passed = gap <= tol * scale + atol
    return VariationalReport(lhs, rhs, gap, relative, passed, tol, grid.spec, tuple(el))
