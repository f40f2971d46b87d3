"""
Linear PDEs given as kernels of linear bundle maps, their prolongations and
residual-based solution checks.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

from .diffop import BundleMap, LinDiffOp, _is_u_linear, to_bundle_map
from .errors import DomainError, NotLinearError, RankMismatchError
from .expr import BaseVar, Const, Expr, canon, evaluate, is_zero, jet_variables, max_order, sub
from .jet import JetContext, Section, along, multi_indices, prolong, total_derivatives

__all__ = ["LPDE", "SolutionReport", "ProlongationCheck", "prolong_lpde", "check_solution",
           "solution_implies_prolonged", "check_residuals"]


class LPDE:
    """The equations f(j^r s) = g for a u-linear map f and an optional section g.

    Components are stored as residuals f_j - g_j, so that total derivatives
    treat the inhomogeneity correctly.  Prolongations are cached per level.
    """

    def __init__(self, f, n: int | None = None, m: int | None = None, inhomogeneity=None):
        if isinstance(f, LinDiffOp):
            f = to_bundle_map(f)
        if isinstance(f, BundleMap):
            components = f.components
            n, m, order = f.context.n, f.context.m, f.context.r
        else:
            components = tuple(canon(c) for c in f)
            if n is None or m is None:
                raise ValueError("n and m are required when components are given directly")
            order = max([0] + [max_order(c) for c in components])
        for j, c in enumerate(components):
            if not _is_u_linear(c):
                raise NotLinearError(f"equation {j} is not linear in the jet coordinates: {c}")
        if inhomogeneity is not None:
            inhomogeneity = tuple(canon(g) if isinstance(g, Expr) else Const(g)
                                  for g in inhomogeneity)
            if len(inhomogeneity) != len(components):
                raise RankMismatchError("one inhomogeneity term per equation is required")
            for g in inhomogeneity:
                if jet_variables(g):
                    raise ValueError("the inhomogeneity may only depend on base coordinates")
        self.context = JetContext(n, m, order)
        self.components = tuple(components)
        self.inhomogeneity = inhomogeneity
        if inhomogeneity is None:
            self.residuals = self.components
        else:
            self.residuals = tuple(sub(f_j, g_j) for f_j, g_j in zip(components, inhomogeneity))
        self._levels = [self.residuals]
        self._lock = threading.Lock()

    @property
    def order(self) -> int:
        return self.context.r

    @property
    def homogeneous(self) -> bool:
        return self.inhomogeneity is None or all(is_zero(g) for g in self.inhomogeneity)

    @property
    def degenerate(self) -> bool:
        """True when f is the zero map, so every section passes trivially."""
        return all(is_zero(c) for c in self.components)

    def prolonged(self, q: int) -> tuple:
        """Residual expressions at level q, order r + q (cached)."""
        if q < 0:
            raise ValueError("prolongation level must be non-negative")
        with self._lock:
            while len(self._levels) <= q:
                level = len(self._levels)
                seen = set(self._levels[-1])
                new = list(self._levels[-1])
                for J in multi_indices(self.context.n, level):
                    if sum(J) != level:
                        continue
                    for c in self.residuals:
                        e = total_derivatives(c, J)
                        if e not in seen and not is_zero(e):
                            seen.add(e)
                            new.append(e)
                self._levels.append(tuple(new))
            return self._levels[q]

    def __repr__(self):
        return f"LPDE(n={self.context.n}, m={self.context.m}, order={self.order}, " \
               f"equations={len(self.components)})"


def prolong_lpde(eq: LPDE, q: int) -> tuple:
    """{D_J f_j : |J| <= q}, deduplicated up to canonical form."""
    return eq.prolonged(q)


@dataclass(frozen=True)
class SolutionReport:
    """Residual maxima of each equation along a candidate section."""

    section: Section
    points: tuple
    residuals: tuple
    verdict: bool
    tolerance: float
    exact: bool
    flagged: tuple = field(default=())
    level: int = 0

    def __bool__(self):
        return self.verdict


def check_residuals(expressions, s: Section, points, tol: float = 1e-9, level: int = 0):
    """Evaluate arbitrary jet expressions along j(s); works for non-linear equations too."""
    expressions = tuple(expressions)
    r = max([0] + [max_order(e) for e in expressions])
    js = prolong(s, r)
    pulled = [along(e, js) for e in expressions]
    exact = all(is_zero(e) for e in pulled)
    points = tuple(tuple(float(x) for x in p) for p in points)
    maxima = [0.0] * len(pulled)
    flagged = []
    for p in points:
        env = {BaseVar(i): x for i, x in enumerate(p)}
        try:
            values = [abs(evaluate(e, env)) for e in pulled]
        except (DomainError, ArithmeticError):
            flagged.append(p)
            continue
        maxima = [max(a, b) if math.isfinite(b) else math.inf for a, b in zip(maxima, values)]
    evaluated = len(points) > len(flagged)
    verdict = exact or (evaluated and all(v <= tol for v in maxima))
    return SolutionReport(s, points, tuple(maxima), verdict, tol, exact, tuple(flagged), level)


def check_solution(eq: LPDE, s: Section, points, tol: float = 1e-9, level: int = 0
                   ) -> SolutionReport:
    """Residuals of the level-``level`` equations along j(s) at the given points."""
    if s.m != eq.context.m or s.n != eq.context.n:
        raise RankMismatchError("section and equation live on different bundles")
    return check_residuals(eq.prolonged(level), s, points, tol, level)


@dataclass(frozen=True)
class ProlongationCheck:
    holds: bool
    is_solution: bool
    base: SolutionReport
    prolonged: SolutionReport | None

    def __bool__(self):
        return self.holds


def solution_implies_prolonged(eq: LPDE, s: Section, q: int, points, tol: float = 1e-9
                               ) -> ProlongationCheck:
    """True iff the level-q equations vanish along j(s) whenever the defining ones do."""
    base = check_solution(eq, s, points, tol, 0)
    if not base.verdict:
        return ProlongationCheck(True, False, base, None)
    lifted = check_solution(eq, s, points, tol, q)
    return ProlongationCheck(lifted.verdict, True, base, lifted)
