"""
Jet bundles over a single rectangular chart.

A :class:`JetContext` fixes the base dimension ``n``, fiber rank ``m`` and
jet order ``r``; its coordinates are ``x_i`` and ``u^k_I`` with
``|I| <= r``.  Prolongation, counit, comultiplication and projection are
provided both for symbolic jets (:class:`JetSection`) and numeric ones
(:class:`JetPoint`).  Iterated jets ``J^q J^r`` and deeper are carried by
:class:`IteratedJet`, keyed by ``(k, I_inner, ..., I_outer)``.

Infinite jets are never materialised: every call states the order it needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Sequence

from .errors import ContextMismatchError, InsufficientOrderError, RankMismatchError
from .expr import (
    BaseVar, Const, Expr, JetVar, add, canon, differentiate, equivalent, evaluate,
    free_variables, jet_variables, max_order, mul, substitute,
)

__all__ = [
    "multi_indices", "unit_index", "index_order", "JetContext", "Section",
    "JetSection", "JetPoint", "IteratedJet", "Connection", "prolong",
    "total_derivative", "total_derivatives", "along", "counit",
    "comultiplication", "project", "jet_of_jet", "seely_split", "seely_merge",
    "covariant_derivative", "jet_point",
]


def index_order(index) -> int:
    return sum(index)


def unit_index(n: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(n))


def _index_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


@lru_cache(maxsize=None)
def _indices_of_order(n, order):
    if n == 1:
        return ((order,),)
    out = []
    for first in range(order, -1, -1):
        for rest in _indices_of_order(n - 1, order - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def multi_indices(n: int, r: int) -> tuple:
    """All multi-indices of length ``n`` and order <= ``r``, graded-lex order."""
    out = []
    for order in range(r + 1):
        out.extend(_indices_of_order(n, order))
    return tuple(out)


def _default_chart(n):
    return tuple((0.0, 1.0) for _ in range(n))


def _as_chart(chart, n):
    if chart is None:
        return _default_chart(n)
    chart = tuple((float(lo), float(hi)) for lo, hi in chart)
    if len(chart) != n or any(lo >= hi for lo, hi in chart):
        raise ValueError("chart must give lower < upper bounds for every axis")
    return chart


@dataclass(frozen=True)
class JetContext:
    """Coordinate ring of J^r(E) for E of rank ``m`` over an ``n``-box."""

    n: int
    m: int
    r: int
    chart: tuple = None

    def __post_init__(self):
        if self.n < 1 or self.m < 0 or self.r < 0:
            raise ValueError("need n >= 1, m >= 0, r >= 0")
        object.__setattr__(self, "chart", _as_chart(self.chart, self.n))

    @property
    def jet_variables(self) -> tuple:
        return _context_variables(self.n, self.m, self.r)

    @property
    def base_variables(self) -> tuple:
        return tuple(BaseVar(i) for i in range(self.n))

    @property
    def dimension(self) -> int:
        """Number of jet coordinates, m * C(n + r, r)."""
        return self.m * comb(self.n + self.r, self.r)

    def with_order(self, r: int) -> "JetContext":
        return JetContext(self.n, self.m, r, self.chart)

    def with_rank(self, m: int) -> "JetContext":
        return JetContext(self.n, m, self.r, self.chart)

    def position(self, v: JetVar) -> int:
        return _context_positions(self.n, self.m, self.r)[v]

    def contains(self, e: Expr) -> bool:
        """True iff ``e`` only uses coordinates of this context (and parameters)."""
        for v in free_variables(e):
            if type(v) is BaseVar and v.index >= self.n:
                return False
            if type(v) is JetVar and (v.fiber >= self.m or len(v.index) != self.n
                                      or v.order > self.r):
                return False
        return True


@lru_cache(maxsize=None)
def _context_variables(n, m, r):
    return tuple(JetVar(k, I) for k in range(m) for I in multi_indices(n, r))


@lru_cache(maxsize=None)
def _context_positions(n, m, r):
    return {v: i for i, v in enumerate(_context_variables(n, m, r))}


def _check_base_only(e, n):
    for v in free_variables(e):
        if type(v) is JetVar:
            raise ValueError(f"section components may not contain jet coordinates ({v})")
        if type(v) is BaseVar and v.index >= n:
            raise ValueError(f"x{v.index + 1} exceeds base dimension {n}")


def _scalar(c):
    if isinstance(c, Expr):
        return c
    return Const(c)


@dataclass(frozen=True)
class Section:
    """Local section s = (s^1, ..., s^m) given by expressions in x."""

    components: tuple
    n: int
    chart: tuple = None

    def __post_init__(self):
        comps = tuple(canon(_scalar(c)) for c in self.components)
        for c in comps:
            _check_base_only(c, self.n)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "chart", _as_chart(self.chart, self.n))

    @classmethod
    def parse(cls, texts, n, chart=None):
        from .grammar import parse

        if isinstance(texts, str):
            texts = [texts]
        return cls(tuple(parse(t, n) for t in texts), n, chart)

    @classmethod
    def zero(cls, n, m, chart=None):
        return cls(tuple(_scalar(0) for _ in range(m)), n, chart)

    @property
    def m(self) -> int:
        return len(self.components)

    def context(self, r: int) -> JetContext:
        return JetContext(self.n, self.m, r, self.chart)

    def _check(self, other):
        if not isinstance(other, Section):
            return NotImplemented
        if other.n != self.n or other.m != self.m:
            raise RankMismatchError("sections live on different bundles")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Section(tuple(add(a, b) for a, b in zip(self.components, other.components)),
                       self.n, self.chart)

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, c):
        if isinstance(c, (Section, JetSection)):
            return NotImplemented
        c = _scalar(c)
        return Section(tuple(mul(c, a) for a in self.components), self.n, self.chart)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1) * self

    def split(self, m1: int):
        return (Section(self.components[:m1], self.n, self.chart),
                Section(self.components[m1:], self.n, self.chart))

    def concat(self, other: "Section") -> "Section":
        if other.n != self.n:
            raise ContextMismatchError("sections over different bases")
        return Section(self.components + other.components, self.n, self.chart)

    def value_at(self, point) -> tuple:
        env = {BaseVar(i): x for i, x in enumerate(point)}
        return tuple(evaluate(c, env) for c in self.components)

    def __str__(self):
        from .grammar import to_text

        return "(" + ", ".join(to_text(c) for c in self.components) + ")"


@dataclass(frozen=True)
class JetSection:
    """Assignment u^k_I -> expression in x, aligned with ``context.jet_variables``."""

    context: JetContext
    values: tuple

    def __post_init__(self):
        values = tuple(canon(_scalar(v)) for v in self.values)
        if len(values) != self.context.dimension:
            raise ValueError("one value per jet coordinate is required")
        for v in values:
            _check_base_only(v, self.context.n)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_assignment(cls, context: JetContext, assignment: dict) -> "JetSection":
        return cls(context, tuple(assignment[v] for v in context.jet_variables))

    @classmethod
    def zero(cls, context: JetContext) -> "JetSection":
        return cls(context, tuple(_scalar(0) for _ in range(context.dimension)))

    @property
    def assignment(self) -> dict:
        return dict(zip(self.context.jet_variables, self.values))

    def __getitem__(self, v: JetVar) -> Expr:
        return self.values[self.context.position(v)]

    def items(self):
        return zip(self.context.jet_variables, self.values)

    def _check(self, other):
        if not isinstance(other, JetSection):
            return NotImplemented
        if other.context != self.context:
            raise ContextMismatchError("jet sections over different contexts")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return JetSection(self.context, tuple(add(a, b) for a, b in zip(self.values, other.values)))

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, c):
        if isinstance(c, (Section, JetSection)):
            return NotImplemented
        c = _scalar(c)
        return JetSection(self.context, tuple(mul(c, a) for a in self.values))

    __rmul__ = __mul__

    def __neg__(self):
        return (-1) * self

    def is_compatible(self, trials: int = 16, tol: float = 1e-9, seed: int | None = None) -> bool:
        """Check d/dx_i of the u^k_I value equals the u^k_{I+e_i} value."""
        ctx = self.context
        for v, value in self.items():
            if v.order >= ctx.r:
                continue
            for i in range(ctx.n):
                higher = self[JetVar(v.fiber, _index_add(v.index, unit_index(ctx.n, i)))]
                if not equivalent(differentiate(value, BaseVar(i)), higher, trials, tol, seed=seed):
                    return False
        return True


@dataclass(frozen=True)
class JetPoint:
    """Numeric r-jet at a base point: one value per jet coordinate."""

    context: JetContext
    base: tuple
    values: tuple

    def __post_init__(self):
        import math

        base = tuple(float(x) for x in self.base)
        values = tuple(float(v) for v in self.values)
        if len(base) != self.context.n or len(values) != self.context.dimension:
            raise ValueError("jet point dimensions do not match its context")
        if not all(math.isfinite(v) for v in base + values):
            raise ValueError("jet point values must be finite")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "values", values)

    def __getitem__(self, v: JetVar) -> float:
        return self.values[self.context.position(v)]

    @property
    def assignment(self) -> dict:
        env = dict(zip(self.context.jet_variables, self.values))
        env.update({BaseVar(i): x for i, x in enumerate(self.base)})
        return env


def jet_point(js: JetSection, base: Sequence[float]) -> JetPoint:
    """Evaluate a symbolic jet section at a base point."""
    env = {BaseVar(i): x for i, x in enumerate(base)}
    return JetPoint(js.context, base, tuple(evaluate(v, env) for v in js.values))


@dataclass(frozen=True)
class IteratedJet:
    """Coordinates of J^{r_L} ... J^{r_1}(E); ``orders`` lists r_1 (innermost) first.

    Entries map ``(k, I_1, ..., I_L)`` to a value (a number or an Expr).
    """

    n: int
    m: int
    orders: tuple
    entries: tuple = field(repr=False)
    base: tuple = None

    @property
    def mapping(self) -> dict:
        return dict(self.entries)

    def keys(self):
        return [k for k, _ in self.entries]

    def __getitem__(self, key):
        return self.mapping[key]


def _as_iterated(obj):
    if isinstance(obj, IteratedJet):
        return obj
    if isinstance(obj, (JetSection, JetPoint)):
        ctx = obj.context
        entries = tuple(((v.fiber, v.index), value)
                        for v, value in zip(ctx.jet_variables, obj.values))
        return IteratedJet(ctx.n, ctx.m, (ctx.r,), entries,
                           getattr(obj, "base", None))
    raise TypeError(f"not a jet object: {obj!r}")


def _from_iterated(it, like):
    """Collapse a single-level IteratedJet back to the type of ``like``."""
    if len(it.orders) != 1 or isinstance(like, IteratedJet):
        return it
    ctx = JetContext(it.n, it.m, it.orders[0], like.context.chart)
    mapping = it.mapping
    values = tuple(mapping[(v.fiber, v.index)] for v in ctx.jet_variables)
    if isinstance(like, JetSection):
        return JetSection(ctx, values)
    return JetPoint(ctx, like.base, values)


def _level(it, level):
    L = len(it.orders)
    level = L - 1 if level is None else level
    if not 0 <= level < L:
        raise IndexError(f"jet level {level} out of range for {L} levels")
    return level


# ---------------------------------------------------------------------------
# operations


@lru_cache(maxsize=4096)
def prolong(s: Section, r: int) -> JetSection:
    """The r-jet prolongation j^r(s): u^k_I -> d_I s^k."""
    if r < 0:
        raise ValueError("jet order must be non-negative")
    ctx = s.context(r)
    table = {}
    for v in ctx.jet_variables:
        if v.order == 0:
            table[v] = s.components[v.fiber]
            continue
        i = next(j for j, e in enumerate(v.index) if e > 0)
        lower = list(v.index)
        lower[i] -= 1
        table[v] = differentiate(table[JetVar(v.fiber, tuple(lower))], BaseVar(i))
    return JetSection(ctx, tuple(table[v] for v in ctx.jet_variables))


@lru_cache(maxsize=1 << 15)
def total_derivative(e: Expr, i: int) -> Expr:
    """D_i e = de/dx_i + sum_{k,I} u^k_{I+e_i} de/du^k_I."""
    e = canon(e)
    terms = [differentiate(e, BaseVar(i))]
    for v in jet_variables(e):
        n = len(v.index)
        if i >= n:
            raise ValueError(f"axis {i} exceeds base dimension {n}")
        up = JetVar(v.fiber, _index_add(v.index, unit_index(n, i)))
        terms.append(mul(up, differentiate(e, v)))
    return add(*terms)


def total_derivatives(e: Expr, index) -> Expr:
    """D_I e: the composite of total derivatives for a multi-index I."""
    for i, count in enumerate(index):
        for _ in range(count):
            e = total_derivative(e, i)
    return canon(e)


def along(e: Expr, js: JetSection) -> Expr:
    """Pull ``e`` back along a jet section: substitute u^k_I by its value."""
    needed = max_order(e)
    if needed > js.context.r:
        raise InsufficientOrderError(
            f"expression needs order {needed}, jet section has order {js.context.r}")
    mapping = {v: js[v] for v in jet_variables(e)}
    return substitute(e, mapping)


def counit(obj, level=None):
    """Restriction to order-0 coordinates.

    For a :class:`JetSection` returns the :class:`Section`, for a
    :class:`JetPoint` the tuple of fiber values, and for an
    :class:`IteratedJet` the jet with the chosen level (default: outermost)
    removed.
    """
    if isinstance(obj, JetSection):
        ctx = obj.context
        zero = (0,) * ctx.n
        return Section(tuple(obj[JetVar(k, zero)] for k in range(ctx.m)), ctx.n, ctx.chart)
    if isinstance(obj, JetPoint):
        zero = (0,) * obj.context.n
        return tuple(obj[JetVar(k, zero)] for k in range(obj.context.m))
    it = _as_iterated(obj)
    lv = _level(it, level)
    zero = (0,) * it.n
    entries = tuple((key[:lv + 1] + key[lv + 2:], value)
                    for key, value in it.entries if key[lv + 1] == zero)
    orders = it.orders[:lv] + it.orders[lv + 1:]
    return IteratedJet(it.n, it.m, orders, entries, it.base)


def comultiplication(obj, r: int, q: int, level=None):
    """mu^{r,q}: split one jet level of order >= r+q into inner r and outer q.

    The coordinate (k, ..., I, J, ...) of the result, I the inner and J the
    outer index, is the input value at (k, ..., I+J, ...).
    """
    it = _as_iterated(obj)
    lv = _level(it, level)
    if it.orders[lv] < r + q:
        raise InsufficientOrderError(
            f"comultiplication mu^({r},{q}) needs order {r + q}, have {it.orders[lv]}")
    mapping = it.mapping
    entries = []
    for key in _iterated_keys(it.n, it.m, it.orders[:lv] + (r, q) + it.orders[lv + 1:]):
        I, J = key[lv + 1], key[lv + 2]
        source = key[:lv + 1] + (_index_add(I, J),) + key[lv + 3:]
        entries.append((key, mapping[source]))
    orders = it.orders[:lv] + (r, q) + it.orders[lv + 1:]
    return IteratedJet(it.n, it.m, orders, tuple(entries), it.base)


def _iterated_keys(n, m, orders):
    keys = [(k,) for k in range(m)]
    for order in orders:
        keys = [key + (I,) for key in keys for I in multi_indices(n, order)]
    return keys


def project(obj, q: int, level=None):
    """Drop coordinates above order ``q`` (at the chosen level)."""
    if isinstance(obj, (JetSection, JetPoint)):
        r = obj.context.r
        if q > r:
            raise InsufficientOrderError(f"cannot project order {r} to {q}")
        ctx = obj.context.with_order(q)
        values = tuple(obj[v] for v in ctx.jet_variables)
        if isinstance(obj, JetSection):
            return JetSection(ctx, values)
        return JetPoint(ctx, obj.base, values)
    it = _as_iterated(obj)
    lv = _level(it, level)
    if q > it.orders[lv]:
        raise InsufficientOrderError(f"cannot project order {it.orders[lv]} to {q}")
    entries = tuple((key, value) for key, value in it.entries if sum(key[lv + 1]) <= q)
    orders = it.orders[:lv] + (q,) + it.orders[lv + 1:]
    return IteratedJet(it.n, it.m, orders, entries, it.base)


def jet_of_jet(js: JetSection, q: int) -> IteratedJet:
    """j^q applied to a jet section viewed as a section of J^r(E).

    For js = j^r(s) this is j^q j^r(s), which the comultiplication
    mu^{r,q} must reproduce from j^{r+q}(s).
    """
    ctx = js.context
    entries = []
    for key in _iterated_keys(ctx.n, ctx.m, (ctx.r, q)):
        k, I, J = key
        value = js[JetVar(k, I)]
        for i, count in enumerate(J):
            for _ in range(count):
                value = differentiate(value, BaseVar(i))
        entries.append((key, value))
    return IteratedJet(ctx.n, ctx.m, (ctx.r, q), tuple(entries))


def seely_split(js: JetSection, m1: int):
    """j(s, s') -> (j(s), j(s')) for a jet section of a product bundle."""
    ctx = js.context
    if not 0 <= m1 <= ctx.m:
        raise RankMismatchError(f"cannot split rank {ctx.m} at {m1}")
    per_fiber = len(multi_indices(ctx.n, ctx.r))
    cut = m1 * per_fiber
    first = JetSection(ctx.with_rank(m1), js.values[:cut])
    second = JetSection(ctx.with_rank(ctx.m - m1), js.values[cut:])
    return first, second


def seely_merge(a: JetSection, b: JetSection) -> JetSection:
    """Inverse of :func:`seely_split`."""
    ca, cb = a.context, b.context
    if (ca.n, ca.r, ca.chart) != (cb.n, cb.r, cb.chart):
        raise ContextMismatchError("cannot merge jet sections over different base/order")
    return JetSection(ca.with_rank(ca.m + cb.m), a.values + b.values)


@dataclass(frozen=True)
class Connection:
    """Linear connection: Gamma^k_i(x, u) for axis i and fiber k (order 0 in u).

    ``coefficients[i][k]`` is Gamma^k_i.
    """

    n: int
    m: int
    coefficients: tuple

    def __post_init__(self):
        rows = tuple(tuple(canon(_scalar(c)) for c in row) for row in self.coefficients)
        if len(rows) != self.n or any(len(row) != self.m for row in rows):
            raise ValueError("need an n-by-m table of connection coefficients")
        for row in rows:
            for c in row:
                if max_order(c) > 0:
                    raise ValueError("connection coefficients may only use u^k, not derivatives")
        object.__setattr__(self, "coefficients", rows)

    def _along(self, c, s):
        zero = (0,) * self.n
        return substitute(c, {JetVar(k, zero): s.components[k] for k in range(self.m)})

    def lift(self, s: Section) -> JetSection:
        """Gamma^1: u^k -> s^k, u^k_i -> Gamma^k_i(x, s(x))."""
        ctx = JetContext(self.n, self.m, 1, s.chart)
        table = {}
        for v in ctx.jet_variables:
            if v.order == 0:
                table[v] = s.components[v.fiber]
            else:
                i = v.index.index(1)
                table[v] = self._along(self.coefficients[i][v.fiber], s)
        return JetSection.from_assignment(ctx, table)


def covariant_derivative(c: Connection, s: Section) -> list:
    """Components of nabla s: entry i is the section (d_i s^k + Gamma^k_i(x, s))_k."""
    if c.n != s.n or c.m != s.m:
        raise ContextMismatchError("connection and section live on different bundles")
    out = []
    for i in range(c.n):
        comps = tuple(add(differentiate(s.components[k], BaseVar(i)),
                          c._along(c.coefficients[i][k], s)) for k in range(c.m))
        out.append(Section(comps, s.n, s.chart))
    return out
