"""
Linear differential operators and their bundle-map form F: J^r(E) -> E'.

A :class:`LinDiffOp` stores coefficients ``a[row, col, alpha]`` so that
component ``row`` of ``op(s)`` is ``sum a[row, col, alpha] * d_alpha s^col``.
Composition goes through the bundle-map side: the components of F are
prolonged by total derivatives and substituted into G.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContextMismatchError, NotLinearError, RankMismatchError
from .expr import (
    ONE, Const, Expr, JetVar, add, canon, differentiate, free_variables, is_zero,
    jet_variables, mul, substitute,
)
from .jet import JetContext, Section, along, prolong, total_derivatives, unit_index

__all__ = ["LinDiffOp", "BundleMap", "to_bundle_map", "from_bundle_map", "apply", "compose"]


def _coefficient(value) -> Expr:
    e = canon(value if isinstance(value, Expr) else Const(value))
    for v in free_variables(e):
        if type(v) is JetVar:
            raise ValueError(f"operator coefficients may not depend on jet coordinates ({v})")
    return e


@dataclass(frozen=True)
class LinDiffOp:
    """sum over (row, col, alpha) of a(x) d_alpha, from rank ``m`` to rank ``m_out``."""

    n: int
    m: int
    m_out: int
    coefficients: tuple = ()

    def __init__(self, n: int, m: int, m_out: int, coefficients=()):
        items = coefficients.items() if isinstance(coefficients, dict) else coefficients
        merged = {}
        for (row, col, alpha), value in items:
            alpha = tuple(int(a) for a in alpha)
            if not (0 <= row < m_out and 0 <= col < m) or len(alpha) != n or min(alpha) < 0:
                raise ValueError(f"bad coefficient key {(row, col, alpha)}")
            key = (row, col, alpha)
            merged[key] = add(merged[key], _coefficient(value)) if key in merged \
                else _coefficient(value)
        table = tuple(sorted(((k, v) for k, v in merged.items() if not is_zero(v)),
                             key=lambda kv: (kv[0][0], kv[0][1], sum(kv[0][2]),
                                             tuple(-a for a in kv[0][2]))))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "m_out", m_out)
        object.__setattr__(self, "coefficients", table)

    # constructors -----------------------------------------------------

    @classmethod
    def identity(cls, n: int, m: int = 1) -> "LinDiffOp":
        return cls(n, m, m, {(k, k, (0,) * n): ONE for k in range(m)})

    @classmethod
    def zero(cls, n: int, m: int = 1, m_out: int | None = None) -> "LinDiffOp":
        return cls(n, m, m if m_out is None else m_out)

    @classmethod
    def partial(cls, n: int, alpha, m: int = 1) -> "LinDiffOp":
        """d_alpha on every fiber; an int means the first-order partial on that axis."""
        if isinstance(alpha, int):
            alpha = unit_index(n, alpha)
        return cls(n, m, m, {(k, k, tuple(alpha)): ONE for k in range(m)})

    @classmethod
    def multiplication(cls, n: int, factor, m: int = 1) -> "LinDiffOp":
        return cls(n, m, m, {(k, k, (0,) * n): factor for k in range(m)})

    @classmethod
    def laplacian(cls, n: int) -> "LinDiffOp":
        return cls(n, 1, 1, {(0, 0, tuple(2 * e for e in unit_index(n, i))): ONE
                             for i in range(n)})

    # structure --------------------------------------------------------

    @property
    def order(self) -> int:
        return max((sum(alpha) for (_, _, alpha), _ in self.coefficients), default=0)

    @property
    def table(self) -> dict:
        return dict(self.coefficients)

    def coefficient(self, row: int, col: int, alpha) -> Expr:
        return self.table.get((row, col, tuple(alpha)), Const(0))

    def _same_shape(self, other):
        if (self.n, self.m, self.m_out) != (other.n, other.m, other.m_out):
            raise RankMismatchError("operators between different bundles")

    def __add__(self, other):
        if not isinstance(other, LinDiffOp):
            return NotImplemented
        self._same_shape(other)
        return LinDiffOp(self.n, self.m, self.m_out, self.coefficients + other.coefficients)

    def __neg__(self):
        return (-1) * self

    def __sub__(self, other):
        if not isinstance(other, LinDiffOp):
            return NotImplemented
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, LinDiffOp):
            return NotImplemented
        c = _coefficient(c)
        return LinDiffOp(self.n, self.m, self.m_out,
                         [(k, mul(c, v)) for k, v in self.coefficients])

    __rmul__ = __mul__

    def __matmul__(self, other):
        return compose(self, other)

    def is_zero(self) -> bool:
        return not self.coefficients

    def __str__(self):
        from .grammar import to_text

        if not self.coefficients:
            return "0"
        parts = []
        for (row, col, alpha), value in self.coefficients:
            d = "".join(f"d{i + 1}" * a for i, a in enumerate(alpha)) or "1"
            parts.append(f"[{row},{col}] ({to_text(value)})*{d}")
        return " + ".join(parts)


@dataclass(frozen=True)
class BundleMap:
    """F: J^r(E) -> E', one expression in jet coordinates per target fiber."""

    context: JetContext
    components: tuple

    def __post_init__(self):
        comps = tuple(canon(c if isinstance(c, Expr) else Const(c)) for c in self.components)
        for c in comps:
            if not self.context.contains(c):
                raise ContextMismatchError(f"component {c} is not a function on {self.context}")
        object.__setattr__(self, "components", comps)

    @property
    def m_out(self) -> int:
        return len(self.components)

    @property
    def linear(self) -> bool:
        return all(_is_u_linear(c) for c in self.components)

    def __call__(self, s: Section) -> Section:
        """F-hat(s) = F(j^r s)."""
        if s.m != self.context.m or s.n != self.context.n:
            raise RankMismatchError("section and bundle map live on different bundles")
        js = prolong(s, self.context.r)
        return Section(tuple(along(c, js) for c in self.components), s.n, s.chart)


def _is_u_linear(e: Expr) -> bool:
    jets = jet_variables(e)
    zero = {v: Const(0) for v in jets}
    if jets and not is_zero(substitute(e, zero)):
        return False
    if not jets:
        return is_zero(e)
    return all(not jet_variables(differentiate(e, v)) for v in jets)


def to_bundle_map(op: LinDiffOp) -> BundleMap:
    """Component j = sum over (k, alpha) of a[j, k, alpha](x) * u^k_alpha."""
    ctx = JetContext(op.n, op.m, op.order)
    rows = [[] for _ in range(op.m_out)]
    for (row, col, alpha), value in op.coefficients:
        rows[row].append(mul(value, JetVar(col, alpha)))
    return BundleMap(ctx, tuple(add(*terms) for terms in rows))


def from_bundle_map(F: BundleMap) -> LinDiffOp:
    """Read coefficients off a u-linear bundle map; raises NotLinearError otherwise."""
    for j, c in enumerate(F.components):
        if not _is_u_linear(c):
            raise NotLinearError(f"component {j} is not linear in the jet coordinates: {c}")
    ctx = F.context
    coefficients = {}
    for row, c in enumerate(F.components):
        for v in jet_variables(c):
            coefficients[(row, v.fiber, v.index)] = differentiate(c, v)
    return LinDiffOp(ctx.n, ctx.m, F.m_out, coefficients)


def apply(op: LinDiffOp, s: Section) -> Section:
    """op(s), computed as F(j^r s)."""
    if s.m != op.m or s.n != op.n:
        raise RankMismatchError(f"operator on rank {op.m} applied to rank {s.m} section")
    return to_bundle_map(op)(s)


def compose(G: LinDiffOp, F: LinDiffOp) -> LinDiffOp:
    """The Kleisli composite G after F.

    Each target jet coordinate v^k_J of G is replaced by D_J f_k, the total
    derivative of F's k-th component; this realises J^{r+q} -> J^q J^r.
    """
    if F.m_out != G.m or F.n != G.n:
        raise RankMismatchError(f"cannot compose: F has target rank {F.m_out}, G source rank {G.m}")
    f = to_bundle_map(F).components
    g = to_bundle_map(G)
    mapping = {}
    for v in g.context.jet_variables:
        mapping[v] = total_derivatives(f[v.fiber], v.index)
    comps = [substitute(c, mapping) for c in g.components]
    ctx = JetContext(F.n, F.m, F.order + G.order)
    return from_bundle_map(BundleMap(ctx, tuple(comps)))
