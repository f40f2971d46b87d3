"""
Formal finite spans of Dirac deltas and derivative-of-delta generators.

``Delta(p)`` pairs to ``F(p)``; ``DeltaDeriv(p, (t1, ..., tk))`` pairs to the
mixed directional derivative of ``F`` at ``p`` along ``t1 .. tk``.  Points and
tangents live in one carrier: :class:`~jetcalc.jet.Section`,
:class:`~jetcalc.jet.JetSection`, or (one level down) :class:`FormalDistribution`
itself.  Tangent lists are kept sorted, since mixed derivatives commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from numbers import Number

from ..errors import ContextMismatchError, DepthError
from ..expr import sort_key
from ..jet import JetSection, Section, counit, prolong

__all__ = [
    "Delta", "DeltaDeriv", "FormalDistribution", "TensorDistribution", "delta",
    "delta_deriv", "codereliction_delta", "codereliction_jet", "codereliction",
    "tensor", "comonoid", "counit_e", "cbar", "ebar", "mu", "epsilon",
    "deriving", "pushforward", "seely_delta", "jet_transpose", "epsilon_jdelta",
    "zero_point", "carrier_key", "set_partitions",
]

MAX_DEPTH = 2


def carrier_key(x):
    """A total order on carrier elements, used to sort tangents and terms."""
    if isinstance(x, Section):
        return (0, x.n, x.m, tuple(sort_key(c) for c in x.components))
    if isinstance(x, JetSection):
        ctx = x.context
        return (1, ctx.n, ctx.m, ctx.r, tuple(sort_key(v) for v in x.values))
    if isinstance(x, FormalDistribution):
        return (2, tuple((g.key, _number_key(c)) for g, c in x.terms))
    raise TypeError(f"unsupported carrier element {x!r}")


def _number_key(c):
    return (float(c), repr(c))


def _shape(x):
    if isinstance(x, Section):
        return ("section", x.n, x.m)
    if isinstance(x, JetSection):
        return ("jet", x.context.n, x.context.m, x.context.r)
    if isinstance(x, FormalDistribution):
        return ("distribution",)
    raise TypeError(f"unsupported carrier element {x!r}")


def _depth(x):
    return 1 + x.depth if isinstance(x, FormalDistribution) else 1


def zero_point(like):
    """The zero element of the carrier of ``like``."""
    if isinstance(like, Section):
        return Section.zero(like.n, like.m, like.chart)
    if isinstance(like, JetSection):
        return JetSection.zero(like.context)
    if isinstance(like, FormalDistribution):
        return FormalDistribution()
    raise TypeError(f"unsupported carrier element {like!r}")


@dataclass(frozen=True)
class Delta:
    point: object

    @property
    def tangents(self) -> tuple:
        return ()

    @property
    def key(self):
        return (0, carrier_key(self.point), ())

    def __str__(self):
        return f"delta[{self.point}]"


@dataclass(frozen=True)
class DeltaDeriv:
    point: object
    tangents: tuple

    def __post_init__(self):
        if not self.tangents:
            raise ValueError("a derivative-of-delta needs at least one tangent; use Delta")
        object.__setattr__(self, "tangents", tuple(sorted(self.tangents, key=carrier_key)))

    @property
    def key(self):
        return (1, carrier_key(self.point), tuple(carrier_key(t) for t in self.tangents))

    def __str__(self):
        ts = ", ".join(str(t) for t in self.tangents)
        return f"ddelta[{self.point}; {ts}]"


def _generator(point, tangents=()):
    return DeltaDeriv(point, tuple(tangents)) if tangents else Delta(point)


def _scalar(c):
    if isinstance(c, bool) or not isinstance(c, Number):
        raise TypeError(f"distribution coefficients must be numbers, got {c!r}")
    if isinstance(c, int):
        return Fraction(c)
    return c


def _merge(pairs):
    table = {}
    for g, c in pairs:
        table[g] = table.get(g, 0) + c
    items = [(g, c) for g, c in table.items() if c != 0]
    items.sort(key=lambda gc: gc[0].key)
    return tuple(items)


class FormalDistribution:
    """Finite linear combination of generators over one carrier."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=()):
        pairs = [(g, _scalar(c)) for g, c in terms]
        merged = _merge(pairs)
        shapes = {_shape(p) for g, _ in merged for p in (g.point,) + g.tangents}
        if len(shapes) > 1:
            raise ContextMismatchError(f"generators over different carriers: {sorted(shapes)}")
        for g, _ in merged:
            for p in (g.point,) + g.tangents:
                if _depth(p) > MAX_DEPTH:
                    raise DepthError(f"nesting depth above {MAX_DEPTH}")
        object.__setattr__(self, "terms", merged)
        object.__setattr__(self, "_hash", hash(merged))

    def __setattr__(self, name, value):
        raise AttributeError("formal distributions are immutable")

    @property
    def depth(self) -> int:
        if not self.terms:
            return 1
        return max(max(_depth(p) for p in (g.point,) + g.tangents) for g, _ in self.terms)

    @property
    def carrier(self):
        for g, _ in self.terms:
            return _shape(g.point)
        return None

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, FormalDistribution):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return self._hash

    def __add__(self, other):
        if not isinstance(other, FormalDistribution):
            return NotImplemented
        return FormalDistribution(self.terms + other.terms)

    def __sub__(self, other):
        if not isinstance(other, FormalDistribution):
            return NotImplemented
        return self + (-1) * other

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        c = _scalar(c)
        return FormalDistribution((g, c * v) for g, v in self.terms)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1) * self

    def __repr__(self):
        if not self.terms:
            return "FormalDistribution(0)"
        return "FormalDistribution(" + " + ".join(f"{c}*{g}" for g, c in self.terms) + ")"


class TensorDistribution:
    """Finite span of generator pairs g1 (x) g2, an element of !A (x) !A."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        table = {}
        for (g1, g2), c in terms:
            table[(g1, g2)] = table.get((g1, g2), 0) + _scalar(c)
        items = [(k, c) for k, c in table.items() if c != 0]
        items.sort(key=lambda kc: (kc[0][0].key, kc[0][1].key))
        object.__setattr__(self, "terms", tuple(items))

    def __setattr__(self, name, value):
        raise AttributeError("tensors are immutable")

    def __eq__(self, other):
        if not isinstance(other, TensorDistribution):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __add__(self, other):
        if not isinstance(other, TensorDistribution):
            return NotImplemented
        return TensorDistribution(self.terms + other.terms)

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return TensorDistribution((k, c * v) for k, v in self.terms)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1) * other

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self):
        if not self.terms:
            return "TensorDistribution(0)"
        return "TensorDistribution(" + " + ".join(
            f"{c}*{a} (x) {b}" for (a, b), c in self.terms) + ")"


def tensor(a: FormalDistribution, b: FormalDistribution) -> TensorDistribution:
    return TensorDistribution(((g1, g2), c1 * c2) for g1, c1 in a.terms for g2, c2 in b.terms)


# ---------------------------------------------------------------------------
# constructors


def delta(p) -> FormalDistribution:
    return FormalDistribution([(Delta(p), 1)])


def delta_deriv(p, tangents) -> FormalDistribution:
    return FormalDistribution([(_generator(p, tuple(tangents)), 1)])


def codereliction(t) -> FormalDistribution:
    """d-bar(t): the derivative of delta at the zero point along t."""
    return delta_deriv(zero_point(t), [t])


def codereliction_delta(t: Section) -> FormalDistribution:
    if not isinstance(t, Section):
        raise TypeError("codereliction_delta expects a Section")
    return codereliction(t)


def codereliction_jet(t: Section, r: int) -> FormalDistribution:
    """The jet-distributional codereliction: d-bar of the r-jet of t."""
    return codereliction(prolong(t, r))


# ---------------------------------------------------------------------------
# bialgebra structure


def _subsets(items):
    idx = range(len(items))
    for k in range(len(items) + 1):
        for chosen in combinations(idx, k):
            rest = [i for i in idx if i not in chosen]
            yield tuple(items[i] for i in chosen), tuple(items[i] for i in rest)


def comonoid(d: FormalDistribution) -> TensorDistribution:
    """c: delta_s -> delta_s (x) delta_s, extended to derivatives by Leibniz."""
    out = []
    for g, c in d.terms:
        for left, right in _subsets(g.tangents):
            out.append(((_generator(g.point, left), _generator(g.point, right)), c))
    return TensorDistribution(out)


def counit_e(d: FormalDistribution):
    """e: delta_s -> 1, derivatives of delta -> 0."""
    return sum((c for g, c in d.terms if isinstance(g, Delta)), Fraction(0))


def cbar(T: TensorDistribution) -> FormalDistribution:
    """c-bar: delta_s (x) delta_t -> delta_{s+t}; tangent lists concatenate."""
    out = []
    for (g1, g2), c in T.terms:
        out.append((_generator(g1.point + g2.point, g1.tangents + g2.tangents), c))
    return FormalDistribution(out)


def ebar(like) -> FormalDistribution:
    """e-bar: the delta at the zero point of the carrier of ``like``."""
    return delta(zero_point(like))


def set_partitions(items):
    """All set partitions of ``items`` as tuples of blocks."""
    items = tuple(items)
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield ((first,),) + partition
        for i in range(len(partition)):
            yield partition[:i] + ((first,) + partition[i],) + partition[i + 1:]


def mu(d: FormalDistribution) -> FormalDistribution:
    """mu: delta_s -> delta_{delta_s}; derivatives follow Faa di Bruno."""
    if d.depth > 1:
        raise DepthError("comultiplication is only defined on depth-1 distributions")
    out = []
    for g, c in d.terms:
        inner = delta(g.point)
        for blocks in set_partitions(g.tangents):
            tangents = [delta_deriv(g.point, block) for block in blocks]
            out.append((_generator(inner, tangents), c))
    return FormalDistribution(out)


def epsilon(d: FormalDistribution):
    """epsilon: delta_s -> s, d delta_s[t] -> t, higher derivatives -> 0."""
    total = None
    for g, c in d.terms:
        if isinstance(g, Delta):
            piece = g.point
        elif len(g.tangents) == 1:
            piece = g.tangents[0]
        else:
            continue
        piece = piece * c if c != 1 else piece
        total = piece if total is None else total + piece
    if total is None:
        if not d.terms:
            raise ValueError("epsilon of the empty span has no carrier to live in")
        return zero_point(d.terms[0][0].point)
    return total


def deriving(t, d: FormalDistribution) -> FormalDistribution:
    """The deriving transformation: append t to every tangent list."""
    out = []
    for g, c in d.terms:
        if _shape(t) != _shape(g.point):
            raise ContextMismatchError("direction and distribution live on different carriers")
        out.append((_generator(g.point, g.tangents + (t,)), c))
    return FormalDistribution(out)


def pushforward(F, d: FormalDistribution) -> FormalDistribution:
    """!(F) for a linear map F on points: delta_s -> delta_{F s}."""
    from ..diffop import LinDiffOp, apply

    f = (lambda s: apply(F, s)) if isinstance(F, LinDiffOp) else F
    return FormalDistribution(
        (_generator(f(g.point), tuple(f(t) for t in g.tangents)), c) for g, c in d.terms)


def seely_delta(d: FormalDistribution, m1: int) -> TensorDistribution:
    """!(E x E') -> !E (x) !E': delta_(s,s') -> delta_s (x) delta_s'."""
    out = []
    for g, c in d.terms:
        s, s2 = g.point.split(m1)
        parts = [t.split(m1) for t in g.tangents]
        for chosen in range(1 << len(parts)):
            left = tuple(p[0] for i, p in enumerate(parts) if chosen >> i & 1)
            right = tuple(p[1] for i, p in enumerate(parts) if not chosen >> i & 1)
            out.append(((_generator(s, left), _generator(s2, right)), c))
    return TensorDistribution(out)


def _integrable_base(js: JetSection) -> Section:
    s = counit(js)
    if prolong(s, js.context.r) != js:
        raise ValueError("jet point is not the prolongation of a section; "
                         "the distributive law is only implemented on delta_{j(s)}")
    return s


def jet_transpose(d: FormalDistribution) -> FormalDistribution:
    """delta_{j(s)} -> delta_s, the distributive law on section-generated deltas."""
    out = []
    for g, c in d.terms:
        if not isinstance(g.point, JetSection):
            raise TypeError("jet_transpose expects distributions over jet sections")
        out.append((_generator(_integrable_base(g.point),
                               tuple(_integrable_base(t) for t in g.tangents)), c))
    return FormalDistribution(out)


def epsilon_jdelta(d: FormalDistribution) -> Section:
    """Counit of the composite comonad: epsilon^j after epsilon^delta."""
    return counit(epsilon(d))
