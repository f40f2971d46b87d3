"""
Symbolic expressions over base coordinates, jet coordinates and parameters.

Every other module speaks in terms of :class:`Expr`.  Nodes are immutable and
hashable; the smart constructors :func:`add`, :func:`mul`, :func:`power`,
:func:`apply` and :func:`neg` always return canonical trees, so structural
equality of canonical expressions is meaningful.  Raw node classes may be
instantiated directly; :func:`canon` brings such a tree into canonical form.

Canonical form:

* sums and products are flattened, constants folded, like terms
  (same monomial) and like factors (same base) are merged;
* a numeric coefficient multiplying a single sum is distributed over it;
* integer powers distribute over products and collapse nested powers;
* children of sums and products are sorted by :func:`sort_key`.

Constants are exact :class:`fractions.Fraction` values unless a float was
supplied explicitly.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DomainError,
    InconclusiveError,
    UnboundVariableError,
    UnsupportedFunctionError,
)

__all__ = [
    "Expr", "Const", "Parameter", "BaseVar", "JetVar", "Sum", "Product",
    "Power", "Apply", "Negate", "MultiIndex",
    "const", "add", "mul", "power", "apply", "neg", "sub", "div", "canon",
    "differentiate", "evaluate", "evaluate_array", "equivalent",
    "substitute", "free_variables", "jet_variables", "base_variables",
    "parameters", "max_order", "is_polynomial", "is_zero", "sort_key",
    "ZERO", "ONE", "FUNCTIONS",
]

MultiIndex = tuple  # tuple[int, ...] of per-axis exponents

# Names of the smooth bump family: "bump" and its derivatives "bump1", "bump2", ...
_BUMP = "bump"


def _bump_order(name):
    if name == _BUMP:
        return 0
    if name.startswith(_BUMP) and name[len(_BUMP):].isdigit():
        return int(name[len(_BUMP):])
    return None


def _is_function(name):
    return name in FUNCTIONS or _bump_order(name) is not None


def _as_number(value):
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, Number):
        return float(value)
    raise TypeError(f"not a number: {value!r}")


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ("_hash", "_key")

    def _fields(self):
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        return hash(self) == hash(other) and self._fields() == other._fields()

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__,) + self._fields())
            object.__setattr__(self, "_hash", h)
            return h

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    def __repr__(self):
        from .grammar import to_text

        return f"Expr({to_text(self)!r})"

    def __str__(self):
        from .grammar import to_text

        return to_text(self)

    # arithmetic sugar; results are canonical
    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        return power(self, n)


def _init(obj, **fields):
    for name, value in fields.items():
        object.__setattr__(obj, name, value)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        _init(self, value=_as_number(value))

    def _fields(self):
        return (self.value, isinstance(self.value, float))


class Parameter(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        _init(self, name=name)

    def _fields(self):
        return (self.name,)


class BaseVar(Expr):
    """Base coordinate x_{index+1}; indices are zero-based."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise ValueError("base variable index must be non-negative")
        _init(self, index=index)

    def _fields(self):
        return (self.index,)


class JetVar(Expr):
    """Jet coordinate u^k_I: fiber index k (zero-based), multi-index I."""

    __slots__ = ("fiber", "index")

    def __init__(self, fiber: int, index: Iterable[int]):
        index = tuple(int(e) for e in index)
        if fiber < 0 or any(e < 0 for e in index):
            raise ValueError("jet variable indices must be non-negative")
        _init(self, fiber=fiber, index=index)

    @property
    def order(self):
        return sum(self.index)

    def _fields(self):
        return (self.fiber, self.index)


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        _init(self, terms=tuple(terms))

    def _fields(self):
        return self.terms


class Product(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        _init(self, factors=tuple(factors))

    def _fields(self):
        return self.factors


class Power(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        if not isinstance(exponent, int):
            raise TypeError("exponent must be an integer")
        _init(self, base=base, exponent=exponent)

    def _fields(self):
        return (self.base, self.exponent)


class Apply(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if not _is_function(name):
            raise UnsupportedFunctionError(f"unknown function {name!r}")
        _init(self, name=name, arg=arg)

    def _fields(self):
        return (self.name, self.arg)


class Negate(Expr):
    """Raw negation node; canonical form replaces it by a -1 coefficient."""

    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        _init(self, arg=arg)

    def _fields(self):
        return (self.arg,)


ZERO = Const(0)
ONE = Const(1)


def _lift(value):
    if isinstance(value, Expr):
        return value
    return Const(value)


def const(value) -> Const:
    return Const(value)


_RANK = {Const: 0, Parameter: 1, BaseVar: 2, JetVar: 3, Power: 4, Apply: 5,
         Product: 6, Sum: 7, Negate: 8}


def sort_key(e: Expr):
    """Total order on nodes used to sort children of sums and products."""
    try:
        return e._key
    except AttributeError:
        pass
    t = type(e)
    if t is Const:
        key = (0, e.value, isinstance(e.value, float))
    elif t is Parameter:
        key = (1, e.name)
    elif t is BaseVar:
        key = (2, e.index)
    elif t is JetVar:
        key = (3, e.fiber, e.order, tuple(-i for i in e.index))
    elif t is Power:
        key = (4, sort_key(e.base), e.exponent)
    elif t is Apply:
        key = (5, e.name, sort_key(e.arg))
    elif t is Product:
        key = (6, tuple(sort_key(f) for f in e.factors))
    elif t is Sum:
        key = (7, tuple(sort_key(f) for f in e.terms))
    else:
        key = (8, sort_key(e.arg))
    object.__setattr__(e, "_key", key)
    return key


# ---------------------------------------------------------------------------
# canonical constructors


def _split_coefficient(term):
    if type(term) is Product and type(term.factors[0]) is Const:
        rest = term.factors[1:]
        return term.factors[0].value, rest[0] if len(rest) == 1 else Product(rest)
    return Fraction(1), term


def _scaled(mono, c):
    if c == 1:
        return mono
    if type(mono) is Product:
        return Product((Const(c),) + mono.factors)
    return Product((Const(c), mono))


def add(*terms: Expr) -> Expr:
    constant = Fraction(0)
    coefficients = {}
    stack = list(terms)
    stack.reverse()
    while stack:
        t = _lift(stack.pop())
        if type(t) is Sum:
            stack.extend(reversed(t.terms))
        elif type(t) is Const:
            constant = constant + t.value
        else:
            c, mono = _split_coefficient(t)
            coefficients[mono] = coefficients.get(mono, 0) + c
    out = [_scaled(m, c) for m, c in coefficients.items() if c != 0]
    out.sort(key=sort_key)
    if constant != 0:
        out.insert(0, Const(constant))
    if not out:
        return Const(constant) if isinstance(constant, float) else ZERO
    if len(out) == 1:
        return out[0]
    return Sum(out)


def mul(*factors: Expr) -> Expr:
    coefficient = Fraction(1)
    exponents = {}
    stack = list(factors)
    stack.reverse()
    while stack:
        f = _lift(stack.pop())
        t = type(f)
        if t is Product:
            stack.extend(reversed(f.factors))
        elif t is Const:
            coefficient = coefficient * f.value
        elif t is Power:
            exponents[f.base] = exponents.get(f.base, 0) + f.exponent
        else:
            exponents[f] = exponents.get(f, 0) + 1
    if coefficient == 0:
        return Const(coefficient) if isinstance(coefficient, float) else ZERO
    out = [b if n == 1 else Power(b, n) for b, n in exponents.items() if n != 0]
    if not out:
        return Const(coefficient)
    out.sort(key=sort_key)
    if len(out) == 1:
        if coefficient == 1:
            return out[0]
        if type(out[0]) is Sum:
            return add(*(mul(Const(coefficient), t) for t in out[0].terms))
    elif coefficient == 1:
        return Product(out)
    return Product([Const(coefficient)] + out)


def power(base: Expr, n: int) -> Expr:
    base = _lift(base)
    if not isinstance(n, int):
        raise TypeError("exponent must be an integer")
    if n == 0:
        return ONE
    if n == 1:
        return base
    t = type(base)
    if t is Const:
        if base.value == 0 and n < 0:
            raise DomainError("zero raised to a negative power")
        return Const(base.value ** n)
    if t is Power:
        return power(base.base, base.exponent * n)
    if t is Product:
        return mul(*(power(f, n) for f in base.factors))
    return Power(base, n)


_EXACT_VALUES = {
    ("sin", Fraction(0)): Fraction(0),
    ("cos", Fraction(0)): Fraction(1),
    ("exp", Fraction(0)): Fraction(1),
    ("log", Fraction(1)): Fraction(0),
    ("sqrt", Fraction(0)): Fraction(0),
    ("sqrt", Fraction(1)): Fraction(1),
}


def apply(name: str, arg: Expr) -> Expr:
    arg = _lift(arg)
    if not _is_function(name):
        raise UnsupportedFunctionError(f"unknown function {name!r}")
    if type(arg) is Const:
        exact = _EXACT_VALUES.get((name, arg.value)) if isinstance(arg.value, Fraction) else None
        if exact is not None:
            return Const(exact)
        if isinstance(arg.value, float):
            return Const(_call_scalar(name, arg.value))
    return Apply(name, arg)


def neg(e: Expr) -> Expr:
    return mul(Const(-1), e)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(_lift(b)))


def div(a: Expr, b: Expr) -> Expr:
    return mul(a, power(_lift(b), -1))


@lru_cache(maxsize=1 << 16)
def canon(e: Expr) -> Expr:
    """Canonical form of an arbitrary (possibly raw) expression tree."""
    t = type(e)
    if t in (Const, Parameter, BaseVar, JetVar):
        return e
    if t is Sum:
        return add(*(canon(x) for x in e.terms))
    if t is Product:
        return mul(*(canon(x) for x in e.factors))
    if t is Power:
        return power(canon(e.base), e.exponent)
    if t is Apply:
        return apply(e.name, canon(e.arg))
    if t is Negate:
        return neg(canon(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def is_zero(e: Expr) -> bool:
    """True iff the canonical form is the constant 0."""
    e = canon(e)
    return type(e) is Const and e.value == 0


# ---------------------------------------------------------------------------
# differentiation


def _point_derivative(name, arg):
    """d/dy name(y) evaluated at y = arg."""
    if name == "sin":
        return apply("cos", arg)
    if name == "cos":
        return neg(apply("sin", arg))
    if name == "exp":
        return apply("exp", arg)
    if name == "log":
        return power(arg, -1)
    if name == "sqrt":
        return mul(Const(Fraction(1, 2)), power(apply("sqrt", arg), -1))
    k = _bump_order(name)
    if k is not None:
        return apply(f"{_BUMP}{k + 1}", arg)
    raise UnsupportedFunctionError(f"no derivative rule for {name!r}")


@lru_cache(maxsize=1 << 16)
def _diff(e: Expr, v: Expr) -> Expr:
    t = type(e)
    if t is Const:
        return ZERO
    if t is BaseVar or t is JetVar or t is Parameter:
        return ONE if e == v else ZERO
    if t is Sum:
        return add(*(_diff(x, v) for x in e.terms))
    if t is Product:
        fs = e.factors
        parts = []
        for i, f in enumerate(fs):
            d = _diff(f, v)
            if not is_zero(d):
                parts.append(mul(*fs[:i], d, *fs[i + 1:]))
        return add(*parts)
    if t is Power:
        d = _diff(e.base, v)
        if is_zero(d):
            return ZERO
        return mul(Const(e.exponent), power(e.base, e.exponent - 1), d)
    if t is Apply:
        d = _diff(e.arg, v)
        if is_zero(d):
            return ZERO
        return mul(_point_derivative(e.name, e.arg), d)
    if t is Negate:
        return neg(_diff(e.arg, v))
    raise TypeError(f"not an expression: {e!r}")


def differentiate(e: Expr, v: Expr) -> Expr:
    """Partial derivative of ``e`` with respect to a coordinate ``v``.

    ``v`` must be a :class:`BaseVar`, :class:`JetVar` or :class:`Parameter`;
    distinct jet variables are independent coordinates.
    """
    if type(v) not in (BaseVar, JetVar, Parameter):
        raise TypeError("can only differentiate with respect to a coordinate")
    if type(e) is Apply and not _is_function(e.name):  # pragma: no cover
        raise UnsupportedFunctionError(e.name)
    return _diff(canon(e), v)


# ---------------------------------------------------------------------------
# traversal helpers


@lru_cache(maxsize=1 << 14)
def free_variables(e: Expr) -> frozenset:
    """All BaseVar, JetVar and Parameter leaves of ``e``."""
    t = type(e)
    if t in (Parameter, BaseVar, JetVar):
        return frozenset((e,))
    if t is Const:
        return frozenset()
    if t is Sum:
        children = e.terms
    elif t is Product:
        children = e.factors
    elif t is Power:
        children = (e.base,)
    else:
        children = (e.arg,)
    out = frozenset()
    for c in children:
        out = out | free_variables(c)
    return out


def jet_variables(e: Expr) -> list:
    return sorted((v for v in free_variables(e) if type(v) is JetVar), key=sort_key)


def base_variables(e: Expr) -> list:
    return sorted((v for v in free_variables(e) if type(v) is BaseVar), key=sort_key)


def parameters(e: Expr) -> list:
    return sorted((v for v in free_variables(e) if type(v) is Parameter), key=sort_key)


def max_order(e: Expr) -> int:
    """Highest jet order appearing in ``e`` (-1 if there are no jet variables)."""
    return max((v.order for v in jet_variables(e)), default=-1)


def is_polynomial(e: Expr) -> bool:
    """No elementary functions and no negative powers."""
    t = type(e)
    if t in (Const, Parameter, BaseVar, JetVar):
        return True
    if t is Sum:
        return all(is_polynomial(x) for x in e.terms)
    if t is Product:
        return all(is_polynomial(x) for x in e.factors)
    if t is Power:
        return e.exponent >= 0 and is_polynomial(e.base)
    if t is Negate:
        return is_polynomial(e.arg)
    return False


def _normalize_mapping(mapping):
    out = {}
    for key, value in mapping.items():
        if isinstance(key, str):
            from .grammar import parse_variable

            key = parse_variable(key)
        out[key] = value
    return out


def substitute(e: Expr, mapping: Mapping) -> Expr:
    """Simultaneous substitution of leaves; keys are nodes or names."""
    mapping = {k: _lift(v) for k, v in _normalize_mapping(mapping).items()}
    if not mapping:
        return canon(e)
    cache = {}

    def go(x):
        if x in cache:
            return cache[x]
        t = type(x)
        if t in (Parameter, BaseVar, JetVar):
            r = mapping.get(x, x)
        elif t is Const:
            r = x
        elif t is Sum:
            r = add(*(go(y) for y in x.terms))
        elif t is Product:
            r = mul(*(go(y) for y in x.factors))
        elif t is Power:
            r = power(go(x.base), x.exponent)
        elif t is Apply:
            r = apply(x.name, go(x.arg))
        else:
            r = neg(go(x.arg))
        cache[x] = r
        return r

    return go(e)


# ---------------------------------------------------------------------------
# evaluation

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


def _bump_polynomials(k):
    """P_0..P_k with bump^(j)(y) = P_j(y) / (1 - y^2)^(2j) * bump(y)."""
    P = np.polynomial.Polynomial
    w = P([1, 0, -1])
    y = P([0, 1])
    polys = [P([1])]
    for j in range(k):
        p = polys[-1]
        polys.append((p.deriv() * w + 4 * j * y * p) * w - 2 * y * p)
    return polys


_BUMP_CACHE = {}


def _bump_poly(k):
    if k not in _BUMP_CACHE:
        for j, p in enumerate(_bump_polynomials(k)):
            _BUMP_CACHE[j] = p
    return _BUMP_CACHE[k]


def _bump_values(k, y):
    y = np.asarray(y, dtype=float)
    w = 1.0 - y * y
    inside = w > 0
    safe_w = np.where(inside, w, 1.0)
    g = np.where(inside, -1.0 / safe_w, -np.inf)
    out = np.zeros_like(y)
    ok = inside & (g > -700.0)
    if np.any(ok):
        wk = safe_w[ok]
        out[ok] = _bump_poly(k)(y[ok]) / wk ** (2 * k) * np.exp(g[ok])
    return out


def _call_scalar(name, x):
    x = float(x)
    try:
        if name == "sin":
            return math.sin(x)
        if name == "cos":
            return math.cos(x)
        if name == "exp":
            return math.exp(x)
        if name == "log":
            if x <= 0:
                raise DomainError(f"log of non-positive argument {x!r}")
            return math.log(x)
        if name == "sqrt":
            if x < 0:
                raise DomainError(f"sqrt of negative argument {x!r}")
            return math.sqrt(x)
    except OverflowError as exc:
        raise DomainError(f"{name}({x!r}) overflows") from exc
    k = _bump_order(name)
    if k is not None:
        return float(_bump_values(k, np.array([x]))[0])
    raise UnsupportedFunctionError(f"unknown function {name!r}")


def evaluate(e: Expr, assignment: Mapping | None = None) -> float:
    """Numeric value of ``e``; exact rational subterms are computed exactly.

    ``assignment`` maps variable nodes (or their text names, or parameter
    names) to numbers.
    """
    env = {k: _as_number(v) for k, v in _normalize_mapping(assignment or {}).items()}
    cache = {}

    def go(x):
        try:
            return cache[x]
        except KeyError:
            pass
        t = type(x)
        if t is Const:
            r = x.value
        elif t in (Parameter, BaseVar, JetVar):
            if x not in env:
                raise UnboundVariableError(f"no value for {x}")
            r = env[x]
        elif t is Sum:
            r = Fraction(0)
            for y in x.terms:
                r = r + go(y)
        elif t is Product:
            r = Fraction(1)
            for y in x.factors:
                r = r * go(y)
        elif t is Power:
            b = go(x.base)
            if b == 0 and x.exponent < 0:
                raise DomainError("division by zero")
            try:
                r = b ** x.exponent
            except OverflowError as exc:
                raise DomainError("power overflows") from exc
        elif t is Apply:
            r = _call_scalar(x.name, go(x.arg))
        elif t is Negate:
            r = -go(x.arg)
        else:
            raise TypeError(f"not an expression: {x!r}")
        cache[x] = r
        return r

    return float(go(e))


def evaluate_array(e: Expr, env: Mapping, shape=None) -> np.ndarray:
    """Vectorised float evaluation; ``env`` maps variables to arrays or numbers."""
    env = {k: v for k, v in _normalize_mapping(env).items()}
    if shape is None:
        shape = np.broadcast_shapes(*(np.shape(v) for v in env.values())) if env else ()
    cache = {}

    def go(x):
        try:
            return cache[x]
        except KeyError:
            pass
        t = type(x)
        if t is Const:
            r = float(x.value)
        elif t in (Parameter, BaseVar, JetVar):
            if x not in env:
                raise UnboundVariableError(f"no value for {x}")
            r = np.asarray(env[x], dtype=float)
        elif t is Sum:
            r = 0.0
            for y in x.terms:
                r = r + go(y)
        elif t is Product:
            r = 1.0
            for y in x.factors:
                r = r * go(y)
        elif t is Power:
            b = go(x.base)
            if x.exponent < 0 and np.any(np.asarray(b) == 0):
                raise DomainError("division by zero")
            r = np.power(b, float(x.exponent)) if x.exponent < 0 else b ** x.exponent
        elif t is Apply:
            a = go(x.arg)
            name = x.name
            if name == "log":
                if np.any(np.asarray(a) <= 0):
                    raise DomainError("log of non-positive argument")
                r = np.log(a)
            elif name == "sqrt":
                if np.any(np.asarray(a) < 0):
                    raise DomainError("sqrt of negative argument")
                r = np.sqrt(a)
            elif name in ("sin", "cos", "exp"):
                with np.errstate(over="raise"):
                    try:
                        r = getattr(np, name)(a)
                    except FloatingPointError as exc:
                        raise DomainError(f"{name} overflows") from exc
            else:
                r = _bump_values(_bump_order(name), a)
        elif t is Negate:
            r = -go(x.arg)
        else:
            raise TypeError(f"not an expression: {x!r}")
        cache[x] = r
        return r

    return np.broadcast_to(np.asarray(go(e), dtype=float), shape).copy()


DEFAULT_TRIALS = 16
DEFAULT_TOL = 1e-9
DEFAULT_SEED = 0


def equivalent(a: Expr, b: Expr, trials: int = DEFAULT_TRIALS, tol: float = DEFAULT_TOL,
               box=(-1.0, 1.0), seed: int | None = None, max_rejections: int | None = None) -> bool:
    """Probabilistic equality: canonical match, else agreement at random points.

    Points violating a function's domain are resampled; if more than
    ``max_rejections`` (default ``20 * trials``) are rejected the test is
    inconclusive.
    """
    a, b = canon(_lift(a)), canon(_lift(b))
    if a == b:
        return True
    variables = sorted(free_variables(a) | free_variables(b), key=sort_key)
    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
    lo, hi = box
    cap = 20 * trials if max_rejections is None else max_rejections
    rejected = done = 0
    while done < trials:
        point = dict(zip(variables, rng.uniform(lo, hi, size=len(variables)).tolist()))
        try:
            va = evaluate(a, point)
            vb = evaluate(b, point)
        except DomainError:
            rejected += 1
            if rejected > cap:
                raise InconclusiveError(
                    f"{rejected} sample points fell outside the domain") from None
            continue
        if not (math.isfinite(va) and math.isfinite(vb)):
            rejected += 1
            if rejected > cap:
                raise InconclusiveError("non-finite values at every sample point")
            continue
        if abs(va - vb) > tol * (1 + abs(va) + abs(vb)):
            return False
        done += 1
    return True
