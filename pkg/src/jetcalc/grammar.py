"""
Text form of expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | name | func '(' expr ')' | '(' expr ')'

Names: ``x1..xn`` are base coordinates, ``u1..um`` fiber coordinates and
``u2_x1x1x2`` the jet coordinate of u^2 with multi-index (2, 1).  Functions
are ``sin cos exp log sqrt`` plus the smooth bump family ``bump``,
``bump1``, ``bump2``, ... (the latter are derivatives of ``bump``).
Any other identifier is a parameter.  Decimal literals are read as exact
rationals.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError
from .expr import (
    Apply, BaseVar, Const, Expr, JetVar, Parameter, Power, Product, Sum,
    Negate, _is_function, add, apply, canon, div, mul, neg, power, sub,
)

__all__ = ["parse", "to_text", "parse_variable", "variable_text"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)
_BASE = re.compile(r"x([1-9]\d*)\Z")
_JET = re.compile(r"u([1-9]\d*)(?:_((?:x[1-9]\d*)+))?\Z")
_JET_AXES = re.compile(r"x([1-9]\d*)")


def _tokenize(text):
    pos = 0
    tokens = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _name_to_node(name, n, text, pos):
    m = _BASE.match(name)
    if m:
        i = int(m.group(1)) - 1
        if n is not None and i >= n:
            raise ParseError(f"{name} exceeds base dimension {n}", text, pos)
        return BaseVar(i)
    m = _JET.match(name)
    if m:
        k = int(m.group(1)) - 1
        axes = [int(a) - 1 for a in _JET_AXES.findall(m.group(2) or "")]
        dim = n if n is not None else max(axes, default=-1) + 1
        if axes and max(axes) >= dim:
            raise ParseError(f"{name} exceeds base dimension {dim}", text, pos)
        index = [0] * max(dim, 1)
        for a in axes:
            index[a] += 1
        return ("jet", k, tuple(index))
    if re.match(r"[xu]\d", name):
        raise ParseError(f"malformed coordinate name {name!r}", text, pos)
    if _is_function(name):
        raise ParseError(f"function {name!r} needs an argument", text, pos)
    return Parameter(name)


class _Parser:
    def __init__(self, text, n):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0
        self.jets = []

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}",
                             self.text, tok[2])
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = ("+", node, rhs) if op == "+" else ("-", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = (op, node, rhs)
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return ("neg", self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            tok = self.take()
            exponent = self.unary()
            return ("^", base, exponent, tok[2])
        return base

    def atom(self):
        kind, value, pos = self.take()
        if kind == "num":
            return Const(Fraction(value))
        if kind == "name":
            if _is_function(value) and self.peek()[1] == "(":
                self.take()
                arg = self.expr()
                self.expect(")")
                return ("call", value, arg)
            node = _name_to_node(value, self.n, self.text, pos)
            if isinstance(node, tuple):
                self.jets.append(node)
            return node
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {value or 'end of input'!r}", self.text, pos)


def _infer_dimension(text):
    axes = [int(a) for a in re.findall(r"(?<![A-Za-z0-9_])x([1-9]\d*)", text)]
    axes += [int(a) for a in re.findall(r"x([1-9]\d*)", " ".join(re.findall(r"u\d+_\w+", text)))]
    return max(axes, default=1)


def parse(text: str, n: int | None = None) -> Expr:
    """Parse ``text`` into a canonical expression over base dimension ``n``.

    When ``n`` is omitted it is inferred as the largest base axis mentioned.
    """
    if n is None:
        n = _infer_dimension(text)
    p = _Parser(text, n)
    tree = p.expr()
    end = p.peek()
    if end[0] != "end":
        raise ParseError(f"unexpected {end[1]!r}", text, end[2])

    def build(node):
        if isinstance(node, Expr):
            return node
        tag = node[0]
        if tag == "jet":
            return JetVar(node[1], node[2])
        if tag == "+":
            return add(build(node[1]), build(node[2]))
        if tag == "-":
            return sub(build(node[1]), build(node[2]))
        if tag == "*":
            return mul(build(node[1]), build(node[2]))
        if tag == "/":
            try:
                return div(build(node[1]), build(node[2]))
            except ArithmeticError as exc:
                raise ParseError(str(exc), text, 0) from None
        if tag == "neg":
            return neg(build(node[1]))
        if tag == "call":
            return apply(node[1], build(node[2]))
        if tag == "^":
            exponent = build(node[2])
            if not (type(exponent) is Const and isinstance(exponent.value, Fraction)
                    and exponent.value.denominator == 1):
                raise ParseError("exponents must be integer constants", text, node[3])
            try:
                return power(build(node[1]), int(exponent.value))
            except ArithmeticError as exc:
                raise ParseError(str(exc), text, node[3]) from None
        raise AssertionError(tag)

    return build(tree)


def parse_variable(text: str, n: int | None = None) -> Expr:
    """A single coordinate or parameter name, e.g. ``"u1_x1"``."""
    node = parse(text.strip(), n)
    if type(node) not in (BaseVar, JetVar, Parameter):
        raise ParseError(f"{text!r} is not a variable name", text, 0)
    return node


# ---------------------------------------------------------------------------
# printing


def variable_text(v: Expr) -> str:
    if type(v) is BaseVar:
        return f"x{v.index + 1}"
    if type(v) is JetVar:
        axes = "".join(f"x{i + 1}" * e for i, e in enumerate(v.index))
        return f"u{v.fiber + 1}" + (f"_{axes}" if axes else "")
    if type(v) is Parameter:
        return v.name
    raise TypeError(v)


def _number_text(value):
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def _is_negative(e):
    if type(e) is Const:
        return e.value < 0
    if type(e) is Product and type(e.factors[0]) is Const:
        return e.factors[0].value < 0
    return False


_PREC = {Sum: 1, Product: 2, Negate: 2, Power: 3}


def _prec(e):
    if type(e) is Const and (e.value < 0 or (isinstance(e.value, Fraction) and e.value.denominator != 1)):
        return 2
    return _PREC.get(type(e), 4)


def _wrap(e, minimum):
    s = to_text(e)
    return f"({s})" if _prec(e) < minimum else s


def to_text(e: Expr) -> str:
    """Render ``e`` in the grammar accepted by :func:`parse`."""
    t = type(e)
    if t is Const:
        return _number_text(e.value)
    if t in (BaseVar, JetVar, Parameter):
        return variable_text(e)
    if t is Sum:
        parts = []
        for i, term in enumerate(e.terms):
            if i and _is_negative(term):
                parts.append(" - " + _wrap(neg(term), 2))
            elif i:
                parts.append(" + " + _wrap(term, 2))
            else:
                parts.append(to_text(term))
        return "".join(parts)
    if t is Product:
        factors = list(e.factors)
        prefix = ""
        if type(factors[0]) is Const:
            c = factors.pop(0).value
            if c == -1:
                prefix = "-"
            else:
                prefix = _number_text(c) + "*"
        return prefix + "*".join(_wrap(f, 3) for f in factors)
    if t is Power:
        exp = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"{_wrap(e.base, 4)}^{exp}"
    if t is Apply:
        return f"{e.name}({to_text(e.arg)})"
    if t is Negate:
        return "-" + _wrap(e.arg, 3)
    raise TypeError(e)
