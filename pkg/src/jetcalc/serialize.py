"""
JSON forms of contexts, sections, jet sections, operators, equations and
Lagrangians.  Fiber, row and column indices are 0-based; expressions are
stored as text in the shared grammar.
"""

from __future__ import annotations

import json
import math
import re

from .diffop import LinDiffOp
from .errors import ParseError
from .expr import JetVar, free_variables, max_order
from .functional.functionals import Lagrangian
from .grammar import parse, to_text
from .jet import JetContext, JetSection, Section
from .lpde import LPDE

__all__ = [
    "SIGNIFICANT_DIGITS", "round_floats", "dumps",
    "context_to_json", "context_from_json", "section_to_json", "section_from_json",
    "jet_section_to_json", "jet_section_from_json", "operator_to_json", "operator_from_json",
    "equation_to_json", "equation_from_json", "lagrangian_to_json", "lagrangian_from_json",
    "load_json",
]

SIGNIFICANT_DIGITS = 12


def round_floats(obj):
    """Round every float to 12 significant digits; non-finite values become strings."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(f"{obj:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    return json.dumps(round_floats(obj), indent=indent, sort_keys=False, allow_nan=False)


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", "", 0) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", text, exc.pos) from None


def _require(data, key, kind):
    if not isinstance(data, dict) or key not in data:
        raise ParseError(f"{kind} JSON needs the field {key!r}", json.dumps(data), 0)
    return data[key]


def _int(value, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{name} must be an integer, got {value!r}", str(value), 0)
    return value


def _chart(data, n):
    chart = data.get("chart") if isinstance(data, dict) else None
    return None if chart is None else tuple((float(lo), float(hi)) for lo, hi in chart)


# contexts and sections ------------------------------------------------------


def context_to_json(ctx: JetContext) -> dict:
    return {"n": ctx.n, "m": ctx.m, "r": ctx.r, "chart": [list(b) for b in ctx.chart]}


def context_from_json(data) -> JetContext:
    n = _int(_require(data, "n", "context"), "n")
    return JetContext(n, _int(_require(data, "m", "context"), "m"),
                      _int(_require(data, "r", "context"), "r"), _chart(data, n))


def section_to_json(s: Section) -> dict:
    return {"n": s.n, "m": s.m, "chart": [list(b) for b in s.chart],
            "components": [to_text(c) for c in s.components]}


def section_from_json(data) -> Section:
    n = _int(_require(data, "n", "section"), "n")
    comps = _require(data, "components", "section")
    return Section(tuple(parse(c, n) for c in comps), n, _chart(data, n))


def jet_section_to_json(js: JetSection) -> dict:
    return {"context": context_to_json(js.context),
            "assignment": [{"k": v.fiber, "exponents": list(v.index), "expr": to_text(e)}
                           for v, e in js.items()]}


def jet_section_from_json(data) -> JetSection:
    ctx = context_from_json(_require(data, "context", "jet section"))
    table = {}
    for entry in _require(data, "assignment", "jet section"):
        v = JetVar(_int(entry["k"], "k"), tuple(entry["exponents"]))
        table[v] = parse(entry["expr"], ctx.n)
    missing = [v for v in ctx.jet_variables if v not in table]
    if missing or len(table) != ctx.dimension:
        raise ParseError("the assignment must list every jet coordinate exactly once",
                         json.dumps(data), 0)
    return JetSection.from_assignment(ctx, table)


# operators ------------------------------------------------------------------


def operator_to_json(op: LinDiffOp) -> dict:
    return {"n": op.n, "m": op.m, "m'": op.m_out, "order": op.order,
            "entries": [{"row": row, "col": col, "exponents": list(alpha),
                         "coeff": to_text(value)}
                        for (row, col, alpha), value in op.coefficients]}


def operator_from_json(data) -> LinDiffOp:
    entries = _require(data, "entries", "operator")
    m = _int(_require(data, "m", "operator"), "m")
    m_out = _int(data.get("m'", data.get("m_out", m)), "m'")
    n = data.get("n")
    if n is None:
        lengths = {len(e["exponents"]) for e in entries}
        if len(lengths) != 1:
            raise ParseError("cannot infer n from the operator entries", json.dumps(data), 0)
        n = lengths.pop()
    n = _int(n, "n")
    coefficients = []
    for e in entries:
        coeff = e["coeff"]
        coeff = parse(coeff, n) if isinstance(coeff, str) else coeff
        coefficients.append(((_int(e["row"], "row"), _int(e["col"], "col"),
                              tuple(e["exponents"])), coeff))
    try:
        op = LinDiffOp(n, m, m_out, coefficients)
    except ValueError as exc:
        raise ParseError(str(exc), json.dumps(data), 0) from None
    declared = data.get("order")
    if declared is not None and _int(declared, "order") < op.order:
        raise ParseError(f"declared order {declared} is below the entries' order {op.order}",
                         json.dumps(data), 0)
    return op


# equations ------------------------------------------------------------------

_FIBER = re.compile(r"(?<![A-Za-z0-9_])u([1-9]\d*)")


def _infer_rank(texts):
    return max((int(k) for t in texts for k in _FIBER.findall(t)), default=1)


def _infer_base(texts):
    from .grammar import _infer_dimension

    return max((_infer_dimension(t) for t in texts), default=1)


def equation_to_json(eq: LPDE) -> dict:
    out = {"n": eq.context.n, "m": eq.context.m, "order": eq.order,
           "components": [to_text(c) for c in eq.components]}
    if eq.inhomogeneity is not None:
        out["inhomogeneity"] = [to_text(g) for g in eq.inhomogeneity]
    return out


def equation_from_json(data) -> LPDE:
    comps = _require(data, "components", "equation")
    if not isinstance(comps, list) or not all(isinstance(c, str) for c in comps):
        raise ParseError("equation components must be a list of expressions", json.dumps(data), 0)
    inhom = data.get("inhomogeneity")
    texts = comps + list(inhom or [])
    n = _int(data.get("n", _infer_base(texts)), "n")
    m = _int(data.get("m", _infer_rank(comps)), "m")
    exprs = [parse(c, n) for c in comps]
    for e in exprs:
        for v in free_variables(e):
            if type(v) is JetVar and v.fiber >= m:
                raise ParseError(f"u{v.fiber + 1} exceeds the rank m={m}", json.dumps(data), 0)
    g = None if inhom is None else [parse(t, n) for t in inhom]
    actual = max([0] + [max_order(e) for e in exprs])
    declared = data.get("order")
    if declared is not None and _int(declared, "order") < actual:
        raise ParseError(f"declared order {declared} is below the components' order {actual}",
                         json.dumps(data), 0)
    return LPDE(exprs, n, m, g)


# Lagrangians ----------------------------------------------------------------


def lagrangian_to_json(L: Lagrangian) -> dict:
    return {"n": L.n, "m": L.m, "density": to_text(L.density), "weight": to_text(L.weight)}


def lagrangian_from_json(data) -> Lagrangian:
    n = _int(_require(data, "n", "Lagrangian"), "n")
    return Lagrangian.parse(_require(data, "density", "Lagrangian"), n,
                            _int(data.get("m", 1), "m"), data.get("weight"))
