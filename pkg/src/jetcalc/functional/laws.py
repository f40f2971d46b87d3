"""
Codereliction rules, the composite-comonad identities and the Seely
factorisation for distributions, each checked by pairing against functionals.
"""

from __future__ import annotations

from ..diffop import apply
from ..expr import ONE, BaseVar, JetVar, add, mul
from ..jet import Section, prolong
from ..laws import LawReport
from ..numeric import fd_gateaux
from .distribution import (
    cbar, codereliction, comonoid, counit_e, delta, delta_deriv, deriving, ebar, epsilon,
    epsilon_jdelta, jet_transpose, mu, pushforward, seely_delta, tensor,
)
from .functionals import (
    Composite, ConstantFunctional, Lagrangian, Lifted, LocalFunctional, ProductFunctional,
    gateaux, pair,
)

__all__ = ["codereliction_laws", "composite_comonad_check", "seely_delta_check",
           "chain_rule_sides", "naturality_check"]


def _relative(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 1e-12 else abs(a - b)


def chain_rule_sides(s, t):
    """Both composites of the chain rule applied to s (x) delta_t.

    Left: mu . c-bar . (d-bar (x) id).  Right: c-bar . (d-bar (x) mu) .
    (c-bar (x) id) . (d-bar (x) c), with c(delta_t) = delta_t (x) delta_t.
    """
    left = mu(cbar(tensor(codereliction(s), delta(t))))
    first = cbar(tensor(codereliction(s), delta(t)))
    right = cbar(tensor(codereliction(first), mu(delta(t))))
    return left, right


def _carrier(points, r, jet):
    return [prolong(p, r) for p in points] if jet else list(points)


def codereliction_laws(sections, functionals, jet: bool = False, outer: str = "y^2",
                       tol: float = 1e-8, chain_tol: float = 1e-4) -> LawReport:
    """Constant, linear, product and chain rules for d-bar over a panel.

    With ``jet=True`` the carrier is jet sections (the jet-distributional
    codereliction) and the functionals are read on jets.
    """
    report = LawReport("codereliction-jet" if jet else "codereliction-delta")
    r = max(F.order for F in functionals)
    grid = functionals[0].grid
    panel = [F.jet_form() for F in functionals] if jet else list(functionals)
    directions = _carrier(sections, r, jet)
    linear = [LocalFunctional(Lagrangian(_linear_density(F), F.lagrangian.n, F.lagrangian.m), grid)
              for F in functionals]
    linear = [L.jet_form() for L in linear] if jet else linear
    constant = ConstantFunctional(1.7)

    const_rule = report.law("constant", tol)
    linear_rule = report.law("linear", tol)
    linear_span = report.law("linear-span")
    product_rule = report.law("product", tol)
    deriving_rule = report.law("deriving", tol)
    chain_formal = report.law("chain-formal")
    chain_lifted = report.law("chain-lifted", chain_tol)
    chain_numeric = report.law("chain-numeric", chain_tol)

    for i, t in enumerate(directions):
        dbar = codereliction(t)
        e_value = float(counit_e(dbar))
        paired = pair(dbar, constant)
        const_rule.record(abs(e_value) <= tol and abs(paired) <= tol, max(abs(e_value), abs(paired)))
        linear_span.record(epsilon(dbar) == t)
        for F, ell in ((panel[j], linear[j]) for j in range(len(panel))):
            lhs = pair(dbar, ell)
            rhs = ell(t)
            linear_rule.record(abs(lhs - rhs) <= tol * max(1.0, abs(rhs)), abs(lhs - rhs))
        for j, F in enumerate(panel):
            G = panel[(j + 1) % len(panel)]
            lhs = pair(dbar, ProductFunctional(F, G))
            e0 = ebar(t)
            rhs_tensor = tensor(dbar, e0) + tensor(e0, dbar)
            structural = comonoid(dbar) == rhs_tensor
            rhs = pair(rhs_tensor, (F, G))
            gap = abs(lhs - rhs)
            product_rule.record(structural and gap <= tol * max(1.0, abs(rhs)), gap)
        base = directions[(i + 1) % len(directions)]
        for F in panel[:5]:
            via_cbar = pair(cbar(tensor(delta(base), dbar)), F)
            via_deriving = pair(deriving(t, delta(base)), F)
            direct = gateaux(F, base, t)
            gap = max(abs(via_cbar - direct), abs(via_deriving - direct))
            deriving_rule.record(gap <= tol * max(1.0, abs(direct)), gap)

        point = directions[(i + 3) % len(directions)]
        left, right = chain_rule_sides(t, point)
        chain_formal.record(left == right)
        for F in panel[:5]:
            g = Composite(outer, Lifted(F))
            a = pair(left, g)
            b = pair(right, g)
            expected = g.g_prime(F(point)) * gateaux(F, point, t)
            gap = max(_relative(a, expected), _relative(b, expected))
            chain_lifted.record(gap <= chain_tol, gap)
            composite = Composite(outer, F)
            numeric = fd_gateaux(composite, point, t)
            gap = _relative(numeric, expected)
            chain_numeric.record(gap <= chain_tol, gap)
    return report


def _linear_density(F: LocalFunctional):
    """A fixed u-linear density of the same order as F."""
    n, m, r = F.lagrangian.n, F.lagrangian.m, F.order
    terms = []
    for k in range(m):
        terms.append(mul(add(ONE, BaseVar(0)), JetVar(k, (0,) * n)))
        if r:
            terms.append(JetVar(k, (r,) + (0,) * (n - 1)))
    return add(*terms)


def naturality_check(sections, operators, functionals, tol: float = 1e-8) -> LawReport:
    """!(F) d-bar(t) = d-bar(F t) for order-0 operators, checked by pairing."""
    report = LawReport("codereliction-naturality")
    law = report.law("naturality", tol)
    for t, op in zip(sections, operators):
        if op.order != 0:
            raise ValueError("naturality is stated for order-0 (module) maps")
        pushed = pushforward(op, codereliction(t))
        direct = codereliction(apply(op, t))
        law.record(pushed == direct, 0.0)
        for F in functionals:
            gap = abs(pair(pushed, F) - pair(direct, F))
            law.record(gap <= tol, gap)
    return report


def composite_comonad_check(s: Section, r: int, functional: LocalFunctional,
                            t: Section | None = None, tol: float = 1e-12) -> LawReport:
    """Pairing delta_{j(s)} with a jet functional equals pairing delta_s with its transpose."""
    report = LawReport("composite-comonad")
    jet_functional = functional.jet_form()
    js = prolong(s, r)
    a = pair(delta(js), jet_functional)
    b = pair(delta(s), jet_functional.transpose())
    c = functional(s)
    report.law("jet-pairing", tol).record(max(abs(a - b), abs(a - c)) <= tol * max(1.0, abs(c)),
                                          max(abs(a - b), abs(a - c)))
    report.law("counit").record(epsilon_jdelta(delta(js)) == s)
    report.law("transpose").record(jet_transpose(delta(js)) == delta(s))
    if t is not None:
        d_jet = pair(delta_deriv(js, [prolong(t, r)]), jet_functional)
        d_sec = pair(delta_deriv(s, [t]), functional)
        gap = abs(d_jet - d_sec)
        report.law("jet-derivative", tol).record(gap <= tol * max(1.0, abs(d_sec)), gap)
        report.law("transpose-derivative").record(
            jet_transpose(delta_deriv(js, [prolong(t, r)])) == delta_deriv(s, [t]))
    return report


def seely_delta_check(cases, tol: float = 1e-8) -> LawReport:
    """delta_(s,s') paired with F(s) G(s') factors through delta_s (x) delta_s'.

    ``cases`` holds tuples ``(s, s2, t, t2, F, G)``; both the delta and its
    derivative along (t, t2) are checked.
    """
    report = LawReport("seely-delta")
    law = report.law("factorisation", tol)
    for s, s2, t, t2, F, G in cases:
        joint = s.concat(s2)
        direction = t.concat(t2)
        product = ProductFunctional(F, G, split=s.m)
        for d in (delta(joint), delta_deriv(joint, [direction])):
            lhs = pair(d, product)
            rhs = pair(seely_delta(d, s.m), (F, G))
            gap = abs(lhs - rhs)
            law.record(gap <= tol * max(1.0, abs(rhs)), gap)
    return report
