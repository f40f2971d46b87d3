"""
Executable law suites for the jet comonad, Kleisli composition and the jet
Seely isomorphism.  Each suite returns a :class:`LawReport`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diffop import LinDiffOp, apply, compose
from .expr import BaseVar, equivalent
from .jet import (
    JetContext, JetPoint, Section, comultiplication, counit, jet_of_jet, project, prolong,
    seely_merge, seely_split,
)

__all__ = ["LawResult", "LawReport", "jet_comonad_laws", "jet_point_laws", "kleisli_laws",
           "jet_seely_laws", "order_triples"]


@dataclass
class LawResult:
    """Outcome of one law over many cases.

    ``max_discrepancy`` is numeric for tolerance-based laws and ``None`` for
    laws decided by (probabilistic) equivalence.
    """

    name: str
    cases: int = 0
    failures: int = 0
    max_discrepancy: float | None = None
    tolerance: float | None = None
    examples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, ok: bool, discrepancy: float | None = None, note: str = ""):
        self.cases += 1
        if discrepancy is not None:
            self.max_discrepancy = discrepancy if self.max_discrepancy is None \
                else max(self.max_discrepancy, discrepancy)
        if not ok:
            self.failures += 1
            if len(self.examples) < 3 and note:
                self.examples.append(note)

    def to_dict(self) -> dict:
        out = {"law": self.name, "cases": self.cases, "failures": self.failures,
               "passed": self.passed}
        if self.max_discrepancy is not None:
            out["max_discrepancy"] = self.max_discrepancy
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.examples:
            out["examples"] = list(self.examples)
        return out


@dataclass
class LawReport:
    suite: str
    results: dict = field(default_factory=dict)

    def law(self, name: str, tolerance: float | None = None) -> LawResult:
        if name not in self.results:
            self.results[name] = LawResult(name, tolerance=tolerance)
        return self.results[name]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed,
                "laws": [r.to_dict() for r in self.results.values()]}


def order_triples(total: int = 3):
    """All (r, q, p) with r + q + p <= total."""
    return [(r, q, p) for r in range(total + 1) for q in range(total + 1 - r)
            for p in range(total + 1 - r - q)]


def _same(a: dict, b: dict, trials, tol, seed=None):
    if a.keys() != b.keys():
        return False
    return all(equivalent(a[k], b[k], trials, tol, seed=seed) for k in a)


def jet_comonad_laws(sections, total: int = 3, trials: int = 16, tol: float = 1e-9,
                     seed: int | None = None) -> LawReport:
    """Counit, coassociativity and jet-of-jet identities for every (r, q, p)."""
    report = LawReport("jet-comonad")
    for s in sections:
        for r, q, p in order_triples(total):
            tag = f"s={s} r={r} q={q} p={p}"
            js = prolong(s, r + q)
            m = comultiplication(js, r, q)
            outer = counit(m, level=1)
            report.law("counit-outer").record(
                _same(outer.mapping, _keys(project(js, r)), trials, tol, seed), note=tag)
            inner = counit(m, level=0)
            report.law("counit-inner").record(
                _same(inner.mapping, _keys(project(js, q)), trials, tol, seed), note=tag)
            report.law("jet-of-jet").record(
                _same(m.mapping, jet_of_jet(prolong(s, r), q).mapping, trials, tol, seed), note=tag)
            js3 = prolong(s, r + q + p)
            left = comultiplication(comultiplication(js3, r + q, p), r, q, level=0)
            right = comultiplication(comultiplication(js3, r, q + p), q, p, level=1)
            report.law("coassociativity").record(
                left.orders == right.orders and _same(left.mapping, right.mapping, trials, tol, seed),
                note=tag)
            report.law("projection-naturality").record(
                project(prolong(s, r + q), r) == prolong(s, r), note=tag)
            report.law("counit-section").record(counit(js) == s, note=tag)
            report.law("prolongation-compatibility").record(js.is_compatible(trials, tol, seed),
                                                              note=tag)
    return report


def _keys(js) -> dict:
    return {(v.fiber, v.index): value for v, value in js.items()}


def jet_point_laws(rng, count: int = 20, n: int = 2, m: int = 1, total: int = 3) -> LawReport:
    """The same relabeling identities on random numeric jets (exact equality)."""
    report = LawReport("jet-point")
    for _ in range(count):
        for r, q, p in order_triples(total):
            ctx = JetContext(n, m, r + q + p)
            point = JetPoint(ctx, rng.uniform(-1, 1, n), rng.uniform(-1, 1, ctx.dimension))
            left = comultiplication(comultiplication(point, r + q, p), r, q, level=0)
            right = comultiplication(comultiplication(point, r, q + p), q, p, level=1)
            report.law("coassociativity").record(left.mapping == right.mapping)
            low = project(point, r + q)
            mu = comultiplication(low, r, q)
            report.law("counit-outer").record(
                counit(mu, level=1).mapping == _point_keys(project(low, r)))
            report.law("counit-inner").record(
                counit(mu, level=0).mapping == _point_keys(project(low, q)))
            report.law("project-project").record(
                project(project(point, r + q), r) == project(point, r))
    return report


def _point_keys(p: JetPoint) -> dict:
    return {(v.fiber, v.index): value for v, value in zip(p.context.jet_variables, p.values)}


def kleisli_laws(operator_pairs, sections, trials: int = 16, tol: float = 1e-9,
                 seed: int | None = None) -> LawReport:
    """Functoriality of composition plus unit laws and the order bound."""
    report = LawReport("kleisli")
    for (G, F), s in zip(operator_pairs, sections):
        GF = compose(G, F)
        lhs = apply(GF, s)
        rhs = apply(G, apply(F, s))
        report.law("functoriality").record(
            all(equivalent(a, b, trials, tol, seed=seed)
                for a, b in zip(lhs.components, rhs.components)),
            note=f"G={G} F={F} s={s}")
        report.law("order-bound").record(GF.order <= G.order + F.order)
        ident_in = LinDiffOp.identity(F.n, F.m)
        ident_out = LinDiffOp.identity(F.n, F.m_out)
        report.law("unit").record(compose(ident_out, F) == F == compose(F, ident_in))
    for n in (1, 2):
        for i in range(n):
            d = LinDiffOp.partial(n, i)
            x = LinDiffOp.multiplication(n, BaseVar(i))
            report.law("commutator").record(
                compose(d, x) - compose(x, d) == LinDiffOp.identity(n))
    return report


def jet_seely_laws(section_pairs, r: int = 2) -> LawReport:
    """split/merge of jets of product sections are mutually inverse and componentwise."""
    report = LawReport("jet-seely")
    for s, t in section_pairs:
        joint = prolong(s.concat(t), r)
        a, b = seely_split(joint, s.m)
        report.law("split-componentwise").record(a == prolong(s, r) and b == prolong(t, r))
        report.law("merge-split").record(seely_merge(a, b) == joint)
        report.law("split-merge").record(seely_split(seely_merge(a, b), s.m) == (a, b))
    n = section_pairs[0][0].n if section_pairs else 1
    zero = prolong(Section.zero(n, 0), r)
    report.law("zero-bundle").record(zero.values == () and zero.context.dimension == 0)
    return report
