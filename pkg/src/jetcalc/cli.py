"""
Command-line interface: ``jetcalc <command> [options]``.

Commands: el, prolong, compose, check-solution, gateaux, laws.  Output is
JSON (default) or text.  Exit codes: 0 success, 1 verdict false, 2 usage or
parse error, 3 numeric instability.
"""

from __future__ import annotations

import argparse
import sys

from .diffop import compose
from .errors import DomainError, JetCalcError, NotLinearError, NumericInstabilityError, ParseError
from .grammar import parse, to_text
from .jet import Section
from .lpde import check_solution
from .numeric import Grid, parse_grid
from .serialize import (
    dumps, equation_from_json, load_json, operator_from_json, operator_to_json,
)

__all__ = ["main", "build_parser", "SCHEMA_VERSION"]

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_TOL = {
    "check-solution": 1e-9,
    "gateaux": 1e-4,
    "laws": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized equivalence and panels (default 0)")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--grid", default=None, help="lo:hi:count[,lo:hi:count...]")
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = _Parser(prog="jetcalc", description="Jet calculus and variational checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("el", parents=[common], help="Euler-Lagrange equations of a Lagrangian")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--lagrangian", required=True)
    p.add_argument("--weight", default=None, help="volume weight w(x), default 1")

    p = sub.add_parser("prolong", parents=[common], help="prolong a linear PDE")
    p.add_argument("--eq", required=True, help="equation JSON file")
    p.add_argument("--q", type=int, default=1, help="prolongation level (default 1)")

    p = sub.add_parser("compose", parents=[common], help="compose operators: A after B")
    p.add_argument("a", metavar="A.json")
    p.add_argument("b", metavar="B.json")

    p = sub.add_parser("check-solution", parents=[common], help="residual check on a grid")
    p.add_argument("--eq", required=True, help="equation JSON file")
    p.add_argument("--section", required=True, action="append",
                   help="one component expression; repeat for m > 1")
    p.add_argument("--level", type=int, default=0, help="check the level-q prolongation")

    p = sub.add_parser("gateaux", parents=[common],
                       help="Gateaux derivative of an action, symbolic and by finite differences")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--lagrangian", required=True)
    p.add_argument("--weight", default=None)
    p.add_argument("--section", required=True, action="append")
    p.add_argument("--direction", required=True, action="append")

    p = sub.add_parser("laws", parents=[common], help="run the law suites on seeded panels")
    p.add_argument("--suite", default="all",
                   choices=("all", "comonad", "kleisli", "seely", "codereliction",
                            "variational"))
    p.add_argument("--count", type=int, default=10, help="panel size (default 10)")
    return parser


# ---------------------------------------------------------------------------
# commands


def _grid(args, n, default_count=21) -> Grid:
    grid = parse_grid(args.grid) if args.grid else Grid.uniform(n, default_count)
    if grid.n != n:
        raise ParseError(f"grid has {grid.n} axes, the problem has n={n}", args.grid or "", 0)
    return grid


def _run_el(args):
    from .functional import Lagrangian, euler_lagrange

    L = Lagrangian.parse(args.lagrangian, args.n, args.m, args.weight)
    el = euler_lagrange(L)
    order = max([0] + [_order(e) for e in el])
    report = {"el": [to_text(e) for e in el], "order": order}
    text = "\n".join(f"el[{a + 1}] = {to_text(e)}" for a, e in enumerate(el))
    return report, text, EXIT_OK


def _order(e):
    from .expr import max_order

    return max(0, max_order(e))


def _run_prolong(args):
    if args.q < 0:
        raise ParseError("--q must be non-negative", str(args.q), 0)
    eq = equation_from_json(load_json(args.eq))
    equations = eq.prolonged(args.q)
    order = max([0] + [_order(e) for e in equations])
    report = {"q": args.q, "order": order, "count": len(equations),
              "equations": [to_text(e) for e in equations]}
    return report, "\n".join(report["equations"]), EXIT_OK


def _run_compose(args):
    A = operator_from_json(load_json(args.a))
    B = operator_from_json(load_json(args.b))
    if A.n != B.n or A.m != B.m_out:
        raise ParseError(f"cannot compose: A takes rank {A.m}, B produces rank {B.m_out}",
                         args.a, 0)
    op = compose(A, B)
    return {"operator": operator_to_json(op)}, str(op), EXIT_OK


def _run_check_solution(args):
    eq = equation_from_json(load_json(args.eq))
    n = eq.context.n
    s = Section(tuple(parse(c, n) for c in args.section), n)
    if s.m != eq.context.m:
        raise ParseError(f"the equation has m={eq.context.m}, {s.m} section components given",
                         " ; ".join(args.section), 0)
    grid = _grid(args, n)
    tol = DEFAULT_TOL["check-solution"] if args.tol is None else args.tol
    result = check_solution(eq, s, grid.points(), tol, args.level)
    report = {"verdict": result.verdict, "exact": result.exact, "level": args.level,
              "tolerance": tol, "grid": grid.spec, "points": len(result.points),
              "flagged_points": len(result.flagged), "max_residuals": list(result.residuals),
              "degenerate": eq.degenerate}
    text = (f"verdict: {'solution' if result.verdict else 'not a solution'}"
            f" ({'exact' if result.exact else 'numeric'})\n"
            f"max residuals: {', '.join(f'{r:.12g}' for r in result.residuals)}")
    return report, text, EXIT_OK if result.verdict else EXIT_FALSE


def _run_gateaux(args):
    from .functional import Lagrangian, LocalFunctional, gateaux, variational_identity_check

    L = Lagrangian.parse(args.lagrangian, args.n, args.m, args.weight)
    s = Section(tuple(parse(c, args.n) for c in args.section), args.n)
    t = Section(tuple(parse(c, args.n) for c in args.direction), args.n)
    if s.m != args.m or t.m != args.m:
        raise ParseError(f"give {args.m} section and direction components", args.lagrangian, 0)
    grid = _grid(args, args.n, 201 if args.n == 1 else 51)
    tol = DEFAULT_TOL["gateaux"] if args.tol is None else args.tol
    S = LocalFunctional(L, grid)
    numeric = gateaux(S, s, t, "fd")
    symbolic = gateaux(S, s, t, "symbolic") if L.polynomial else None
    cases = [{"route": "finite-difference", "value": numeric}]
    if symbolic is not None:
        gap = abs(symbolic - numeric)
        scale = max(abs(symbolic), abs(numeric))
        cases.append({"route": "symbolic", "value": symbolic,
                      "discrepancy": gap / scale if scale > 0 else 0.0})
    try:
        variational = variational_identity_check(L, s, t, grid, tol)
        cases.append({"route": "euler-lagrange", "value": variational.el_integral,
                      "discrepancy": variational.relative_gap})
    except ValueError:
        variational = None
    verdict = all(c.get("discrepancy", 0.0) <= tol for c in cases)
    value = symbolic if symbolic is not None else numeric
    report = {"gateaux": value, "grid": grid.spec, "tolerance": tol, "verdict": verdict,
              "cases": cases, "euler_lagrange_checked": variational is not None}
    text = "\n".join(f"{c['route']}: {c['value']:.12g}"
                     + (f" (relative gap {c['discrepancy']:.3g})" if "discrepancy" in c else "")
                     for c in cases)
    return report, text, EXIT_OK if verdict else EXIT_FALSE


def _run_laws(args):
    from .functional import variational_identity_check
    from .functional.laws import codereliction_laws, seely_delta_check
    from .laws import jet_comonad_laws, jet_point_laws, kleisli_laws, jet_seely_laws
    from .panels import (
        functional_panel, make_rng, random_operator, section_panel, variational_panel,
    )

    rng = make_rng(args.seed)
    count = max(1, args.count)
    suites = ("comonad", "kleisli", "seely", "codereliction", "variational") \
        if args.suite == "all" else (args.suite,)
    tol = args.tol
    reports = []
    for name in suites:
        if name == "comonad":
            secs = section_panel(rng, count, n=1, m=1, kind="mixed") + \
                section_panel(rng, count, n=2, m=2, kind="mixed")
            reports.append(jet_comonad_laws(secs, tol=tol or 1e-9, seed=args.seed))
            reports.append(jet_point_laws(rng, count))
        elif name == "kleisli":
            pairs, secs = [], []
            for i in range(count):
                n = 1 + i % 2
                pairs.append((random_operator(rng, n, 1, 1, 2), random_operator(rng, n, 1, 1, 2)))
                secs.append(section_panel(rng, 1, n=n, kind="mixed")[0])
            reports.append(kleisli_laws(pairs, secs, tol=tol or 1e-9, seed=args.seed))
        elif name == "seely":
            pairs = [tuple(section_panel(rng, 2, n=2, m=1, kind="mixed")) for _ in range(count)]
            reports.append(jet_seely_laws(pairs))
            grid = _grid(args, 1, 101) if args.grid else Grid.uniform(1, 101)
            cases = []
            for _ in range(count):
                s, s2, t, t2 = section_panel(rng, 4, bound=1)
                F, G = functional_panel(rng, 2, grid)
                cases.append((s, s2, t, t2, F, G))
            reports.append(seely_delta_check(cases, tol or 1e-8))
        elif name == "codereliction":
            grid = _grid(args, 1, 201) if args.grid else Grid.uniform(1, 201)
            secs = section_panel(rng, count, bound=1)
            fs = functional_panel(rng, count, grid)
            for jet in (False, True):
                reports.append(codereliction_laws(secs, fs, jet=jet, tol=tol or 1e-8))
        elif name == "variational":
            from .laws import LawReport

            grid = _grid(args, 1, 401) if args.grid else Grid.uniform(1, 401)
            report = LawReport("variational")
            for case, L, s, t in variational_panel(grid.n):
                r = variational_identity_check(L, s, t, grid, tol or 1e-4)
                report.law(case, r.tolerance).record(r.passed, r.relative_gap)
            reports.append(report)
    passed = all(r.passed for r in reports)
    out = {"suite": args.suite, "count": count, "passed": passed,
           "reports": [r.to_dict() for r in reports]}
    lines = []
    for r in reports:
        for law in r.results.values():
            lines.append(f"{r.suite}/{law.name}: {'pass' if law.passed else 'FAIL'}"
                         f" ({law.cases - law.failures}/{law.cases})")
    return out, "\n".join(lines), EXIT_OK if passed else EXIT_FALSE


_COMMANDS = {
    "el": _run_el, "prolong": _run_prolong, "compose": _run_compose,
    "check-solution": _run_check_solution, "gateaux": _run_gateaux, "laws": _run_laws,
}

_ECHO_SKIP = {"command", "format"}

_KINDS = {ParseError: "parse", DomainError: "domain", NotLinearError: "not-linear"}


def _inputs(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _ECHO_SKIP}


def _emit(args, body: dict, text: str):
    if args.format == "json":
        payload = {"schema": SCHEMA_VERSION, "command": args.command, "inputs": _inputs(args)}
        payload.update(body)
        print(dumps(payload))
    else:
        print(text)


def _fail(args, kind: str, exc: Exception, code: int):
    error = {"type": kind, "message": str(exc)}
    if isinstance(exc, ParseError):
        error.update(line=exc.line, column=exc.column)
    if isinstance(exc, NumericInstabilityError):
        error["case"] = exc.case
    print(f"jetcalc: {kind}: {exc}", file=sys.stderr)
    if args is not None and args.format == "json":
        print(dumps({"schema": SCHEMA_VERSION, "command": args.command,
                     "inputs": _inputs(args), "error": error}))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"jetcalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        body, text, code = _COMMANDS[args.command](args)
    except NumericInstabilityError as exc:
        return _fail(args, "numeric-instability", exc, EXIT_NUMERIC)
    except (JetCalcError, ValueError, KeyError, TypeError) as exc:
        return _fail(args, _KINDS.get(type(exc), "usage"), exc, EXIT_USAGE)
    _emit(args, body, text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
