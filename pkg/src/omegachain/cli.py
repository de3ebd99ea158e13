"""Command-line front end.

Subcommands answer yes/no questions about relation and system documents;
exit code 0 means yes/holds, 1 means no/violated, 2 a usage or input
problem, 3 a failed precondition, 4 a blown resource budget.  With --json
the answer is a single stable JSON object on stdout.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional

from .chains import (
    HasOmegaChain, NoOmegaChain, NotTransitive, check_transitive,
    extract_prefix, has_omega_chain,
)
from .formulas import FormulaError, VarId
from .harness import (
    PreconditionError, decide_boundedness, decide_eventuality,
    decide_k_liveness, decide_k_safety, decide_reachable_bound,
    finite_domain_oracle,
)
from .limits import Budget, ResourceLimit
from .parser import (
    ParseError, RelationDoc, SystemDoc, parse_document, print_formula,
    print_term,
)
from .separation import mixed_decide, mixed_model, mixed_qe, to_canonical

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="omega-chain",
        description="decide infinite-chain existence and derived "
                    "verification questions for mixed linear relations")
    top.add_argument("--json", action="store_true",
                     help="machine-readable verdict on stdout")
    top.add_argument("--witness", type=int, default=5, metavar="N",
                     help="chain prefix length to extract on yes (default 5,"
                          " 0 disables)")
    top.add_argument("--trust-transitive", action="store_true",
                     help="skip the transitivity precheck")
    top.add_argument("--timeout", type=float, default=None, metavar="SECONDS")
    top.add_argument("--max-branches", type=int, default=None, metavar="N",
                     help="cap on case splits before giving up")
    sub = top.add_subparsers(dest="command", required=True)

    def cmd(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", help="input document")
        return p

    cmd("decide", "does the relation admit an infinite chain")
    cmd("transitive", "is the relation transitive")
    cmd("sat", "is the relation body satisfiable")
    cmd("qe", "print a quantifier-free separated equivalent of the body")
    cmd("separate", "print the canonical disjuncts of the relation")
    cmd("safety", "no staged run from init hits the safe clauses in order")
    cmd("liveness", "some run visits every live clause infinitely often")
    cmd("eventuality", "some infinite run passes the live clause once")
    b = cmd("bound", "are the bound terms bounded along every infinite run")
    b.add_argument("--reachable", action="store_true",
                   help="ask instead for a uniform bound over all points "
                        "one reach-step from init")
    b.add_argument("--uniform", action="store_true", help=argparse.SUPPRESS)
    o = cmd("oracle", "brute-force chain answer for a boxed integer relation")
    o.add_argument("--box-lo", type=int, default=-6, metavar="INT")
    o.add_argument("--box-hi", type=int, default=6, metavar="INT")
    r = cmd("report", "decide, then write figures and delimited results")
    r.add_argument("--out", default=None, metavar="DIR",
                   help="output directory (default <input>_report)")
    return top


# ---------------------------------------------------------------------------
# Rendering


def _num(x) -> object:
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return f"{x.numerator}/{x.denominator}"
    return x


def _point(p: dict) -> dict:
    return {(v.display() if isinstance(v, VarId) else str(v)): _num(val)
            for v, val in sorted(p.items(), key=lambda kv: str(kv[0]))}


def _emit(args, verdict: str, *, disjunct: Optional[int] = None,
          modes: Optional[dict] = None, prefix: Optional[list] = None,
          stats: Optional[dict] = None, lines: Optional[list] = None) -> None:
    stats = stats or {}
    if args.json:
        doc = {
            "verdict": verdict,
            "disjunct": disjunct,
            "modes": modes,
            "prefix": prefix,
            "stats": {
                "disjuncts": int(stats.get("disjuncts", 0)),
                "mode_vectors_checked": int(stats.get("mode_vectors_checked", 0)),
                "elapsed_ms": int(stats.get("elapsed_ms", 0)),
            },
        }
        print(json.dumps(doc, sort_keys=True))
        return
    print(verdict)
    for line in lines or []:
        print(line)


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_document(fh.read())


def _as_relation(doc) -> RelationDoc:
    return doc.reach if isinstance(doc, SystemDoc) else doc


def _as_system(doc) -> SystemDoc:
    if not isinstance(doc, SystemDoc):
        raise ValueError("this command needs a (system ...) document")
    return doc


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_decide(args, budget) -> int:
    r = _as_relation(_load(args.file))
    stats: dict = {}
    verdict = has_omega_chain(r, check_transitivity=not args.trust_transitive,
                              budget=budget, stats=stats)
    if isinstance(verdict, NotTransitive):
        pts = [_point(p) for p in verdict.counterexample]
        _emit(args, "not-transitive", prefix=pts, stats=stats,
              lines=[f"counterexample: {pts}"])
        return 3
    if isinstance(verdict, NoOmegaChain):
        _emit(args, "no-chain", stats=stats)
        return 1
    prefix = None
    if args.witness >= 2:
        prefix = [_point(p)
                  for p in extract_prefix(r, verdict, args.witness, budget)]
    _emit(args, "chain", disjunct=verdict.disjunct,
          modes=verdict.modes.as_dict(), prefix=prefix, stats=stats,
          lines=[f"disjunct {verdict.disjunct}",
                 f"modes {verdict.modes.as_dict()}"]
                + ([f"prefix {prefix}"] if prefix else []))
    return 0


def _cmd_transitive(args, budget) -> int:
    r = _as_relation(_load(args.file))
    ok, cex = check_transitive(r, budget)
    if ok:
        _emit(args, "transitive")
        return 0
    pts = [_point(p) for p in cex]
    _emit(args, "not-transitive", prefix=pts,
          lines=[f"counterexample: {pts}"])
    return 1


def _cmd_sat(args, budget) -> int:
    r = _as_relation(_load(args.file))
    if mixed_decide(r.body, budget):
        model = mixed_model(r.body, budget)
        pts = [_point(model)] if model else None
        _emit(args, "sat", prefix=pts, lines=[f"model: {pts}"] if pts else [])
        return 0
    _emit(args, "unsat")
    return 1


def _cmd_qe(args, budget) -> int:
    if args.json:
        raise ValueError("qe prints a formula; --json applies to decisions")
    r = _as_relation(_load(args.file))
    g, splits = mixed_qe(r.body, budget)
    for s in splits:
        print(f"; {s.original.display()} = {s.int_part.display()}"
              f" + {s.frac_part.display()}")
    print(print_formula(g))
    return 0


def _cmd_separate(args, budget) -> int:
    if args.json:
        raise ValueError("separate prints formulas; --json applies to decisions")
    r = _as_relation(_load(args.file))
    for i, d in enumerate(to_canonical(r, budget)):
        print(f"; disjunct {i}")
        for orig, term in d.rebuild:
            print(f";   {orig.display()} = {print_term(term)}")
        print(print_formula(d.formula()))
    return 0


def _cmd_safety(args, budget) -> int:
    sys_doc = _as_system(_load(args.file))
    safe = decide_k_safety(sys_doc, trust_transitive=args.trust_transitive,
                           budget=budget)
    _emit(args, "safe" if safe else "unsafe")
    return 0 if safe else 1


def _cmd_liveness(args, budget) -> int:
    sys_doc = _as_system(_load(args.file))
    stats: dict = {}
    verdict = decide_k_liveness(sys_doc,
                                trust_transitive=args.trust_transitive,
                                budget=budget, stats=stats)
    live = isinstance(verdict, HasOmegaChain)
    _emit(args, "live" if live else "not-live",
          disjunct=verdict.disjunct if live else None,
          modes=verdict.modes.as_dict() if live else None, stats=stats)
    return 0 if live else 1


def _cmd_eventuality(args, budget) -> int:
    sys_doc = _as_system(_load(args.file))
    if len(sys_doc.live) != 1:
        raise ValueError("eventuality takes exactly one (live) clause "
                         "as its target")
    stats: dict = {}
    hit = decide_eventuality(sys_doc, sys_doc.live[0],
                             trust_transitive=args.trust_transitive,
                             budget=budget, stats=stats)
    _emit(args, "eventually" if hit else "never", stats=stats)
    return 0 if hit else 1


def _cmd_bound(args, budget) -> int:
    if args.uniform:
        raise ValueError("uniform bounds over all executions are not "
                         "a supported query")
    sys_doc = _as_system(_load(args.file))
    if args.reachable:
        held = decide_reachable_bound(
            sys_doc, trust_transitive=args.trust_transitive, budget=budget)
    else:
        held = decide_boundedness(
            sys_doc, trust_transitive=args.trust_transitive, budget=budget)
    _emit(args, "bounded" if held else "unbounded")
    return 0 if held else 1


def _cmd_oracle(args, budget) -> int:
    r = _as_relation(_load(args.file))
    found = finite_domain_oracle(r, (args.box_lo, args.box_hi),
                                 check_transitivity=not args.trust_transitive,
                                 budget=budget)
    _emit(args, "chain" if found else "no-chain")
    return 0 if found else 1


def _cmd_report(args, budget) -> int:
    from .report import write_report
    r = _as_relation(_load(args.file))
    stats: dict = {}
    verdict = has_omega_chain(r, check_transitivity=not args.trust_transitive,
                              budget=budget, stats=stats)
    prefix = None
    if isinstance(verdict, HasOmegaChain) and args.witness >= 2:
        prefix = extract_prefix(r, verdict, args.witness, budget)
    paths = write_report(args.file, args.out, verdict, prefix, stats)
    for p in paths:
        print(p)
    if isinstance(verdict, NotTransitive):
        return 3
    return 0 if isinstance(verdict, HasOmegaChain) else 1


_COMMANDS = {
    "decide": _cmd_decide,
    "transitive": _cmd_transitive,
    "sat": _cmd_sat,
    "qe": _cmd_qe,
    "separate": _cmd_separate,
    "safety": _cmd_safety,
    "liveness": _cmd_liveness,
    "eventuality": _cmd_eventuality,
    "bound": _cmd_bound,
    "oracle": _cmd_oracle,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    budget = None
    if args.timeout is not None or args.max_branches is not None:
        budget = Budget(timeout=args.timeout, max_branches=args.max_branches)
    try:
        return _COMMANDS[args.command](args, budget)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FormulaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except PreconditionError as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        if e.counterexample is not None:
            print(f"counterexample: {[_point(p) for p in e.counterexample]}",
                  file=sys.stderr)
        return 3
    except ResourceLimit as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return 4
