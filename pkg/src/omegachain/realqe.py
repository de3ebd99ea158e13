"""Quantifier elimination and decision for linear real arithmetic.

Virtual substitution over the {=, >} atoms: a bound variable is replaced by
finitely many symbolic test points (equation roots, strict-bound endpoints
nudged by an infinitesimal, and a far point at infinity).  The nudged and
infinite points never appear in the output; their effect is compiled into
ordinary atoms.  Atoms that do not mention the variable pass through, so
integer-sorted atoms elsewhere in the formula are tolerated by the internal
entry point; the public one insists on real purity.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Optional

from .formulas import (
    And, Atom, Eq, Exists, FalseF, Forall, Formula, FormulaError, Gt, LinTerm,
    ModCong, Not, Or, Sort, SortError, TrueF, TRUE, FALSE, VarId, atoms_of,
    dnf_simplify, evaluate, fold_ground, free_vars, is_quantifier_free,
    make_eq, map_atoms, mk_and, mk_not, mk_or, push_negations, substitute,
)
from .limits import Budget, tick

__all__ = ["eliminate_exists_real", "ra_decide", "ra_model", "ra_qe"]

_ATOM_TYPES = (Eq, Gt, ModCong)


def _require_real_only(f: Formula) -> None:
    for a in atoms_of(f):
        if isinstance(a, ModCong):
            raise SortError("congruence atom in real engine")
        for v in a.term.vars:
            if v.sort is not Sort.REAL:
                raise SortError(f"integer variable {v!r} in real engine")


def _conjuncts(f: Formula) -> list[Formula]:
    return list(f.args) if isinstance(f, And) else [f]


def _reduce_point(num: LinTerm, den: int) -> tuple[LinTerm, int]:
    g = den
    for _, a in num.coeffs:
        g = gcd(g, abs(a))
    g = gcd(g, abs(num.constant))
    if g > 1:
        num = LinTerm(tuple((v, a // g) for v, a in num.coeffs),
                      num.constant // g)
        den //= g
    return num, den


def _subst_eps(f: Formula, v: VarId, num: LinTerm, den: int,
               sign: int) -> Formula:
    """f with v replaced by (num/den) + sign*epsilon for infinitesimal
    positive epsilon."""
    def fn(a: Atom) -> Formula:
        c = a.term.coeff(v)
        if c == 0:
            return a
        if isinstance(a, ModCong):
            raise SortError("congruence atom over a real variable")
        rest = a.term.sub(LinTerm.var(v, c))
        base = rest.scale(den).add(num.scale(c))
        if isinstance(a, Eq):
            return FALSE
        # moving toward the test point from the sign side
        if (c > 0) == (sign > 0):
            return mk_or([Gt(base), make_eq(base)])
        return Gt(base)
    return map_atoms(f, fn, frozenset((v,)))


def _subst_inf(f: Formula, v: VarId, sign: int) -> Formula:
    def fn(a: Atom) -> Formula:
        c = a.term.coeff(v)
        if c == 0:
            return a
        if isinstance(a, Eq):
            return FALSE
        return TRUE if (c > 0) == (sign > 0) else FALSE
    return map_atoms(f, fn, frozenset((v,)))


def _eliminate(v: VarId, f: Formula, budget: Optional[Budget] = None) -> Formula:
    """Quantifier-free formula equivalent to exists-v f, opaque atoms kept."""
    if not is_quantifier_free(f):
        raise FormulaError("eliminator expects a quantifier-free body")
    # keeping the body as a pruned disjunction stops the test-point copies
    # from compounding across nested eliminations
    f = dnf_simplify(f, check=(budget.tick if budget is not None else None))
    if v not in free_vars(f):
        return f
    if isinstance(f, Or):
        # exists distributes; each branch keeps only its own test points
        return mk_or([_eliminate(v, g, budget) for g in f.args])

    for g in _conjuncts(f):
        if isinstance(g, Eq):
            c = g.term.coeff(v)
            if c != 0:
                rest = g.term.sub(LinTerm.var(v, c))
                num = rest.neg() if c > 0 else rest
                return substitute(f, v, *_reduce_point(num, abs(c)))

    roots: list[tuple[LinTerm, int]] = []
    lowers: list[tuple[LinTerm, int]] = []
    uppers: list[tuple[LinTerm, int]] = []
    seen: dict[int, set] = {0: set(), 1: set(), 2: set()}

    def push(sink_id: int, sink: list, num: LinTerm, den: int) -> None:
        pt = _reduce_point(num, den)
        if pt not in seen[sink_id]:
            seen[sink_id].add(pt)
            sink.append(pt)

    for a in atoms_of(f):
        c = a.term.coeff(v)
        if c == 0:
            continue
        if isinstance(a, ModCong):
            raise SortError("congruence atom over a real variable")
        rest = a.term.sub(LinTerm.var(v, c))
        num = rest.neg() if c > 0 else rest
        if isinstance(a, Eq):
            push(0, roots, num, abs(c))
        elif c > 0:
            push(1, lowers, num, c)
        else:
            push(2, uppers, num, -c)

    use_lower = len(lowers) <= len(uppers)
    side = lowers if use_lower else uppers
    eps_sign = 1 if use_lower else -1

    pieces: list[Formula] = [_subst_inf(f, v, -eps_sign)]
    for num, den in roots:
        tick(budget)
        pieces.append(substitute(f, v, num, den))
    for num, den in side:
        tick(budget)
        pieces.append(_subst_eps(f, v, num, den, eps_sign))
    return mk_or(pieces)


def eliminate_exists_real(v: VarId, f: Formula,
                          budget: Optional[Budget] = None) -> Formula:
    """Equivalent of exists-v f without v, over real atoms only."""
    _require_real_only(f)
    if v.sort is not Sort.REAL:
        raise SortError(f"{v!r} is not real-sorted")
    return fold_ground(_eliminate(v, f, budget))


def _qe(f: Formula, budget: Optional[Budget]) -> Formula:
    if isinstance(f, _ATOM_TYPES) or isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return mk_not(_qe(f.arg, budget))
    if isinstance(f, And):
        return mk_and([_qe(g, budget) for g in f.args])
    if isinstance(f, Or):
        return mk_or([_qe(g, budget) for g in f.args])
    if isinstance(f, Exists):
        return _eliminate(f.var, _qe(f.body, budget), budget)
    if isinstance(f, Forall):
        inner = _eliminate(f.var, push_negations(mk_not(_qe(f.body, budget))),
                           budget)
        return mk_not(inner)
    raise FormulaError(f"unexpected node {f!r}")


def ra_qe(f: Formula, budget: Optional[Budget] = None) -> Formula:
    """Remove every quantifier from a real-sorted formula."""
    _require_real_only(f)
    return fold_ground(_qe(f, budget))


def ra_decide(f: Formula, budget: Optional[Budget] = None) -> bool:
    """Truth of a real sentence; free variables read as existential."""
    g = ra_qe(f, budget)
    for v in sorted(free_vars(g), key=lambda w: (w.name, w.role.value)):
        g = _eliminate(v, g, budget)
    return evaluate(g, {})


# ---------------------------------------------------------------------------
# Model construction


def _candidate_values(psi: Formula, v: VarId) -> list[Fraction]:
    """Rational candidates covering every satisfiable single-variable formula:
    atom roots, midpoints between consecutive roots, and points beyond."""
    roots: set[Fraction] = set()
    for a in atoms_of(psi):
        c = a.term.coeff(v)
        if c == 0:
            continue
        rest = a.term.sub(LinTerm.var(v, c))
        if rest.vars:
            raise FormulaError(f"more than one free variable near {a!r}")
        roots.add(Fraction(-rest.constant, c))
    if not roots:
        return [Fraction(0)]
    ordered = sorted(roots)
    out = list(ordered)
    out.append(ordered[0] - 1)
    out.append(ordered[-1] + 1)
    for a, b in zip(ordered, ordered[1:]):
        out.append((a + b) / 2)
    return sorted(set(out))


def ra_model(f: Formula, budget: Optional[Budget] = None) -> Optional[dict]:
    """A satisfying rational assignment for quantifier-free f, or None."""
    _require_real_only(f)
    if not is_quantifier_free(f):
        raise FormulaError("ra_model expects a quantifier-free formula")
    f = push_negations(f)
    order = sorted(free_vars(f), key=lambda w: (w.name, w.role.value))
    stages: list[tuple[VarId, Formula]] = []
    g = f
    for v in order:
        stages.append((v, g))
        g = _eliminate(v, g, budget)
    if not evaluate(g, {}):
        return None
    sigma: dict[VarId, Fraction] = {}
    for v, phi in reversed(stages):
        psi = phi
        for w, val in sigma.items():
            psi = substitute(psi, w, LinTerm.const(val.numerator),
                             val.denominator)
        found = False
        for q in _candidate_values(psi, v):
            tick(budget)
            if evaluate(psi, {v: q}):
                sigma[v] = q
                found = True
                break
        if not found:
            raise FormulaError("model reconstruction failed; eliminator bug")
    return sigma
