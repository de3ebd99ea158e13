"""Quantifier elimination and decision for linear integer arithmetic.

The eliminator is the classic test-point method over the {=, >, mod}
integer atoms: scale the bound variable's coefficients to a common value,
substitute a unit-coefficient stand-in constrained by a divisibility atom,
then replace the quantifier by a finite disjunction over the residue window
of the formula's bound terms.  Atoms that do not mention the variable pass
through untouched, so callers may leave opaque (e.g. real-sorted) atoms in
place; the public entry points additionally enforce integer purity.
"""
from __future__ import annotations

from fractions import Fraction
from math import ceil, floor, lcm
from typing import Optional

from .formulas import (
    And, Atom, Eq, Exists, FalseF, Forall, Formula, FormulaError, Gt, LinTerm,
    ModCong, Not, Or, Sort, SortError, TrueF, TRUE, FALSE, VarId, atoms_of,
    dnf_simplify, evaluate, free_vars, fresh_var, is_quantifier_free,
    map_atoms, mk_and, mk_not, mk_or, push_negations, substitute,
)
from .limits import Budget, tick

__all__ = ["eliminate_exists_int", "pa_decide", "pa_model", "pa_qe"]

_ATOM_TYPES = (Eq, Gt, ModCong)


def _require_int_only(f: Formula) -> None:
    for a in atoms_of(f):
        for v in a.term.vars:
            if v.sort is not Sort.INT:
                raise SortError(f"real variable {v!r} in integer engine")


def _conjuncts(f: Formula) -> list[Formula]:
    return list(f.args) if isinstance(f, And) else [f]


def _solve_unit_equality(f: Formula, v: VarId) -> Optional[LinTerm]:
    """A term t with v = t forced by some top-level equality conjunct."""
    for g in _conjuncts(f):
        if isinstance(g, Eq):
            c = g.term.coeff(v)
            if c in (1, -1):
                rest = g.term.sub(LinTerm.var(v, c))
                return rest.neg() if c == 1 else rest
    return None


def _scale_atom(a: Atom, v: VarId, m: int, z: VarId) -> Atom:
    """Rewrite a so the v-monomial becomes a unit z-monomial, multiplying
    the atom through by the positive factor m/|coeff|."""
    c = a.term.coeff(v)
    if c == 0:
        return a
    k = m // abs(c)
    sign = 1 if c > 0 else -1
    rest = a.term.sub(LinTerm.var(v, c)).scale(k)
    term = rest.add(LinTerm.var(z, sign))
    if isinstance(a, Gt):
        return Gt(term)
    if isinstance(a, Eq):
        return Eq(term)
    out = ModCong(term.drop_constant(), a.modulus * k,
                  (a.residue * k - term.constant) % (a.modulus * k))
    return out


def _eliminate(v: VarId, f: Formula, budget: Optional[Budget] = None) -> Formula:
    """Quantifier-free formula equivalent to exists-v f (f quantifier-free).

    Atoms not mentioning v are carried through verbatim, whatever their sort.
    """
    if not is_quantifier_free(f):
        raise FormulaError("eliminator expects a quantifier-free body")
    # keeping the body as a pruned disjunction stops the test-point copies
    # from compounding across nested eliminations
    f = dnf_simplify(f, check=(budget.tick if budget is not None else None))
    if v not in free_vars(f):
        return f
    if isinstance(f, Or):
        # exists distributes; each branch keeps its own bounds and period
        return mk_or([_eliminate(v, g, budget) for g in f.args])

    direct = _solve_unit_equality(f, v)
    if direct is not None:
        return substitute(f, v, direct)

    coeffs = {a.term.coeff(v) for a in atoms_of(f) if a.term.coeff(v) != 0}
    m = lcm(*(abs(c) for c in coeffs))
    if m == 1:
        z, g = v, f
    else:
        z = fresh_var(v.name, Sort.INT)
        g = mk_and([map_atoms(f, lambda a: _scale_atom(a, v, m, z), frozenset((v,))),
                    ModCong(LinTerm.var(z), m, 0)])

    mods = [a.modulus for a in atoms_of(g)
            if isinstance(a, ModCong) and a.term.coeff(z) != 0]
    period = lcm(*mods) if mods else 1

    lowers: list[LinTerm] = []
    uppers: list[LinTerm] = []
    seen_lo: set = set()
    seen_up: set = set()
    for a in atoms_of(g):
        c = a.term.coeff(z)
        if c == 0 or isinstance(a, ModCong):
            continue
        rest = a.term.sub(LinTerm.var(z, c))
        if isinstance(a, Gt):
            if c == 1 and rest.neg() not in seen_lo:
                seen_lo.add(rest.neg())
                lowers.append(rest.neg())
            elif c == -1 and rest not in seen_up:
                seen_up.add(rest)
                uppers.append(rest)
        else:
            root = rest.neg() if c == 1 else rest
            lo = root.shift(-1)
            up = root.shift(1)
            if lo not in seen_lo:
                seen_lo.add(lo)
                lowers.append(lo)
            if up not in seen_up:
                seen_up.add(up)
                uppers.append(up)

    use_lower = len(lowers) <= len(uppers)
    bounds = lowers if use_lower else uppers

    def far(atom: Atom) -> Formula:
        c = atom.term.coeff(z)
        if c == 0:
            return atom
        if isinstance(atom, ModCong):
            return atom
        if isinstance(atom, Eq):
            return FALSE
        low_kind = c == 1
        return FALSE if low_kind == use_lower else TRUE

    pieces: list[Formula] = []
    g_far = map_atoms(g, far, frozenset((z,)))
    for j in range(1, period + 1):
        tick(budget)
        off = j if use_lower else -j
        pieces.append(substitute(g_far, z, LinTerm.const(off)))
    for b in bounds:
        for j in range(1, period + 1):
            tick(budget)
            point = b.shift(j) if use_lower else b.shift(-j)
            pieces.append(substitute(g, z, point))
    return mk_or(pieces)


def eliminate_exists_int(v: VarId, f: Formula,
                         budget: Optional[Budget] = None) -> Formula:
    """Equivalent of exists-v f without v, over integer atoms only."""
    _require_int_only(f)
    if v.sort is not Sort.INT:
        raise SortError(f"{v!r} is not integer-sorted")
    return _eliminate(v, f, budget)


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


def pa_qe(f: Formula, budget: Optional[Budget] = None) -> Formula:
    """Remove every quantifier from an integer-sorted formula."""
    _require_int_only(f)
    for v in _quantified_vars(f):
        if v.sort is not Sort.INT:
            raise SortError(f"real quantifier {v!r} in integer engine")
    return _qe(f, budget)


def _quantified_vars(f: Formula):
    if isinstance(f, (Exists, Forall)):
        yield f.var
        yield from _quantified_vars(f.body)
    elif isinstance(f, Not):
        yield from _quantified_vars(f.arg)
    elif isinstance(f, (And, Or)):
        for g in f.args:
            yield from _quantified_vars(g)


def pa_decide(f: Formula, budget: Optional[Budget] = None) -> bool:
    """Truth of an integer sentence; free variables read as existential."""
    g = pa_qe(f, budget)
    for v in sorted(free_vars(g), key=lambda w: (w.name, w.role.value)):
        g = _eliminate(v, g, budget)
    return evaluate(g, {})


# ---------------------------------------------------------------------------
# Model construction


def _candidate_values(psi: Formula, v: VarId) -> list[int]:
    """Integer candidates covering every satisfiable single-variable formula.

    Truth of psi as a function of v is constant between consecutive roots of
    its {=, >} atoms up to the residue period, so windows of one period plus
    slack around each root are exhaustive.
    """
    mods = [a.modulus for a in atoms_of(psi)
            if isinstance(a, ModCong) and a.term.coeff(v) != 0]
    period = lcm(*mods) if mods else 1
    roots: list[Fraction] = []
    for a in atoms_of(psi):
        c = a.term.coeff(v)
        if c == 0 or isinstance(a, ModCong):
            continue
        rest = a.term.sub(LinTerm.var(v, c))
        roots.append(Fraction(-rest.constant, c))
        if rest.vars:
            raise FormulaError(f"more than one free variable near {a!r}")
    out: set[int] = set()
    if not roots:
        out.update(range(0, period))
    for r in roots:
        out.update(range(floor(r) - period - 1, ceil(r) + period + 2))
    return sorted(out)


def pa_model(f: Formula, budget: Optional[Budget] = None) -> Optional[dict]:
    """A satisfying integer assignment for quantifier-free f, or None."""
    _require_int_only(f)
    if not is_quantifier_free(f):
        raise FormulaError("pa_model expects a quantifier-free formula")
    f = push_negations(f)
    order = sorted(free_vars(f), key=lambda w: (w.name, w.role.value))
    stages: list[tuple[VarId, Formula]] = []
    g = f
    for v in order:
        stages.append((v, g))
        g = _eliminate(v, g, budget)
    if not evaluate(g, {}):
        return None
    sigma: dict[VarId, int] = {}
    for v, phi in reversed(stages):
        psi = phi
        for w, val in sigma.items():
            psi = substitute(psi, w, LinTerm.const(val))
        for k in _candidate_values(psi, v):
            tick(budget)
            if evaluate(psi, {v: k}):
                sigma[v] = k
                break
        else:
            raise FormulaError("model reconstruction failed; eliminator bug")
    return sigma
