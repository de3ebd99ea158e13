"""Splitting mixed formulas into pure-real and pure-integer parts.

Every real variable x is replaced by an integer part plus a fractional part
in [0,1).  An atom that still mixes fractional and integer variables is then
case-split on the integer floor of its fractional subsum, which ranges over
finitely many values.  On top of that sit a full mixed quantifier
eliminator, a mod-constraint eliminator, and the conversion of a relation
into its canonical disjunct list (pure dense equations and strict
inequalities, pure discrete strict inequalities, congruences removed).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from . import presburger, realqe
from .formulas import (
    And, Atom, Eq, Exists, FalseF, Forall, Formula, FormulaError, Gt, LinTerm,
    ModCong, Not, Or, Role, Sort, SortError, TrueF, VarId,
    atoms_of, evaluate, fold_ground, free_vars, fresh_var, is_quantifier_free,
    make_eq, map_atoms, mk_and, mk_exists, mk_forall, mk_not, mk_or, prime,
    push_negations, substitute, to_dnf, unprime,
)
from .limits import Budget, tick
from .parser import RelationDoc

__all__ = [
    "SplitVar", "SeparatedDisjunct", "separate_qf", "mixed_qe",
    "eliminate_mods", "to_canonical", "mixed_decide", "mixed_model",
    "frac_box",
]


@dataclass(frozen=True)
class SplitVar:
    """x = int_part + frac_part with 0 <= frac_part < 1."""

    original: VarId
    int_part: VarId
    frac_part: VarId


@dataclass(frozen=True)
class SeparatedDisjunct:
    """One conjunction of the canonical disjunct list.

    Entries are (P, Q, c) with P constant-free over unprimed variables and Q
    constant-free over primed ones, read as P + Q = c, P + Q > c, or
    P + Q congruent to c mod d.  Dense variables range over [0,1) implicitly;
    that box is part of the disjunct's domain, not of its atom lists.
    rebuild maps each original unprimed relation variable to a term over
    this disjunct's unprimed variables (undoing splits and residue shifts).
    """

    dense_vars: tuple[VarId, ...] = ()
    int_vars: tuple[VarId, ...] = ()
    dense_eqs: tuple[tuple[LinTerm, LinTerm, int], ...] = ()
    dense_ineqs: tuple[tuple[LinTerm, LinTerm, int], ...] = ()
    int_ineqs: tuple[tuple[LinTerm, LinTerm, int], ...] = ()
    int_mods: tuple[tuple[LinTerm, LinTerm, int, int], ...] = ()
    rebuild: tuple[tuple[VarId, LinTerm], ...] = ()

    def formula(self) -> Formula:
        """The conjunction the disjunct denotes (box not included)."""
        parts: list[Formula] = []
        for p, q, c in self.dense_eqs:
            parts.append(make_eq(p.add(q).shift(-c)))
        for p, q, c in self.dense_ineqs + self.int_ineqs:
            parts.append(Gt(p.add(q).shift(-c)))
        for p, q, d, c in self.int_mods:
            parts.append(ModCong(p.add(q), d, c % d))
        return mk_and(parts)


def frac_box(v: VarId) -> Formula:
    """0 <= v < 1 for a fractional variable."""
    t = LinTerm.var(v)
    return mk_and([mk_or([Gt(t), make_eq(t)]), Gt(t.neg().shift(1))])


# ---------------------------------------------------------------------------
# Atom-level separation


def _is_frac(v: VarId) -> bool:
    return v.sort is Sort.REAL


def _split_atom(a: Atom, budget: Optional[Budget]) -> Formula:
    """Case-split one mixed atom on the floor of its fractional subsum."""
    frac = a.term.part(_is_frac)
    if not frac.coeffs:
        return a
    if isinstance(a, ModCong):
        raise SortError("congruence atom contains a fractional variable")
    whole = a.term.sub(frac)
    if not whole.vars:
        # no integer variable: the atom is already pure
        return a
    lo = sum(c for _, c in frac.coeffs if c < 0)
    hi = sum(c for _, c in frac.coeffs if c > 0)
    k_min = lo if lo < 0 else 0
    k_max = hi - 1 if hi > 0 else 0
    if isinstance(a, Eq):
        k_min = lo + 1 if lo < 0 else 0
        branches = []
        for k in range(k_min, k_max + 1):
            tick(budget)
            branches.append(mk_and([make_eq(frac.shift(-k)),
                                    make_eq(whole.shift(k))]))
        return mk_or(branches)
    branches = []
    single = k_min == k_max == 0 and lo == 0 and hi <= 1
    for k in range(k_min, k_max + 1):
        tick(budget)
        body = mk_or([Gt(whole.shift(k)),
                      mk_and([make_eq(whole.shift(k)), Gt(frac.shift(-k))])])
        if single:
            branches.append(body)
            continue
        fl = frac.shift(-k)
        floor_is_k = mk_and([mk_or([Gt(fl), make_eq(fl)]),
                             Gt(fl.neg().shift(1))])
        branches.append(mk_and([floor_is_k, body]))
    return mk_or(branches)


def separate_qf(f: Formula, splits: Sequence[SplitVar],
                budget: Optional[Budget] = None) -> Formula:
    """Rewrite a quantifier-free negation-normal mixed formula so every atom
    is pure (no atom mentions both fractional and integer variables).

    All real variables of f must be fractional parts registered in splits
    (callers substitute x -> int_part + frac_part beforehand); equivalence
    holds for fractional values in [0,1).
    """
    allowed = set()
    for s in splits:
        allowed.add(s.frac_part)
        if s.frac_part.role is Role.UNPRIMED:
            allowed.add(prime(s.frac_part))
    for a in atoms_of(f):
        for v in a.term.vars:
            if v.sort is Sort.REAL and v not in allowed:
                raise FormulaError(f"unregistered real variable {v!r}")
    return map_atoms(f, lambda a: _split_atom(a, budget))


# ---------------------------------------------------------------------------
# Mixed quantifier elimination


def _collect_names(f: Formula, acc: set) -> None:
    if isinstance(f, (Eq, Gt, ModCong)):
        for v in f.term.vars:
            acc.add(v.name)
    elif isinstance(f, Not):
        _collect_names(f.arg, acc)
    elif isinstance(f, (And, Or)):
        for g in f.args:
            _collect_names(g, acc)
    elif isinstance(f, (Exists, Forall)):
        acc.add(f.var.name)
        _collect_names(f.body, acc)


def _free_split_vars(bases: Sequence[VarId], taken: set) -> list[SplitVar]:
    out = []
    for x in bases:
        parts = []
        for suffix in ("_i", "_f"):
            name = x.name + suffix
            n = 1
            while name in taken:
                n += 1
                name = f"{x.name}{suffix}{n}"
            taken.add(name)
            parts.append(name)
        out.append(SplitVar(
            x,
            VarId(parts[0], Sort.INT, Role.UNPRIMED),
            VarId(parts[1], Sort.REAL, Role.UNPRIMED),
        ))
    return out


def _apply_split(f: Formula, s: SplitVar) -> Formula:
    both = LinTerm.make({s.int_part: 1, s.frac_part: 1})
    f = substitute(f, s.original, both)
    if s.original.role is Role.UNPRIMED:
        primed = LinTerm.make({prime(s.int_part): 1, prime(s.frac_part): 1})
        f = substitute(f, prime(s.original), primed)
    return f


def _split_quantifiers(f: Formula, acc: list[SplitVar]) -> Formula:
    """Rewrite every real quantifier as an integer-part/fractional-part
    quantifier pair, recording the introduced splits.  Bodies are rewritten
    innermost first so nested real quantifiers all disappear."""
    if isinstance(f, (Eq, Gt, ModCong, TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return mk_not(_split_quantifiers(f.arg, acc))
    if isinstance(f, And):
        return mk_and([_split_quantifiers(g, acc) for g in f.args])
    if isinstance(f, Or):
        return mk_or([_split_quantifiers(g, acc) for g in f.args])
    body = _split_quantifiers(f.body, acc)
    v = f.var
    if v.sort is Sort.INT:
        return (mk_exists if isinstance(f, Exists) else mk_forall)(v, body)
    vi = fresh_var(v.name + "_i", Sort.INT)
    vf = fresh_var(v.name + "_f", Sort.REAL)
    acc.append(SplitVar(v, vi, vf))
    sub = substitute(body, v, LinTerm.make({vi: 1, vf: 1}))
    box = frac_box(vf)
    if isinstance(f, Exists):
        return mk_exists(vi, mk_exists(vf, mk_and([box, sub])))
    return mk_forall(vi, mk_forall(vf, mk_or([push_negations(mk_not(box)),
                                              sub])))


def _qe_mixed(f: Formula, budget: Optional[Budget]) -> Formula:
    """Eliminate quantifiers from a separated formula (every atom pure and
    every quantified variable single-sorted), innermost first."""
    if isinstance(f, (Eq, Gt, ModCong, TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return mk_not(_qe_mixed(f.arg, budget))
    if isinstance(f, And):
        return mk_and([_qe_mixed(g, budget) for g in f.args])
    if isinstance(f, Or):
        return mk_or([_qe_mixed(g, budget) for g in f.args])
    if isinstance(f, Forall):
        body = push_negations(mk_not(_qe_mixed(f.body, budget)))
        return mk_not(_eliminate_any(f.var, body, budget))
    return _eliminate_any(f.var, _qe_mixed(f.body, budget), budget)


def _eliminate_any(v: VarId, body: Formula,
                   budget: Optional[Budget]) -> Formula:
    if v.sort is Sort.INT:
        return presburger._eliminate(v, body, budget)
    return realqe._eliminate(v, body, budget)


def _has_real(f: Formula) -> bool:
    for a in atoms_of(f):
        if any(v.sort is Sort.REAL for v in a.term.vars):
            return True
    return _any_real_quantifier(f)


def _any_real_quantifier(f: Formula) -> bool:
    if isinstance(f, (Exists, Forall)):
        return f.var.sort is Sort.REAL or _any_real_quantifier(f.body)
    if isinstance(f, Not):
        return _any_real_quantifier(f.arg)
    if isinstance(f, (And, Or)):
        return any(_any_real_quantifier(g) for g in f.args)
    return False


def _separate_full(f: Formula, split_bases: Sequence[VarId],
                   budget: Optional[Budget]) -> tuple[Formula, tuple[SplitVar, ...]]:
    """Split the given free real variables, eliminate quantifiers, separate."""
    taken: set = set()
    _collect_names(f, taken)
    splits = _free_split_vars(split_bases, taken)
    g = f
    for s in splits:
        g = _apply_split(g, s)
    qsplits: list[SplitVar] = []
    g = _split_quantifiers(g, qsplits)
    g = separate_qf(push_negations(g), list(splits) + qsplits, budget)
    g = _qe_mixed(g, budget)
    return fold_ground(g), tuple(splits)


def _free_real_bases(f: Formula) -> list[VarId]:
    bases = set()
    for v in free_vars(f):
        if v.sort is Sort.REAL:
            bases.add(unprime(v) if v.role is Role.PRIMED else v)
    return sorted(bases, key=lambda v: (v.name, v.role.value))


def mixed_qe(f: Formula, budget: Optional[Budget] = None
             ) -> tuple[Formula, tuple[SplitVar, ...]]:
    """Quantifier-free separated equivalent of f over its free variables.

    Free real variables are split; the returned SplitVars document the
    replacement and the result carries their 0 <= frac < 1 boxes as explicit
    conjuncts.  A quantifier-free formula without real variables is returned
    unchanged.
    """
    if is_quantifier_free(f) and not _has_real(f):
        return f, ()
    frees = free_vars(f)
    g, splits = _separate_full(f, _free_real_bases(f), budget)
    boxes = []
    for s in splits:
        if s.original in frees:
            boxes.append(frac_box(s.frac_part))
        if prime(s.original) in frees:
            boxes.append(frac_box(prime(s.frac_part)))
    return mk_and([g] + boxes), splits


# ---------------------------------------------------------------------------
# Mod-constraint elimination


def _subst_conj(conj: list[Atom], v: VarId, num: LinTerm) -> Optional[list[Atom]]:
    """Substitute v in every atom; None when some atom folds to false."""
    out = []
    for a in conj:
        g = substitute(a, v, num)
        if isinstance(g, FalseF):
            return None
        if isinstance(g, TrueF):
            continue
        g = fold_ground(g)
        if isinstance(g, FalseF):
            return None
        if isinstance(g, TrueF):
            continue
        out.append(g)
    return out


def _mod_targets(conj: Sequence[Atom]) -> tuple[list[VarId], int]:
    targets: list[VarId] = []
    seen = set()
    mods = []
    for a in conj:
        if isinstance(a, ModCong):
            mods.append(a.modulus)
            for v in a.term.vars:
                if v not in seen:
                    seen.add(v)
                    targets.append(v)
    return targets, (lcm(*mods) if mods else 1)


def eliminate_mods(disjuncts: list[list[Atom]],
                   budget: Optional[Budget] = None) -> list[list[Atom]]:
    """Replace each congruence-constrained variable y by d*z + r for every
    residue r, where d is the least common multiple of the conjunction's
    moduli; branches contradicting a congruence are dropped as they appear.
    """
    out: list[list[Atom]] = []
    for conj in disjuncts:
        targets, d = _mod_targets(conj)
        if not targets:
            out.append(list(conj))
            continue
        frontier = [conj]
        for v in targets:
            z = fresh_var(v.name + "_z", Sort.INT, v.role)
            nxt = []
            for branch in frontier:
                for r in range(d):
                    tick(budget)
                    sub = _subst_conj(branch, v,
                                      LinTerm.var(z, d).shift(r))
                    if sub is not None:
                        nxt.append(sub)
            frontier = nxt
            if not frontier:
                break
        out.extend(frontier)
    return out


def _eliminate_mods_diagonal(conj: list[Atom], budget: Optional[Budget]
                             ) -> list[tuple[list[Atom], dict[VarId, tuple[VarId, int, int]]]]:
    """Like eliminate_mods, but an unprimed variable and its primed copy
    share one residue, so chains through the output branch lift exactly to
    chains of the input.  Returns (branch, {base: (z, d, r)}) pairs.
    """
    raw_targets, d = _mod_targets(conj)
    bases: list[VarId] = []
    seen = set()
    for v in raw_targets:
        b = unprime(v) if v.role is Role.PRIMED else v
        if b not in seen:
            seen.add(b)
            bases.append(b)
    if not bases:
        return [(list(conj), {})]
    frontier: list[tuple[list[Atom], dict]] = [(list(conj), {})]
    for b in bases:
        z = fresh_var(b.name + "_z", Sort.INT, Role.UNPRIMED)
        nxt = []
        for branch, info in frontier:
            for r in range(d):
                tick(budget)
                sub = _subst_conj(branch, b, LinTerm.var(z, d).shift(r))
                if sub is None:
                    continue
                sub = _subst_conj(sub, prime(b),
                                  LinTerm.var(prime(z), d).shift(r))
                if sub is None:
                    continue
                nxt.append((sub, {**info, b: (z, d, r)}))
        frontier = nxt
        if not frontier:
            break
    return frontier


# ---------------------------------------------------------------------------
# Canonical form


def _part_roles(t: LinTerm) -> tuple[LinTerm, LinTerm]:
    p = t.part(lambda v: v.role is Role.UNPRIMED)
    q = t.part(lambda v: v.role is Role.PRIMED)
    if len(p.coeffs) + len(q.coeffs) != len(t.coeffs):
        raise FormulaError(f"stray bound variable in canonical atom over {t!r}")
    return p, q


def _shape_disjunct(conj: list[Atom], dense_vars: tuple[VarId, ...],
                    int_vars: tuple[VarId, ...],
                    rebuild: tuple[tuple[VarId, LinTerm], ...]
                    ) -> SeparatedDisjunct:
    dense_eqs = []
    dense_ineqs = []
    int_ineqs = []
    int_mods = []
    for a in conj:
        sorts = a.term.sorts()
        if Sort.REAL in sorts and Sort.INT in sorts:
            raise FormulaError(f"mixed atom survived separation: {a!r}")
        dense = Sort.REAL in sorts
        p, q = _part_roles(a.term)
        c = -a.term.constant
        if isinstance(a, ModCong):
            int_mods.append((p, q, a.modulus, (a.residue - a.term.constant)
                             % a.modulus))
        elif isinstance(a, Eq):
            if dense:
                dense_eqs.append((p, q, c))
            else:
                # t = 0 over integers becomes t > -1 and -t > -1
                int_ineqs.append((p, q, c - 1))
                int_ineqs.append((p.neg(), q.neg(), -c - 1))
        else:
            (dense_ineqs if dense else int_ineqs).append((p, q, c))
    return SeparatedDisjunct(
        dense_vars=dense_vars,
        int_vars=int_vars,
        dense_eqs=tuple(dense_eqs),
        dense_ineqs=tuple(dense_ineqs),
        int_ineqs=tuple(int_ineqs),
        int_mods=tuple(int_mods),
        rebuild=rebuild,
    )


def to_canonical(relation: RelationDoc,
                 budget: Optional[Budget] = None) -> list[SeparatedDisjunct]:
    """The relation as a list of pure, congruence-free canonical disjuncts.

    Congruences are removed with one shared residue per unprimed/primed
    variable pair, which preserves chain structure branch by branch; integer
    equalities become paired strict inequalities; every disjunct carries the
    full variable inventory of the relation, mentioned or not.
    """
    g, splits = _separate_full(relation.body, relation.reals, budget)
    base_rebuild: list[tuple[VarId, LinTerm]] = []
    for s in splits:
        base_rebuild.append((s.original,
                             LinTerm.make({s.int_part: 1, s.frac_part: 1})))
    dense_vars = tuple(s.frac_part for s in splits)
    base_int_vars = tuple(v for s in splits for v in (s.int_part,)) + relation.ints

    nnf = push_negations(fold_ground(g))
    conjs = to_dnf(nnf, check=(budget.tick if budget is not None else None))

    out: list[SeparatedDisjunct] = []
    for conj in conjs:
        for branch, info in _eliminate_mods_diagonal(conj, budget):
            int_vars = tuple(info[v][0] if v in info else v
                             for v in base_int_vars)
            rebuild = list(base_rebuild)
            for y in relation.ints:
                if y in info:
                    z, d, r = info[y]
                    rebuild.append((y, LinTerm.var(z, d).shift(r)))
                else:
                    rebuild.append((y, LinTerm.var(y)))
            sd = _shape_disjunct(branch, dense_vars, int_vars, tuple(rebuild))
            if sd.int_mods:
                raise FormulaError("congruence survived mod elimination")
            out.append(sd)
    return out


# ---------------------------------------------------------------------------
# Decisions and models for arbitrary mixed formulas


def mixed_decide(f: Formula, budget: Optional[Budget] = None) -> bool:
    """Truth of a mixed sentence; free variables read as existential."""
    g, _ = mixed_qe(f, budget)
    reals = sorted((v for v in free_vars(g) if v.sort is Sort.REAL),
                   key=lambda v: (v.name, v.role.value))
    for v in reals:
        g = realqe._eliminate(v, push_negations(g), budget)
    ints = sorted((v for v in free_vars(g) if v.sort is Sort.INT),
                  key=lambda v: (v.name, v.role.value))
    for v in ints:
        g = presburger._eliminate(v, push_negations(g), budget)
    return evaluate(fold_ground(g), {})


def mixed_model(f: Formula, budget: Optional[Budget] = None) -> Optional[dict]:
    """A satisfying assignment over f's free variables, or None.

    Values are ints for integer variables and Fractions for real ones,
    reassembled from the separated parts.
    """
    g, splits = mixed_qe(f, budget)
    nnf = push_negations(g)
    part_of = {}
    for s in splits:
        part_of.setdefault(s.original, s)
    for conj in to_dnf(nnf, check=(budget.tick if budget is not None else None)):
        dense = [a for a in conj if Sort.REAL in a.term.sorts()]
        ints = [a for a in conj if a not in dense]
        m_int = presburger.pa_model(mk_and(list(ints)), budget)
        if m_int is None:
            continue
        m_real = realqe.ra_model(mk_and(list(dense)), budget)
        if m_real is None:
            continue
        sigma: dict[VarId, object] = {}
        sigma.update(m_int)
        sigma.update(m_real)
        out: dict[VarId, object] = {}
        for v in free_vars(f):
            base = unprime(v) if v.role is Role.PRIMED else v
            if base in part_of:
                s = part_of[base]
                ip, fp = s.int_part, s.frac_part
                if v.role is Role.PRIMED:
                    ip, fp = prime(ip), prime(fp)
                out[v] = Fraction(sigma.get(ip, 0)) + Fraction(sigma.get(fp, 0))
            else:
                out[v] = sigma.get(v, 0 if v.sort is Sort.INT else Fraction(0))
        return out
    return None
