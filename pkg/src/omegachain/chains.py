"""Deciding whether a transitive mixed linear relation admits an infinite
ascending chain of related points.

The relation is first brought to canonical disjunct form.  A disjunct has a
chain exactly when, for some assignment of growth modes to its variables and
atom sides, two limit-style sentences hold: a dense one about accumulation
points of the fractional coordinates in the unit box, and a discrete one
about integer coordinates escaping every bound.  Both sentences live in
decidable one-sorted theories, so the whole search is effective.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence, Union

from . import presburger, realqe
from .formulas import (
    Formula, FormulaError, Gt, LinTerm, Role, Sort, VarId,
    make_eq, mk_and, mk_exists, mk_forall, mk_not, mk_or, prime,
    push_negations, rename_free,
)
from .limits import Budget, tick
from .parser import RelationDoc
from .separation import (
    SeparatedDisjunct, frac_box, mixed_decide, mixed_model, to_canonical,
)

__all__ = [
    "Mode", "ModeVector", "HasOmegaChain", "NoOmegaChain", "NotTransitive",
    "Verdict", "enumerate_mode_vectors", "build_H", "dense_chain_exists",
    "build_G", "discrete_chain_exists", "has_omega_chain", "check_transitive",
    "extract_prefix",
]


class Mode(Enum):
    UNB_INC = "UnbInc"
    UNB_DEC = "UnbDec"
    FLAT = "Flat"
    BDD_INC = "BddInc"
    BDD_DEC = "BddDec"


_DENSE_VAR_MODES = (Mode.FLAT, Mode.BDD_INC, Mode.BDD_DEC)
_INT_VAR_MODES = (Mode.FLAT, Mode.UNB_INC, Mode.UNB_DEC)
_DENSE_PAIRS = tuple(itertools.product(_DENSE_VAR_MODES, _DENSE_VAR_MODES))
_INT_PAIRS = (
    (Mode.FLAT, Mode.FLAT),
    (Mode.UNB_INC, Mode.UNB_INC),
    (Mode.FLAT, Mode.UNB_INC),
    (Mode.UNB_DEC, Mode.UNB_INC),
    (Mode.UNB_INC, Mode.FLAT),
)

TermKey = tuple[str, int, str]


@dataclass(frozen=True)
class ModeVector:
    """Growth modes for the variables and atom-side terms of one disjunct."""

    var_modes: tuple[tuple[VarId, Mode], ...]
    term_modes: tuple[tuple[TermKey, Mode], ...]

    def var_mode(self, v: VarId) -> Mode:
        for w, m in self.var_modes:
            if w == v:
                return m
        raise KeyError(v)

    def term_mode(self, kind: str, index: int, side: str) -> Mode:
        for key, m in self.term_modes:
            if key == (kind, index, side):
                return m
        raise KeyError((kind, index, side))

    def join(self, other: "ModeVector") -> "ModeVector":
        return ModeVector(self.var_modes + other.var_modes,
                          self.term_modes + other.term_modes)

    def as_dict(self) -> dict:
        d = {v.display(): m.value for v, m in self.var_modes}
        d.update({f"{kind}[{i}].{side}": m.value
                  for (kind, i, side), m in self.term_modes})
        return d


@dataclass
class HasOmegaChain:
    disjunct: int
    modes: ModeVector
    prefix: Optional[list] = None


@dataclass
class NoOmegaChain:
    pass


@dataclass
class NotTransitive:
    counterexample: tuple[dict, dict, dict]


Verdict = Union[HasOmegaChain, NoOmegaChain, NotTransitive]


# ---------------------------------------------------------------------------
# Mode vector enumeration


def _dense_mode_vectors(d: SeparatedDisjunct) -> Iterator[ModeVector]:
    var_space = [[(v, m) for m in _DENSE_VAR_MODES] for v in d.dense_vars]
    term_space: list[list[tuple[TermKey, Mode]]] = []
    for i in range(len(d.dense_eqs)):
        term_space.append([(("deq", i, "P"), Mode.FLAT)])
        term_space.append([(("deq", i, "Q"), Mode.FLAT)])
    pair_space = [[(i, mp, mq) for mp, mq in _DENSE_PAIRS]
                  for i in range(len(d.dense_ineqs))]
    for vs in itertools.product(*var_space):
        for ts in itertools.product(*term_space):
            for ps in itertools.product(*pair_space):
                terms = list(ts)
                for i, mp, mq in ps:
                    terms.append((("dineq", i, "P"), mp))
                    terms.append((("dineq", i, "Q"), mq))
                yield ModeVector(tuple(vs), tuple(terms))


def _int_mode_vectors(d: SeparatedDisjunct) -> Iterator[ModeVector]:
    var_space = [[(v, m) for m in _INT_VAR_MODES] for v in d.int_vars]
    pair_space = [[(i, mp, mq) for mp, mq in _INT_PAIRS]
                  for i in range(len(d.int_ineqs))]
    for vs in itertools.product(*var_space):
        for ps in itertools.product(*pair_space):
            terms = []
            for i, mp, mq in ps:
                terms.append((("iineq", i, "P"), mp))
                terms.append((("iineq", i, "Q"), mq))
            yield ModeVector(tuple(vs), tuple(terms))


def enumerate_mode_vectors(d: SeparatedDisjunct) -> Iterator[ModeVector]:
    """All mode vectors satisfying the type constraints for this disjunct:
    dense symbols never unbounded, integer symbols never bounded-monotone,
    dense equation sides flat, discrete inequality sides among the five
    workable pairs."""
    for mv_int in _int_mode_vectors(d):
        for mv_dense in _dense_mode_vectors(d):
            yield mv_dense.join(mv_int)


_FLIP = {Mode.UNB_INC: Mode.UNB_DEC, Mode.UNB_DEC: Mode.UNB_INC,
         Mode.BDD_INC: Mode.BDD_DEC, Mode.BDD_DEC: Mode.BDD_INC,
         Mode.FLAT: Mode.FLAT}


def _implied(term: LinTerm, lookup) -> Optional[Mode]:
    """The only mode a term can take when its value is pinned by a single
    variable (or by having no variables); None when unconstrained."""
    if not term.coeffs:
        return Mode.FLAT
    if len(term.coeffs) > 1:
        return None
    v, a = term.coeffs[0]
    base = v if v.role is not Role.PRIMED else VarId(v.name, v.sort, Role.UNPRIMED)
    m = lookup(base)
    if m is None:
        return None
    return m if a > 0 else _FLIP[m]


def _implied_term_mode(term: LinTerm, modes: ModeVector) -> Optional[Mode]:
    def look(base: VarId) -> Optional[Mode]:
        try:
            return modes.var_mode(base)
        except KeyError:
            return None
    return _implied(term, look)


def _search_vectors(vars_: Sequence[VarId], var_pool: Sequence[Mode],
                    slots: Sequence[tuple]) -> Iterator[ModeVector]:
    """Mode vectors over the given variables and constraint slots, skipping
    any assignment where a single-variable side term cannot carry its
    variable's sign-adjusted mode.  Equivalent to filtering the full product
    through the feasibility check, without materializing the product."""
    for vm in itertools.product(var_pool, repeat=len(vars_)):
        assign = dict(zip(vars_, vm))
        per_slot: list[list[tuple]] = []
        dead = False
        for kind, i, p, q, pairs in slots:
            ip = _implied(p, assign.get)
            iq = _implied(q, assign.get)
            allowed = [(kind, i, mp, mq) for mp, mq in pairs
                       if (ip is None or ip is mp) and (iq is None or iq is mq)]
            if not allowed:
                dead = True
                break
            per_slot.append(allowed)
        if dead:
            continue
        base = tuple(zip(vars_, vm))
        for combo in itertools.product(*per_slot):
            terms = []
            for kind, i, mp, mq in combo:
                terms.append(((kind, i, "P"), mp))
                terms.append(((kind, i, "Q"), mq))
            yield ModeVector(base, tuple(terms))


def _dense_search_vectors(d: SeparatedDisjunct) -> Iterator[ModeVector]:
    slots = [("deq", i, p, q, ((Mode.FLAT, Mode.FLAT),))
             for i, (p, q, _) in enumerate(d.dense_eqs)]
    slots += [("dineq", i, p, q, _DENSE_PAIRS)
              for i, (p, q, _) in enumerate(d.dense_ineqs)]
    return _search_vectors(d.dense_vars, _DENSE_VAR_MODES, slots)


def _int_search_vectors(d: SeparatedDisjunct) -> Iterator[ModeVector]:
    slots = [("iineq", i, p, q, _INT_PAIRS)
             for i, (p, q, _) in enumerate(d.int_ineqs)]
    return _search_vectors(d.int_vars, _INT_VAR_MODES, slots)


def _feasible(d: SeparatedDisjunct, modes: ModeVector, dense: bool) -> bool:
    """Cheap necessary check: a side term determined by a single variable
    must carry that variable's (sign-adjusted) mode.  Vectors failing it
    always fail the full decision, so skipping them is sound."""
    if dense:
        slots = [("deq", d.dense_eqs), ("dineq", d.dense_ineqs)]
    else:
        slots = [("iineq", d.int_ineqs)]
    for kind, entries in slots:
        for i, (p, q, _) in enumerate(entries):
            for side, term in (("P", p), ("Q", q)):
                implied = _implied_term_mode(term, modes)
                if implied is not None and \
                        modes.term_mode(kind, i, side) is not implied:
                    return False
    return True


# ---------------------------------------------------------------------------
# Dense side: accumulation-point sentence


def _copy(v: VarId, tag: str) -> VarId:
    return VarId(f"{v.name}__{tag}", v.sort, Role.BOUND)


def _copy_map(vars: Sequence[VarId], tag: str) -> dict[VarId, VarId]:
    ren = {}
    for v in vars:
        c = _copy(v, tag)
        ren[v] = c
        ren[prime(v)] = c
    return ren


def _inst(term: LinTerm, ren: dict[VarId, VarId]) -> LinTerm:
    return term.map_vars(ren)


def _geq(t: LinTerm) -> Formula:
    return mk_or([Gt(t), make_eq(t)])


def build_H(d: SeparatedDisjunct, modes: ModeVector) -> Formula:
    """The dense consistency conjunction over three copies of the fractional
    variables: the candidate limit (tag u), an earlier chain point (tag a),
    and a later one (tag b)."""
    u = _copy_map(d.dense_vars, "u")
    a = _copy_map(d.dense_vars, "a")
    b = _copy_map(d.dense_vars, "b")
    parts: list[Formula] = []

    for v in d.dense_vars:
        m = modes.var_mode(v)
        tu, ta, tb = (LinTerm.var(u[v]), LinTerm.var(a[v]), LinTerm.var(b[v]))
        if m is Mode.FLAT:
            parts.append(make_eq(ta.sub(tb)))
            parts.append(make_eq(tb.sub(tu)))
        elif m is Mode.BDD_INC:
            parts.append(Gt(tb.sub(ta)))
            parts.append(_geq(tu.sub(tb)))
        elif m is Mode.BDD_DEC:
            parts.append(Gt(ta.sub(tb)))
            parts.append(_geq(tb.sub(tu)))
        else:
            raise FormulaError(f"dense variable {v!r} cannot be {m.value}")

    for i, (p, q, c) in enumerate(d.dense_eqs):
        for side in ("P", "Q"):
            if modes.term_mode("deq", i, side) is not Mode.FLAT:
                raise FormulaError("dense equation sides must be flat")
        pu, qu = _inst(p, u), _inst(q, u)
        parts.append(make_eq(pu.add(qu).shift(-c)))
        for s, su in ((p, pu), (q, qu)):
            parts.append(make_eq(_inst(s, a).sub(su)))
            parts.append(make_eq(_inst(s, b).sub(su)))

    for i, (p, q, c) in enumerate(d.dense_ineqs):
        mp = modes.term_mode("dineq", i, "P")
        mq = modes.term_mode("dineq", i, "Q")
        for term, m in ((p, mp), (q, mq)):
            ta, tb, tu = _inst(term, a), _inst(term, b), _inst(term, u)
            if m is Mode.BDD_INC:
                parts.append(Gt(tb.sub(ta)))
                parts.append(Gt(tu.sub(tb)))
            elif m is Mode.FLAT:
                parts.append(make_eq(ta.sub(tb)))
                parts.append(make_eq(tb.sub(tu)))
            elif m is Mode.BDD_DEC:
                parts.append(Gt(ta.sub(tb)))
                parts.append(Gt(tb.sub(tu)))
            else:
                raise FormulaError(f"dense term cannot be {m.value}")
        limit = _inst(p, u).add(_inst(q, u)).shift(-c)
        strict = mp is Mode.BDD_INC or \
            (mp is Mode.FLAT and mq is not Mode.BDD_DEC)
        parts.append(Gt(limit) if strict else _geq(limit))

    return mk_and(parts)


def dense_chain_exists(d: SeparatedDisjunct, modes: ModeVector,
                       budget: Optional[Budget] = None) -> bool:
    """Whether the dense part admits a chain of the given modes: some point
    of the closed unit box is approached arbitrarily closely, from inside
    the half-open box, by pairs of chain points consistent with H."""
    if not d.dense_eqs and not d.dense_ineqs:
        return True
    h = build_H(d, modes)
    u = _copy_map(d.dense_vars, "u")
    a = _copy_map(d.dense_vars, "a")
    b = _copy_map(d.dense_vars, "b")
    d1 = VarId("tol__a", Sort.REAL, Role.BOUND)
    d2 = VarId("tol__b", Sort.REAL, Role.BOUND)

    def near(copy: dict, tol: VarId) -> list[Formula]:
        out = []
        for v in d.dense_vars:
            diff = LinTerm.var(copy[v]).sub(LinTerm.var(u[v]))
            out.append(Gt(LinTerm.var(tol).sub(diff)))
            out.append(Gt(LinTerm.var(tol).add(diff)))
        return out

    def closed_box(w: VarId) -> Formula:
        t = LinTerm.var(w)
        return mk_and([_geq(t), _geq(t.neg().shift(1))])

    inner = mk_and([frac_box(b[v]) for v in d.dense_vars]
                   + near(b, d2) + [h])
    for v in d.dense_vars:
        inner = mk_exists(b[v], inner)
    inner = mk_forall(d2, mk_or([mk_not(Gt(LinTerm.var(d2))), inner]))
    inner = mk_and([frac_box(a[v]) for v in d.dense_vars]
                   + near(a, d1) + [inner])
    for v in d.dense_vars:
        inner = mk_exists(a[v], inner)
    inner = mk_forall(d1, mk_or([mk_not(Gt(LinTerm.var(d1))), inner]))
    inner = mk_and([closed_box(u[v]) for v in d.dense_vars] + [inner])
    for v in d.dense_vars:
        inner = mk_exists(u[v], inner)
    return realqe.ra_decide(inner, budget)


# ---------------------------------------------------------------------------
# Discrete side: escape-every-bound sentence


def build_G(d: SeparatedDisjunct, modes: ModeVector) -> Formula:
    """The discrete consistency conjunction over an earlier chain point
    (tag v), a later one (tag w), a bound k, and flat-value constants."""
    if d.int_mods:
        raise FormulaError("congruences must be eliminated before the chain test")
    v_map = _copy_map(d.int_vars, "v")
    w_map = _copy_map(d.int_vars, "w")
    k = LinTerm.var(VarId("bound__k", Sort.INT, Role.BOUND))
    parts: list[Formula] = []

    for y in d.int_vars:
        m = modes.var_mode(y)
        tv, tw = LinTerm.var(v_map[y]), LinTerm.var(w_map[y])
        if m is Mode.UNB_INC:
            parts.append(Gt(tw.sub(tv)))
            parts.append(Gt(tv.sub(k)))
        elif m is Mode.FLAT:
            cy = LinTerm.var(VarId(f"{y.name}__c", Sort.INT, Role.BOUND))
            parts.append(make_eq(tv.sub(cy)))
            parts.append(make_eq(tw.sub(cy)))
        elif m is Mode.UNB_DEC:
            parts.append(Gt(tv.sub(tw)))
            parts.append(Gt(k.neg().sub(tv)))
        else:
            raise FormulaError(f"integer variable {y!r} cannot be {m.value}")

    for i, (p, q, c) in enumerate(d.int_ineqs):
        mp = modes.term_mode("iineq", i, "P")
        mq = modes.term_mode("iineq", i, "Q")
        if (mp, mq) not in _INT_PAIRS:
            raise FormulaError(f"discrete pair ({mp.value},{mq.value}) unusable")
        parts.append(Gt(_inst(p, v_map).add(_inst(q, w_map)).shift(-c)))
        for side, term, m in (("P", p, mp), ("Q", q, mq)):
            tv, tw = _inst(term, v_map), _inst(term, w_map)
            if m is Mode.UNB_INC:
                parts.append(Gt(tv.sub(k)))
                parts.append(Gt(tw.sub(tv)))
            elif m is Mode.UNB_DEC:
                parts.append(Gt(k.neg().sub(tv)))
                parts.append(Gt(tv.sub(tw)))
            else:
                name = f"{'p' if side == 'P' else 'q'}{i}__c"
                cv = LinTerm.var(VarId(name, Sort.INT, Role.BOUND))
                parts.append(make_eq(tv.sub(cv)))
                parts.append(make_eq(tw.sub(cv)))

    return mk_and(parts)


def discrete_chain_exists(d: SeparatedDisjunct, modes: ModeVector,
                          budget: Optional[Budget] = None) -> bool:
    """Whether the discrete part admits a chain of the given modes: for
    every bound there are two chain points past it consistent with G; the
    flat-value constants are chosen once, outside the bound quantifier."""
    if not d.int_ineqs:
        return True
    g = build_G(d, modes)
    body = g
    for y in d.int_vars:
        body = mk_exists(_copy(y, "v"), body)
        body = mk_exists(_copy(y, "w"), body)
    sentence = mk_forall(VarId("bound__k", Sort.INT, Role.BOUND), body)
    return presburger.pa_decide(sentence, budget)


# ---------------------------------------------------------------------------
# Transitivity


def _triple_maps(r: RelationDoc) -> tuple[dict, dict, dict]:
    def tagged(tag: str) -> dict[VarId, VarId]:
        return {v: VarId(f"{v.name}__{tag}", v.sort, Role.UNPRIMED)
                for v in r.vars}
    return tagged("ta"), tagged("tb"), tagged("tc")


def _pair_formula(r: RelationDoc, src: dict, dst: dict) -> Formula:
    ren = dict(src)
    ren.update({prime(v): dst[v] for v in r.vars})
    return rename_free(r.body, ren)


def check_transitive(r: RelationDoc, budget: Optional[Budget] = None
                     ) -> tuple[bool, Optional[tuple[dict, dict, dict]]]:
    """Validity of chaining: related pairs (a,b) and (b,c) force (a,c).
    On failure the returned triple of assignments over the relation's
    variables witnesses the violation."""
    amap, bmap, cmap = _triple_maps(r)
    bad = mk_and([
        _pair_formula(r, amap, bmap),
        _pair_formula(r, bmap, cmap),
        push_negations(mk_not(_pair_formula(r, amap, cmap))),
    ])
    if not mixed_decide(bad, budget):
        return True, None
    sigma = mixed_model(bad, budget)
    if sigma is None:
        raise FormulaError("transitivity witness extraction failed")
    def pick(m: dict) -> dict:
        out = {}
        for v in r.vars:
            val = sigma.get(m[v], 0)
            out[v] = int(val) if v.sort is Sort.INT else val
        return out
    return False, (pick(amap), pick(bmap), pick(cmap))


# ---------------------------------------------------------------------------
# Main decision


def has_omega_chain(r: RelationDoc, *, check_transitivity: bool = True,
                    budget: Optional[Budget] = None,
                    stats: Optional[dict] = None) -> Verdict:
    """Decide whether the relation relates some infinite forward sequence.

    The relation must be transitive; that is verified first unless the
    caller vouches for it.  The verdict names the accepting disjunct and
    mode vector when a chain exists.
    """
    started = time.monotonic()
    st = {"disjuncts": 0, "mode_vectors_checked": 0}
    try:
        if check_transitivity:
            ok, cex = check_transitive(r, budget)
            if not ok:
                return NotTransitive(cex)
        disjuncts = to_canonical(r, budget)
        st["disjuncts"] = len(disjuncts)
        for i, d in enumerate(disjuncts):
            accepted_int: Optional[ModeVector] = None
            for mv in _int_search_vectors(d):
                tick(budget)
                st["mode_vectors_checked"] += 1
                if discrete_chain_exists(d, mv, budget):
                    accepted_int = mv
                    break
            if accepted_int is None:
                continue
            for mv in _dense_search_vectors(d):
                tick(budget)
                st["mode_vectors_checked"] += 1
                if dense_chain_exists(d, mv, budget):
                    return HasOmegaChain(i, mv.join(accepted_int))
        return NoOmegaChain()
    finally:
        st["elapsed_ms"] = int((time.monotonic() - started) * 1000)
        if stats is not None:
            stats.update(st)


# ---------------------------------------------------------------------------
# Witness prefixes


def extract_prefix(r: RelationDoc, verdict: Verdict, n: int = 5,
                   budget: Optional[Budget] = None) -> list[dict]:
    """n assignments over the relation's variables forming a pairwise
    related sequence, pulled from the accepting disjunct in one query."""
    if not isinstance(verdict, HasOmegaChain):
        raise ValueError("prefix extraction needs an accepting verdict")
    if n < 2:
        raise ValueError("a prefix needs at least two points")
    d = to_canonical(r, budget)[verdict.disjunct]
    all_vars = d.dense_vars + d.int_vars

    def point_map(i: int) -> dict[VarId, VarId]:
        return {v: VarId(f"{v.name}__pt{i}", v.sort, Role.UNPRIMED)
                for v in all_vars}
    pts = [point_map(i) for i in range(n)]
    body = d.formula()
    parts: list[Formula] = []
    for i in range(n):
        for j in range(i + 1, n):
            ren = dict(pts[i])
            ren.update({prime(v): pts[j][v] for v in all_vars})
            parts.append(rename_free(body, ren))
    for i in range(n):
        for v in d.dense_vars:
            parts.append(frac_box(pts[i][v]))
    query = mk_and(parts)

    dense_atoms: list[Formula] = []
    int_atoms: list[Formula] = []
    _split_pure(query, dense_atoms, int_atoms)
    m_int = presburger.pa_model(mk_and(int_atoms), budget)
    m_real = realqe.ra_model(mk_and(dense_atoms), budget)
    if m_int is None or m_real is None:
        raise FormulaError("accepted disjunct rejected its own prefix query")
    sigma = {**m_int, **m_real}

    out = []
    for i in range(n):
        local = {v: sigma.get(pts[i][v], 0) for v in all_vars}
        point = {}
        for orig, term in d.rebuild:
            val = term.value(local)
            point[orig] = int(val) if orig.sort is Sort.INT else val
        out.append(point)
    return out


def _split_pure(f: Formula, dense: list, ints: list) -> None:
    """Partition a pure conjunction-of-anything formula by atom sort."""
    from .formulas import And, Or, atoms_of
    if isinstance(f, And):
        for g in f.args:
            _split_pure(g, dense, ints)
        return
    sorts = set()
    for a in atoms_of(f):
        sorts.update(a.term.sorts())
    if Sort.REAL in sorts and Sort.INT in sorts:
        raise FormulaError("prefix query mixes sorts inside one clause")
    (dense if Sort.REAL in sorts else ints).append(f)
