"""Verification queries over mixed linear counter systems.

A system hands us its transitive binary reachability as a relation document
plus initial/liveness/safety/bound data.  Staged safety reduces to one
satisfiability question.  Liveness, eventuality, and unboundedness compile a
derived transitive relation whose infinite chains are exactly the claimed
executions, then ask the chain engine.  A finite-domain oracle answers the
same question by brute force for boxed integer relations so the engine can
be cross-checked.
"""
from __future__ import annotations

import itertools
from typing import Optional, Sequence, Union

import numpy as np

from .chains import HasOmegaChain, Verdict, check_transitive, has_omega_chain
from .formulas import (
    And, Eq, Formula, FormulaError, Gt, LinTerm, ModCong, Not, Or, Role,
    Sort, TRUE, TrueF, FalseF, VarId, evaluate, make_eq, mk_and, mk_exists,
    mk_forall, mk_not, mk_or, prime, push_negations, rename_free,
)
from .limits import Budget, ResourceLimit, tick
from .parser import RelationDoc, SystemDoc
from .separation import mixed_decide

__all__ = [
    "SystemDoc", "PreconditionError", "decide_k_safety", "decide_k_liveness",
    "decide_eventuality", "exists_unbounded_execution", "decide_boundedness",
    "decide_reachable_bound", "finite_domain_oracle",
]


class PreconditionError(Exception):
    """A query's standing assumption failed, e.g. reach is not transitive."""

    def __init__(self, message: str, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


def _require_transitive(sys: SystemDoc, trust: bool,
                        budget: Optional[Budget]) -> None:
    if trust:
        return
    ok, cex = check_transitive(sys.reach, budget)
    if not ok:
        raise PreconditionError("reach relation is not transitive", cex)


def _tagged(r: RelationDoc, tag: str) -> dict[VarId, VarId]:
    return {v: VarId(f"{v.name}__{tag}", v.sort, Role.BOUND) for v in r.vars}


def _at(f: Formula, point: dict[VarId, VarId]) -> Formula:
    """f, stated over unprimed variables, instantiated at the given point."""
    return rename_free(f, point)


def _step(r: RelationDoc, src: dict[VarId, VarId],
          dst: dict[VarId, VarId]) -> Formula:
    ren = dict(src)
    ren.update({prime(v): dst[v] for v in r.vars})
    return rename_free(r.body, ren)


_from_tags = itertools.count()


def _reachable(sys: SystemDoc, at: dict[VarId, VarId]) -> Formula:
    """Membership of the given point in the forward closure of init: either
    the point satisfies init itself, or some init point reaches it."""
    # unique tag: init may itself carry an earlier reachable-set wrapper
    g = _tagged(sys.reach, f"from{next(_from_tags)}")
    via = mk_and([_at(sys.init, g), _step(sys.reach, g, at)])
    for v in sys.reach.vars:
        via = mk_exists(g[v], via)
    return mk_or([_at(sys.init, at), via])


def _self_map(r: RelationDoc) -> dict[VarId, VarId]:
    return {v: v for v in r.vars}


def _primed_map(r: RelationDoc) -> dict[VarId, VarId]:
    return {v: prime(v) for v in r.vars}


# ---------------------------------------------------------------------------
# Safety


def decide_k_safety(sys: SystemDoc, *, trust_transitive: bool = False,
                    budget: Optional[Budget] = None) -> bool:
    """True when no staged violation exists: there is no run from init
    visiting the safety predicates in their listed order."""
    if not sys.safe:
        raise ValueError("safety query needs at least one predicate")
    _require_transitive(sys, trust_transitive, budget)
    stages = [_tagged(sys.reach, f"s{j}") for j in range(len(sys.safe) + 1)]
    parts = [_at(sys.init, stages[0])]
    for j, pred in enumerate(sys.safe, start=1):
        parts.append(_step(sys.reach, stages[j - 1], stages[j]))
        parts.append(_at(pred, stages[j]))
    return not mixed_decide(mk_and(parts), budget)


# ---------------------------------------------------------------------------
# Liveness and eventuality


def _liveness_relation(sys: SystemDoc) -> RelationDoc:
    """The derived relation holding between reachable a and any b linked to
    a through one configuration in each liveness predicate, in order.  It is
    transitive whenever reach is."""
    r = sys.reach
    a = _self_map(r)
    b = _primed_map(r)
    ws = [_tagged(r, f"via{j}") for j in range(len(sys.live))]
    hops = [a] + ws + [b]
    parts: list[Formula] = []
    for j, pred in enumerate(sys.live):
        parts.append(_at(pred, ws[j]))
    for src, dst in zip(hops, hops[1:]):
        parts.append(_step(r, src, dst))
    linked = mk_and(parts)
    for w in reversed(ws):
        for v in r.vars:
            linked = mk_exists(w[v], linked)
    body = mk_and([_reachable(sys, a), linked])
    return RelationDoc(reals=r.reals, ints=r.ints, body=body)


def decide_k_liveness(sys: SystemDoc, *, trust_transitive: bool = False,
                      budget: Optional[Budget] = None,
                      stats: Optional[dict] = None) -> Verdict:
    """Chain verdict for the derived liveness relation: accepting means some
    infinite run from init visits every listed predicate infinitely often."""
    if not sys.live:
        raise ValueError("liveness query needs at least one predicate")
    _require_transitive(sys, trust_transitive, budget)
    hat = _liveness_relation(sys)
    return has_omega_chain(hat, check_transitivity=False, budget=budget,
                           stats=stats)


def decide_eventuality(sys: SystemDoc, p: Formula, *,
                       trust_transitive: bool = False,
                       budget: Optional[Budget] = None,
                       stats: Optional[dict] = None) -> bool:
    """True when some infinite run from init passes through p at least once.
    Runs restart from the reachable p-points, with nothing further to visit."""
    _require_transitive(sys, trust_transitive, budget)
    restarted = SystemDoc(
        reach=sys.reach,
        init=mk_and([_reachable(sys, _self_map(sys.reach)), p]),
        live=(TRUE,),
        step=sys.step,
    )
    verdict = decide_k_liveness(restarted, trust_transitive=True,
                                budget=budget, stats=stats)
    return isinstance(verdict, HasOmegaChain)


# ---------------------------------------------------------------------------
# Boundedness


def _growth(l: LinTerm) -> Formula:
    # l(a) + 1 <= l(b), b being the primed copy
    lb = l.map_vars({v: prime(v) for v, _ in l.coeffs})
    t = lb.sub(l).shift(-1)
    return mk_or([Gt(t), make_eq(t)])


def exists_unbounded_execution(sys: SystemDoc, l: LinTerm, *,
                               trust_transitive: bool = False,
                               budget: Optional[Budget] = None,
                               stats: Optional[dict] = None) -> bool:
    """True when some infinite run from init grows l beyond every bound,
    detected as a chain of the reach relation thinned to l-increasing pairs."""
    _require_transitive(sys, trust_transitive, budget)
    r = sys.reach
    body = mk_and([_reachable(sys, _self_map(r)), r.body, _growth(l)])
    hat = RelationDoc(reals=r.reals, ints=r.ints, body=body)
    verdict = has_omega_chain(hat, check_transitivity=False, budget=budget,
                              stats=stats)
    return isinstance(verdict, HasOmegaChain)


def decide_boundedness(sys: SystemDoc,
                       ls: Optional[Sequence[LinTerm]] = None, *,
                       trust_transitive: bool = False,
                       budget: Optional[Budget] = None) -> bool:
    """True when every listed observable stays bounded along every infinite
    run; defaults to the system's own bound terms."""
    terms = tuple(ls) if ls is not None else sys.bounds
    if not terms:
        raise ValueError("boundedness query needs at least one term")
    _require_transitive(sys, trust_transitive, budget)
    return all(
        not exists_unbounded_execution(sys, l, trust_transitive=True,
                                       budget=budget)
        for l in terms)


def decide_reachable_bound(sys: SystemDoc,
                           ls: Optional[Sequence[LinTerm]] = None, *,
                           trust_transitive: bool = False,
                           budget: Optional[Budget] = None) -> bool:
    """True when uniform bounds exist over all points one reach-step from
    init: some B1..Bp dominate every observable at every such point."""
    terms = tuple(ls) if ls is not None else sys.bounds
    if not terms:
        raise ValueError("bound query needs at least one term")
    _require_transitive(sys, trust_transitive, budget)
    r = sys.reach
    alpha = _tagged(r, "ba")
    beta = _tagged(r, "bb")
    caps = [VarId(f"cap{i}__b", Sort.REAL, Role.BOUND)
            for i in range(len(terms))]
    ante = mk_and([_at(sys.init, alpha), _step(r, alpha, beta)])
    cons = []
    for cap, l in zip(caps, terms):
        t = LinTerm.var(cap).sub(l.map_vars(beta))
        cons.append(mk_or([Gt(t), make_eq(t)]))
    f: Formula = mk_or([push_negations(mk_not(ante)), mk_and(cons)])
    for m in (beta, alpha):
        for v in r.vars:
            f = mk_forall(m[v], f)
    for cap in caps:
        f = mk_exists(cap, f)
    return mixed_decide(f, budget)


# ---------------------------------------------------------------------------
# Finite-domain oracle


Box = Union[tuple[int, int], dict]


def _box_ranges(r: RelationDoc, box: Box) -> list[tuple[int, int]]:
    if isinstance(box, dict):
        out = []
        for v in r.vars:
            # keys may be VarId or plain names
            if v in box:
                out.append(tuple(box[v]))
            elif v.name in box:
                out.append(tuple(box[v.name]))
            else:
                raise ValueError(f"box misses variable {v.display()}")
        return out
    lo, hi = box
    return [(lo, hi)] * len(r.vars)


class _Quantified(Exception):
    pass


def _vec_eval(f: Formula, env: dict) -> np.ndarray:
    if isinstance(f, TrueF):
        return np.bool_(True)
    if isinstance(f, FalseF):
        return np.bool_(False)
    if isinstance(f, Not):
        return ~_vec_eval(f.arg, env)
    if isinstance(f, And):
        out = np.bool_(True)
        for g in f.args:
            out = out & _vec_eval(g, env)
        return out
    if isinstance(f, Or):
        out = np.bool_(False)
        for g in f.args:
            out = out | _vec_eval(g, env)
        return out
    if isinstance(f, (Eq, Gt, ModCong)):
        val = np.int64(f.term.constant)
        for v, a in f.term.coeffs:
            val = val + np.int64(a) * env[v]
        if isinstance(f, Eq):
            return val == 0
        if isinstance(f, Gt):
            return val > 0
        return val % f.modulus == f.residue
    raise _Quantified()


def finite_domain_oracle(r: RelationDoc, box: Box, *,
                         check_transitivity: bool = True,
                         max_points: int = 200_000,
                         transitivity_cap: int = 2_500,
                         budget: Optional[Budget] = None) -> bool:
    """Ground-truth chain existence for integer relations on a finite box.

    Over a finite domain a transitive relation relates an infinite sequence
    exactly when it relates some point to itself, so the oracle scans for a
    reflexive point.  Transitivity of the boxed relation is verified by
    matrix closure while the box has at most transitivity_cap points and
    the body is quantifier-free; larger or quantified inputs are trusted.
    """
    if r.reals:
        raise FormulaError("the finite oracle handles integer variables only")
    ranges = _box_ranges(r, box)
    total = 1
    for lo, hi in ranges:
        if hi < lo:
            return False
        total *= hi - lo + 1
    if total > max_points:
        raise ResourceLimit(f"box holds {total} points, cap is {max_points}")

    cols = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in ranges]
    grids = np.meshgrid(*cols, indexing="ij") if cols else []
    pts = [g.reshape(-1) for g in grids]
    n = total

    try:
        env_diag = {}
        for v, col in zip(r.vars, pts):
            env_diag[v] = col
            env_diag[prime(v)] = col
        diag = np.broadcast_to(_vec_eval(r.body, env_diag), (n,))
        if check_transitivity and n <= transitivity_cap:
            env_pair = {}
            for v, col in zip(r.vars, pts):
                env_pair[v] = col[:, None]
                env_pair[prime(v)] = col[None, :]
            m = np.broadcast_to(_vec_eval(r.body, env_pair), (n, n))
            mf = m.astype(np.float32)
            two_step = (mf @ mf) > 0.5
            if bool((two_step & ~m).any()):
                raise PreconditionError("boxed relation is not transitive")
        return bool(diag.any())
    except _Quantified:
        pass

    # quantified body: point-at-a-time evaluation, quantifiers read over the
    # widest box coordinate range
    span = (min(lo for lo, _ in ranges), max(hi for _, hi in ranges))
    found = False
    for point in itertools.product(*[range(lo, hi + 1) for lo, hi in ranges]):
        tick(budget)
        sigma = {}
        for v, val in zip(r.vars, point):
            sigma[v] = val
            sigma[prime(v)] = val
        if evaluate(r.body, sigma, int_bounds=span):
            found = True
            break
    if check_transitivity and total ** 3 <= transitivity_cap ** 2:
        all_pts = list(itertools.product(*[range(lo, hi + 1)
                                           for lo, hi in ranges]))
        rel = {}
        for pa in all_pts:
            for pb in all_pts:
                sigma = {}
                for v, val in zip(r.vars, pa):
                    sigma[v] = val
                for v, val in zip(r.vars, pb):
                    sigma[prime(v)] = val
                rel[(pa, pb)] = evaluate(r.body, sigma, int_bounds=span)
        for pa in all_pts:
            for pb in all_pts:
                if not rel[(pa, pb)]:
                    continue
                for pc in all_pts:
                    if rel[(pb, pc)] and not rel[(pa, pc)]:
                        raise PreconditionError("boxed relation is not transitive")
    return found
