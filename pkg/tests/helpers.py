"""Shared generators and independent oracles for the test suite.

The evaluator here re-derives atom and quantifier semantics from scratch so
that engine bugs cannot hide behind a shared evaluation path.
"""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from omegachain import (
    And, Eq, Exists, FalseF, Forall, Formula, Gt, LinTerm, ModCong, Not, Or,
    Role, Sort, TrueF, VarId, mk_and, mk_or, mk_not, prime, substitute,
)
from omegachain.parser import RelationDoc


# ---------------------------------------------------------------------------
# Independent ground evaluation


def term_value(t: LinTerm, sigma: Mapping[VarId, object]) -> Fraction:
    total = Fraction(t.constant)
    for v, a in t.coeffs:
        total += Fraction(a) * Fraction(sigma[v])
    return total


def holds(f: Formula, sigma: Mapping[VarId, object],
          box: Optional[tuple[int, int]] = None) -> bool:
    """Truth of f under sigma; quantifiers range over the integer box."""
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Not):
        return not holds(f.arg, sigma, box)
    if isinstance(f, And):
        return all(holds(g, sigma, box) for g in f.args)
    if isinstance(f, Or):
        return any(holds(g, sigma, box) for g in f.args)
    if isinstance(f, Eq):
        return term_value(f.term, sigma) == 0
    if isinstance(f, Gt):
        return term_value(f.term, sigma) > 0
    if isinstance(f, ModCong):
        val = term_value(f.term, sigma)
        assert val.denominator == 1
        return val.numerator % f.modulus == f.residue
    if isinstance(f, (Exists, Forall)):
        assert box is not None, "quantifier needs an explicit box"
        lo, hi = box
        picks = (holds(f.body, {**sigma, f.var: k}, box)
                 for k in range(lo, hi + 1))
        return any(picks) if isinstance(f, Exists) else all(picks)
    raise AssertionError(f"unexpected node {f!r}")


def pairwise_holds(r: RelationDoc, pts: Sequence[Mapping[VarId, object]]) -> bool:
    """Every earlier point related to every later one under r.body."""
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            sigma = dict(pts[i])
            for v in r.vars:
                sigma[prime(v)] = pts[j][v]
            if not holds(r.body, sigma):
                return False
    return True


# ---------------------------------------------------------------------------
# Random integer formulas (quantifier-free and bounded sentences)


def rand_int_term(rng: random.Random, vars: Sequence[VarId],
                  max_coeff: int = 3, max_const: int = 8) -> LinTerm:
    k = rng.randint(1, min(2, len(vars)))
    chosen = rng.sample(list(vars), k)
    coeffs = {}
    for v in chosen:
        c = 0
        while c == 0:
            c = rng.randint(-max_coeff, max_coeff)
        coeffs[v] = c
    return LinTerm.make(coeffs, rng.randint(-max_const, max_const))


def rand_int_atom(rng: random.Random, vars: Sequence[VarId]) -> Formula:
    t = rand_int_term(rng, vars)
    roll = rng.random()
    if roll < 0.45:
        return Gt(t)
    if roll < 0.75:
        return Eq(t)
    d = rng.choice((2, 3, 4))
    return ModCong(t, d, rng.randrange(d))


def rand_qf(rng: random.Random, vars: Sequence[VarId], depth: int = 2,
            atom=rand_int_atom) -> Formula:
    if depth == 0 or rng.random() < 0.4:
        return atom(rng, vars)
    kids = [rand_qf(rng, vars, depth - 1, atom) for _ in range(rng.randint(2, 3))]
    roll = rng.random()
    if roll < 0.45:
        return mk_and(kids)
    if roll < 0.9:
        return mk_or(kids)
    return mk_not(rand_qf(rng, vars, depth - 1, atom))


def range_atoms(v: VarId, lo: int, hi: int) -> list[Formula]:
    t = LinTerm.var(v)
    return [Gt(t.shift(-lo + 1)), Gt(t.neg().shift(hi + 1))]


def rand_bounded_sentence(rng: random.Random, lo: int = -8, hi: int = 8,
                          max_quants: int = 3) -> Formula:
    """A sentence whose quantifiers are explicitly confined to [lo, hi]."""
    nq = rng.randint(1, max_quants)
    qvars = [VarId(f"q{i}", Sort.INT, Role.BOUND) for i in range(nq)]
    body = rand_qf(rng, qvars, depth=2)
    f = body
    for v in reversed(qvars):
        fence = mk_and(range_atoms(v, lo, hi))
        if rng.random() < 0.5:
            f = Exists(v, mk_and([fence, f]))
        else:
            f = Forall(v, mk_or([mk_not(fence), f]))
    return f


# ---------------------------------------------------------------------------
# Random real formulas


def rand_real_atom(rng: random.Random, vars: Sequence[VarId]) -> Formula:
    t = rand_int_term(rng, vars)
    return Gt(t) if rng.random() < 0.7 else Eq(t)


def rational_grid(lo: int, hi: int, denom: int) -> list[Fraction]:
    return [Fraction(k, denom) for k in range(lo * denom, hi * denom + 1)]


# ---------------------------------------------------------------------------
# Mixed relations and split-point evaluation


def split_real(q: Fraction) -> tuple[int, Fraction]:
    ip = math.floor(q)
    return ip, q - ip


def split_sigma(sigma: Mapping[VarId, object],
                pairs: Mapping[VarId, tuple[VarId, VarId]]) -> dict:
    """Rewrite a mixed assignment onto integer/fractional part variables."""
    out = dict(sigma)
    for x, (xi, xf) in pairs.items():
        q = Fraction(out.pop(x))
        ip, fp = split_real(q)
        out[xi] = ip
        out[xf] = fp
    return out


def apply_splits(f: Formula,
                 pairs: Mapping[VarId, tuple[VarId, VarId]]) -> Formula:
    for x, (xi, xf) in pairs.items():
        f = substitute(f, x, LinTerm.make({xi: 1, xf: 1}))
    return f


# ---------------------------------------------------------------------------
# Transitive boxed integer relation generator
#
# Every primitive below is transitive on its own; a conjunction of transitive
# relations is transitive, and so is its restriction to a box.


def _diff_order(rng: random.Random, vars: Sequence[VarId]) -> Formula:
    k = rng.randint(1, min(2, len(vars)))
    chosen = rng.sample(list(vars), k)
    coeffs: dict[VarId, int] = {}
    for v in chosen:
        w = 0
        while w == 0:
            w = rng.randint(-2, 2)
        coeffs[v] = -w
        coeffs[prime(v)] = w
    return Gt(LinTerm.make(coeffs, -rng.randint(0, 2)))


def _freeze(rng: random.Random, vars: Sequence[VarId]) -> Formula:
    v = rng.choice(list(vars))
    return Eq(LinTerm.make({v: -1, prime(v): 1}))


def _guard_pair(rng: random.Random, vars: Sequence[VarId]) -> Formula:
    t = rand_int_term(rng, vars, max_coeff=2, max_const=4)
    return mk_and([Gt(t), Gt(t.map_vars({v: prime(v) for v in vars}))])


def _mod_pair(rng: random.Random, vars: Sequence[VarId]) -> Formula:
    v = rng.choice(list(vars))
    d = rng.choice((2, 3))
    r1 = rng.randrange(d)
    r2 = r1 if rng.random() < 0.7 else rng.randrange(d)
    return mk_and([ModCong(LinTerm.var(v), d, r1),
                   ModCong(LinTerm.var(prime(v)), d, r2)])


def rand_transitive_boxed(rng: random.Random
                          ) -> tuple[RelationDoc, dict[VarId, tuple[int, int]]]:
    nv = rng.randint(1, 3)
    vars = tuple(VarId(n, Sort.INT) for n in ("y", "z", "w")[:nv])
    n_atoms = rng.randint(1, 4)
    makers = (_diff_order, _freeze, _guard_pair, _mod_pair)
    parts = [rng.choice(makers)(rng, vars) for _ in range(n_atoms)]
    box: dict[VarId, tuple[int, int]] = {}
    for v in vars:
        lo = rng.randint(-6, 2)
        hi = rng.randint(lo, 6)
        box[v] = (lo, hi)
        for w in (v, prime(v)):
            parts.extend(range_atoms(w, lo, hi))
    body = mk_and(parts)
    return RelationDoc((), vars, body), box


# ---------------------------------------------------------------------------
# Assignment sampling


def sample_int_sigma(rng: random.Random, vars: Iterable[VarId],
                     lo: int = -8, hi: int = 8) -> dict:
    return {v: rng.randint(lo, hi) for v in vars}


def sample_mixed_sigma(rng: random.Random, vars: Iterable[VarId],
                       lo: int = -4, hi: int = 4, denom: int = 4) -> dict:
    out = {}
    for v in vars:
        if v.sort is Sort.INT:
            out[v] = rng.randint(lo, hi)
        else:
            out[v] = Fraction(rng.randint(lo * denom, hi * denom), denom)
    return out


def mixed_grid(real_vars: Sequence[VarId], int_vars: Sequence[VarId],
               min_points: int = 200) -> list[dict]:
    """A deterministic grid of at least min_points mixed assignments."""
    if not real_vars and not int_vars:
        return [{}]
    int_axis = list(range(-3, 4))
    denom = 4
    while True:
        frac_axis = [Fraction(k, denom) for k in range(denom)]
        total = (len(frac_axis) ** len(real_vars)) * \
                (len(int_axis) ** len(int_vars))
        if total >= min_points:
            break
        if real_vars and denom < 64:
            denom *= 2
        else:
            span = len(int_axis) // 2 + 1
            int_axis = list(range(-span, span + 1))
    pts = []
    axes = [frac_axis] * len(real_vars) + [int_axis] * len(int_vars)
    for combo in itertools.product(*axes):
        sigma = {}
        for v, val in zip(tuple(real_vars) + tuple(int_vars), combo):
            sigma[v] = val
        pts.append(sigma)
    return pts
