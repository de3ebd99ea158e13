"""Splitting reals into integer and fractional parts, and the canonical
disjunct form for transition relations."""
import random
from fractions import Fraction

import pytest

from omegachain import (
    Eq, Exists, FormulaError, Gt, LinTerm, ModCong, Role, Sort, TRUE, FALSE,
    VarId, evaluate, free_vars, make_eq, make_mod, mk_and, mk_not,
    mk_or, prime, substitute, to_dnf, push_negations,
)
from omegachain.formulas import atoms_of
from omegachain.parser import parse_relation
from omegachain.separation import (
    SeparatedDisjunct, SplitVar, eliminate_mods, frac_box, mixed_decide,
    mixed_model, mixed_qe, separate_qf, to_canonical,
)

from helpers import (
    holds, mixed_grid, rand_int_atom, sample_mixed_sigma, split_real,
)

X = VarId("x", Sort.REAL)
Y = VarId("y", Sort.INT)
Z = VarId("z", Sort.INT)


def mk_split(base):
    return SplitVar(base, VarId(base.name + "_i", Sort.INT, base.role),
                    VarId(base.name + "_f", Sort.REAL, base.role))


def atom_is_pure(a):
    sorts = {v.sort for v in a.term.vars}
    return len(sorts) <= 1


class TestSeparateQf:
    def test_atoms_become_pure(self):
        s = mk_split(X)
        f = Gt(LinTerm.make({s.int_part: 1, s.frac_part: 1, Y: -1}, 0))
        g = separate_qf(f, [s])
        assert all(atom_is_pure(a) for a in atoms_of(g))

    def test_equivalent_on_unit_box(self):
        rng = random.Random(11)
        s = mk_split(X)
        vars = (s.int_part, s.frac_part, Y)
        for _ in range(80):
            # random mixed conjunctions/disjunctions with frac coeffs
            kids = []
            for _ in range(rng.randint(1, 3)):
                t = LinTerm.make({
                    s.frac_part: rng.randint(-2, 2),
                    s.int_part: rng.randint(-2, 2),
                    Y: rng.randint(-2, 2),
                }, rng.randint(-3, 3))
                kids.append(Gt(t) if rng.random() < 0.6 else make_eq(t))
            f = mk_and(kids) if rng.random() < 0.5 else mk_or(kids)
            g = separate_qf(push_negations(f), [s])
            assert all(atom_is_pure(a) for a in atoms_of(g))
            for _ in range(40):
                sigma = {
                    s.int_part: rng.randint(-4, 4),
                    Y: rng.randint(-4, 4),
                    s.frac_part: Fraction(rng.randrange(8), 8),
                }
                assert holds(f, sigma) == holds(g, sigma), (f, sigma)

    def test_rejects_unregistered_real(self):
        w = VarId("w", Sort.REAL)
        with pytest.raises(FormulaError):
            separate_qf(Gt(LinTerm.var(w)), [])

    def test_congruence_over_frac_rejected(self):
        s = mk_split(X)
        with pytest.raises(FormulaError):
            separate_qf(ModCong(LinTerm.var(s.frac_part), 2, 0), [s])


class TestMixedQe:
    def test_qf_int_only_unchanged(self):
        f = Gt(LinTerm.var(Y))
        g, splits = mixed_qe(f)
        assert g == f and splits == ()

    def test_real_free_var_gets_box(self):
        f = Gt(LinTerm.var(X))
        g, splits = mixed_qe(f)
        assert len(splits) == 1
        s = splits[0]
        assert s.original == X
        assert {s.int_part, s.frac_part} <= free_vars(g)

    def test_quantified_mixed_sentencehood(self):
        # exists x. x > y and y + 1 > x: always a real strictly between
        u = VarId("u", Sort.REAL, Role.BOUND)
        f = Exists(u, mk_and([
            Gt(LinTerm.make({u: 1, Y: -1})),
            Gt(LinTerm.make({Y: 1, u: -1}, 1)),
        ]))
        g, _ = mixed_qe(f)
        assert Y in free_vars(g) or g == TRUE
        for k in range(-4, 5):
            assert holds(g, {Y: k}) is True

    def test_splits_witness_reconstruction(self):
        rng = random.Random(5)
        f = mk_and([
            Gt(LinTerm.make({X: 2, Y: 1}, -3)),
            Gt(LinTerm.make({X: -1}, 2)),
        ])
        g, splits = mixed_qe(f)
        s = splits[0]
        for _ in range(60):
            xi, yk = rng.randint(-5, 5), rng.randint(-5, 5)
            xf = Fraction(rng.randrange(8), 8)
            sigma_g = {s.int_part: xi, s.frac_part: xf, Y: yk}
            sigma_f = {X: xi + xf, Y: yk}
            assert holds(g, sigma_g) == holds(f, sigma_f)


class TestEliminateMods:
    def test_plain_branch_passes_through(self):
        conj = [Gt(LinTerm.var(Y))]
        assert eliminate_mods([conj]) == [conj]

    def test_residues_expand(self):
        conj = [make_mod(LinTerm.var(Y), 2, 0), Gt(LinTerm.var(Y))]
        out = eliminate_mods([conj])
        assert len(out) == 1
        branch = out[0]
        assert all(not isinstance(a, ModCong) for a in branch)

    def test_contradictory_residues_drop(self):
        conj = [make_mod(LinTerm.var(Y), 2, 0),
                make_mod(LinTerm.var(Y), 2, 1)]
        assert eliminate_mods([conj]) == []

    def test_no_congruences_remain(self):
        rng = random.Random(23)
        for _ in range(60):
            conj = [rand_int_atom(rng, (Y, Z)) for _ in range(3)]
            conj = [a for a in atoms_of(mk_and(conj))]
            if not any(isinstance(a, ModCong) for a in conj):
                continue
            for branch in eliminate_mods([conj]):
                assert not any(isinstance(a, ModCong) for a in branch), conj

    def test_satisfiability_preserved(self):
        # substituted variables are fresh, so compare the projections by
        # satisfiability (free vars of pa_decide read existentially)
        from omegachain.presburger import pa_decide
        rng = random.Random(29)
        for _ in range(60):
            conj = [rand_int_atom(rng, (Y, Z)) for _ in range(3)]
            conj = [a for a in atoms_of(mk_and(conj))]
            if not conj:
                continue
            out = eliminate_mods([conj])
            before = pa_decide(mk_and(conj))
            after = pa_decide(mk_or([mk_and(b) for b in out]))
            assert before == after, conj


class TestToCanonical:
    def test_strict_int_increase_shape(self):
        r = parse_relation("(relation (ints y) (body (> y' y)))")
        ds = to_canonical(r)
        assert len(ds) == 1
        d = ds[0]
        assert d.dense_eqs == () and d.dense_ineqs == () and d.int_mods == ()
        assert len(d.int_ineqs) == 1
        p, q, c = d.int_ineqs[0]
        # P over unprimed, Q over primed, P + Q > c
        assert all(v.role is Role.UNPRIMED for v in p.vars)
        assert all(v.role is Role.PRIMED for v in q.vars)
        assert p.constant == 0 and q.constant == 0

    def test_false_body_empty(self):
        r = parse_relation(
            "(relation (ints y) (body (and (> y' y) (> y y'))))")
        assert to_canonical(r) == []

    def test_parity_conflict_empty(self):
        r = parse_relation(
            "(relation (ints y) (body (and (mod= y 2 0) (mod= y' 2 1))))")
        assert to_canonical(r) == []

    def test_purity_and_mods_gone(self):
        r = parse_relation(
            "(relation (reals x) (ints y) (body (and (> (+ x' y') (+ x y))"
            " (mod= y 3 1) (mod= y' 3 1))))")
        for d in to_canonical(r):
            assert d.int_mods == ()
            for p, q, c in d.dense_eqs + d.dense_ineqs:
                assert all(v.sort is Sort.REAL for v in p.vars + q.vars)
            for p, q, c in d.int_ineqs:
                assert all(v.sort is Sort.INT for v in p.vars + q.vars)

    def test_disjunct_split_sides(self):
        r = parse_relation(
            "(relation (reals x) (ints y) (body (and (> x' x) (> y' y))))")
        ds = to_canonical(r)
        assert len(ds) >= 1
        for d in ds:
            for p, q, c in d.dense_eqs + d.dense_ineqs + d.int_ineqs:
                assert all(v.role is Role.UNPRIMED for v in p.vars)
                assert all(v.role is Role.PRIMED for v in q.vars)
                assert p.constant == 0 and q.constant == 0

    def test_rebuild_maps_original_vars(self):
        r = parse_relation(
            "(relation (reals x) (ints y) (body (and (> x' x) (> y' y))))")
        for d in to_canonical(r):
            rebuilt = dict(d.rebuild)
            assert set(rebuilt) == {VarId("x", Sort.REAL), Y}

    def test_canonical_equisatisfiable_pointwise(self):
        # each disjunct's formula() (with boxes and rebuild) implies the
        # original body, and every original solution lands in some disjunct
        rng = random.Random(91)
        r = parse_relation(
            "(relation (reals x) (ints y) "
            "(body (and (> (+ x' y') (+ x y)) (mod= y 2 0) (mod= y' 2 0))))")
        ds = to_canonical(r)
        assert ds
        body = r.body
        xs = [Fraction(k, 4) for k in range(-12, 13)]
        for _ in range(200):
            sigma = {
                VarId("x", Sort.REAL): rng.choice(xs),
                prime(VarId("x", Sort.REAL)): rng.choice(xs),
                Y: rng.randint(-6, 6) * 2,
                prime(Y): rng.randint(-6, 6) * 2,
            }
            assert holds(body, sigma) == _covered(ds, sigma), sigma


def _covered(ds, sigma):
    for d in ds:
        if _disjunct_holds(d, sigma):
            return True
    return False


def _disjunct_holds(d, sigma):
    """Does sigma (over original relation vars) land in this disjunct?"""
    rebuilt = dict(d.rebuild)
    assign = {}
    ok = True
    for role_map in (lambda v: v, prime):
        for orig, term in rebuilt.items():
            target = role_map(orig)
            want = sigma[target]
            # term is over the disjunct's own vars: solve per variable kind
            # dense var -> frac part, int vars -> integer parts
            # enumerate small solutions of term == want
            sol = _solve_term(d, term, want, role_map)
            if sol is None:
                ok = False
                break
            assign.update(sol)
        if not ok:
            break
    if not ok:
        return False
    f = d.formula()
    for v in free_vars(f):
        if v not in assign:
            assign[v] = 0
    if not holds(f, assign):
        return False
    for v in d.dense_vars:
        for w in (v, prime(v)):
            val = assign.get(w, 0)
            if not (0 <= val < 1):
                return False
    return True


def _solve_term(d, term, want, role_map):
    """Invert one rebuild entry: find disjunct-var values making term==want.

    Rebuild terms have the shape sum of unit-coefficient fresh vars plus a
    constant shift, one dense part at most; the fractional component of
    `want` pins the dense var and the rest pins the integer combination.
    """
    vars = [role_map(v) for v in term.vars]
    coeffs = dict(term.coeffs)
    dense = [v for v in term.vars if v.sort is Sort.REAL]
    ints = [v for v in term.vars if v.sort is Sort.INT]
    if len(dense) > 1 or any(abs(coeffs[v]) != 1 for v in dense):
        return None
    rem = Fraction(want) - term.constant
    out = {}
    if dense:
        dv = dense[0]
        ip, fp = split_real(rem if coeffs[dv] == 1 else -rem)
        out[role_map(dv)] = fp
        rem = rem - coeffs[dv] * fp
    if rem.denominator != 1:
        return None
    rem = int(rem)
    if not ints:
        return out if rem == 0 else None
    if len(ints) == 1:
        # mod-eliminated vars rebuild as d*z + r: needs divisibility
        c = coeffs[ints[0]]
        if rem % c != 0:
            return None
        out[role_map(ints[0])] = rem // c
        return out
    # push the whole integer remainder through the first unit-coefficient
    # var, zero for the rest
    lead = ints[0]
    if abs(coeffs[lead]) != 1:
        return None
    for v in ints[1:]:
        out[role_map(v)] = 0
    out[role_map(lead)] = rem * coeffs[lead]
    return out


class TestMixedDecideModel:
    def test_decide_examples(self):
        f = mk_and([
            Gt(LinTerm.make({X: 1, Y: 1}, -3)),
            Gt(LinTerm.make({X: -1}, 1)),
            Gt(LinTerm.var(X)),
            make_mod(LinTerm.var(Y), 2, 0),
        ])
        assert mixed_decide(f) is True
        m = mixed_model(f)
        assert m is not None and evaluate(f, m) is True

    def test_unsat_mixed(self):
        f = mk_and([
            Gt(LinTerm.make({X: 1, Y: 1})),
            Gt(LinTerm.make({X: -1, Y: -1})),
        ])
        assert mixed_decide(f) is False
        assert mixed_model(f) is None

    def test_purity_sampled_random(self):
        rng = random.Random(400)
        for _ in range(120):
            kids = []
            for _ in range(rng.randint(1, 3)):
                t = LinTerm.make({
                    X: rng.randint(-2, 2),
                    Y: rng.randint(-2, 2),
                }, rng.randint(-4, 4))
                if not t.coeffs:
                    continue
                kids.append(Gt(t) if rng.random() < 0.7 else make_eq(t))
            if not kids:
                continue
            f = mk_and(kids) if rng.random() < 0.6 else mk_or(kids)
            sat = mixed_decide(f)
            m = mixed_model(f)
            if sat:
                assert m is not None and evaluate(f, m) is True, f
            else:
                assert m is None
                for sigma in mixed_grid((X,), (Y,)):
                    assert not holds(f, sigma), (f, sigma)
