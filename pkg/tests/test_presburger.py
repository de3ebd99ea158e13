"""Integer quantifier elimination and decision procedure."""
import random

import pytest

from omegachain import (
    Eq, Exists, Forall, FormulaError, Gt, LinTerm, ModCong, Role, Sort,
    TRUE, FALSE, VarId, evaluate, free_vars, make_eq, make_mod, mk_and,
    mk_not, mk_or,
)
from omegachain.presburger import (
    eliminate_exists_int, pa_decide, pa_model, pa_qe,
)

from helpers import holds, rand_bounded_sentence, rand_int_atom, rand_qf

Y = VarId("y", Sort.INT)
Z = VarId("z", Sort.INT)
A = VarId("a", Sort.INT)
B = VarId("b", Sort.INT)


def bound(name):
    return VarId(name, Sort.INT, Role.BOUND)


class TestEliminate:
    def test_double_is_evenness(self):
        # exists y. 2y = z  <=>  z even
        v = bound("k")
        f = Exists(v, make_eq(LinTerm.make({v: 2, Z: -1})))
        g = pa_qe(f)
        assert g == ModCong(LinTerm.var(Z), 2, 0)

    def test_between(self):
        # exists y. a < y < b  <=>  b - a > 1
        v = bound("k")
        f = Exists(v, mk_and([
            Gt(LinTerm.make({v: 1, A: -1})),
            Gt(LinTerm.make({B: 1, v: -1})),
        ]))
        g = pa_qe(f)
        assert free_vars(g) <= {A, B}
        for a in range(-4, 5):
            for b in range(-4, 5):
                assert holds(g, {A: a, B: b}) == (b - a > 1)

    def test_crt_instance(self):
        # x=2 mod 3 and x=3 mod 5 has a solution
        v = bound("k")
        f = Exists(v, mk_and([
            make_mod(LinTerm.var(v), 3, 2),
            make_mod(LinTerm.var(v), 5, 3),
        ]))
        assert pa_qe(f) == TRUE

    def test_no_free_result_is_constant(self):
        v = bound("k")
        f = Exists(v, mk_and([Gt(LinTerm.var(v)),
                              Gt(LinTerm.make({v: -1}, 0))]))
        assert pa_qe(f) == FALSE

    def test_eliminate_single(self):
        g = eliminate_exists_int(Y, Gt(LinTerm.make({Y: 1, Z: -1})))
        assert Y not in free_vars(g)
        assert pa_decide(Forall(Z, Exists(Y, Gt(LinTerm.make({Y: 1, Z: -1})))))

    def test_rejects_real_vars(self):
        x = VarId("x", Sort.REAL)
        with pytest.raises(FormulaError):
            pa_qe(Gt(LinTerm.var(x)))


class TestDecide:
    def test_forall_exists_larger(self):
        f = Forall(Y, Exists(Z, Gt(LinTerm.make({Z: 1, Y: -1}))))
        assert pa_decide(f) is True

    def test_exists_forall_larger(self):
        f = Exists(Z, Forall(Y, Gt(LinTerm.make({Z: 1, Y: -1}))))
        assert pa_decide(f) is False

    def test_even_odd_cover(self):
        f = Forall(Y, mk_or([make_mod(LinTerm.var(Y), 2, 0),
                             make_mod(LinTerm.var(Y), 2, 1)]))
        assert pa_decide(f) is True

    def test_free_vars_read_existentially(self):
        assert pa_decide(Gt(LinTerm.var(Y))) is True
        assert pa_decide(mk_and([Gt(LinTerm.var(Y)),
                                 Gt(LinTerm.make({Y: -1}))])) is False

    def test_random_sentences_match_enumeration(self):
        rng = random.Random(77)
        for _ in range(300):
            f = rand_bounded_sentence(rng)
            brute = holds(f, {}, box=(-8, 8))
            assert pa_decide(f) == brute, f


class TestModel:
    def test_model_satisfies(self):
        f = mk_and([
            Gt(LinTerm.make({Y: 1}, -5)),
            make_mod(LinTerm.var(Y), 3, 1),
            Gt(LinTerm.make({Y: -1}, 100)),
        ])
        m = pa_model(f)
        assert m is not None
        assert evaluate(f, m) is True
        assert m[Y] > 5 and m[Y] % 3 == 1

    def test_unsat_gives_none(self):
        f = mk_and([Gt(LinTerm.var(Y)), Gt(LinTerm.make({Y: -1}))])
        assert pa_model(f) is None

    def test_two_var_coupled(self):
        f = mk_and([
            make_eq(LinTerm.make({Y: 2, Z: -3}, 1)),
            Gt(LinTerm.var(Z)),
        ])
        m = pa_model(f)
        assert m is not None and 2 * m[Y] - 3 * m[Z] + 1 == 0 and m[Z] > 0

    def test_random_qf_model_or_unsat(self):
        rng = random.Random(4021)
        vars = (Y, Z)
        for _ in range(200):
            f = rand_qf(rng, vars, depth=2)
            m = pa_model(f)
            if m is not None:
                assert evaluate(f, m) is True, f
            else:
                # cross-check on a small grid
                found = any(
                    holds(f, {Y: a, Z: b})
                    for a in range(-12, 13) for b in range(-12, 13)
                )
                assert not found, f


class TestEquivalence:
    def test_qe_preserves_models_sampled(self):
        rng = random.Random(99)
        for _ in range(150):
            v = bound("q")
            # fence the bound var so enumeration over a window is exact
            f = Exists(v, mk_and([
                rand_int_atom(rng, (v, Y, Z)),
                Gt(LinTerm.make({v: 1}, 9)),       # v > -9
                Gt(LinTerm.make({v: -1}, 9)),      # v < 9
            ]))
            g = pa_qe(f)
            assert free_vars(g) <= {Y, Z}
            for _ in range(40):
                sigma = {Y: rng.randint(-10, 10), Z: rng.randint(-10, 10)}
                direct = any(
                    holds(f.body, {**sigma, v: k}) for k in range(-8, 9)
                )
                assert holds(g, sigma) == direct, (f, sigma)
