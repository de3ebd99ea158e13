"""Verification queries on counter systems, reduced to chain decisions."""
import random

import pytest

from omegachain import (
    FormulaError, Gt, LinTerm, Sort, TRUE, VarId, make_eq, make_mod, mk_and,
    prime,
)
from omegachain.chains import HasOmegaChain, NoOmegaChain, has_omega_chain
from omegachain.harness import (
    PreconditionError, decide_boundedness, decide_eventuality,
    decide_k_liveness, decide_k_safety, decide_reachable_bound,
    exists_unbounded_execution, finite_domain_oracle,
)
from omegachain.limits import ResourceLimit
from omegachain.parser import (
    RelationDoc, SystemDoc, parse_formula, parse_relation, parse_system,
)

from helpers import rand_transitive_boxed

Y = VarId("y", Sort.INT)
X = VarId("x", Sort.REAL)

INC = parse_relation("(relation (ints y) (body (> y' y)))")
FLAT = parse_relation("(relation (ints y) (body (= y' y)))")
DESC_POS = parse_relation(
    "(relation (ints y) (body (and (> y y') (> y' 0))))")
REAL_DESC = parse_relation("(relation (reals x) (body (> x x')))")
PLUS_ONE = parse_relation("(relation (ints y) (body (= y' (+ y 1))))")

INIT0 = make_eq(LinTerm.var(Y))


def sysdoc(reach, init, **kw):
    return SystemDoc(reach=reach, init=init, **kw)


class TestKSafety:
    def test_never_negative(self):
        s = sysdoc(INC, INIT0, safe=(Gt(LinTerm.var(Y, -1)),))
        assert decide_k_safety(s) is True

    def test_can_exceed_five(self):
        s = sysdoc(INC, INIT0, safe=(Gt(LinTerm.make({Y: 1}, -5)),))
        assert decide_k_safety(s) is False

    def test_two_stage_violation(self):
        s = sysdoc(INC, INIT0, safe=(
            Gt(LinTerm.make({Y: 1}, -2)),
            Gt(LinTerm.make({Y: 1}, -4)),
        ))
        assert decide_k_safety(s) is False

    def test_stage_order_matters(self):
        # y>4 then y>2 is still reachable with increasing y, but
        # y>4 then y<3 is not
        s = sysdoc(INC, INIT0, safe=(
            Gt(LinTerm.make({Y: 1}, -4)),
            Gt(LinTerm.make({Y: -1}, 3)),
        ))
        assert decide_k_safety(s) is True

    def test_requires_predicates(self):
        with pytest.raises(ValueError):
            decide_k_safety(sysdoc(INC, INIT0))

    def test_nontransitive_rejected(self):
        s = sysdoc(PLUS_ONE, INIT0, safe=(Gt(LinTerm.var(Y)),))
        with pytest.raises(PreconditionError) as e:
            decide_k_safety(s)
        assert e.value.counterexample is not None


class TestKLiveness:
    def test_even_points_visited_forever(self):
        p = parse_formula("(exists ((int z)) (= y (* 2 z)))", [Y])
        s = sysdoc(INC, INIT0, live=(p,))
        assert isinstance(decide_k_liveness(s), HasOmegaChain)

    def test_unreachable_predicate(self):
        s = sysdoc(INC, INIT0, live=(Gt(LinTerm.var(Y, -1)),))
        assert isinstance(decide_k_liveness(s), NoOmegaChain)

    def test_wellfounded_descent(self):
        s = sysdoc(DESC_POS, make_eq(LinTerm.make({Y: 1}, -100)),
                   live=(Gt(LinTerm.var(Y)),))
        assert isinstance(decide_k_liveness(s), NoOmegaChain)

    def test_two_predicates(self):
        # infinitely often even and infinitely often > 10
        s = sysdoc(INC, INIT0, live=(
            make_mod(LinTerm.var(Y), 2, 0),
            Gt(LinTerm.make({Y: 1}, -10)),
        ))
        assert isinstance(decide_k_liveness(s), HasOmegaChain)

    def test_requires_predicates(self):
        with pytest.raises(ValueError):
            decide_k_liveness(sysdoc(INC, INIT0))

    def test_true_predicate_equals_plain_chain(self):
        for reach, want in ((INC, True), (DESC_POS, False), (FLAT, True)):
            s = sysdoc(reach, TRUE, live=(TRUE,))
            got = isinstance(decide_k_liveness(s), HasOmegaChain)
            plain = isinstance(has_omega_chain(reach), HasOmegaChain)
            assert got == plain == want


class TestEventuality:
    def test_passes_through_seven(self):
        p = make_eq(LinTerm.make({Y: 1}, -7))
        assert decide_eventuality(sysdoc(INC, INIT0), p) is True

    def test_never_negative(self):
        p = Gt(LinTerm.var(Y, -1))
        assert decide_eventuality(sysdoc(INC, INIT0), p) is False

    def test_true_predicate_is_plain_liveness(self):
        for reach, want in ((INC, True), (DESC_POS, False)):
            init = TRUE if reach is INC else Gt(LinTerm.var(Y))
            got = decide_eventuality(sysdoc(reach, init), TRUE)
            assert got == want


class TestUnboundedExecution:
    def test_diverging_counter(self):
        s = sysdoc(INC, INIT0)
        assert exists_unbounded_execution(s, LinTerm.var(Y)) is True

    def test_constant_counter(self):
        s = sysdoc(FLAT, INIT0)
        assert exists_unbounded_execution(s, LinTerm.var(Y)) is False

    def test_real_in_unit_box(self):
        s = sysdoc(REAL_DESC, Gt(LinTerm.var(X)))
        assert exists_unbounded_execution(s, LinTerm.var(X)) is False

    def test_boundedness_conjunction(self):
        s = sysdoc(FLAT, INIT0, bounds=(LinTerm.var(Y),))
        assert decide_boundedness(s) is True
        s2 = sysdoc(INC, INIT0, bounds=(LinTerm.var(Y),))
        assert decide_boundedness(s2) is False
        s3 = sysdoc(INC, INIT0, bounds=(LinTerm.var(Y, -1),))
        # -y only decreases along increasing runs
        assert decide_boundedness(s3) is True


class TestReachableBound:
    def test_flat_box(self):
        init = mk_and([Gt(LinTerm.make({Y: 1}, 1)),
                       Gt(LinTerm.make({Y: -1}, 4))])  # 0 <= y <= 3
        s = sysdoc(FLAT, init)
        assert decide_reachable_bound(s, [LinTerm.var(Y)]) is True

    def test_diverging(self):
        s = sysdoc(INC, INIT0)
        assert decide_reachable_bound(s, [LinTerm.var(Y)]) is False

    def test_empty_init_vacuous(self):
        s = sysdoc(INC, Gt(LinTerm.const(-1)))
        assert decide_reachable_bound(s, [LinTerm.var(Y)]) is True

    def test_requires_terms(self):
        with pytest.raises(ValueError):
            decide_reachable_bound(sysdoc(FLAT, INIT0))


class TestFiniteDomainOracle:
    def test_reflexive_equality(self):
        r = parse_relation(
            "(relation (ints y) (body (and (= y' y) (> y -1) (> 4 y))))")
        assert finite_domain_oracle(r, (0, 3)) is True

    def test_truncated_increase(self):
        assert finite_domain_oracle(INC, (0, 3)) is False

    def test_weak_increase_reflexive(self):
        r = parse_relation("(relation (ints y) (body (> y' (+ y -1))))")
        assert finite_domain_oracle(r, (0, 3)) is True

    def test_rejects_reals(self):
        with pytest.raises(FormulaError):
            finite_domain_oracle(REAL_DESC, (0, 3))

    def test_box_cap(self):
        with pytest.raises(ResourceLimit):
            finite_domain_oracle(INC, (0, 10 ** 7))

    def test_dict_box(self):
        r = parse_relation(
            "(relation (ints y z) (body (and (= y' y) (= z' z))))")
        assert finite_domain_oracle(
            r, {"y": (0, 2), "z": (5, 6)}) is True

    def test_nontransitive_box_flagged(self):
        with pytest.raises(PreconditionError):
            finite_domain_oracle(PLUS_ONE, (0, 5))

    def test_quantified_body(self):
        r = parse_relation(
            "(relation (ints y) (body (and (= y' y)"
            " (exists ((int z)) (= y (* 2 z))))))")
        assert finite_domain_oracle(r, (0, 3)) is True
        assert finite_domain_oracle(r, (1, 1)) is False


class TestOracleAgreementSmoke:
    def test_thirty_random_relations(self):
        rng = random.Random(86)
        for _ in range(30):
            r, box = rand_transitive_boxed(rng)
            want = finite_domain_oracle(r, box)
            got = isinstance(has_omega_chain(r), HasOmegaChain)
            assert got == want, (r, box)


class TestSystemParsing:
    def test_full_document_flows(self):
        s = parse_system("""
        (system
          (relation (ints y) (body (> y' y)))
          (init (= y 0))
          (live (mod= y 2 0))
          (safe (> y 100))
          (bound y))
        """)
        assert isinstance(decide_k_liveness(s), HasOmegaChain)
        assert decide_k_safety(s) is False
        assert decide_boundedness(s) is False
