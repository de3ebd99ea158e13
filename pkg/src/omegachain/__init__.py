"""Chain existence for transitive mixed linear relations, with quantifier
elimination engines for the integer and real fragments and a verification
harness on top."""

from .formulas import (
    And, Eq, EvalError, Exists, FalseF, Forall, Formula, FormulaError, Gt,
    LinTerm, ModCong, Not, Or, Role, Sort, SortError, TRUE, FALSE, TrueF,
    VarId, evaluate, free_vars, fresh_var, is_quantifier_free, make_eq,
    make_gt, make_mod, mk_and, mk_exists, mk_forall, mk_not, mk_or,
    normalize_atom, prime, push_negations, rename_free, substitute, to_dnf,
    unprime,
)
from .limits import Budget, ResourceLimit
from .parser import (
    ParseError, RelationDoc, SystemDoc, parse_document, parse_formula,
    parse_relation, parse_system, print_formula, print_relation, print_term,
)
from .presburger import eliminate_exists_int, pa_decide, pa_model, pa_qe
from .realqe import eliminate_exists_real, ra_decide, ra_model, ra_qe
from .separation import (
    SeparatedDisjunct, SplitVar, eliminate_mods, mixed_decide, mixed_model,
    mixed_qe, separate_qf, to_canonical,
)
from .chains import (
    HasOmegaChain, Mode, ModeVector, NoOmegaChain, NotTransitive, Verdict,
    build_G, build_H, check_transitive, dense_chain_exists,
    discrete_chain_exists, enumerate_mode_vectors, extract_prefix,
    has_omega_chain,
)
from .harness import (
    PreconditionError, decide_boundedness, decide_eventuality,
    decide_k_liveness, decide_k_safety, decide_reachable_bound,
    exists_unbounded_execution, finite_domain_oracle,
)

__version__ = "0.1.0"
