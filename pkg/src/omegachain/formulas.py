"""Exact-arithmetic mixed linear formulas.

Terms are integer-coefficient linear combinations of sorted variables plus an
integer constant.  Atoms are `term = 0`, `term > 0`, and `term congruent to a
residue modulo d` (the last over integer variables only).  Formulas add the
Boolean connectives and single-variable quantifiers.  Everything is immutable;
all operations are pure functions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

__all__ = [
    "Sort", "Role", "VarId", "LinTerm", "Eq", "Gt", "ModCong",
    "TrueF", "FalseF", "Not", "And", "Or", "Exists", "Forall",
    "Formula", "Atom", "TRUE", "FALSE", "FormulaError", "SortError", "EvalError",
    "fresh_var", "prime", "unprime",
    "mk_and", "mk_or", "mk_not", "mk_exists", "mk_forall",
    "make_eq", "make_gt", "make_mod", "normalize_atom",
    "push_negations", "to_dnf", "evaluate", "substitute", "rename_free",
    "free_vars", "atoms_of", "map_atoms", "fold_ground", "is_quantifier_free",
    "conjunction_consistent",
]


class FormulaError(Exception):
    """Ill-formed term, atom, or formula construction."""


class SortError(FormulaError):
    """A variable of the wrong sort reached an engine."""


class EvalError(Exception):
    """Evaluation failed: unassigned variable or unbounded quantifier."""


class Sort(Enum):
    REAL = "real"
    INT = "int"


class Role(Enum):
    UNPRIMED = "unprimed"
    PRIMED = "primed"
    BOUND = "bound"


@dataclass(frozen=True)
class VarId:
    name: str
    sort: Sort
    role: Role = Role.UNPRIMED

    def display(self) -> str:
        return self.name + "'" if self.role is Role.PRIMED else self.name

    def __repr__(self) -> str:
        return f"{self.display()}:{self.sort.value[0]}"


def _var_key(v: VarId) -> tuple:
    return (v.name, v.role.value, v.sort.value)


def prime(v: VarId) -> VarId:
    if v.role is not Role.UNPRIMED:
        raise FormulaError(f"cannot prime {v!r}")
    return VarId(v.name, v.sort, Role.PRIMED)


def unprime(v: VarId) -> VarId:
    if v.role is not Role.PRIMED:
        raise FormulaError(f"cannot unprime {v!r}")
    return VarId(v.name, v.sort, Role.UNPRIMED)


_fresh_counter = itertools.count(1)


def fresh_var(base: str, sort: Sort, role: Role = Role.BOUND) -> VarId:
    """A variable with a globally fresh name derived from `base`."""
    return VarId(f"{base}__{next(_fresh_counter)}", sort, role)


# ---------------------------------------------------------------------------
# Linear terms


@dataclass(frozen=True)
class LinTerm:
    """Sum of coeff*var monomials plus an integer constant.

    Coefficients are nonzero integers; monomials are kept sorted by variable
    so that structural equality is semantic equality.
    """

    coeffs: tuple[tuple[VarId, int], ...] = ()
    constant: int = 0

    @staticmethod
    def make(coeffs: Mapping[VarId, int] | Iterable[tuple[VarId, int]] = (),
             constant: int = 0) -> LinTerm:
        merged: dict[VarId, int] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for v, a in items:
            if not isinstance(a, int):
                raise FormulaError(f"non-integer coefficient {a!r} for {v!r}")
            merged[v] = merged.get(v, 0) + a
        cleaned = tuple(sorted(((v, a) for v, a in merged.items() if a != 0),
                               key=lambda it: _var_key(it[0])))
        if not isinstance(constant, int):
            raise FormulaError(f"non-integer constant {constant!r}")
        return LinTerm(cleaned, constant)

    @staticmethod
    def var(v: VarId, coeff: int = 1) -> LinTerm:
        return LinTerm.make({v: coeff})

    @staticmethod
    def const(c: int) -> LinTerm:
        return LinTerm((), c)

    def coeff(self, v: VarId) -> int:
        for w, a in self.coeffs:
            if w == v:
                return a
        return 0

    @property
    def vars(self) -> tuple[VarId, ...]:
        return tuple(v for v, _ in self.coeffs)

    @property
    def is_ground(self) -> bool:
        return not self.coeffs

    def sorts(self) -> frozenset[Sort]:
        return frozenset(v.sort for v, _ in self.coeffs)

    def add(self, other: LinTerm) -> LinTerm:
        return LinTerm.make(list(self.coeffs) + list(other.coeffs),
                            self.constant + other.constant)

    def sub(self, other: LinTerm) -> LinTerm:
        return self.add(other.scale(-1))

    def scale(self, k: int) -> LinTerm:
        if k == 0:
            return LinTerm.const(0)
        return LinTerm(tuple((v, a * k) for v, a in self.coeffs),
                       self.constant * k)

    def neg(self) -> LinTerm:
        return self.scale(-1)

    def shift(self, dc: int) -> LinTerm:
        return LinTerm(self.coeffs, self.constant + dc)

    def drop_constant(self) -> LinTerm:
        return LinTerm(self.coeffs, 0)

    def part(self, keep) -> LinTerm:
        """Monomials whose variable satisfies the predicate; constant dropped."""
        return LinTerm(tuple((v, a) for v, a in self.coeffs if keep(v)), 0)

    def map_vars(self, ren: Mapping[VarId, VarId]) -> LinTerm:
        return LinTerm.make([(ren.get(v, v), a) for v, a in self.coeffs],
                            self.constant)

    def value(self, sigma: Mapping[VarId, int | Fraction]) -> Fraction:
        total = Fraction(self.constant)
        for v, a in self.coeffs:
            if v not in sigma:
                raise EvalError(f"unassigned variable {v!r}")
            total += a * Fraction(sigma[v])
        return total

    def content(self) -> int:
        """gcd of the variable coefficients (0 for a ground term)."""
        g = 0
        for _, a in self.coeffs:
            g = gcd(g, abs(a))
        return g


# ---------------------------------------------------------------------------
# Atoms and formulas


@dataclass(frozen=True)
class Eq:
    term: LinTerm


@dataclass(frozen=True)
class Gt:
    term: LinTerm


@dataclass(frozen=True)
class ModCong:
    term: LinTerm
    modulus: int
    residue: int


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Exists:
    var: VarId
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: VarId
    body: "Formula"


Atom = Union[Eq, Gt, ModCong]
Formula = Union[Eq, Gt, ModCong, TrueF, FalseF, Not, And, Or, Exists, Forall]

TRUE = TrueF()
FALSE = FalseF()

_ATOM_TYPES = (Eq, Gt, ModCong)


def _install_hash_cache(cls) -> None:
    # deep immutable trees get hashed constantly by the simplifiers; caching
    # per node turns that from quadratic into linear
    base = cls.__hash__

    def cached(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = base(self)
            object.__setattr__(self, "_hash", h)
        return h

    cls.__hash__ = cached


for _cls in (VarId, LinTerm, Eq, Gt, ModCong, Not, And, Or, Exists, Forall):
    _install_hash_cache(_cls)


def frees(f: Formula) -> frozenset[VarId]:
    """Free variables of f, cached on the node."""
    got = f.__dict__.get("_frees")
    if got is not None:
        return got
    if isinstance(f, _ATOM_TYPES):
        out = frozenset(f.term.vars)
    elif isinstance(f, (TrueF, FalseF)):
        out = frozenset()
    elif isinstance(f, Not):
        out = frees(f.arg)
    elif isinstance(f, (And, Or)):
        out = frozenset()
        for g in f.args:
            out |= frees(g)
    else:
        out = frees(f.body) - {f.var}
    object.__setattr__(f, "_frees", out)
    return out


def make_eq(term: LinTerm) -> Eq:
    """Equality atom with a sign-canonical term (first coefficient positive)."""
    lead = term.coeffs[0][1] if term.coeffs else term.constant
    if lead < 0:
        term = term.neg()
    return Eq(term)


def make_gt(term: LinTerm) -> Gt:
    return Gt(term)


def make_mod(term: LinTerm, modulus: int, residue: int) -> Formula:
    """Congruence atom, canonicalized: constant folded into the residue,
    coefficients reduced into [0, modulus), residue in [0, modulus)."""
    if modulus <= 0:
        raise FormulaError(f"modulus must be positive, got {modulus}")
    for v in term.vars:
        if v.sort is not Sort.INT:
            raise FormulaError(f"congruence over non-integer variable {v!r}")
    residue = (residue - term.constant) % modulus
    term = LinTerm(tuple((v, a % modulus) for v, a in term.coeffs
                         if a % modulus != 0), 0)
    if term.is_ground:
        return TRUE if residue == 0 else FALSE
    return ModCong(term, modulus, residue)


def _ground_truth(a: Atom) -> bool | None:
    if isinstance(a, Eq):
        return a.term.constant == 0 if a.term.is_ground else None
    if isinstance(a, Gt):
        return a.term.constant > 0 if a.term.is_ground else None
    if a.term.is_ground:
        return (a.term.constant - a.residue) % a.modulus == 0
    return None


def mk_not(f: Formula) -> Formula:
    if isinstance(f, TrueF):
        return FALSE
    if isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def _fact(a: Atom) -> tuple:
    """Atom digested for the conjunction state, cached on the atom.

    The variable part is sign-normalized (leading coefficient positive) and
    divided by the coefficient gcd so that, say, `2p > 5` and `p > 2` land
    on the same key with the same integer threshold.  Kinds: "eq"/"lo"/"hi"
    with (key, bound, all-int flag), "mod" with (key, modulus, residue),
    plus "ground", "always", "never" for variable-free content.
    """
    memo = a.__dict__.get("_fact")
    if memo is not None:
        return memo
    t = a.term
    if not t.coeffs:
        fact: tuple = ("ground",)
    else:
        flip = t.coeffs[0][1] < 0
        key = tuple((v, -c) for v, c in t.coeffs) if flip else t.coeffs
        g = 0
        for _, c in key:
            g = gcd(g, c)
        if g > 1:
            key = tuple((v, c // g) for v, c in key)
        isint = all(v.sort is Sort.INT for v, _ in key)
        if isinstance(a, Eq):
            val = t.constant if flip else -t.constant
            if g > 1:
                if isint and val % g != 0:
                    fact = ("never",)
                else:
                    val = val // g if isint else Fraction(val, g)
                    fact = ("eq", key, val, isint)
            else:
                fact = ("eq", key, val, isint)
        elif isinstance(a, Gt):
            kind = "hi" if flip else "lo"
            b = t.constant if flip else -t.constant
            if g > 1:
                if isint:
                    # strict int bounds round inward: u > b/g iff u > floor,
                    # u < b/g iff u < ceil
                    b = b // g if kind == "lo" else -((-b) // g)
                else:
                    b = Fraction(b, g)
            fact = (kind, key, b, isint)
        else:
            rho = (t.constant - a.residue if flip
                   else a.residue - t.constant) % a.modulus
            m = a.modulus
            if g > 1:
                e = gcd(g, m)
                if rho % e != 0:
                    fact = ("never",)
                else:
                    m //= e
                    if m == 1:
                        fact = ("always",)
                    else:
                        inv = pow((g // e) % m, -1, m)
                        fact = ("mod", key, m, (rho // e) * inv % m)
            else:
                fact = ("mod", key, m, rho)
    object.__setattr__(a, "_fact", fact)
    return fact


class _ConjState:
    """Bounds and congruences accumulated over one conjunction of atoms.

    Tracks, per normalized variable part: a pinned value, the tightest
    strict bounds, congruences, and the atom that contributed each record.
    `add` returns -1 on contradiction, 0 when the atom is already implied,
    and 1 when it tightened something; displaced weaker atoms drop out of
    `atom_list`, so the remembered conjunction stays irredundant.
    """

    __slots__ = ("bnd", "mods")

    def __init__(self) -> None:
        # key -> (eq, lo, hi, eq_atom, lo_atom, hi_atom)
        self.bnd: dict = {}
        # key -> tuple of (modulus, residue, atom)
        self.mods: dict = {}

    def clone(self) -> "_ConjState":
        s = _ConjState.__new__(_ConjState)
        s.bnd = dict(self.bnd)
        s.mods = dict(self.mods)
        return s

    def add(self, a: Atom) -> int:
        fact = _fact(a)
        kind = fact[0]
        if kind == "ground":
            return 0 if _ground_truth(a) else -1
        if kind == "always":
            return 0
        if kind == "never":
            return -1
        key = fact[1]
        if kind == "mod":
            m, rho = fact[2], fact[3]
            ent = self.bnd.get(key)
            if ent is not None and ent[0] is not None:
                return 0 if (ent[0] - rho) % m == 0 else -1
            cur = self.mods.get(key, ())
            for m2, r2, _ in cur:
                if m2 == m:
                    return 0 if r2 == rho else -1
            self.mods[key] = cur + ((m, rho, a),)
            return 1
        ent = self.bnd.get(key)
        eq, lo, hi, ea, la, ha = ent if ent is not None \
            else (None, None, None, None, None, None)
        isint = fact[3]
        if kind == "eq":
            val = fact[2]
            if eq is not None:
                return 0 if eq == val else -1
            if lo is not None and not val > lo:
                return -1
            if hi is not None and not val < hi:
                return -1
            for m2, r2, _ in self.mods.get(key, ()):
                if (val - r2) % m2 != 0:
                    return -1
            # the pin subsumes recorded bounds and congruences on this key
            self.bnd[key] = (val, None, None, a, None, None)
            self.mods.pop(key, None)
            return 1
        b = fact[2]
        if kind == "lo":
            if eq is not None:
                return 0 if eq > b else -1
            if lo is not None and b <= lo:
                return 0
            lo, la = b, a
        else:
            if eq is not None:
                return 0 if eq < b else -1
            if hi is not None and b >= hi:
                return 0
            hi, ha = b, a
        if lo is not None and hi is not None:
            # integer-valued parts need room for a whole point between bounds
            if (lo + 1 >= hi) if isint else (lo >= hi):
                return -1
        self.bnd[key] = (eq, lo, hi, ea, la, ha)
        return 1

    def atom_list(self) -> list:
        """Atoms still carrying information, in first-recorded key order."""
        out = []
        for eq, lo, hi, ea, la, ha in self.bnd.values():
            if ea is not None:
                out.append(ea)
            if la is not None:
                out.append(la)
            if ha is not None:
                out.append(ha)
        for cur in self.mods.values():
            for _, _, a in cur:
                out.append(a)
        return out

    def signature(self) -> frozenset:
        """Value-level identity: equal signatures mean equivalent records."""
        items = []
        for key, (eq, lo, hi, _, _, _) in self.bnd.items():
            if eq is not None:
                items.append(("eq", key, eq))
            else:
                if lo is not None:
                    items.append(("lo", key, lo))
                if hi is not None:
                    items.append(("hi", key, hi))
        for key, cur in self.mods.items():
            for m, rho, _ in cur:
                items.append(("mod", key, m, rho))
        return frozenset(items)


def mk_and(args: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    state = _ConjState()
    seen: set = set()
    for f in _flatten(args, And):
        if isinstance(f, TrueF):
            continue
        if isinstance(f, FalseF):
            return FALSE
        if isinstance(f, _ATOM_TYPES):
            t = _ground_truth(f)
            if t is True:
                continue
            if t is False:
                return FALSE
            if state.add(f) < 0:
                return FALSE
        if f in seen:
            continue
        seen.add(f)
        flat.append(f)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def mk_or(args: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    seen: set = set()
    for f in _flatten(args, Or):
        if isinstance(f, FalseF):
            continue
        if isinstance(f, TrueF):
            return TRUE
        if isinstance(f, _ATOM_TYPES):
            t = _ground_truth(f)
            if t is True:
                return TRUE
            if t is False:
                continue
        if f in seen:
            continue
        seen.add(f)
        flat.append(f)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def _flatten(args: Iterable[Formula], node) -> Iterator[Formula]:
    for f in args:
        if isinstance(f, node):
            yield from _flatten(f.args, node)
        else:
            yield f


def mk_exists(v: VarId, body: Formula) -> Formula:
    if isinstance(body, (TrueF, FalseF)):
        return body
    return Exists(v, body)


def mk_forall(v: VarId, body: Formula) -> Formula:
    if isinstance(body, (TrueF, FalseF)):
        return body
    return Forall(v, body)


# ---------------------------------------------------------------------------
# Atom normalization from rational linear forms

Rational = Union[int, Fraction]
RatLin = tuple[Mapping[VarId, Rational], Rational]


def _rat_diff(lhs: RatLin, rhs: RatLin) -> tuple[dict[VarId, Fraction], Fraction]:
    coeffs: dict[VarId, Fraction] = {}
    for v, a in lhs[0].items():
        coeffs[v] = coeffs.get(v, Fraction(0)) + Fraction(a)
    for v, a in rhs[0].items():
        coeffs[v] = coeffs.get(v, Fraction(0)) - Fraction(a)
    return coeffs, Fraction(lhs[1]) - Fraction(rhs[1])


def normalize_atom(lhs: RatLin, kind: str, rhs: RatLin,
                   modulus: Rational | None = None) -> Formula:
    """Turn `lhs KIND rhs` into core atoms with integer coefficients.

    kind is one of =, >, <, >=, <=, mod=.  Denominators are cleared by the
    positive lcm.  >= and <= become a single shifted strict atom when every
    variable is integer-sorted, and Or(Gt, Eq) otherwise.  The result is
    stable under renormalization.
    """
    coeffs, const = _rat_diff(lhs, rhs)
    dens = [c.denominator for c in coeffs.values()] + [const.denominator]
    if kind == "mod=":
        if modulus is None:
            raise FormulaError("mod= needs a modulus")
        modulus = Fraction(modulus)
        dens.append(modulus.denominator)
    scale = lcm(*dens) if dens else 1
    iterm = LinTerm.make({v: int(c * scale) for v, c in coeffs.items()},
                         int(const * scale))

    if kind == "mod=":
        # lhs cong rhs (mod m); the residue is -constant of the difference
        m = int(modulus * scale)
        return make_mod(iterm.drop_constant(), m, -iterm.constant)
    if kind == "=":
        return make_eq(iterm)
    if kind == ">":
        return Gt(iterm)
    if kind == "<":
        return Gt(iterm.neg())
    if kind in (">=", "<="):
        t = iterm if kind == ">=" else iterm.neg()
        if all(v.sort is Sort.INT for v in t.vars):
            return Gt(t.shift(1))
        return mk_or([Gt(t), make_eq(t)])
    raise FormulaError(f"unknown relation kind {kind!r}")


# ---------------------------------------------------------------------------
# Structure-walking operations


def free_vars(f: Formula) -> frozenset[VarId]:
    return frees(f)


def atoms_of(f: Formula) -> Iterator[Atom]:
    if isinstance(f, _ATOM_TYPES):
        yield f
    elif isinstance(f, Not):
        yield from atoms_of(f.arg)
    elif isinstance(f, (And, Or)):
        for g in f.args:
            yield from atoms_of(g)
    elif isinstance(f, (Exists, Forall)):
        yield from atoms_of(f.body)


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Exists, Forall)):
        return False
    if isinstance(f, Not):
        return is_quantifier_free(f.arg)
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(g) for g in f.args)
    return True


def fold_ground(f: Formula) -> Formula:
    """Collapse variable-free atoms to truth constants throughout f."""
    def fold(a: Atom) -> Formula:
        t = _ground_truth(a)
        if t is None:
            return a
        return TRUE if t else FALSE
    return map_atoms(f, fold)


def map_atoms(f: Formula, fn, touched: Optional[frozenset] = None) -> Formula:
    """Rebuild f with every atom replaced by fn(atom) (a Formula).

    When `touched` is given, subtrees free of those variables are returned
    as-is without visiting their atoms.
    """
    if touched is not None and frees(f).isdisjoint(touched):
        return f
    if isinstance(f, _ATOM_TYPES):
        return fn(f)
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return mk_not(map_atoms(f.arg, fn, touched))
    if isinstance(f, And):
        return mk_and([map_atoms(g, fn, touched) for g in f.args])
    if isinstance(f, Or):
        return mk_or([map_atoms(g, fn, touched) for g in f.args])
    if isinstance(f, Exists):
        return mk_exists(f.var, map_atoms(f.body, fn, touched))
    return mk_forall(f.var, map_atoms(f.body, fn, touched))


def _subst_atom(a: Atom, v: VarId, num: LinTerm, den: int) -> Formula:
    c = a.term.coeff(v)
    if c == 0:
        return a
    rest = a.term.sub(LinTerm.var(v, c))
    if isinstance(a, ModCong):
        new = rest.scale(den).add(num.scale(c))
        return make_mod(new, a.modulus * den, a.residue * den)
    new = rest.scale(den).add(num.scale(c))
    if isinstance(a, Eq):
        return make_eq(new)
    return Gt(new)


def substitute(f: Formula, v: VarId, num: LinTerm, den: int = 1) -> Formula:
    """Capture-avoiding substitution of v by the rational-scaled term num/den.

    den must be positive; atoms are multiplied through to stay integral.
    """
    if den <= 0:
        raise FormulaError("substitution denominator must be positive")
    if v.sort is Sort.INT:
        if den != 1:
            raise FormulaError("integer variable requires an integer term")
        if any(w.sort is not Sort.INT for w in num.vars):
            raise FormulaError(f"sort mismatch substituting {v!r}")
    if v not in frees(f):
        return f
    if isinstance(f, _ATOM_TYPES):
        return _subst_atom(f, v, num, den)
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return mk_not(substitute(f.arg, v, num, den))
    if isinstance(f, And):
        return mk_and([substitute(g, v, num, den) for g in f.args])
    if isinstance(f, Or):
        return mk_or([substitute(g, v, num, den) for g in f.args])
    node = mk_exists if isinstance(f, Exists) else mk_forall
    if f.var == v:
        return f
    if f.var in num.vars:
        fresh = fresh_var(f.var.name, f.var.sort)
        body = substitute(f.body, f.var, LinTerm.var(fresh))
        return node(fresh, substitute(body, v, num, den))
    return node(f.var, substitute(f.body, v, num, den))


def rename_free(f: Formula, ren: Mapping[VarId, VarId]) -> Formula:
    """Simultaneous renaming of free variables (targets must not be bound in f)."""
    if frees(f).isdisjoint(ren.keys()):
        return f
    if isinstance(f, _ATOM_TYPES):
        term = f.term.map_vars(ren)
        if isinstance(f, Eq):
            return make_eq(term)
        if isinstance(f, Gt):
            return Gt(term)
        return make_mod(term, f.modulus, f.residue)
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return mk_not(rename_free(f.arg, ren))
    if isinstance(f, And):
        return mk_and([rename_free(g, ren) for g in f.args])
    if isinstance(f, Or):
        return mk_or([rename_free(g, ren) for g in f.args])
    if f.var in ren.values():
        raise FormulaError(f"renaming captures bound variable {f.var!r}")
    sub = {v: w for v, w in ren.items() if v != f.var}
    node = mk_exists if isinstance(f, Exists) else mk_forall
    return node(f.var, rename_free(f.body, sub))


# ---------------------------------------------------------------------------
# Negation normal form


def push_negations(f: Formula, positive: bool = True) -> Formula:
    if isinstance(f, Not):
        return push_negations(f.arg, not positive)
    if isinstance(f, TrueF):
        return TRUE if positive else FALSE
    if isinstance(f, FalseF):
        return FALSE if positive else TRUE
    if isinstance(f, And):
        parts = [push_negations(g, positive) for g in f.args]
        return mk_and(parts) if positive else mk_or(parts)
    if isinstance(f, Or):
        parts = [push_negations(g, positive) for g in f.args]
        return mk_or(parts) if positive else mk_and(parts)
    if isinstance(f, Exists):
        node = mk_exists if positive else mk_forall
        return node(f.var, push_negations(f.body, positive))
    if isinstance(f, Forall):
        node = mk_forall if positive else mk_exists
        return node(f.var, push_negations(f.body, positive))
    if positive:
        return f
    return _negate_atom(f)


def _negate_atom(a: Atom) -> Formula:
    if isinstance(a, Eq):
        return mk_or([Gt(a.term), Gt(a.term.neg())])
    if isinstance(a, Gt):
        t = a.term
        if t.vars and all(v.sort is Sort.INT for v in t.vars):
            # over integers: not(t > 0) iff -t > -1
            return Gt(t.neg().shift(1))
        return mk_or([Gt(t.neg()), make_eq(t)])
    others = [make_mod(a.term, a.modulus, r)
              for r in range(a.modulus) if r != a.residue]
    return mk_or(others)


# ---------------------------------------------------------------------------
# Disjunctive normal form


def conjunction_consistent(atoms: Sequence[Atom]) -> bool:
    """False only when the atom list is syntactically contradictory."""
    state = _ConjState()
    for a in atoms:
        if state.add(a) < 0:
            return False
    return True


class _TooWide(FormulaError):
    """Disjunctive expansion exceeded the requested width."""


def _dnf_states(f: Formula, check=None,
                max_width: Optional[int] = None) -> dict:
    """Branches of quantifier-free negation-normal f keyed by signature.

    Each branch is a _ConjState recording an irredundant, consistent atom
    conjunction; branches with the same value-level content collapse as
    they are produced, which keeps the width at the number of genuinely
    distinct cells.  With max_width set, wider expansions raise _TooWide.
    """
    if isinstance(f, Not):
        raise FormulaError("to_dnf expects negation-normal input")
    empty_sig = frozenset()

    def walk(g: Formula) -> dict:
        if isinstance(g, TrueF):
            return {empty_sig: _ConjState()}
        if isinstance(g, FalseF):
            return {}
        if isinstance(g, _ATOM_TYPES):
            st = _ConjState()
            if st.add(g) < 0:
                return {}
            return {st.signature(): st}
        if isinstance(g, Or):
            out: dict = {}
            for h in g.args:
                for sig, st in walk(h).items():
                    if sig not in out:
                        out[sig] = st
                if max_width is not None and len(out) > max_width:
                    raise _TooWide("disjunction too wide")
            return out
        if isinstance(g, And):
            prod = {empty_sig: _ConjState()}
            for h in g.args:
                branches = walk(h)
                if not branches:
                    return {}
                nxt: dict = {}
                for lsig, lst in prod.items():
                    for rsig, rst in branches.items():
                        if check is not None:
                            check()
                        if not rsig:
                            if lsig not in nxt:
                                nxt[lsig] = lst
                            continue
                        st = lst.clone()
                        for a in rst.atom_list():
                            if st.add(a) < 0:
                                break
                        else:
                            sig = st.signature()
                            if sig not in nxt:
                                nxt[sig] = st
                    if max_width is not None and len(nxt) > max_width:
                        raise _TooWide("conjunction product too wide")
                prod = nxt
                if not prod:
                    return {}
            return prod
        raise FormulaError("to_dnf expects a quantifier-free formula")

    return walk(f)


def to_dnf(f: Formula, check=None,
           max_width: Optional[int] = None) -> list[list[Atom]]:
    """Quantifier-free negation-normal f as a list of atom conjunctions.

    Contradictory conjunctions are dropped and equivalent ones collapse;
    each surviving conjunction is irredundant (implied atoms removed).
    `check`, when given, is called per branch combination considered.
    With max_width set, expansion past that many branches raises rather
    than blowing up.
    """
    return [st.atom_list() for st in _dnf_states(f, check, max_width).values()]


def dnf_simplify(f: Formula, check=None, max_width: int = 1024) -> Formula:
    """f rebuilt as a pruned disjunction of consistent atom conjunctions.

    Contradictory branches vanish, equivalent ones collapse, and subsumed
    branches (whose records extend a surviving branch's) are dropped.  When
    the expansion would exceed max_width branches the negation-normal
    input comes back instead, so callers can treat this as best-effort.
    """
    nnf = push_negations(f)
    if not is_quantifier_free(nnf):
        return nnf
    try:
        branches = _dnf_states(nnf, check, max_width)
    except _TooWide:
        return nnf
    items = sorted(branches.items(), key=lambda kv: len(kv[0]))
    if len(items) <= 512:
        keep: list[tuple] = []
        for s, st in items:
            if any(k <= s for k, _ in keep):
                continue
            keep.append((s, st))
        items = keep
    return mk_or([mk_and(st.atom_list()) for _, st in items])


# ---------------------------------------------------------------------------
# Ground evaluation

Bounds = Union[None, tuple[int, int], Mapping[VarId, tuple[int, int]]]


def _atom_truth(a: Atom, sigma: Mapping[VarId, int | Fraction]) -> bool:
    val = a.term.value(sigma)
    if isinstance(a, Eq):
        return val == 0
    if isinstance(a, Gt):
        return val > 0
    if val.denominator != 1:
        raise EvalError(f"congruence over non-integer value {val}")
    return (int(val) - a.residue) % a.modulus == 0


def evaluate(f: Formula, sigma: Mapping[VarId, int | Fraction],
             int_bounds: Bounds = None) -> bool:
    """Exact truth value of f under sigma.

    Quantified integer variables range over the box given by int_bounds
    (a (lo, hi) pair for all of them, or a per-variable mapping); quantified
    real variables and missing bounds raise EvalError.
    """
    for v, val in sigma.items():
        if v.sort is Sort.INT and Fraction(val).denominator != 1:
            raise EvalError(f"non-integer value {val} for {v!r}")
    return _eval(f, dict(sigma), int_bounds)


def _eval(f: Formula, sigma: dict, bounds: Bounds) -> bool:
    if isinstance(f, _ATOM_TYPES):
        return _atom_truth(f, sigma)
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Not):
        return not _eval(f.arg, sigma, bounds)
    if isinstance(f, And):
        return all(_eval(g, sigma, bounds) for g in f.args)
    if isinstance(f, Or):
        return any(_eval(g, sigma, bounds) for g in f.args)
    v = f.var
    if v.sort is not Sort.INT:
        raise EvalError(f"cannot enumerate real-sorted quantifier on {v!r}")
    if bounds is None:
        raise EvalError(f"unbounded quantifier on {v!r}")
    lo, hi = bounds[v] if isinstance(bounds, Mapping) else bounds
    shadowed = sigma.get(v)
    try:
        results = []
        for k in range(lo, hi + 1):
            sigma[v] = k
            results.append(_eval(f.body, sigma, bounds))
            if isinstance(f, Exists) and results[-1]:
                return True
            if isinstance(f, Forall) and not results[-1]:
                return False
        return isinstance(f, Forall)
    finally:
        if shadowed is None:
            sigma.pop(v, None)
        else:
            sigma[v] = shadowed
