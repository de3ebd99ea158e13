"""S-expression front end for relations, formulas, and system queries.

Surface syntax (everything else is an error):

    (relation (reals x ...) (ints y ...) (body FORMULA))
    (system (relation ...) (init F) (live F ...) (safe F ...)
            (bound T ...) (step F))

    FORMULA := (and F F ...) | (or F F ...) | (not F)
             | (exists ((real x) | (int y) ...) F) | (forall (...) F)
             | (= T T) | (> T T) | (>= T T) | (< T T) | (<= T T)
             | (mod= T INT INT) | true | false
    T       := INT | ident | ident' | (+ T T ...) | (- T T) | (* INT T)

Primed identifiers (trailing apostrophe) denote the post-state copy of a
declared variable.  Comparisons are normalized into the {=, >, mod=} core
with a zero right-hand side; the printer emits that core, so printing then
parsing reproduces the formula node for node.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from .formulas import (
    And, Eq, Exists, FalseF, Forall, Formula, FormulaError, Gt, LinTerm,
    ModCong, Not, Or, Role, Sort, TrueF, VarId, mk_and, mk_exists,
    mk_forall, mk_not, mk_or, normalize_atom, prime,
)

__all__ = [
    "ParseError", "RelationDoc", "SystemDoc",
    "parse_relation", "parse_system", "parse_document", "parse_formula",
    "print_formula", "print_term", "print_relation",
]


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class RelationDoc:
    """A binary relation over declared variables and their primed copies."""

    reals: tuple[VarId, ...]
    ints: tuple[VarId, ...]
    body: Formula

    @property
    def vars(self) -> tuple[VarId, ...]:
        return self.reals + self.ints

    def pairs(self) -> list[tuple[VarId, VarId]]:
        return [(v, prime(v)) for v in self.vars]


@dataclass(frozen=True)
class SystemDoc:
    """A verification query: reachability relation plus property clauses."""

    reach: RelationDoc
    init: Formula
    live: tuple[Formula, ...] = ()
    safe: tuple[Formula, ...] = ()
    bounds: tuple[LinTerm, ...] = ()
    step: Optional[RelationDoc] = None


# ---------------------------------------------------------------------------
# Tokenizer / reader

_TOKEN_RE = re.compile(r"\(|\)|;[^\n]*|[^\s();]+")
_INT_RE = re.compile(r"-?\d+\Z")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*'?\Z")

_KEYWORDS = {
    "relation", "system", "reals", "ints", "body", "init", "live", "safe",
    "bound", "step", "and", "or", "not", "exists", "forall", "real", "int",
    "true", "false", "=", ">", ">=", "<", "<=", "+", "-", "*", "mod=",
}


@dataclass(frozen=True)
class _Node:
    value: Union[str, tuple]
    line: int
    col: int

    @property
    def is_list(self) -> bool:
        return isinstance(self.value, tuple)


def _tokenize(text: str) -> list[tuple[str, int, int]]:
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            line += 1
            start = pos + 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {ch!r}", line, pos - start + 1)
        tok = m.group()
        if not tok.startswith(";"):
            out.append((tok, line, pos - start + 1))
        pos = m.end()
    return out


def _read(text: str) -> _Node:
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty input", 1, 1)
    node, rest = _read_one(tokens, 0)
    if rest != len(tokens):
        tok, line, col = tokens[rest]
        raise ParseError(f"trailing input {tok!r}", line, col)
    return node


def _read_one(tokens, i) -> tuple[_Node, int]:
    tok, line, col = tokens[i]
    if tok == "(":
        items = []
        i += 1
        while True:
            if i >= len(tokens):
                raise ParseError("unclosed parenthesis", line, col)
            if tokens[i][0] == ")":
                return _Node(tuple(items), line, col), i + 1
            item, i = _read_one(tokens, i)
            items.append(item)
    if tok == ")":
        raise ParseError("unmatched ')'", line, col)
    return _Node(tok, line, col), i + 1


def _head(node: _Node) -> str:
    if not node.is_list or not node.value or node.value[0].is_list:
        return ""
    return node.value[0].value


def _expect_list(node: _Node, what: str) -> tuple:
    if not node.is_list:
        raise ParseError(f"expected {what}, got {node.value!r}", node.line, node.col)
    return node.value


# ---------------------------------------------------------------------------
# Variable environments


class _Env:
    """Lexical scope: name -> VarId, plus the declared prime partners."""

    def __init__(self, decls: Mapping[str, VarId], parent: "_Env | None" = None):
        self.decls = dict(decls)
        self.parent = parent

    def lookup(self, name: str) -> VarId | None:
        env: _Env | None = self
        while env is not None:
            if name in env.decls:
                return env.decls[name]
            env = env.parent
        return None

    def child(self, decls: Mapping[str, VarId]) -> "_Env":
        return _Env(decls, self)


def _resolve(name: str, env: _Env, node: _Node, allow_primed: bool) -> VarId:
    primed = name.endswith("'")
    base = name[:-1] if primed else name
    v = env.lookup(base)
    if v is None:
        raise ParseError(f"undeclared variable {base!r}", node.line, node.col)
    if primed:
        if v.role is not Role.UNPRIMED:
            raise ParseError(f"cannot prime bound variable {base!r}",
                             node.line, node.col)
        if not allow_primed:
            raise ParseError(f"primed variable {name!r} not allowed here",
                             node.line, node.col)
        return prime(v)
    return v


# ---------------------------------------------------------------------------
# Terms and formulas


def _parse_term(node: _Node, env: _Env, allow_primed: bool) -> LinTerm:
    if not node.is_list:
        tok = node.value
        if _INT_RE.match(tok):
            return LinTerm.const(int(tok))
        if _IDENT_RE.match(tok):
            return LinTerm.var(_resolve(tok, env, node, allow_primed))
        raise ParseError(f"bad term {tok!r}", node.line, node.col)
    items = node.value
    if not items or items[0].is_list:
        raise ParseError("expected term operator", node.line, node.col)
    op = items[0].value
    args = items[1:]
    if op == "+":
        if not args:
            raise ParseError("(+) needs at least one term", node.line, node.col)
        total = LinTerm.const(0)
        for a in args:
            total = total.add(_parse_term(a, env, allow_primed))
        return total
    if op == "-":
        if len(args) != 2:
            raise ParseError("(-) takes exactly two terms", node.line, node.col)
        return _parse_term(args[0], env, allow_primed).sub(
            _parse_term(args[1], env, allow_primed))
    if op == "*":
        if len(args) != 2:
            raise ParseError("(*) takes a coefficient and a term",
                             node.line, node.col)
        coeff = args[0]
        if coeff.is_list or not _INT_RE.match(coeff.value):
            raise ParseError(
                "nonlinear term: (*) requires an integer literal coefficient",
                node.line, node.col)
        return _parse_term(args[1], env, allow_primed).scale(int(coeff.value))
    raise ParseError(f"unknown term operator {op!r}", node.line, node.col)


_CMP_OPS = {"=", ">", ">=", "<", "<="}


def _parse_formula(node: _Node, env: _Env, allow_primed: bool) -> Formula:
    if not node.is_list:
        tok = node.value
        if tok == "true":
            return TrueF()
        if tok == "false":
            return FalseF()
        raise ParseError(f"expected formula, got {tok!r}", node.line, node.col)
    items = node.value
    if not items or items[0].is_list:
        raise ParseError("expected formula operator", node.line, node.col)
    op = items[0].value
    args = items[1:]

    if op in ("and", "or"):
        if not args:
            raise ParseError(f"({op}) needs at least one formula",
                             node.line, node.col)
        parts = [_parse_formula(a, env, allow_primed) for a in args]
        return mk_and(parts) if op == "and" else mk_or(parts)
    if op == "not":
        if len(args) != 1:
            raise ParseError("(not) takes one formula", node.line, node.col)
        return mk_not(_parse_formula(args[0], env, allow_primed))
    if op in ("exists", "forall"):
        if len(args) != 2:
            raise ParseError(f"({op}) takes a binding list and a body",
                             node.line, node.col)
        bindings = _parse_bindings(args[0])
        inner = env.child({v.name: v for v in bindings})
        body = _parse_formula(args[1], inner, allow_primed)
        node_fn = mk_exists if op == "exists" else mk_forall
        for v in reversed(bindings):
            body = node_fn(v, body)
        return body
    if op in _CMP_OPS:
        if len(args) != 2:
            raise ParseError(f"({op}) takes two terms", node.line, node.col)
        lhs = _parse_term(args[0], env, allow_primed)
        rhs = _parse_term(args[1], env, allow_primed)
        return _atom(lhs, op, rhs, node)
    if op == "mod=":
        if len(args) != 3:
            raise ParseError("(mod=) takes a term, a modulus, and a residue",
                             node.line, node.col)
        t = _parse_term(args[0], env, allow_primed)
        d = _parse_int(args[1], "modulus")
        r = _parse_int(args[2], "residue")
        if d <= 0:
            raise ParseError(f"modulus must be positive, got {d}",
                             args[1].line, args[1].col)
        try:
            return normalize_atom(_aslin(t), "mod=", _aslin(LinTerm.const(r)),
                                  modulus=d)
        except FormulaError as e:
            raise ParseError(str(e), node.line, node.col) from None
    raise ParseError(f"unknown formula operator {op!r}", node.line, node.col)


def _aslin(t: LinTerm):
    return (dict(t.coeffs), t.constant)


def _atom(lhs: LinTerm, op: str, rhs: LinTerm, node: _Node) -> Formula:
    try:
        return normalize_atom(_aslin(lhs), op, _aslin(rhs))
    except FormulaError as e:
        raise ParseError(str(e), node.line, node.col) from None


def _parse_int(node: _Node, what: str) -> int:
    if node.is_list or not _INT_RE.match(node.value):
        raise ParseError(f"expected integer {what}", node.line, node.col)
    return int(node.value)


def _parse_bindings(node: _Node) -> list[VarId]:
    items = _expect_list(node, "binding list")
    if not items:
        raise ParseError("empty binding list", node.line, node.col)
    out = []
    for b in items:
        parts = _expect_list(b, "binding")
        if len(parts) != 2 or parts[0].is_list or parts[1].is_list:
            raise ParseError("binding must be (real x) or (int y)",
                             b.line, b.col)
        kind, name = parts[0].value, parts[1].value
        if kind not in ("real", "int"):
            raise ParseError(f"binding sort must be real or int, got {kind!r}",
                             parts[0].line, parts[0].col)
        _check_ident(parts[1])
        sort = Sort.REAL if kind == "real" else Sort.INT
        out.append(VarId(name, sort, Role.BOUND))
    return out


def _check_ident(node: _Node) -> str:
    name = node.value
    if not _IDENT_RE.match(name) or name.endswith("'"):
        raise ParseError(f"bad identifier {name!r}", node.line, node.col)
    if name in _KEYWORDS:
        raise ParseError(f"{name!r} is reserved", node.line, node.col)
    return name


# ---------------------------------------------------------------------------
# Documents


def _parse_decls(items: Sequence[_Node]) -> tuple[list[VarId], list[VarId], int]:
    reals: list[VarId] = []
    ints: list[VarId] = []
    names: set[str] = set()
    i = 0
    for kind, sort, sink in (("reals", Sort.REAL, reals),
                             ("ints", Sort.INT, ints)):
        if i < len(items) and _head(items[i]) == kind:
            for ident in items[i].value[1:]:
                if ident.is_list:
                    raise ParseError("expected identifier", ident.line, ident.col)
                name = _check_ident(ident)
                if name in names:
                    raise ParseError(f"duplicate declaration of {name!r}",
                                     ident.line, ident.col)
                names.add(name)
                sink.append(VarId(name, sort, Role.UNPRIMED))
            i += 1
    return reals, ints, i


def _parse_relation_node(node: _Node) -> RelationDoc:
    items = _expect_list(node, "(relation ...)")
    if _head(node) != "relation":
        raise ParseError("expected (relation ...)", node.line, node.col)
    reals, ints, i = _parse_decls(items[1:])
    rest = items[1 + i:]
    if len(rest) != 1 or _head(rest[0]) != "body":
        raise ParseError("relation needs a single (body ...) after declarations",
                         node.line, node.col)
    body_items = rest[0].value
    if len(body_items) != 2:
        raise ParseError("(body) takes one formula",
                         rest[0].line, rest[0].col)
    env = _Env({v.name: v for v in reals + ints})
    body = _parse_formula(body_items[1], env, allow_primed=True)
    return RelationDoc(tuple(reals), tuple(ints), body)


def parse_relation(text: str) -> RelationDoc:
    node = _read(text)
    return _parse_relation_node(node)


def parse_system(text: str) -> SystemDoc:
    node = _read(text)
    return _parse_system_node(node)


def _parse_system_node(node: _Node) -> SystemDoc:
    items = _expect_list(node, "(system ...)")
    if _head(node) != "system":
        raise ParseError("expected (system ...)", node.line, node.col)
    if len(items) < 2:
        raise ParseError("system needs a relation", node.line, node.col)
    reach = _parse_relation_node(items[1])
    env = _Env({v.name: v for v in reach.vars})
    init: Formula = TrueF()
    live: list[Formula] = []
    safe: list[Formula] = []
    bounds: list[LinTerm] = []
    step: Optional[RelationDoc] = None
    seen: set[str] = set()
    for clause in items[2:]:
        kind = _head(clause)
        if kind not in ("init", "live", "safe", "bound", "step"):
            raise ParseError(f"unknown system clause {kind!r}",
                             clause.line, clause.col)
        if kind in seen and kind in ("init", "step"):
            raise ParseError(f"duplicate ({kind}) clause", clause.line, clause.col)
        seen.add(kind)
        parts = clause.value[1:]
        if not parts:
            raise ParseError(f"({kind}) needs an argument", clause.line, clause.col)
        if kind == "init":
            if len(parts) != 1:
                raise ParseError("(init) takes one formula",
                                 clause.line, clause.col)
            init = _parse_formula(parts[0], env, allow_primed=False)
        elif kind == "live":
            live.extend(_parse_formula(p, env, allow_primed=False) for p in parts)
        elif kind == "safe":
            safe.extend(_parse_formula(p, env, allow_primed=False) for p in parts)
        elif kind == "bound":
            bounds.extend(_parse_term(p, env, allow_primed=False) for p in parts)
        else:
            if len(parts) != 1:
                raise ParseError("(step) takes one formula",
                                 clause.line, clause.col)
            body = _parse_formula(parts[0], env, allow_primed=True)
            step = RelationDoc(reach.reals, reach.ints, body)
    return SystemDoc(reach, init, tuple(live), tuple(safe), tuple(bounds), step)


def parse_document(text: str) -> Union[RelationDoc, SystemDoc]:
    node = _read(text)
    kind = _head(node)
    if kind == "relation":
        return _parse_relation_node(node)
    if kind == "system":
        return _parse_system_node(node)
    raise ParseError("expected (relation ...) or (system ...)",
                     node.line, node.col)


def parse_formula(text: str, vars: Iterable[VarId] = (),
                  allow_primed: bool = True) -> Formula:
    """Parse a bare formula against an explicit variable environment."""
    decls = {}
    for v in vars:
        if v.role is Role.PRIMED:
            continue
        decls[v.name] = v
    env = _Env(decls)
    return _parse_formula(_read(text), env, allow_primed)


# ---------------------------------------------------------------------------
# Printer


def print_term(t: LinTerm) -> str:
    pieces = []
    for v, a in t.coeffs:
        name = v.display()
        pieces.append(name if a == 1 else f"(* {a} {name})")
    if t.constant != 0 or not pieces:
        pieces.append(str(t.constant))
    if len(pieces) == 1:
        return pieces[0]
    return "(+ " + " ".join(pieces) + ")"


def print_formula(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Eq):
        return f"(= {print_term(f.term)} 0)"
    if isinstance(f, Gt):
        return f"(> {print_term(f.term)} 0)"
    if isinstance(f, ModCong):
        return f"(mod= {print_term(f.term)} {f.modulus} {f.residue})"
    if isinstance(f, Not):
        return f"(not {print_formula(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(print_formula(g) for g in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(print_formula(g) for g in f.args) + ")"
    if isinstance(f, (Exists, Forall)):
        word = "exists" if isinstance(f, Exists) else "forall"
        sort = "real" if f.var.sort is Sort.REAL else "int"
        return f"({word} (({sort} {f.var.name})) {print_formula(f.body)})"
    raise FormulaError(f"cannot print {f!r}")


def print_relation(doc: RelationDoc) -> str:
    parts = ["(relation"]
    if doc.reals:
        parts.append("(reals " + " ".join(v.name for v in doc.reals) + ")")
    if doc.ints:
        parts.append("(ints " + " ".join(v.name for v in doc.ints) + ")")
    parts.append(f"(body {print_formula(doc.body)}))")
    return " ".join(parts)
