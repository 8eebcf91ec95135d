"""Identities over the quasigroup signature (*, \\, /) and exhaustive checking.

Grammar::

    identity := term '=' term
    term     := factor { ('*' | '\\' | '/') factor }
    factor   := variable | '(' term ')'
    variable := x | y | z | u | v | w

All three operators share one precedence level and associate to the left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

from .table import CayleyTable, left_division, right_division

VARIABLES = "xyzuvw"
OPERATORS = "*\\/"
MAX_VARIABLES = 6

REGISTRY: dict[str, str] = {
    "genassoc_div": "(y*z)\\x = z*(x*y)",
    "genassoc_q": "(y*z)*(z*(x*y)) = x",
    "schroeder2": "(x*y)*(y*x) = x",
    "stein3": "(x*y)*(y*x) = y",
    "belousov_xyyx": "x*(y*(y*x)) = y",
    "medial": "(x*y)*(u*v) = (x*u)*(y*v)",
    "idempotent": "x*x = x",
}


class IdentityParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        suffix = f" at position {position}" if position is not None else ""
        super().__init__(message + suffix)


class DivisionOnNonQuasigroup(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    op: str
    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return f"({self.left}{self.op}{self.right})"


Term = Union[Var, App]


def term_variables(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    return term_variables(t.left) | term_variables(t.right)


def term_operators(t: Term) -> set[str]:
    if isinstance(t, Var):
        return set()
    return {t.op} | term_operators(t.left) | term_operators(t.right)


def term_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + max(term_depth(t.left), term_depth(t.right))


@dataclass(frozen=True)
class Identity:
    lhs: Term
    rhs: Term
    variables: tuple[str, ...]
    source: str
    name: str | None = field(default=None, compare=False)

    @property
    def operators(self) -> set[str]:
        return term_operators(self.lhs) | term_operators(self.rhs)

    @property
    def uses_division(self) -> bool:
        return bool(self.operators - {"*"})

    def __str__(self) -> str:
        return self.source


# --------------------------------------------------------------------------
# parsing


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = [(i, c) for i, c in enumerate(src) if not c.isspace()]
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos][1] if self.pos < len(self.toks) else None

    def where(self) -> int:
        return self.toks[self.pos][0] if self.pos < len(self.toks) else len(self.src)

    def take(self) -> str:
        c = self.toks[self.pos][1]
        self.pos += 1
        return c

    def term(self) -> Term:
        node = self.factor()
        while self.peek() is not None and self.peek() in OPERATORS:
            op = self.take()
            node = App(op, node, self.factor())
        return node

    def factor(self) -> Term:
        c = self.peek()
        if c is None:
            raise IdentityParseError("unexpected end of input", self.where())
        if c == "(":
            open_at = self.where()
            self.take()
            node = self.term()
            if self.peek() != ")":
                raise IdentityParseError("unbalanced parentheses: '(' never closed", open_at)
            self.take()
            return node
        if c in VARIABLES:
            self.take()
            return Var(c)
        if c == ")":
            raise IdentityParseError("unbalanced parentheses: unexpected ')'", self.where())
        raise IdentityParseError(f"unknown symbol {c!r}", self.where())


def parse_identity(src: str, name: str | None = None) -> Identity:
    p = _Parser(src)
    for at, c in p.toks:
        if c not in VARIABLES and c not in OPERATORS and c not in "()=":
            raise IdentityParseError(f"unknown symbol {c!r}", at)
    if "=" not in src:
        raise IdentityParseError("missing '='")
    lhs = p.term()
    if p.peek() != "=":
        c = p.peek()
        if c == ")":
            raise IdentityParseError("unbalanced parentheses: unexpected ')'", p.where())
        raise IdentityParseError(f"expected '=' but found {c!r}", p.where())
    p.take()
    rhs = p.term()
    if p.peek() is not None:
        c = p.peek()
        if c == ")":
            raise IdentityParseError("unbalanced parentheses: unexpected ')'", p.where())
        raise IdentityParseError(f"unexpected {c!r}", p.where())
    used = term_variables(lhs) | term_variables(rhs)
    if len(used) > MAX_VARIABLES:
        raise IdentityParseError(f"too many variables ({len(used)} > {MAX_VARIABLES})")
    variables = tuple(v for v in VARIABLES if v in used)
    return Identity(lhs, rhs, variables, src, name)


def builtin(name: str) -> Identity:
    try:
        src = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown identity {name!r}; known: {', '.join(REGISTRY)}") from None
    return parse_identity(src, name=name)


def resolve(name_or_text: str | Identity) -> Identity:
    """Registry name or inline identity text (names take precedence)."""
    if isinstance(name_or_text, Identity):
        return name_or_text
    if name_or_text in REGISTRY:
        return builtin(name_or_text)
    return parse_identity(name_or_text)


# --------------------------------------------------------------------------
# evaluation


def evaluate(t: Term, env: dict[str, int], mul, ldiv=None, rdiv=None) -> int:
    """Tree-walking evaluation; tables are indexable as ``tab[a][b]``."""
    if isinstance(t, Var):
        return env[t.name]
    a = evaluate(t.left, env, mul, ldiv, rdiv)
    b = evaluate(t.right, env, mul, ldiv, rdiv)
    if t.op == "*":
        return mul[a][b]
    if t.op == "\\":
        return ldiv[a][b]
    return rdiv[a][b]


_TABLE_NAME = {"*": "m", "\\": "l", "/": "r"}


def _expr(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    return f"{_TABLE_NAME[t.op]}[{_expr(t.left)}][{_expr(t.right)}]"


@lru_cache(maxsize=256)
def compile_checker(ident: Identity):
    """Return ``f(m, l, r, n)`` giving the first failing assignment or None.

    Assignments are enumerated lexicographically in ``ident.variables``
    order.  Source is generated from the parsed tree only, so nothing
    from user text reaches ``exec`` unvalidated.
    """
    vs = ident.variables
    lines = ["def _check(m, l, r, n):", "    R = range(n)"]
    indent = "    "
    for v in vs:
        lines.append(f"{indent}for {v} in R:")
        indent += "    "
    tup = "(" + "".join(f"{v}," for v in vs) + ")"
    lines.append(f"{indent}if {_expr(ident.lhs)} != {_expr(ident.rhs)}:")
    lines.append(f"{indent}    return {tup}")
    lines.append("    return None")
    ns: dict = {}
    exec("\n".join(lines), ns)
    return ns["_check"]


@dataclass(frozen=True)
class Verdict:
    holds: bool
    counterexample: dict[str, int] | None = None

    def __bool__(self) -> bool:
        return self.holds

    def describe(self) -> str:
        if self.holds:
            return "holds"
        return "fails at " + ", ".join(f"{k}={v}" for k, v in self.counterexample.items())


def holds(t: CayleyTable, ident: Identity | str, divisions=None) -> Verdict:
    """Decide ``ident`` on ``t`` by enumerating all assignments.

    ``divisions`` may pass precomputed (left, right) division tables.
    """
    ident = resolve(ident)
    ldiv = rdiv = None
    if ident.uses_division:
        if divisions is not None:
            ldiv, rdiv = divisions
        else:
            try:
                ldiv, rdiv = left_division(t).rows, right_division(t).rows
            except ValueError as exc:
                raise DivisionOnNonQuasigroup(f"identity {ident.source!r} needs divisions: {exc}") from exc
        ldiv = getattr(ldiv, "rows", ldiv)
        rdiv = getattr(rdiv, "rows", rdiv)
    bad = compile_checker(ident)(t.rows, ldiv, rdiv, t.order)
    if bad is None:
        return Verdict(True)
    return Verdict(False, dict(zip(ident.variables, bad)))
