"""Programs, clauses, goals, and the surface syntax.

Clause syntax is Edinburgh-style: ``head :- b1, b2.`` or ``head.`` with
``%`` line comments.  Variables are written either as named identifiers
starting with an upper-case letter or underscore, or in the explicit
form x1, x2, ...; both may be mixed in one clause.  Per clause, explicit
indices are kept as written and named variables get the lowest free
indices in order of first occurrence.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from .terms import (
    App,
    Atom,
    Signature,
    Substitution,
    Term,
    Var,
    apply,
    canonical_target,
    check_atom,
    format_atom,
    max_var,
    term_apply,
)


class Goal(NamedTuple):
    """Ordered list of atoms sharing one variable context.

    The context is explicit because the empty goal still lives in a
    definite context, and the saturated semantics depends on it.
    """

    atoms: tuple
    context: int


def goal(atoms, context: int | None = None) -> Goal:
    atoms = tuple(atoms)
    for a in atoms:
        if context is None:
            context = a.context
        elif a.context != context:
            raise ValueError(
                f"goal atoms live in different contexts: {a.context} vs {context}"
            )
    return Goal(atoms, 0 if context is None else context)


def apply_goal(g: Goal, s: Substitution) -> Goal:
    if g.context != s.source:
        raise ValueError(
            f"cannot apply: goal context {g.context} != source {s.source}"
        )
    return Goal(tuple(apply(a, s) for a in g.atoms), s.target)


def format_goal(g: Goal) -> str:
    return "[" + ",".join(format_atom(a) for a in g.atoms) + "]"


class Clause(NamedTuple):
    head: Atom
    body: tuple
    context: int


def format_clause(c: Clause) -> str:
    if not c.body:
        return f"{format_atom(c.head)}."
    return f"{format_atom(c.head)} :- " + ", ".join(
        format_atom(a) for a in c.body
    ) + "."


class Program:
    """A finite clause list plus the signature inferred from it.

    Programs hash by identity; the tree builders use them as cache keys
    and never need value equality.
    """

    __slots__ = ("clauses", "signature", "_by_pred", "_tree_caches")

    def __init__(self, clauses, signature: Signature | None = None):
        self.clauses = tuple(clauses)
        if signature is None:
            signature = _infer_signature(self.clauses)
        self.signature = signature
        by_pred: dict = {}
        for i, c in enumerate(self.clauses):
            by_pred.setdefault(c.head.predicate, []).append((i, c))
        self._by_pred = {p: tuple(v) for p, v in by_pred.items()}
        self._tree_caches: dict = {}

    def clauses_for(self, predicate: str):
        """Indexed clauses whose head predicate matches, in program order."""
        return self._by_pred.get(predicate, ())

    def __repr__(self):
        return f"Program({len(self.clauses)} clauses)"


def _scan_term(t: Term, functions: dict) -> None:
    if type(t) is Var:
        return
    seen = functions.get(t.symbol)
    if seen is None:
        functions[t.symbol] = len(t.args)
    elif seen != len(t.args):
        raise ValueError(
            f"function {t.symbol} used with arities {seen} and {len(t.args)}"
        )
    for a in t.args:
        _scan_term(a, functions)


def _infer_signature(clauses) -> Signature:
    functions: dict = {}
    predicates: dict = {}
    for c in clauses:
        for a in (c.head, *c.body):
            seen = predicates.get(a.predicate)
            if seen is None:
                predicates[a.predicate] = len(a.args)
            elif seen != len(a.args):
                raise ValueError(
                    f"predicate {a.predicate} used with arities "
                    f"{seen} and {len(a.args)}"
                )
            for t in a.args:
                _scan_term(t, functions)
    return Signature(functions, predicates)


def is_ground(p: Program) -> bool:
    for c in p.clauses:
        for a in (c.head, *c.body):
            if any(max_var(t) > 0 for t in a.args):
                return False
    return True


def standardize_apart(c: Clause, base: int) -> Clause:
    """Shift every clause variable above base; already-apart clauses are
    returned unchanged, which makes the operation idempotent."""
    low = 0
    for a in (c.head, *c.body):
        for t in a.args:
            low = _min_var(t, low)
    if low == 0 or low > base:
        return c
    shift = tuple(Var(i + base) for i in range(1, c.context + 1))
    ctx = c.context + base

    def sh(a: Atom) -> Atom:
        return Atom(a.predicate, tuple(term_apply(t, shift) for t in a.args), ctx)

    return Clause(sh(c.head), tuple(sh(b) for b in c.body), ctx)


def _min_var(t: Term, acc: int) -> int:
    if type(t) is Var:
        return t.index if acc == 0 else min(acc, t.index)
    for a in t.args:
        acc = _min_var(a, acc)
    return acc


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<implies>:-)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.\[\]])
    """,
    re.VERBOSE,
)

_EXPLICIT_VAR_RE = re.compile(r"^x([1-9][0-9]*)$")


class ParseError(ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class _Tokens:
    def __init__(self, text):
        self.items = []
        line, col = 1, 1
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", line, col)
            kind = m.lastgroup
            value = m.group()
            if kind not in ("ws", "comment"):
                self.items.append((kind, value, line, col))
            newlines = value.count("\n")
            if newlines:
                line += newlines
                col = len(value) - value.rfind("\n")
            else:
                col += len(value)
            pos = m.end()
        self.items.append(("eof", "", line, col))
        self.pos = 0

    def peek(self):
        return self.items[self.pos]

    def next(self):
        tok = self.items[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def expect(self, value):
        kind, got, line, col = self.next()
        if got != value:
            raise ParseError(f"expected {value!r}, got {got or 'end of input'!r}",
                             line, col)


class _VarScope:
    """Maps surface variable names to indices for one clause or goal."""

    def __init__(self):
        self.named: dict = {}
        self.reserved: set = set()

    def explicit(self, index):
        self.reserved.add(index)
        return Var(index)

    def named_var(self, name):
        if name not in self.named:
            i = 1
            while i in self.reserved:
                i += 1
            self.named[name] = i
            self.reserved.add(i)
        return Var(self.named[name])


def _prescan_explicit(tokens: _Tokens, scope: _VarScope, stop: str):
    # reserve explicit x<k> indices before naming anything, so that a named
    # variable never collides with a later explicit one
    depth = 0
    for kind, value, _, _ in tokens.items[tokens.pos:]:
        if kind == "eof":
            break
        if value == stop and depth == 0:
            break
        if value == "(":
            depth += 1
        elif value == ")":
            depth -= 1
        if kind == "ident":
            m = _EXPLICIT_VAR_RE.match(value)
            if m:
                scope.reserved.add(int(m.group(1)))


def _parse_term(tokens: _Tokens, scope: _VarScope) -> Term:
    kind, value, line, col = tokens.next()
    if kind != "ident":
        raise ParseError(f"expected a term, got {value or 'end of input'!r}",
                         line, col)
    if tokens.peek()[1] == "(":
        if _EXPLICIT_VAR_RE.match(value) or value[0].isupper() or value[0] == "_":
            raise ParseError(f"variable {value} cannot take arguments", line, col)
        tokens.next()
        args = [_parse_term(tokens, scope)]
        while tokens.peek()[1] == ",":
            tokens.next()
            args.append(_parse_term(tokens, scope))
        tokens.expect(")")
        return App(value, tuple(args))
    m = _EXPLICIT_VAR_RE.match(value)
    if m:
        return scope.explicit(int(m.group(1)))
    if value[0].isupper() or value[0] == "_":
        return scope.named_var(value)
    return App(value, ())


def _parse_atom(tokens: _Tokens, scope: _VarScope) -> tuple:
    kind, value, line, col = tokens.next()
    if kind != "ident":
        raise ParseError(f"expected a predicate, got {value or 'end of input'!r}",
                         line, col)
    if _EXPLICIT_VAR_RE.match(value) is None and (
        value[0].isupper() or value[0] == "_"
    ):
        if tokens.peek()[1] != "(":
            raise ParseError(f"{value} is a variable, not a predicate", line, col)
    args = ()
    if tokens.peek()[1] == "(":
        tokens.next()
        parts = [_parse_term(tokens, scope)]
        while tokens.peek()[1] == ",":
            tokens.next()
            parts.append(_parse_term(tokens, scope))
        tokens.expect(")")
        args = tuple(parts)
    return value, args


def parse_program(text: str) -> Program:
    tokens = _Tokens(text)
    clauses = []
    while tokens.peek()[0] != "eof":
        scope = _VarScope()
        _prescan_explicit(tokens, scope, stop=".")
        pred, args = _parse_atom(tokens, scope)
        body = []
        kind, value, line, col = tokens.next()
        if value == ":-":
            body.append(_parse_atom(tokens, scope))
            while tokens.peek()[1] == ",":
                tokens.next()
                body.append(_parse_atom(tokens, scope))
            tokens.expect(".")
        elif value != ".":
            raise ParseError(f"expected ':-' or '.', got {value or 'end of input'!r}",
                             line, col)
        ctx = max(
            [canonical_target(args)]
            + [canonical_target(a) for _, a in body]
        )
        head = Atom(pred, args, ctx)
        clauses.append(
            Clause(head, tuple(Atom(p, a, ctx) for p, a in body), ctx)
        )
    return Program(clauses)


def parse_goal(text: str, context: int | None = None) -> Goal:
    tokens = _Tokens(text)
    scope = _VarScope()
    _prescan_explicit(tokens, scope, stop="")
    bracketed = tokens.peek()[1] == "["
    if bracketed:
        tokens.next()
    atoms = []
    closer = "]" if bracketed else ""
    if tokens.peek()[0] != "eof" and tokens.peek()[1] != closer:
        atoms.append(_parse_atom(tokens, scope))
        while tokens.peek()[1] == ",":
            tokens.next()
            atoms.append(_parse_atom(tokens, scope))
    if bracketed:
        tokens.expect("]")
    kind, value, line, col = tokens.peek()
    if kind != "eof":
        raise ParseError(f"unexpected trailing input {value!r}", line, col)
    inferred = max([0] + [canonical_target(a) for _, a in atoms])
    if context is None:
        context = inferred
    elif inferred > context:
        raise ParseError(
            f"variable index {inferred} exceeds declared context {context}", 1, 1
        )
    return Goal(tuple(Atom(p, a, context) for p, a in atoms), context)


def pretty_print(p: Program) -> str:
    return "\n".join(format_clause(c) for c in p.clauses) + (
        "\n" if p.clauses else ""
    )


def check_goal(g: Goal, sig: Signature) -> None:
    for a in g.atoms:
        check_atom(a, sig)
