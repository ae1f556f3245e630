"""Terms, atoms, and substitutions between variable contexts.

A context is a natural number n standing for the variables x1..xn.  A
substitution from n to m is an n-tuple of terms over x1..xm; composition
is simultaneous replacement.  ``compose(theta, sigma)`` applies theta
first, then sigma, so the composite again goes left to right:

    n --theta--> m --sigma--> k      compose(theta, sigma): n -> k

Everything in this module is an immutable value.  Var, App, Atom and
Substitution are NamedTuples, so equality and hashing are structural and
cheap; the tree modules rely on that.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Iterator, NamedTuple, Union


class Var(NamedTuple):
    """Variable x_index; indices are 1-based."""

    index: int


class App(NamedTuple):
    """Function symbol applied to argument terms; constants have args == ()."""

    symbol: str
    args: tuple = ()


Term = Union[Var, App]


def var(index: int) -> Var:
    return Var(index)


def app(symbol: str, *args: Term) -> App:
    return App(symbol, args)


class Atom(NamedTuple):
    """Predicate applied to terms, tagged with its variable context size.

    The context matters: nat(x1) in context 1 and nat(x1) in context 2
    are different atoms, and the saturated semantics treats them
    differently.
    """

    predicate: str
    args: tuple
    context: int


def atom(predicate: str, *args: Term, context: int | None = None) -> Atom:
    if context is None:
        context = canonical_target(args)
    return Atom(predicate, args, context)


class Substitution(NamedTuple):
    """An arrow source -> target: one term per source variable."""

    terms: tuple
    target: int

    @property
    def source(self) -> int:
        return len(self.terms)


def identity(n: int) -> Substitution:
    return Substitution(tuple(Var(i) for i in range(1, n + 1)), n)


def is_identity(s: Substitution) -> bool:
    return s.target == len(s.terms) and all(
        type(t) is Var and t.index == i for i, t in enumerate(s.terms, start=1)
    )


def term_depth(t: Term) -> int:
    # vars and constants are depth 0
    if type(t) is Var or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def max_var(t: Term) -> int:
    if type(t) is Var:
        return t.index
    if not t.args:
        return 0
    return max(max_var(a) for a in t.args)


def canonical_target(terms) -> int:
    """Largest variable index occurring in the terms, 0 if ground."""
    m = 0
    for t in terms:
        v = max_var(t)
        if v > m:
            m = v
    return m


def substitution(terms, target: int | None = None) -> Substitution:
    """Build a substitution, defaulting the target to the canonical one."""
    terms = tuple(terms)
    if target is None:
        target = canonical_target(terms)
    elif target < canonical_target(terms):
        raise ValueError(
            f"target {target} smaller than largest variable index "
            f"{canonical_target(terms)}"
        )
    return Substitution(terms, target)


def term_apply(t: Term, terms: tuple) -> Term:
    if type(t) is Var:
        return terms[t.index - 1]
    if not t.args:
        return t
    return App(t.symbol, tuple(term_apply(a, terms) for a in t.args))


def compose(first: Substitution, *rest: Substitution) -> Substitution:
    """Compose left to right; compose(theta, sigma) applies theta first."""
    result = first
    for s in rest:
        if result.target != s.source:
            raise ValueError(
                f"cannot compose: target {result.target} != source {s.source}"
            )
        result = Substitution(
            tuple(term_apply(t, s.terms) for t in result.terms), s.target
        )
    return result


def apply(a: Atom, s: Substitution) -> Atom:
    if a.context != s.source:
        raise ValueError(
            f"cannot apply: atom context {a.context} != source {s.source}"
        )
    return Atom(a.predicate, tuple(term_apply(t, s.terms) for t in a.args), s.target)


# ---------------------------------------------------------------------------
# canonical order

def term_key(t: Term):
    """Total order key: applications before variables, then structural."""
    if type(t) is Var:
        return (1, t.index)
    return (0, t.symbol, tuple(term_key(a) for a in t.args))


def subst_key(s: Substitution):
    return (s.target, tuple(term_key(t) for t in s.terms))


# ---------------------------------------------------------------------------
# signatures and bounded enumeration

class Signature:
    """Function and predicate symbols with their arities."""

    __slots__ = ("functions", "predicates", "_key")

    def __init__(self, functions, predicates):
        functions = dict(functions)
        predicates = dict(predicates)
        for name, arity in list(functions.items()) + list(predicates.items()):
            if arity < 0:
                raise ValueError(f"negative arity for {name}")
        self.functions = functions
        self.predicates = predicates
        self._key = (
            tuple(sorted(functions.items())),
            tuple(sorted(predicates.items())),
        )

    def __eq__(self, other):
        return isinstance(other, Signature) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        fs = ", ".join(f"{n}/{a}" for n, a in self._key[0])
        ps = ", ".join(f"{n}/{a}" for n, a in self._key[1])
        return f"Signature({{{fs}}}, {{{ps}}})"


def check_term(t: Term, sig: Signature, context: int) -> None:
    """Validate arities and variable indices; boundary use only."""
    if type(t) is Var:
        if not 1 <= t.index <= context:
            raise ValueError(f"variable x{t.index} outside context {context}")
        return
    arity = sig.functions.get(t.symbol)
    if arity is None:
        raise ValueError(f"unknown function symbol {t.symbol}")
    if arity != len(t.args):
        raise ValueError(
            f"{t.symbol} expects {arity} arguments, got {len(t.args)}"
        )
    for a in t.args:
        check_term(a, sig, context)


def check_atom(a: Atom, sig: Signature) -> None:
    arity = sig.predicates.get(a.predicate)
    if arity is None:
        raise ValueError(f"unknown predicate {a.predicate}")
    if arity != len(a.args):
        raise ValueError(
            f"{a.predicate} expects {arity} arguments, got {len(a.args)}"
        )
    for t in a.args:
        check_term(t, sig, a.context)


@lru_cache(maxsize=None)
def enumerate_terms(m: int, sig: Signature, depth: int) -> tuple:
    """All terms of depth <= depth over x1..xm, sorted by term_key."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth == 0:
        pool = {Var(i) for i in range(1, m + 1)}
        pool.update(App(f) for f, k in sig.functions.items() if k == 0)
    else:
        prev = enumerate_terms(m, sig, depth - 1)
        pool = set(prev)
        for f, k in sig.functions.items():
            if k > 0:
                for args in product(prev, repeat=k):
                    pool.add(App(f, args))
    return tuple(sorted(pool, key=term_key))


def iter_substitutions(
    n: int, sig: Signature, depth: int, max_target: int
) -> Iterator[Substitution]:
    """Stream all substitutions n -> m for m <= max_target whose terms have
    depth <= depth, in canonical order (target ascending, then term order).

    The count grows as sum over m of |terms(m, depth)|^n; callers that only
    need one pass should iterate rather than materialize.
    """
    if depth < 0 or max_target < 0:
        raise ValueError("bounds must be >= 0")
    for m in range(max_target + 1):
        pool = enumerate_terms(m, sig, depth)
        for combo in product(pool, repeat=n):
            yield Substitution(combo, m)


def enumerate_substitutions(
    n: int, sig: Signature, depth: int, max_target: int
) -> list:
    return list(iter_substitutions(n, sig, depth, max_target))


# ---------------------------------------------------------------------------
# display

def format_term(t: Term) -> str:
    if type(t) is Var:
        return f"x{t.index}"
    if not t.args:
        return t.symbol
    return f"{t.symbol}({','.join(format_term(a) for a in t.args)})"


def format_atom(a: Atom) -> str:
    if not a.args:
        return a.predicate
    return f"{a.predicate}({','.join(format_term(t) for t in a.args)})"


def format_substitution(s: Substitution) -> str:
    inner = ",".join(format_term(t) for t in s.terms)
    return f"<{inner}>:{s.source}->{s.target}"
