"""Most general unifiers, term matching, and clause-step enumeration.

Unification here is two-context: the atoms live in separate variable
contexts, and the result is a pair of substitutions out of those
contexts into one shared target.  That makes renaming-apart unnecessary
for single steps; the contexts are disjoint by construction.
"""

from __future__ import annotations

from itertools import product
from typing import NamedTuple

from .program import Clause, Goal
from .terms import (
    App,
    Atom,
    Signature,
    Substitution,
    Term,
    Var,
    apply,
    enumerate_terms,
    iter_substitutions,
    term_apply,
)


class UnifierPair(NamedTuple):
    sigma: Substitution
    tau: Substitution


def _shift(t: Term, offset: int) -> Term:
    if type(t) is Var:
        return Var(t.index + offset)
    if not t.args:
        return t
    return App(t.symbol, tuple(_shift(a, offset) for a in t.args))


def _solve(equations):
    """Unify term pairs over one shared context; returns bindings or None."""
    bind: dict = {}

    def walk(t):
        while type(t) is Var and t.index in bind:
            t = bind[t.index]
        return t

    def occurs(i, t):
        t = walk(t)
        if type(t) is Var:
            return t.index == i
        return any(occurs(i, a) for a in t.args)

    stack = list(equations)
    while stack:
        s, t = stack.pop()
        s, t = walk(s), walk(t)
        if s == t:
            continue
        if type(s) is Var:
            if occurs(s.index, t):
                return None
            bind[s.index] = t
        elif type(t) is Var:
            if occurs(t.index, s):
                return None
            bind[t.index] = s
        else:
            if s.symbol != t.symbol or len(s.args) != len(t.args):
                return None
            stack.extend(zip(s.args, t.args))
    return bind


def _resolve(t: Term, bind: dict) -> Term:
    while type(t) is Var and t.index in bind:
        t = bind[t.index]
    if type(t) is Var or not t.args:
        return t
    return App(t.symbol, tuple(_resolve(a, bind) for a in t.args))


def _renumber(terms):
    """Relabel variables by first occurrence, left to right, depth first."""
    mapping: dict = {}

    def relabel(t):
        if type(t) is Var:
            if t.index not in mapping:
                mapping[t.index] = len(mapping) + 1
            return Var(mapping[t.index])
        if not t.args:
            return t
        return App(t.symbol, tuple(relabel(a) for a in t.args))

    out = tuple(relabel(t) for t in terms)
    return out, len(mapping)


def mgu(a1: Atom, a2: Atom) -> UnifierPair | None:
    """Most general unifier of two atoms in separate contexts.

    Returns (sigma: n1 -> m, tau: n2 -> m) with apply(a1, sigma) equal
    to apply(a2, tau), most general in that every other unifier pair
    factors through it; None if the atoms clash or the occurs check
    fails.
    """
    if a1.predicate != a2.predicate or len(a1.args) != len(a2.args):
        return None
    n1, n2 = a1.context, a2.context
    shifted = [_shift(t, n1) for t in a2.args]
    bind = _solve(zip(a1.args, shifted))
    if bind is None:
        return None
    solution = [_resolve(Var(i), bind) for i in range(1, n1 + n2 + 1)]
    renumbered, m = _renumber(solution)
    return UnifierPair(
        Substitution(renumbered[:n1], m), Substitution(renumbered[n1:], m)
    )


def term_match(a: Atom, h: Atom) -> Substitution | None:
    """The unique tau with apply(h, tau) = a, or None.

    Every context variable of h must occur in h; a head whose context
    carries extra variables has no unique matcher, and those variables
    are handled by enumeration in clause_step_matchers instead.
    """
    if a.predicate != h.predicate or len(a.args) != len(h.args):
        return None
    bind: dict = {}

    def match(pattern, value):
        if type(pattern) is Var:
            if pattern.index in bind:
                return bind[pattern.index] == value
            bind[pattern.index] = value
            return True
        if type(value) is Var or pattern.symbol != value.symbol:
            return False
        if len(pattern.args) != len(value.args):
            return False
        return all(match(p, v) for p, v in zip(pattern.args, value.args))

    for p, v in zip(h.args, a.args):
        if not match(p, v):
            return None
    missing = [i for i in range(1, h.context + 1) if i not in bind]
    if missing:
        raise ValueError(
            f"head context variable x{missing[0]} does not occur in the head; "
            "no unique term-matcher exists"
        )
    return Substitution(
        tuple(bind[i] for i in range(1, h.context + 1)), a.context
    )


def _head_projection(c: Clause):
    """Reindex the clause context so head variables come first.

    Returns (head atom over its occurring variables, head variable
    count, order) where order[i-1] is the projected index of original
    variable i; head variables take 1..head_vars in order of first
    occurrence, remaining context variables follow.
    """
    order: dict = {}

    def note(t):
        if type(t) is Var:
            if t.index not in order:
                order[t.index] = len(order) + 1
        else:
            for a in t.args:
                note(a)

    for t in c.head.args:
        note(t)
    head_vars = len(order)
    for a in c.body:
        for t in a.args:
            note(t)
    for i in range(1, c.context + 1):
        if i not in order:
            order[i] = len(order) + 1
    remap = tuple(Var(order[i]) for i in range(1, c.context + 1))
    head = Atom(
        c.head.predicate,
        tuple(term_apply(t, remap) for t in c.head.args),
        head_vars,
    )
    order_tuple = tuple(order[i] for i in range(1, c.context + 1))
    return head, head_vars, order_tuple


_projection_cache: dict = {}


def _projected(c: Clause):
    hit = _projection_cache.get(c)
    if hit is None:
        hit = _head_projection(c)
        _projection_cache[c] = hit
    return hit


def clause_step_matchers(a: Atom, c: Clause, bounds, sig: Signature):
    """All (tau, body goal) with apply(head, tau) = a, body in a's context.

    Clause variables outside the head are instantiated by enumerating
    terms of depth <= D over a's context; the M bound plays no role here
    because the target context is fixed by a.
    """
    depth, _ = bounds
    head, head_vars, order = _projected(c)
    tau0 = term_match(a, head)
    if tau0 is None:
        return []
    n = a.context
    k = c.context
    out = []
    if k == head_vars:
        tau = Substitution(
            tuple(tau0.terms[order[i] - 1] for i in range(k)), n
        )
        out.append((tau, Goal(tuple(apply(b, tau) for b in c.body), n)))
    else:
        pool = enumerate_terms(n, sig, depth)
        for extra in product(pool, repeat=k - head_vars):
            full = tau0.terms + extra
            tau = Substitution(
                tuple(full[order[i] - 1] for i in range(k)), n
            )
            out.append((tau, Goal(tuple(apply(b, tau) for b in c.body), n)))
    return out


def clause_step_unifiers(a: Atom, c: Clause, bounds, sig: Signature):
    """Bounded enumeration of all unifiers of a against the clause head.

    Follows the saturated-step recipe literally: enumerate sigma over the
    bounds, then term-match the instantiated atom against the head.
    Returns (sigma, tau, body) triples in canonical sigma order.
    """
    depth, max_target = bounds
    out = []
    for sigma in iter_substitutions(a.context, sig, depth, max_target):
        for tau, body in clause_step_matchers(apply(a, sigma), c, bounds, sig):
            out.append((sigma, tau, body))
    return out
