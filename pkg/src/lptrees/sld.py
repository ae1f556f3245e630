"""Classical SLD resolution with a step bound.

This is the ground-truth oracle the tree semantics are differentially
tested against, so it stays deliberately plain: leftmost selection,
breadth-first exploration of clause choices, two-context mgu steps.
The two-context unifier makes explicit renaming-apart unnecessary; the
clause context is fresh by construction in every step.
"""

from __future__ import annotations

from collections import deque
from typing import NamedTuple

from .program import Goal, Program
from .terms import Atom, Substitution, Var, compose, identity, term_apply
from .unify import UnifierPair, mgu


class Step(NamedTuple):
    atom_index: int
    clause_index: int
    unifier: UnifierPair
    goal: Goal


class Derivation(NamedTuple):
    steps: tuple
    status: str  # "success" | "failure" | "depth-exhausted"
    computed_answer: Substitution | None


def sld_derive(p: Program, g: Goal, max_steps: int) -> list:
    """Every SLD derivation from g up to max_steps resolution steps.

    Success derivations carry the computed answer, the composite of the
    goal-side mgu components in step order.  Dead ends are marked
    failure, derivations cut by the bound depth-exhausted.  The list
    grows with the full SLD tree; callers keep max_steps small.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    out = []
    queue = deque([(g, (), identity(g.context))])
    while queue:
        current, steps, answer = queue.popleft()
        if not current.atoms:
            out.append(Derivation(steps, "success", answer))
            continue
        if len(steps) == max_steps:
            out.append(Derivation(steps, "depth-exhausted", None))
            continue
        selected = current.atoms[0]
        rest = current.atoms[1:]
        extended = False
        for clause_index, clause in p.clauses_for(selected.predicate):
            pair = mgu(selected, clause.head)
            if pair is None:
                continue
            extended = True
            sigma, tau = pair
            new_goal = Goal(
                tuple(
                    _apply_atom(b, tau.terms, tau.target) for b in clause.body
                )
                + tuple(
                    _apply_atom(a, sigma.terms, sigma.target) for a in rest
                ),
                sigma.target,
            )
            queue.append(
                (
                    new_goal,
                    steps + (Step(0, clause_index, pair, new_goal),),
                    compose(answer, sigma),
                )
            )
        if not extended:
            out.append(Derivation(steps, "failure", None))
    return out


def _apply_atom(a, terms, target):
    return Atom(a.predicate, tuple(term_apply(t, terms) for t in a.args), target)


def computed_answers(p: Program, g: Goal, max_steps: int) -> set:
    return {
        d.computed_answer
        for d in sld_derive(p, g, max_steps)
        if d.status == "success"
    }


def _factors_through(tau: Substitution, theta: Substitution, p: Program) -> bool:
    """Is there rho with compose(tau, rho) = theta?

    Found by matching tau's components against theta's.  Target
    variables of tau occurring in no component are unconstrained; they
    only need some term of theta's target context to exist.
    """
    if tau.source != theta.source:
        return False
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
        return all(match(x, y) for x, y in zip(pattern.args, value.args))

    if not all(match(x, y) for x, y in zip(tau.terms, theta.terms)):
        return False
    if len(bind) < tau.target:
        # a filler term for the unconstrained variables must exist
        if theta.target == 0 and not any(
            k == 0 for k in p.signature.functions.values()
        ):
            return False
    return True


def is_correct_answer(
    p: Program, g: Goal, theta: Substitution, max_steps: int
) -> bool:
    """True iff theta factors through some computed answer within the bound."""
    if theta.source != g.context:
        raise ValueError(
            f"answer source {theta.source} != goal context {g.context}"
        )
    return any(
        _factors_through(tau, theta, p)
        for tau in computed_answers(p, g, max_steps)
    )


def correct_answers(
    p: Program, g: Goal, candidates, max_steps: int
) -> set:
    """The candidates that are correct answers for g within the bound.

    Derives the SLD tree once and filters, so screening a whole
    enumeration costs one search rather than one per candidate.
    """
    cas = computed_answers(p, g, max_steps)
    return {
        theta
        for theta in candidates
        if any(_factors_through(tau, theta, p) for tau in cas)
    }
