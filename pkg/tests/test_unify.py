"""Two-context mgu, term matching, clause-step enumeration."""

import pytest

from lptrees.program import Goal, parse_program
from lptrees.terms import (
    Substitution,
    app,
    apply,
    atom,
    compose,
    identity,
    iter_substitutions,
    substitution,
    var,
)
from lptrees.unify import (
    UnifierPair,
    clause_step_matchers,
    clause_step_unifiers,
    mgu,
    term_match,
)

x1, x2 = var(1), var(2)
z = app("zero")
nil = app("nil")


def c_(h, t):
    return app("cons", h, t)


NATLIST = parse_program(
    """
    list(cons(x1, x2)) :- nat(x1), list(x2).
    list(nil).
    nat(succ(x1)) :- nat(x1).
    nat(zero).
    """
)
SIG = NATLIST.signature


# ---------------------------------------------------------------------------
# mgu

def test_mgu_list_against_cons_head():
    got = mgu(
        atom("list", x1, context=1), atom("list", c_(x1, x2), context=2)
    )
    assert got == UnifierPair(
        substitution([c_(x1, x2)], target=2), identity(2)
    )


def test_mgu_identical_ground_atoms():
    a = atom("q", app("a"), context=0)
    assert mgu(a, a) == UnifierPair(identity(0), identity(0))


def test_mgu_constant_clash():
    assert mgu(
        atom("q", app("a"), context=0), atom("q", app("b"), context=0)
    ) is None


def test_mgu_occurs_check():
    # p(y, succ(y)) forces x = succ(x) after the contexts are merged
    assert mgu(
        atom("p", x1, x1, context=1),
        atom("p", x1, app("succ", x1), context=1),
    ) is None


def test_mgu_across_contexts_is_not_an_occurs_failure():
    # the same variable name in separate contexts is two variables
    pair = mgu(
        atom("nat", x1, context=1),
        atom("nat", app("succ", x1), context=1),
    )
    assert pair is not None
    assert pair.sigma == substitution([app("succ", x1)], target=1)
    assert pair.tau == identity(1)


def test_mgu_result_unifies_both_sides():
    a1 = atom("list", c_(x1, x2), context=2)
    a2 = atom("list", c_(z, x1), context=1)
    pair = mgu(a1, a2)
    assert pair is not None
    assert apply(a1, pair.sigma) == apply(a2, pair.tau)


def test_mgu_is_most_general_against_enumerated_unifiers():
    # every enumerated unifier pair must factor through the mgu, with the
    # factorization found by component-wise term matching
    a1 = atom("list", x1, context=1)
    a2 = atom("list", c_(x1, x2), context=2)
    pair = mgu(a1, a2)
    checked = 0
    for sigma in iter_substitutions(1, SIG, 1, 3):
        inst1 = apply(a1, sigma)
        for tau in iter_substitutions(2, SIG, 1, 3):
            if tau.target != sigma.target:
                continue
            if apply(a2, tau) != inst1:
                continue
            rho = _match_components(pair.tau, tau)
            assert rho is not None
            assert compose(pair.sigma, rho) == sigma
            assert compose(pair.tau, rho) == tau
            checked += 1
    assert checked > 0


def _match_components(general: Substitution, special: Substitution):
    bind = {}

    def match(pattern, value):
        if type(pattern).__name__ == "Var":
            if pattern.index in bind:
                return bind[pattern.index] == value
            bind[pattern.index] = value
            return True
        if type(value).__name__ == "Var":
            return False
        if pattern.symbol != value.symbol or len(pattern.args) != len(value.args):
            return False
        return all(match(p, v) for p, v in zip(pattern.args, value.args))

    for p, v in zip(general.terms, special.terms):
        if not match(p, v):
            return None
    if any(i not in bind for i in range(1, general.target + 1)):
        return None
    return Substitution(
        tuple(bind[i] for i in range(1, general.target + 1)), special.target
    )


# ---------------------------------------------------------------------------
# term matching

def test_term_match_identical_ground():
    a = atom("list", nil, context=0)
    assert term_match(a, a) == Substitution((), 0)


def test_term_match_variable_against_structure_fails():
    assert term_match(
        atom("list", x1, context=1), atom("list", c_(x1, x2), context=2)
    ) is None


def test_term_match_ground_against_cons():
    got = term_match(
        atom("list", c_(z, nil), context=0),
        atom("list", c_(x1, x2), context=2),
    )
    assert got == substitution([z, nil], target=0)


def test_term_match_requires_head_variables_to_occur():
    with pytest.raises(ValueError):
        term_match(
            atom("p", app("a"), context=0), atom("p", x1, context=2)
        )


def test_term_match_nonlinear_head():
    h = atom("p", x1, x1, context=1)
    assert term_match(atom("p", z, z, context=0), h) == substitution(
        [z], target=0
    )
    assert term_match(atom("p", z, nil, context=0), h) is None


# ---------------------------------------------------------------------------
# clause steps

def _clause(pred_src):
    return parse_program(pred_src).clauses[0]


def test_matchers_single_fact():
    c = _clause("list(nil).")
    a = atom("list", nil, context=0)
    assert clause_step_matchers(a, c, (1, 3), SIG) == [
        (Substitution((), 0), Goal((), 0))
    ]


def test_matchers_variable_atom_has_no_term_matcher():
    c = NATLIST.clauses[0]
    assert clause_step_matchers(atom("list", x1, context=1), c, (1, 3), SIG) == []


def test_matchers_ground_program_step():
    c = _clause("p(b, b) :- q(c).")
    a = atom("p", app("b"), app("b"), context=0)
    got = clause_step_matchers(a, c, (1, 3), SIG)
    assert got == [
        (Substitution((), 0), Goal((atom("q", app("c"), context=0),), 0))
    ]


def test_matchers_instantiate_local_variables():
    c = _clause("p(x1) :- q(x1, x2).")  # x2 is local to the body
    sig = parse_program("p(x1) :- q(x1, x2). q(a, a).").signature
    a = atom("p", app("a"), context=1)
    got = clause_step_matchers(a, c, (0, 3), sig)
    # local x2 ranges over depth-0 terms in context 1: the constant and x1
    values = {tau.terms for tau, _ in got}
    assert len(got) == len(values)
    assert all(tau.terms[0] == app("a") for tau, _ in got)
    assert {t[1] for t in values} == {app("a"), x1}
    assert all(
        b == Goal((atom("q", app("a"), tau.terms[1], context=1),), 1)
        for tau, b in got
        if tau.terms[1] == app("a") or tau.terms[1] == x1
    )


def test_unifiers_include_zero_instance():
    c = _clause("nat(zero).")
    a = atom("nat", x1, context=1)
    got = clause_step_unifiers(a, c, (0, 2), SIG)
    zero_sub = substitution([z], target=0)
    assert any(sigma == zero_sub for sigma, _, _ in got)
    assert all(
        apply(a, sigma) == atom("nat", z, context=sigma.target)
        for sigma, _, _ in got
    )
    assert not any(sigma == substitution([nil], target=0) for sigma, _, _ in got)


def test_unifiers_empty_for_unmatched_predicate():
    c = _clause("nat(zero).")
    got = clause_step_unifiers(atom("list", x1, context=1), c, (1, 2), SIG)
    assert got == []


def test_unifiers_grow_monotonically_with_bounds():
    c = NATLIST.clauses[0]
    a = atom("list", x1, context=1)
    small = {
        (s, t, b.atoms) for s, t, b in clause_step_unifiers(a, c, (0, 1), SIG)
    }
    large = {
        (s, t, b.atoms) for s, t, b in clause_step_unifiers(a, c, (1, 2), SIG)
    }
    assert small <= large
    assert small < large


def test_term_match_appears_among_unifiers_with_identity():
    c = NATLIST.clauses[0]
    a = atom("list", c_(x1, x2), context=2)
    tau = term_match(a, c.head)
    assert tau is not None
    got = clause_step_unifiers(a, c, (0, 2), SIG)
    assert any(
        sigma == identity(2) and t == tau for sigma, t, _ in got
    )
