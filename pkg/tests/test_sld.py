"""SLD oracle: derivations, computed answers, correct answers."""

import pytest

from lptrees.program import Goal, apply_goal, parse_goal, parse_program
from lptrees.sld import computed_answers, is_correct_answer, sld_derive
from lptrees.terms import app, identity, substitution, var

x1, x2 = var(1), var(2)
z = app("zero")
nil = app("nil")


def c_(h, t):
    return app("cons", h, t)


def s_(t):
    return app("succ", t)


NATLIST = parse_program(
    """
    list(cons(x1, x2)) :- nat(x1), list(x2).
    list(nil).
    nat(succ(x1)) :- nat(x1).
    nat(zero).
    """
)


def test_list_nil_has_one_refutation():
    wins = [
        d
        for d in sld_derive(NATLIST, parse_goal("list(nil)"), 2)
        if d.status == "success"
    ]
    assert len(wins) == 1
    assert wins[0].computed_answer == identity(0)
    assert len(wins[0].steps) == 1


def test_self_referential_list_never_succeeds():
    g = parse_goal("list(cons(x1, cons(x2, x1)))", context=2)
    for bound in (2, 4, 6, 8):
        assert computed_answers(NATLIST, g, bound) == set()


def test_empty_goal_succeeds_immediately():
    for ctx in (0, 2):
        derivs = sld_derive(NATLIST, Goal((), ctx), 3)
        assert [d.status for d in derivs] == ["success"]
        assert derivs[0].computed_answer == identity(ctx)
        assert derivs[0].steps == ()


def test_computed_answers_for_open_list():
    got = computed_answers(NATLIST, parse_goal("list(x1)", context=1), 3)
    assert substitution([nil], target=0) in got
    assert substitution([c_(z, nil)], target=0) in got
    # three steps cannot close a list whose head needs succ
    assert substitution([c_(s_(z), nil)], target=0) not in got


def test_depth_exhausted_marked():
    derivs = sld_derive(NATLIST, parse_goal("list(x1)", context=1), 1)
    assert any(d.status == "depth-exhausted" for d in derivs)


def test_correct_answer_nil():
    g = parse_goal("list(x1)", context=1)
    assert is_correct_answer(NATLIST, g, substitution([nil], target=0), 4)


def test_zero_is_not_a_list():
    g = parse_goal("list(x1)", context=1)
    assert not is_correct_answer(NATLIST, g, substitution([z], target=0), 6)


def test_computed_answer_is_correct():
    g = parse_goal("list(x1)", context=1)
    for tau in computed_answers(NATLIST, g, 4):
        assert is_correct_answer(NATLIST, g, tau, 4)


def test_correct_answer_strict_instance():
    g = parse_goal("list(x1)", context=1)
    # an instance of the computed answer <cons(x1,x2)> ... <zero,nil> route
    assert is_correct_answer(
        NATLIST, g, substitution([c_(z, nil)], target=0), 3
    )
    # a non-instance shape is not correct: open cons never gets computed
    assert not is_correct_answer(
        NATLIST, g, substitution([c_(x1, x2)], target=2), 4
    )


def test_correct_answer_rejects_context_mismatch():
    with pytest.raises(ValueError):
        is_correct_answer(
            NATLIST, parse_goal("list(x1)", context=1), identity(2), 2
        )


def test_answers_stable_under_clause_permutation():
    flipped = parse_program(
        """
        nat(zero).
        nat(succ(x1)) :- nat(x1).
        list(nil).
        list(cons(x1, x2)) :- nat(x1), list(x2).
        """
    )
    g = parse_goal("list(x1)", context=1)
    assert computed_answers(NATLIST, g, 5) == computed_answers(flipped, g, 5)


def test_instantiated_goal_refutes_with_identity():
    g = parse_goal("list(x1)", context=1)
    for tau in computed_answers(NATLIST, g, 4):
        instantiated = apply_goal(g, tau)
        assert identity(tau.target) in computed_answers(NATLIST, instantiated, 6)


GROUND = parse_program(
    """
    p(b, c) :- q(a), q(b), q(c).
    p(b, b) :- q(c).
    p(b, b) :- p(b, a), p(b, c).
    q(c).
    """
)


def test_ground_fixture_refutations():
    assert computed_answers(GROUND, parse_goal("p(b, b)"), 3) == {identity(0)}
    assert computed_answers(GROUND, parse_goal("p(b, c)"), 6) == set()
    assert computed_answers(GROUND, parse_goal("q(c)"), 1) == {identity(0)}
