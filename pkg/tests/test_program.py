"""Parser, clause standardization, groundness."""

import pytest

from lptrees.program import (
    Clause,
    Goal,
    ParseError,
    apply_goal,
    goal,
    is_ground,
    parse_goal,
    parse_program,
    pretty_print,
    standardize_apart,
)
from lptrees.terms import App, Atom, Var, app, atom, substitution, var

x1, x2, x3 = var(1), var(2), var(3)

NATLIST_SRC = """\
% Lists of natural numbers.
list(cons(x1, x2)) :- nat(x1), list(x2).
list(nil).
nat(succ(x1)) :- nat(x1).
nat(zero).
"""


def test_parse_single_fact():
    p = parse_program("q(c).")
    assert p.clauses == (
        Clause(atom("q", app("c"), context=0), (), 0),
    )


def test_parse_natlist_clause_list():
    p = parse_program(NATLIST_SRC)
    cons = Clause(
        atom("list", app("cons", x1, x2), context=2),
        (atom("nat", x1, context=2), atom("list", x2, context=2)),
        2,
    )
    nil = Clause(atom("list", app("nil"), context=0), (), 0)
    succ = Clause(
        atom("nat", app("succ", x1), context=1),
        (atom("nat", x1, context=1),),
        1,
    )
    zero = Clause(atom("nat", app("zero"), context=0), (), 0)
    assert p.clauses == (cons, nil, succ, zero)
    assert p.signature.functions == {"cons": 2, "succ": 1, "zero": 0, "nil": 0}
    assert p.signature.predicates == {"list": 1, "nat": 1}


def test_parse_local_variable_numbering():
    p = parse_program("p(X) :- q(X, Y).")
    (c,) = p.clauses
    assert c.head == atom("p", x1, context=2)
    assert c.body == (atom("q", x1, x2, context=2),)
    assert c.context == 2


def test_named_variables_avoid_explicit_indices():
    p = parse_program("p(Y, x1).")
    (c,) = p.clauses
    # Y must not collide with the explicit x1 appearing later
    assert c.head == atom("p", x2, x1, context=2)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_program("p(a) :- q(b)")  # missing final dot
    assert "line 1" in str(err.value)


def test_arity_conflict_rejected():
    with pytest.raises(ValueError):
        parse_program("p(a). p(a, b).")


def test_variable_cannot_be_predicate():
    with pytest.raises(ParseError):
        parse_program("X.")


def test_parse_goal_with_declared_context():
    g = parse_goal("list(cons(x1, x2))", context=2)
    assert g == Goal((atom("list", app("cons", x1, x2), context=2),), 2)


def test_parse_goal_empty():
    assert parse_goal("") == Goal((), 0)
    assert parse_goal("[]") == Goal((), 0)
    assert parse_goal("", context=2) == Goal((), 2)


def test_parse_goal_two_atoms_canonical_context():
    g = parse_goal("nat(x1), list(cons(x1, x2))")
    assert g.context == 2
    assert [a.predicate for a in g.atoms] == ["nat", "list"]
    assert parse_goal("[nat(x1), list(cons(x1, x2))]") == g


def test_parse_goal_rejects_exceeding_context():
    with pytest.raises(ParseError):
        parse_goal("list(x3)", context=2)


def test_goal_constructor_rejects_mixed_contexts():
    with pytest.raises(ValueError):
        goal([atom("nat", x1, context=1), atom("list", x2, context=2)])


def test_apply_goal_instantiates_every_atom():
    g = parse_goal("nat(x1), list(x2)", context=2)
    s = substitution([app("zero"), app("nil")], target=0)
    assert apply_goal(g, s) == Goal(
        (
            atom("nat", app("zero"), context=0),
            atom("list", app("nil"), context=0),
        ),
        0,
    )


def test_standardize_apart_shifts_above_base():
    p = parse_program("nat(succ(x1)) :- nat(x1).")
    (c,) = p.clauses
    shifted = standardize_apart(c, 2)
    assert shifted.head == atom("nat", app("succ", x3), context=3)
    assert shifted.body == (atom("nat", x3, context=3),)


def test_standardize_apart_is_idempotent():
    p = parse_program("nat(succ(x1)) :- nat(x1).")
    (c,) = p.clauses
    once = standardize_apart(c, 2)
    assert standardize_apart(once, 2) == once


def test_standardize_apart_leaves_facts_alone():
    p = parse_program("nat(zero).")
    (c,) = p.clauses
    assert standardize_apart(c, 5) == c


def test_is_ground():
    assert is_ground(parse_program("p(b, c) :- q(a). q(c)."))
    assert not is_ground(parse_program(NATLIST_SRC))
    assert is_ground(parse_program(""))


def test_pretty_print_round_trip():
    p = parse_program(NATLIST_SRC)
    again = parse_program(pretty_print(p))
    assert again.clauses == p.clauses
    assert again.signature == p.signature


def test_clauses_for_preserves_order():
    p = parse_program("p(a). q(b). p(c).")
    assert [i for i, _ in p.clauses_for("p")] == [0, 2]
    assert p.clauses_for("r") == ()
