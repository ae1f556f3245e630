"""Term core: composition, application, enumeration, canonical order."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lptrees.terms import (
    App,
    Atom,
    Signature,
    Substitution,
    Var,
    app,
    apply,
    atom,
    canonical_target,
    compose,
    enumerate_substitutions,
    enumerate_terms,
    format_substitution,
    format_term,
    identity,
    is_identity,
    iter_substitutions,
    subst_key,
    substitution,
    term_depth,
    term_key,
    var,
)

NATLIST_SIG = Signature(
    {"cons": 2, "succ": 1, "zero": 0, "nil": 0}, {"list": 1, "nat": 1}
)

z = app("zero")
nil = app("nil")
x1, x2, x3 = var(1), var(2), var(3)


def s_(t):
    return app("succ", t)


def c_(h, t):
    return app("cons", h, t)


# ---------------------------------------------------------------------------
# composition

def test_compose_applies_left_argument_first():
    theta = substitution([s_(x1), nil], target=1)
    sigma = substitution([z], target=0)
    assert compose(theta, sigma) == substitution([s_(z), nil], target=0)


def test_compose_cons_then_ground():
    theta = substitution([c_(x1, x2)], target=2)
    sigma = substitution([z, nil], target=0)
    assert compose(theta, sigma) == substitution([c_(z, nil)], target=0)


def test_compose_identity_laws():
    theta = substitution([s_(x1), nil], target=1)
    assert compose(identity(2), theta) == theta
    assert compose(theta, identity(1)) == theta


def test_compose_rejects_context_mismatch():
    theta = substitution([s_(x1), nil], target=1)
    with pytest.raises(ValueError):
        compose(theta, substitution([z, nil], target=0))


def test_compose_varargs_chains():
    t1 = substitution([c_(x1, x2)], target=2)
    t2 = substitution([z, c_(x1, x2)], target=2)
    t3 = substitution([z, nil], target=0)
    assert compose(t1, t2, t3) == compose(compose(t1, t2), t3)
    assert compose(t1, t2, t3) == substitution([c_(z, c_(z, nil))], target=0)


# ---------------------------------------------------------------------------
# application

def test_apply_ground_substitution():
    a = atom("list", x1, context=1)
    theta = substitution([nil], target=0)
    assert apply(a, theta) == atom("list", nil, context=0)


def test_apply_identity_is_noop():
    a = atom("list", c_(x1, x2), context=2)
    assert apply(a, identity(2)) == a


def test_apply_partial_instantiation():
    a = atom("list", c_(x1, x2), context=2)
    theta = substitution([z, x2], target=2)
    assert apply(a, theta) == atom("list", c_(z, x2), context=2)


def test_apply_rejects_context_mismatch():
    a = atom("list", x1, context=1)
    with pytest.raises(ValueError):
        apply(a, substitution([z, nil], target=0))


# ---------------------------------------------------------------------------
# canonical targets

def test_canonical_target_of_cons():
    assert canonical_target([c_(x1, x2)]) == 2


def test_canonical_target_of_ground():
    assert canonical_target([z]) == 0


def test_canonical_target_scans_all_terms():
    assert canonical_target([s_(x1), x3]) == 3


def test_substitution_defaults_to_canonical_target():
    s = substitution([c_(x1, x2)])
    assert s.target == 2 and s.source == 1


def test_substitution_rejects_too_small_target():
    with pytest.raises(ValueError):
        substitution([c_(x1, x2)], target=1)


# ---------------------------------------------------------------------------
# depth convention: variables and constants are flat

def test_term_depth():
    assert term_depth(x1) == 0
    assert term_depth(z) == 0
    assert term_depth(s_(z)) == 1
    assert term_depth(c_(s_(z), nil)) == 2


# ---------------------------------------------------------------------------
# enumeration

def test_enumerate_empty_context_is_one_arrow_per_target():
    subs = enumerate_substitutions(0, NATLIST_SIG, 0, 2)
    assert subs == [
        Substitution((), 0),
        Substitution((), 1),
        Substitution((), 2),
    ]


def test_enumerate_single_constant_signature_order():
    sig = Signature({"a": 0}, {})
    a = app("a")
    subs = enumerate_substitutions(1, sig, 0, 1)
    assert subs == [
        Substitution((a,), 0),
        Substitution((a,), 1),
        Substitution((Var(1),), 1),
    ]


def test_enumerate_natlist_flat():
    subs = enumerate_substitutions(1, NATLIST_SIG, 0, 2)
    # terms of depth 0 over m variables: m plus the two constants
    assert len(subs) == 2 + 3 + 4
    assert substitution([z], target=0) in subs
    assert substitution([nil], target=0) in subs
    assert substitution([x1], target=1) in subs
    assert substitution([x2], target=2) in subs
    assert all(term_depth(t) == 0 for s in subs for t in s.terms)


def test_enumeration_is_sorted_and_duplicate_free():
    for n in (0, 1, 2):
        subs = enumerate_substitutions(n, NATLIST_SIG, 1, 2)
        keys = [subst_key(s) for s in subs]
        assert keys == sorted(keys)
        assert len(set(subs)) == len(subs)


def test_identity_is_enumerated_when_bounds_allow():
    subs = enumerate_substitutions(2, NATLIST_SIG, 0, 2)
    assert identity(2) in subs
    assert is_identity(identity(2))
    assert not is_identity(substitution([x2, x1], target=2))


def test_iter_matches_list_enumeration():
    assert list(iter_substitutions(2, NATLIST_SIG, 1, 1)) == enumerate_substitutions(
        2, NATLIST_SIG, 1, 1
    )


def _terms_by_closure(m, sig, depth):
    # independent regeneration: iterate the grammar and filter by measured depth
    pool = {Var(i) for i in range(1, m + 1)}
    pool.update(App(f) for f, k in sig.functions.items() if k == 0)
    for _ in range(depth):
        fresh = set()
        for f, k in sig.functions.items():
            if k == 0:
                continue
            from itertools import product as iproduct

            for args in iproduct(sorted(pool, key=term_key), repeat=k):
                fresh.add(App(f, args))
        pool.update(fresh)
    return {t for t in pool if term_depth(t) <= depth}


def test_enumeration_agrees_with_grammar_closure():
    for m in (0, 1, 2):
        for depth in (0, 1, 2):
            expected = _terms_by_closure(m, NATLIST_SIG, depth)
            assert set(enumerate_terms(m, NATLIST_SIG, depth)) == expected


# ---------------------------------------------------------------------------
# algebraic laws, checked over the enumerated arrows at small bounds

ALL_SUBS = {
    n: enumerate_substitutions(n, NATLIST_SIG, 1, 2) for n in (0, 1, 2)
}


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_composition_is_associative(data):
    t1 = data.draw(st.sampled_from(ALL_SUBS[2]))
    t2 = data.draw(st.sampled_from(ALL_SUBS[t1.target]))
    t3 = data.draw(st.sampled_from(ALL_SUBS[t2.target]))
    assert compose(compose(t1, t2), t3) == compose(t1, compose(t2, t3))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_identities_are_neutral(data):
    t = data.draw(st.sampled_from(ALL_SUBS[2]))
    assert compose(identity(2), t) == t
    assert compose(t, identity(t.target)) == t


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_apply_distributes_over_compose(data):
    a = data.draw(
        st.sampled_from(
            [
                atom("list", c_(x1, x2), context=2),
                atom("nat", x2, context=2),
                atom("list", c_(z, x1), context=2),
            ]
        )
    )
    t1 = data.draw(st.sampled_from(ALL_SUBS[2]))
    t2 = data.draw(st.sampled_from(ALL_SUBS[t1.target]))
    assert apply(a, compose(t1, t2)) == apply(apply(a, t1), t2)


# ---------------------------------------------------------------------------
# display

def test_format_round_readability():
    assert format_term(c_(z, x1)) == "cons(zero,x1)"
    assert format_substitution(substitution([s_(z), nil], target=0)) == (
        "<succ(zero),nil>:2->0"
    )
