"""Renderers: JSON round trips, determinism, text and dot structure."""

import json

import pytest

from lptrees.atom_trees import build_andor_tree, build_saturated_avtree
from lptrees.goal_trees import build_saturated_vtree, build_vtree_ground
from lptrees.program import parse_goal, parse_program
from lptrees.render import parse_tree_json, render
from lptrees.terms import atom, app

NATLIST = parse_program(
    """
    nat(zero).
    nat(succ(x1)) :- nat(x1).
    list(nil).
    list(cons(x1,x2)) :- nat(x1), list(x2).
    """
)

GROUND = parse_program(
    """
    p(b,b) :- q(c).
    p(b,b) :- p(b,a), p(b,c).
    p(b,c) :- q(a), q(b), q(c).
    q(a).
    q(b).
    q(c).
    """
)

PBB = atom("p", app("b"), app("b"), context=0)


def sample_trees():
    return [
        build_andor_tree(GROUND, PBB, 4),
        build_saturated_avtree(
            NATLIST, atom("nat", app("succ", app("zero")), context=0), 2, (1, 1)
        ),
        build_vtree_ground(GROUND, parse_goal("[p(b,b)]", context=0), 3),
        build_saturated_vtree(
            NATLIST, parse_goal("[nat(x1),list(x2)]", context=2), 2, (1, 1)
        ),
    ]


@pytest.mark.parametrize("index", range(4))
def test_json_round_trip(index):
    tree = sample_trees()[index]
    again = parse_tree_json(render(tree, "json"))
    assert again == tree
    assert render(again, "json") == render(tree, "json")


@pytest.mark.parametrize("fmt", ["text", "dot", "json"])
def test_rendering_is_deterministic(fmt):
    for tree in sample_trees():
        assert render(tree, fmt) == render(tree, fmt)


def test_text_outline_facts():
    out = render(build_andor_tree(GROUND, PBB, 4), "text")
    lines = out.splitlines()
    assert lines[0] == "ground-mgu tree, depth 4"
    assert "p(b,b)" in lines[1]
    assert any(line.endswith(" ...") for line in lines)  # cut frontier
    # every or-label on a ground tree is the trivial substitution
    assert all("<>:0->0" in line for line in lines if "<" in line)


def test_text_goal_tree_shows_edges():
    tree = build_vtree_ground(GROUND, parse_goal("[p(b,b)]", context=0), 2)
    out = render(tree, "text")
    assert "ground goal tree, depth 2" in out
    assert "[p(b,a),p(b,c)]" in out
    assert "[q(c)]" in out


def test_color_toggle():
    tree = build_vtree_ground(GROUND, parse_goal("[q(a)]", context=0), 1)
    assert "\x1b[" not in render(tree, "text")
    assert "\x1b[" in render(tree, "text", color=True)


def test_dot_facts():
    tree = build_saturated_vtree(
        NATLIST, parse_goal("[nat(x1)]", context=1), 1, (1, 1)
    )
    out = render(tree, "dot")
    assert out.startswith("digraph")
    assert out.count("digraph") == 1
    assert "shape=box" in out
    assert "label=" in out
    assert "tooltip=" in out
    cut = build_vtree_ground(GROUND, parse_goal("[q(a)]", context=0), 0)
    assert "style=dashed" in render(cut, "dot")


def test_json_schema_fields():
    tree = build_saturated_vtree(
        NATLIST, parse_goal("[nat(x1)]", context=1), 1, (1, 1)
    )
    doc = json.loads(render(tree, "json"))
    assert doc["type"] == "goal-tree"
    assert doc["kind"] == "saturated"
    assert doc["depth_bound"] == 1
    assert doc["bounds"] == [1, 1]
    assert doc["context"] == 1
    root = doc["root"]
    assert root["kind"] == "goal"
    assert root["frontier"] is False
    child = root["children"][0]
    assert set(child["subst"]) == {"source", "target", "terms"}
    assert isinstance(child["subst"]["terms"][0], str)


def test_unknown_format_rejected():
    tree = build_vtree_ground(GROUND, parse_goal("[q(a)]", context=0), 1)
    with pytest.raises(ValueError, match="unknown format"):
        render(tree, "yaml")
