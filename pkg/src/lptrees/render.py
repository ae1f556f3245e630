"""Rendering of derivation trees.

Three formats: an indented text outline, a DOT graph, and a JSON form
that round-trips through parse_tree_json.  All three are deterministic
byte-for-byte because tree children are canonically ordered.
"""

import json

from .atom_trees import AndNode, AtomTree, OrNode
from .goal_trees import GoalNode, GoalTree
from .program import format_goal, parse_goal
from .terms import (
    Substitution,
    format_atom,
    format_substitution,
    format_term,
)

_BOLD = "\033[1m"
_DIM = "\033[2m"
_CYAN = "\033[36m"
_RESET = "\033[0m"


def render(tree, fmt: str, color: bool = False) -> str:
    """Render an atom tree or goal tree to the named format.

    fmt is one of "text", "dot", "json"; color adds ANSI styling to the
    text format only.
    """
    if fmt == "text":
        return _render_text(tree, color)
    if fmt == "dot":
        return _render_dot(tree)
    if fmt == "json":
        return _render_json(tree)
    raise ValueError(f"unknown format: {fmt}")


# ---------------------------------------------------------------------------
# text outlines


def _paint(text: str, code: str, color: bool) -> str:
    return f"{code}{text}{_RESET}" if color else text


def _render_text(tree, color: bool) -> str:
    lines = []
    if isinstance(tree, AtomTree):
        lines.append(f"{tree.kind} tree, depth {tree.depth_bound}"
                     + (f", bounds {tree.bounds}" if tree.bounds else ""))

        def walk_and(node, indent):
            mark = " ..." if node.frontier else ""
            lines.append(
                "  " * indent
                + _paint(format_atom(node.label), _BOLD, color)
                + mark
            )
            if not node.frontier:
                for o in node.children:
                    lines.append(
                        "  " * (indent + 1)
                        + _paint(format_substitution(o.label), _CYAN, color)
                    )
                    for c in o.children:
                        walk_and(c, indent + 2)

        walk_and(tree.root, 0)
    elif isinstance(tree, GoalTree):
        lines.append(f"{tree.kind} goal tree, depth {tree.depth_bound}"
                     + (f", bounds {tree.bounds}" if tree.bounds else ""))

        def walk_goal(node, edge, indent):
            mark = " ..." if node.frontier else ""
            prefix = (
                _paint(format_substitution(edge), _CYAN, color) + " "
                if edge is not None
                else ""
            )
            lines.append(
                "  " * indent
                + prefix
                + _paint(format_goal(node.label), _BOLD, color)
                + mark
            )
            if not node.frontier:
                for e, c in node.children:
                    walk_goal(c, e, indent + 1)

        walk_goal(tree.root, None, 0)
    else:
        raise ValueError(f"cannot render {type(tree).__name__}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# DOT graphs


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _render_dot(tree) -> str:
    lines = ["digraph {", "  rankdir=TB;"]
    counter = [0]

    def fresh():
        name = f"n{counter[0]}"
        counter[0] += 1
        return name

    def and_attrs(node):
        style = ' style=dashed' if node.frontier else ""
        return (
            f"[label={_quote(format_atom(node.label))} shape=box"
            f" tooltip={_quote(f'At({node.label.context})')}{style}]"
        )

    def emit_and(node):
        me = fresh()
        lines.append(f"  {me} {and_attrs(node)};")
        if not node.frontier:
            for o in node.children:
                s = o.label
                kid = fresh()
                lines.append(
                    f"  {kid} [label={_quote(format_substitution(s))}"
                    f" shape=ellipse"
                    f" tooltip={_quote(f'At({s.source}) -> At({s.target})')}];"
                )
                lines.append(f"  {me} -> {kid};")
                for c in o.children:
                    lines.append(f"  {kid} -> {emit_and(c)};")
        return me

    def emit_goal(node):
        me = fresh()
        style = " style=dashed" if node.frontier else ""
        lines.append(
            f"  {me} [label={_quote(format_goal(node.label))} shape=box"
            f" tooltip={_quote(f'At({node.label.context})')}{style}];"
        )
        if not node.frontier:
            for e, c in node.children:
                kid = emit_goal(c)
                lines.append(
                    f"  {me} -> {kid}"
                    f" [label={_quote(format_substitution(e))}];"
                )
        return me

    if isinstance(tree, AtomTree):
        emit_and(tree.root)
    elif isinstance(tree, GoalTree):
        emit_goal(tree.root)
    else:
        raise ValueError(f"cannot render {type(tree).__name__}")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON and its importer


def _subst_json(s: Substitution) -> dict:
    return {
        "source": s.source,
        "target": s.target,
        "terms": [format_term(t) for t in s.terms],
    }


def _render_json(tree) -> str:
    if isinstance(tree, AtomTree):
        def and_json(node):
            out = {
                "kind": "and",
                "label": format_atom(node.label),
                "frontier": node.frontier,
                "children": [],
            }
            if not node.frontier:
                out["children"] = [
                    {
                        "kind": "or",
                        "subst": _subst_json(o.label),
                        "children": [and_json(c) for c in o.children],
                    }
                    for o in node.children
                ]
            return out

        doc = {
            "type": "atom-tree",
            "kind": tree.kind,
            "depth_bound": tree.depth_bound,
            "bounds": list(tree.bounds) if tree.bounds else None,
            "context": tree.root.label.context,
            "root": and_json(tree.root),
        }
    elif isinstance(tree, GoalTree):
        def goal_json(node, edge):
            out = {
                "kind": "goal",
                "label": format_goal(node.label),
                "frontier": node.frontier,
                "children": [],
            }
            if edge is not None:
                out["subst"] = _subst_json(edge)
            if not node.frontier:
                out["children"] = [
                    goal_json(c, e) for e, c in node.children
                ]
            return out

        doc = {
            "type": "goal-tree",
            "kind": tree.kind,
            "depth_bound": tree.depth_bound,
            "bounds": list(tree.bounds) if tree.bounds else None,
            "context": tree.root.label.context,
            "root": goal_json(tree.root, None),
        }
    else:
        raise ValueError(f"cannot render {type(tree).__name__}")
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _parse_terms(strs, context: int) -> tuple:
    # term syntax is shared with goals, so wrap and reuse the parser
    if not strs:
        return ()
    wrapped = parse_goal(f"[dummy({','.join(strs)})]", context=context)
    return wrapped.atoms[0].args


def _subst_from_json(obj) -> Substitution:
    terms = _parse_terms(obj["terms"], obj["target"])
    s = Substitution(terms, obj["target"])
    if s.source != obj["source"]:
        raise ValueError(
            f"substitution source {obj['source']} does not match its "
            f"{s.source} terms"
        )
    return s


def parse_tree_json(text: str):
    """Rebuild a tree from its JSON rendering.

    The result carries no program; it compares equal to the original
    tree, whose equality ignores the program as well.
    """
    doc = json.loads(text)
    bounds = tuple(doc["bounds"]) if doc["bounds"] else None

    if doc["type"] == "atom-tree":
        def and_from(obj, context):
            label = parse_goal(f"[{obj['label']}]", context=context).atoms[0]
            if obj["frontier"]:
                return AndNode(label, frontier=True, children=())
            children = []
            for o in obj["children"]:
                s = _subst_from_json(o["subst"])
                kids = tuple(and_from(c, s.target) for c in o["children"])
                children.append(OrNode(s, kids))
            return AndNode(label, frontier=False, children=tuple(children))

        return AtomTree(
            and_from(doc["root"], doc["context"]), doc["kind"],
            doc["depth_bound"], bounds, None,
        )

    if doc["type"] == "goal-tree":
        def goal_from(obj, context):
            label = parse_goal(obj["label"], context=context)
            if obj["frontier"]:
                return GoalNode(label, frontier=True, children=())
            entries = []
            for c in obj["children"]:
                e = _subst_from_json(c["subst"])
                entries.append((e, goal_from(c, e.target)))
            return GoalNode(label, frontier=False, children=tuple(entries))

        return GoalTree(
            goal_from(doc["root"], doc["context"]), doc["kind"],
            doc["depth_bound"], bounds, None,
        )

    raise ValueError(f"unknown tree type: {doc.get('type')}")
