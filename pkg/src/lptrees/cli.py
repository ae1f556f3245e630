"""Command line entry points.

`lp query` evaluates a goal under one of the six semantics and prints
answers or a rendered tree; `lp check` runs a named differential suite
and prints its JSON summary.  Exit codes: 0 success, 1 a refutation
query found no answers or a suite failed, 2 bad input.
"""

import json
import os
from pathlib import Path

import click

from .atom_trees import (
    build_andor_tree,
    build_coinductive_tree,
    build_saturated_avtree,
)
from .checks import SUITES, run_suite
from .goal_trees import build_saturated_vtree, build_vtree_ground
from .program import (
    check_goal,
    format_goal,
    is_ground,
    parse_goal,
    parse_program,
)
from .render import _subst_json, render
from .sld import computed_answers
from .terms import format_substitution, subst_key

SEMANTICS = (
    "sld", "andor", "coinductive", "saturated", "vtree", "saturated-vtree",
)
FORMATS = ("text", "dot", "json")


def _load_program(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise click.UsageError(f"cannot read program: {e}")
    try:
        return parse_program(text)
    except ValueError as e:
        raise click.UsageError(f"bad program: {e}")


def _load_goal(p, text: str):
    try:
        g = parse_goal(text)
        check_goal(g, p.signature)
    except ValueError as e:
        raise click.UsageError(f"bad goal: {e}")
    return g


def _want_color() -> bool:
    return os.environ.get("LP_COLOR", "").strip().lower() in (
        "1", "true", "yes",
    )


@click.group()
def main():
    """Execute logic programs under tree semantics."""


@main.command()
@click.option("--program", "program_path", required=True,
              help="Path to a logic program.")
@click.option("--goal", "goal_text", required=True,
              help="Goal, e.g. '[nat(x1),list(x2)]'.")
@click.option("--semantics", type=click.Choice(SEMANTICS), default="sld",
              show_default=True)
@click.option("--depth", default=4, show_default=True,
              help="Tree depth bound.")
@click.option("--subst-depth", default=1, show_default=True,
              help="Max term depth in enumerated substitutions.")
@click.option("--max-vars", default=1, show_default=True,
              help="Max target context in enumerated substitutions.")
@click.option("--max-steps", default=8, show_default=True,
              help="Resolution step bound for sld.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="text",
              show_default=True)
@click.pass_context
def query(ctx, program_path, goal_text, semantics, depth, subst_depth,
          max_vars, max_steps, fmt):
    """Evaluate a goal and print answers or the semantic tree."""
    p = _load_program(program_path)
    g = _load_goal(p, goal_text)
    bounds = (subst_depth, max_vars)

    if semantics == "sld":
        if fmt == "dot":
            raise click.UsageError("dot output needs a tree semantics")
        answers = sorted(computed_answers(p, g, max_steps), key=subst_key)
        if fmt == "json":
            click.echo(json.dumps(
                {
                    "goal": format_goal(g),
                    "answers": [_subst_json(a) for a in answers],
                },
                indent=2, sort_keys=True,
            ))
        else:
            for a in answers:
                click.echo(format_substitution(a))
            if not answers:
                click.echo("no refutation found")
        if not answers:
            ctx.exit(1)
        return

    try:
        if semantics in ("andor", "coinductive", "saturated"):
            if len(g.atoms) != 1:
                raise click.UsageError(
                    f"{semantics} takes a single-atom goal"
                )
            a = g.atoms[0]
            if semantics == "andor":
                tree = build_andor_tree(p, a, depth)
            elif semantics == "coinductive":
                tree = build_coinductive_tree(p, a, depth, bounds)
            else:
                tree = build_saturated_avtree(p, a, depth, bounds)
        elif semantics == "vtree":
            if not is_ground(p):
                raise click.UsageError(
                    "vtree needs a ground program; try saturated-vtree"
                )
            tree = build_vtree_ground(p, g, depth)
        else:
            tree = build_saturated_vtree(p, g, depth, bounds)
    except ValueError as e:
        raise click.UsageError(str(e))

    color = fmt == "text" and _want_color()
    click.echo(render(tree, fmt, color=color), color=color or None)


@main.command()
@click.option("--suite", required=True, type=click.Choice(sorted(SUITES)))
@click.option("--program", "program_path", required=True,
              help="Path to a logic program.")
@click.option("--depth", default=4, show_default=True)
@click.option("--subst-depth", default=1, show_default=True)
@click.option("--max-vars", default=1, show_default=True)
@click.option("--max-steps", default=12, show_default=True,
              help="Oracle step bound for answer confirmation.")
@click.option("--seed", default=0, show_default=True,
              help="Seed for randomized splits.")
@click.option("--cases", default=100, show_default=True,
              help="Randomized case count.")
@click.option("--goal", "goal_text", default=None,
              help="Explicit goal for soundness-completeness-goal.")
@click.pass_context
def check(ctx, suite, program_path, depth, subst_depth, max_vars, max_steps,
          seed, cases, goal_text):
    """Run a differential suite and print its JSON summary."""
    p = _load_program(program_path)
    g = None
    if goal_text is not None:
        if suite != "soundness-completeness-goal":
            raise click.UsageError(
                "--goal only applies to soundness-completeness-goal"
            )
        g = _load_goal(p, goal_text)
    try:
        summary = run_suite(
            suite, p, depth=depth, bounds=(subst_depth, max_vars),
            max_steps=max_steps, seed=seed, cases=cases, goal=g,
        )
    except ValueError as e:
        raise click.UsageError(str(e))
    click.echo(json.dumps(summary, indent=2, sort_keys=True))
    if summary["status"] == "fail":
        ctx.exit(1)


if __name__ == "__main__":
    main()
