"""Differential check suites over the tree semantics.

Each suite exercises one equality between independently computed
objects: instantiation against rebuilding, concatenation against direct
construction, representation against the goal builders, tree search
against the SLD oracle.  Results come back as plain dicts so the CLI
can print them as JSON; a suite that finds nothing runnable reports a
skip with its reasons rather than a hollow pass.
"""

import random
from functools import reduce

from .atom_trees import (
    _sat_provider,
    build_andor_tree,
    goal_key,
    build_coinductive_tree,
    build_saturated_avtree,
    desaturate,
    find_synched_refutations,
    term_matching_step,
    theta_bar,
)
from .goal_trees import (
    build_saturated_vtree,
    build_vtree_ground,
    concat_ground,
    concat_sat,
    find_goal_refutations,
    repr_ground,
    repr_sat,
)
from .program import Goal, Program, apply_goal, format_goal, is_ground
from .sld import correct_answers
from .terms import (
    Atom,
    apply,
    compose,
    format_atom,
    format_substitution,
    iter_substitutions,
    subst_key,
    var,
)


def fixture_atoms(p: Program) -> tuple:
    """One bare-variable atom per predicate plus every clause head, at
    their natural contexts, deduplicated."""
    out = []
    for pred in sorted(p.signature.predicates):
        arity = p.signature.predicates[pred]
        out.append(
            Atom(pred, tuple(var(i + 1) for i in range(arity)), arity)
        )
    for c in p.clauses:
        out.append(c.head)
    seen = []
    for a in out:
        if a not in seen:
            seen.append(a)
    return tuple(seen)


def _lift(a: Atom, context: int) -> Atom:
    return Atom(a.predicate, a.args, context)


def _closed_thetas(p: Program, context: int, bounds) -> tuple:
    """Enumerated substitutions whose composite with every enumerated
    continuation stays inside the bounds; instantiating along these is
    free of truncation artifacts."""
    d, m = bounds
    provider = _sat_provider(p, bounds)
    keep = []
    for theta in iter_substitutions(context, p.signature, d, m):
        if all(
            provider._in_bounds(context, compose(theta, sigma))
            for sigma in iter_substitutions(theta.target, p.signature, d, m)
        ):
            keep.append(theta)
    return tuple(keep)


def _summary(name, config, cases, failures, skipped, status=None):
    if status is None:
        if failures:
            status = "fail"
        elif cases == 0:
            status = "skip"
        else:
            status = "pass"
    return {
        "suite": name,
        "status": status,
        "cases": cases,
        "failures": failures,
        "skipped": skipped,
        "config": config,
    }


def check_compositionality(p: Program, depth: int, bounds) -> dict:
    """Instantiating a saturated tree equals building the instance."""
    cases, failures, skipped = 0, [], []
    for a in fixture_atoms(p):
        thetas = _closed_thetas(p, a.context, bounds)
        if not thetas:
            skipped.append(
                f"{format_atom(a)}: no closed substitutions at {bounds}"
            )
            continue
        tree = build_saturated_avtree(p, a, depth, bounds)
        for theta in thetas:
            want = build_saturated_avtree(p, apply(a, theta), depth, bounds)
            cases += 1
            if theta_bar(tree, theta) != want:
                failures.append(
                    f"{format_atom(a)} under {format_substitution(theta)}"
                )
    return _summary(
        "compositionality",
        {"depth": depth, "bounds": list(bounds)},
        cases, failures, skipped,
    )


def _random_parts(rng, pool, want_parts):
    parts = []
    for _ in range(want_parts):
        parts.append(tuple(
            rng.choice(pool) for _ in range(rng.randint(0, 2))
        ))
    return parts


def check_and_compositionality(
    p: Program, depth: int, bounds, seed: int = 0, cases: int = 100
) -> dict:
    """Concatenating trees of the parts equals building the whole."""
    rng = random.Random(seed)
    failures, skipped, ran = [], [], 0
    if is_ground(p):
        pool = sorted(
            {a for c in p.clauses for a in (c.head,) + c.body},
            key=format_atom,
        )
        for _ in range(cases):
            parts = _random_parts(rng, pool, rng.randint(2, 3))
            whole = Goal(tuple(a for part in parts for a in part), 0)
            trees = [
                build_vtree_ground(p, Goal(part, 0), depth)
                for part in parts
            ]
            ran += 1
            if reduce(concat_ground, trees) != build_vtree_ground(
                p, whole, depth
            ):
                failures.append(format_goal(whole))
    else:
        base = fixture_atoms(p)
        context = max(a.context for a in base)
        pool = [_lift(a, context) for a in base]
        for _ in range(cases):
            parts = _random_parts(rng, pool, rng.randint(2, 3))
            whole = Goal(tuple(a for part in parts for a in part), context)
            trees = [
                build_saturated_vtree(p, Goal(part, context), depth, bounds)
                for part in parts
            ]
            ran += 1
            if reduce(concat_sat, trees) != build_saturated_vtree(
                p, whole, depth, bounds
            ):
                failures.append(format_goal(whole))
    return _summary(
        "and-compositionality",
        {"depth": depth, "bounds": list(bounds), "seed": seed,
         "ground": is_ground(p)},
        ran, failures, skipped,
    )


def check_desaturation(p: Program, depth: int, bounds) -> dict:
    """Keeping only identity edges of the saturated tree rebuilds the
    coinductive tree, wherever the identity is enumerable."""
    _, m = bounds
    cases, failures, skipped = 0, [], []
    for a in fixture_atoms(p):
        for context in range(a.context, 4):
            lifted = _lift(a, context)
            if context > m:
                skipped.append(
                    f"{format_atom(lifted)}: identity of {context} is "
                    f"outside max target {m}"
                )
                continue
            cases += 1
            got = desaturate(build_saturated_avtree(p, lifted, depth, bounds))
            want = build_coinductive_tree(p, lifted, depth, bounds)
            if got != want:
                failures.append(f"{format_atom(lifted)} at context {context}")
    return _summary(
        "desaturation",
        {"depth": depth, "bounds": list(bounds)},
        cases, failures, skipped,
    )


def check_representation(p: Program, depth: int, bounds) -> dict:
    """Reading the or-tree off the and-or tree equals building it."""
    cases, failures, skipped = 0, [], []
    if is_ground(p):
        for a in fixture_atoms(p):
            if a.context != 0:
                continue
            cases += 1
            got = repr_ground(build_andor_tree(p, a, depth))
            want = build_vtree_ground(p, Goal((a,), 0), depth // 2)
            if got != want:
                failures.append(f"ground {format_atom(a)}")
    for a in fixture_atoms(p):
        cases += 1
        got = repr_sat(build_saturated_avtree(p, a, depth, bounds))
        want = build_saturated_vtree(
            p, Goal((a,), a.context), depth // 2, bounds
        )
        if got != want:
            failures.append(f"saturated {format_atom(a)}")
    return _summary(
        "representation",
        {"depth": depth, "bounds": list(bounds)},
        cases, failures, skipped,
    )


def _against_sld(p, goal, answers, bounds, max_steps, levels):
    """Both directions of an answer-set comparison with the oracle,
    restricted to the enumerated substitution family.

    Soundness: every tree answer in the family is a correct answer; the
    oracle gets max_steps resolution steps to confirm, which must be
    generous because one tree level resolves a whole goal at once.
    Completeness: every family answer the oracle derives within the
    tree's own level budget is a tree answer, since a refutation of n
    resolution steps closes within n parallel levels.  Tree answers
    outside the family (composites of in-bounds edges) have no
    enumerated comparison set and are left to the oracle membership
    tests elsewhere.
    """
    problems = []
    d, m = bounds
    enum = frozenset(iter_substitutions(goal.context, p.signature, d, m))
    family = answers & enum
    sound = correct_answers(p, goal, family, max_steps)
    for theta in sorted(family - sound, key=subst_key):
        problems.append(
            f"{format_goal(goal)}: unsound answer "
            f"{format_substitution(theta)}"
        )
    reachable = correct_answers(p, goal, enum, levels)
    for theta in sorted(reachable - answers, key=subst_key):
        problems.append(
            f"{format_goal(goal)}: missing answer "
            f"{format_substitution(theta)}"
        )
    return problems


def check_sc_atomic(
    p: Program, depth: int, bounds, max_steps: int = 12
) -> dict:
    """Synched subtree answers against SLD correct answers, atom-wise."""
    cases, failures, skipped = 0, [], []
    for a in fixture_atoms(p):
        tree = build_saturated_avtree(p, a, depth, bounds)
        answers = find_synched_refutations(tree, depth).answers()
        cases += 1
        failures.extend(
            _against_sld(
                p, Goal((a,), a.context), answers, bounds, max_steps,
                (depth + 1) // 2,
            )
        )
    return _summary(
        "soundness-completeness-atomic",
        {"depth": depth, "bounds": list(bounds), "max_steps": max_steps},
        cases, failures, skipped,
    )


def check_sc_goal(
    p: Program, depth: int, bounds, max_steps: int = 12, goal=None
) -> dict:
    """Refutation path answers against SLD correct answers, goal-wise."""
    if goal is not None:
        goals = [goal]
    else:
        base = fixture_atoms(p)
        context = max(a.context for a in base)
        lifted = [_lift(a, context) for a in base]
        goals = [
            Goal((a, b), context)
            for a in lifted[:2]
            for b in lifted[:2]
        ]
    cases, failures, skipped = 0, [], []
    for g in goals:
        tree = build_saturated_vtree(p, g, depth, bounds)
        answers = find_goal_refutations(tree, depth).answers()
        cases += 1
        failures.extend(
            _against_sld(p, g, answers, bounds, max_steps, depth)
        )
    return _summary(
        "soundness-completeness-goal",
        {"depth": depth, "bounds": list(bounds), "max_steps": max_steps},
        cases, failures, skipped,
    )


def check_regression_nonnaturality(p: Program, bounds) -> dict:
    """Term matching is not natural: some ground instance steps where
    the pushed-forward step set does not.  Passes when a witness of the
    asymmetry exists at the bounds."""
    d, _ = bounds
    witnesses = []
    for a in fixture_atoms(p):
        for theta in iter_substitutions(a.context, p.signature, d, 0):
            lhs = term_matching_step(p, apply(a, theta), bounds)
            pushed = sorted(
                {apply_goal(g, theta) for g in term_matching_step(p, a, bounds)},
                key=goal_key,
            )
            if lhs != tuple(pushed):
                witnesses.append(
                    f"{format_atom(a)} under {format_substitution(theta)}: "
                    f"instance steps to "
                    f"{{{','.join(format_goal(g) for g in lhs)}}} but the "
                    f"push-forward is "
                    f"{{{','.join(format_goal(g) for g in pushed)}}}"
                )
    status = "pass" if witnesses else "fail"
    return _summary(
        "regression-nonnaturality",
        {"bounds": list(bounds)},
        len(witnesses), witnesses if status == "fail" else [], [],
        status=status,
    ) | {"witnesses": witnesses[:3]}


SUITES = {
    "compositionality": check_compositionality,
    "and-compositionality": check_and_compositionality,
    "desaturation": check_desaturation,
    "representation": check_representation,
    "soundness-completeness-atomic": check_sc_atomic,
    "soundness-completeness-goal": check_sc_goal,
    "regression-nonnaturality": check_regression_nonnaturality,
}


def run_suite(
    name: str, p: Program, *, depth: int = 4, bounds=(1, 1),
    max_steps: int = 12, seed: int = 0, cases: int = 100, goal=None,
) -> dict:
    """Run a named suite with the arguments it understands."""
    if name not in SUITES:
        raise ValueError(f"unknown suite: {name}")
    bounds = tuple(bounds)
    if name == "compositionality":
        return check_compositionality(p, depth, bounds)
    if name == "and-compositionality":
        return check_and_compositionality(p, depth, bounds, seed, cases)
    if name == "desaturation":
        return check_desaturation(p, depth, bounds)
    if name == "representation":
        return check_representation(p, depth, bounds)
    if name == "soundness-completeness-atomic":
        return check_sc_atomic(p, depth, bounds, max_steps)
    if name == "soundness-completeness-goal":
        return check_sc_goal(p, depth, bounds, max_steps, goal)
    return check_regression_nonnaturality(p, bounds)
