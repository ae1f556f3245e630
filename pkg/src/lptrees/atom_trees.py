"""Atom-level tree semantics.

One node type covers the three tree families: and-or trees built with
mgu steps, coinductive trees built with term-matching steps, and
saturated trees built with enumerated unifiers.  And-nodes carry atoms,
or-nodes carry substitutions; the two sorts alternate by depth and the
tree is truncated at a depth bound with explicit frontier markers.

Saturated fans are huge (one or-node per enumerated substitution with a
nonempty step), so and-nodes expand lazily: children are computed on
first access through a per-program builder that memoizes nodes by
(atom, remaining depth).  The same builder serves every tree over one
program at one set of bounds, so structurally equal subtrees are one
shared object and deep equality short-circuits on identity.  Laziness
and sharing are representation choices only; forcing any node always
yields exactly the declared fan.

Depth convention: the root and-node sits at depth 0, or-nodes at odd
depths.  An and-node with r remaining levels is expanded iff r >= 2, so
an expanded or-node always keeps its complete body; unexpanded
and-nodes at the cut are frontier-marked.
"""

from __future__ import annotations

from itertools import product
from typing import NamedTuple

from .program import Goal, Program, is_ground
from .terms import (
    App,
    Atom,
    Substitution,
    Var,
    apply,
    compose,
    format_atom,
    format_substitution,
    identity,
    iter_substitutions,
    max_var,
    subst_key,
    term_apply,
    term_depth,
    term_key,
)
from .unify import clause_step_matchers, mgu


def atom_key(a: Atom):
    return (a.predicate, tuple(term_key(t) for t in a.args), a.context)


def goal_key(g: Goal):
    return (tuple(atom_key(a) for a in g.atoms), g.context)


# ---------------------------------------------------------------------------
# nodes


class OrNode:
    __slots__ = ("label", "children")

    def __init__(self, label: Substitution, children: tuple):
        self.label = label
        self.children = children  # and-nodes, clause-body order

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, OrNode):
            return NotImplemented
        if self.label != other.label or len(self.children) != len(other.children):
            return False
        return all(a == b for a, b in zip(self.children, other.children))

    def __repr__(self):
        return f"OrNode({self.label}, {len(self.children)} children)"


class AndNode:
    """Atom-labeled node; children are or-nodes, possibly computed lazily.

    frontier means the node was not expanded because the depth bound was
    reached; its children are empty by fiat, not by semantics.
    """

    __slots__ = ("label", "frontier", "_children", "_lazy", "_index")

    def __init__(self, label: Atom, frontier: bool, children=None, lazy=None):
        self.label = label
        self.frontier = frontier
        self._children = children
        self._lazy = lazy  # (provider, remaining) or None
        self._index = None

    @property
    def children(self) -> tuple:
        if self._children is None:
            provider, remaining = self._lazy
            self._children = provider.fan(self.label, remaining)
            self._lazy = None
        return self._children

    def fiber(self, sigma: Substitution) -> tuple:
        """The or-children labeled sigma, without forcing the whole fan."""
        if self._children is None:
            provider, remaining = self._lazy
            return provider.fiber(self.label, sigma, remaining)
        if self._index is None:
            index: dict = {}
            for o in self._children:
                index.setdefault(o.label, []).append(o)
            self._index = {k: tuple(v) for k, v in index.items()}
        return self._index.get(sigma, ())

    def fan_labels(self):
        """Sorted labels with nonempty fiber, without forcing subtrees."""
        if self._children is None:
            provider, remaining = self._lazy
            return provider.labels(self.label)
        seen = []
        last = None
        for o in self._children:
            if o.label != last:
                seen.append(o.label)
                last = o.label
        return tuple(seen)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, AndNode):
            return NotImplemented
        if self.label != other.label or self.frontier != other.frontier:
            return False
        a, b = self.children, other.children
        if len(a) != len(b):
            return False
        return all(x == y for x, y in zip(a, b))

    def __repr__(self):
        state = "frontier" if self.frontier else (
            "lazy" if self._children is None else f"{len(self._children)} children"
        )
        return f"AndNode({self.label}, {state})"


class AtomTree:
    """A rooted alternating tree plus the data that fixes its meaning:
    kind, depth bound, and enumeration bounds.

    The program is kept for the operators that need to enumerate fans
    (theta_bar, search); it does not take part in equality, which is
    truncation equality: kind, depth bound, bounds, and structure.
    """

    __slots__ = ("root", "kind", "depth_bound", "bounds", "program")

    def __init__(self, root: AndNode, kind: str, depth_bound: int, bounds,
                 program: Program | None = None):
        self.root = root
        self.kind = kind  # "ground-mgu" | "coinductive" | "saturated"
        self.depth_bound = depth_bound
        self.bounds = bounds  # (D, M) or None for ground-mgu
        self.program = program

    def __eq__(self, other):
        if not isinstance(other, AtomTree):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.depth_bound == other.depth_bound
            and self.bounds == other.bounds
            and self.root == other.root
        )

    def __repr__(self):
        return (
            f"AtomTree({self.kind}, root={self.root.label}, "
            f"d={self.depth_bound}, bounds={self.bounds})"
        )


# ---------------------------------------------------------------------------
# steps


def ground_step(p: Program, a: Atom):
    """Bodies of clauses whose head equals the ground atom, as goals."""
    if not is_ground(p):
        raise ValueError("ground_step needs a ground program")
    if a.context != 0 or any(max_var(t) > 0 for t in a.args):
        raise ValueError("ground_step needs a ground atom in context 0")
    bodies = [
        Goal(c.body, 0) for _, c in p.clauses_for(a.predicate) if c.head == a
    ]
    bodies.sort(key=goal_key)
    out = []
    for g in bodies:
        if not out or out[-1] != g:
            out.append(g)
    return tuple(out)


def term_matching_step(p: Program, a: Atom, bounds):
    """Union over clauses of the term-matching bodies, sorted, no duplicates."""
    bodies = []
    for _, c in p.clauses_for(a.predicate):
        for _, body in clause_step_matchers(a, c, bounds, p.signature):
            bodies.append(body)
    if len(bodies) > 1:
        bodies.sort(key=goal_key)
    out = []
    for g in bodies:
        if not out or out[-1] != g:
            out.append(g)
    return tuple(out)


class SaturatedStep:
    """The map sigma -> term_matching_step(P, A sigma) over enumerated sigma.

    Behaves like a read-only mapping but computes entries on demand; the
    full domain can be enormous, so iteration streams instead of
    materializing.
    """

    def __init__(self, program: Program, a: Atom, bounds):
        self.program = program
        self.atom = a
        self.bounds = bounds

    def domain(self):
        d, m = self.bounds
        return iter_substitutions(
            self.atom.context, self.program.signature, d, m
        )

    def _in_bounds(self, sigma: Substitution) -> bool:
        d, m = self.bounds
        return (
            sigma.source == self.atom.context
            and sigma.target <= m
            and all(term_depth(t) <= d for t in sigma.terms)
        )

    def __getitem__(self, sigma: Substitution):
        if not self._in_bounds(sigma):
            raise KeyError(sigma)
        return term_matching_step(
            self.program, apply(self.atom, sigma), self.bounds
        )

    def items(self):
        for sigma in self.domain():
            yield sigma, self[sigma]


def saturated_step(p: Program, a: Atom, bounds) -> SaturatedStep:
    return SaturatedStep(p, a, bounds)


# ---------------------------------------------------------------------------
# builders


class _SatProvider:
    """Shared lazy-node factory for saturated trees over one program.

    Nodes, fibers, and steps are memoized; every saturated tree over the
    same program and bounds draws from one pool, so equal subtrees are
    identical objects and comparisons stop at pointer equality.
    """

    def __init__(self, program: Program, bounds):
        self.program = program
        self.bounds = bounds
        self.nodes: dict = {}
        self.fibers: dict = {}
        self.steps: dict = {}
        self.enum: dict = {}
        self.cls: dict = {}
        self.body_at: dict = {}
        self.lives: dict = {}

    def node(self, a: Atom, remaining: int) -> AndNode:
        key = (a, remaining)
        hit = self.nodes.get(key)
        if hit is None:
            if remaining < 2:
                hit = AndNode(a, frontier=True, children=())
            else:
                hit = AndNode(a, frontier=False, lazy=(self, remaining))
            self.nodes[key] = hit
        return hit

    def step(self, a: Atom):
        hit = self.steps.get(a)
        if hit is None:
            hit = term_matching_step(self.program, a, self.bounds)
            self.steps[a] = hit
        return hit

    def _in_bounds(self, n: int, sigma: Substitution) -> bool:
        d, m = self.bounds
        return (
            sigma.source == n
            and sigma.target <= m
            and all(term_depth(t) <= d for t in sigma.terms)
        )

    def fiber(self, a: Atom, sigma: Substitution, remaining: int):
        key = (a, sigma, remaining)
        hit = self.fibers.get(key)
        if hit is None:
            if not self._in_bounds(a.context, sigma):
                hit = ()
            else:
                hit = tuple(
                    OrNode(
                        sigma,
                        tuple(
                            self.node(b, remaining - 2) for b in body.atoms
                        ),
                    )
                    for body in self.step(apply(a, sigma))
                )
            self.fibers[key] = hit
        return hit

    def arrows(self, context: int):
        hit = self.enum.get(context)
        if hit is None:
            d, m = self.bounds
            hit = tuple(
                iter_substitutions(
                    context, self.program.signature, d, m
                )
            )
            self.enum[context] = hit
        return hit

    def classes(self, context: int, occ):
        """Enumerated arrows from a context, grouped by their action on
        the variable set occ plus their target.

        An atom whose variables lie in occ behaves identically under
        every arrow of a class, so fans, liveness and searches probe one
        representative and multiply out.  A ground atom collapses a
        context's whole enumeration to one class per target.
        """
        key = (context, occ)
        hit = self.cls.get(key)
        if hit is None:
            groups: dict = {}
            for sigma in self.arrows(context):
                k = (
                    tuple(sigma.terms[i - 1] for i in occ),
                    sigma.target,
                )
                groups.setdefault(k, []).append(sigma)
            hit = tuple(tuple(v) for v in groups.values())
            self.cls[key] = hit
        return hit

    def bodies(self, a: Atom, sigma: Substitution):
        key = (a, sigma)
        hit = self.body_at.get(key)
        if hit is None:
            hit = self.step(apply(a, sigma))
            self.body_at[key] = hit
        return hit

    def live(self, a: Atom):
        """Enumerated arrows on which a steps: ordered tuple plus set."""
        hit = self.lives.get(a)
        if hit is None:
            keep = []
            for arr in self.classes(a.context, _occurring_vars(a)):
                if self.bodies(a, arr[0]):
                    keep.extend(arr)
            keep.sort(key=subst_key)
            hit = (tuple(keep), frozenset(keep))
            self.lives[a] = hit
        return hit

    def fan(self, a: Atom, remaining: int):
        out = []
        for sigma in self.live(a)[0]:
            out.extend(self.fiber(a, sigma, remaining))
        return tuple(out)

    def labels(self, a: Atom):
        return self.live(a)[0]


def _program_cache(p: Program) -> dict:
    return p._tree_caches


def _sat_provider(p: Program, bounds) -> _SatProvider:
    cache = _program_cache(p)
    key = ("sat", bounds)
    hit = cache.get(key)
    if hit is None:
        hit = _SatProvider(p, bounds)
        cache[key] = hit
    return hit


def build_saturated_avtree(p: Program, a: Atom, d: int, bounds) -> AtomTree:
    """Saturated and-or tree of a, truncated at depth d; or-branching runs
    over the substitutions enumerated at bounds = (D, M)."""
    if d < 0:
        raise ValueError("depth must be >= 0")
    provider = _sat_provider(p, tuple(bounds))
    return AtomTree(provider.node(a, d), "saturated", d, tuple(bounds), p)


def build_coinductive_tree(p: Program, a: Atom, d: int, bounds) -> AtomTree:
    """n-coinductive tree: term-matching steps only, all contexts fixed
    to a's context, every or-label the identity."""
    if d < 0:
        raise ValueError("depth must be >= 0")
    bounds = tuple(bounds)
    n = a.context
    id_n = identity(n)
    cache = _program_cache(p).setdefault(("coind", bounds, n), {})

    def node(atom_, remaining):
        key = (atom_, remaining)
        hit = cache.get(key)
        if hit is not None:
            return hit
        if remaining < 2:
            made = AndNode(atom_, frontier=True, children=())
        else:
            children = tuple(
                OrNode(
                    id_n, tuple(node(b, remaining - 2) for b in body.atoms)
                )
                for body in term_matching_step(p, atom_, bounds)
            )
            made = AndNode(atom_, frontier=False, children=children)
        cache[key] = made
        return made

    return AtomTree(node(a, d), "coinductive", d, bounds, p)


def build_andor_tree(p: Program, a: Atom, d: int) -> AtomTree:
    """The mgu-based and-or tree of a, truncated at depth d.

    Or-children are sorted by substitution, then by body; on ground
    programs every label degenerates to the empty identity.
    """
    if d < 0:
        raise ValueError("depth must be >= 0")
    cache = _program_cache(p).setdefault(("andor",), {})

    def node(atom_, remaining):
        key = (atom_, remaining)
        hit = cache.get(key)
        if hit is not None:
            return hit
        if remaining < 2:
            made = AndNode(atom_, frontier=True, children=())
        else:
            ors = []
            for _, c in p.clauses_for(atom_.predicate):
                pair = mgu(atom_, c.head)
                if pair is None:
                    continue
                sigma, tau = pair
                body = tuple(
                    Atom(
                        b.predicate,
                        tuple(term_apply(t, tau.terms) for t in b.args),
                        tau.target,
                    )
                    for b in c.body
                )
                ors.append((sigma, body))
            ors.sort(
                key=lambda st: (
                    subst_key(st[0]),
                    tuple(atom_key(b) for b in st[1]),
                )
            )
            children = []
            for sigma, body in ors:
                if children and children[-1].label == sigma and tuple(
                    ch.label for ch in children[-1].children
                ) == body:
                    continue  # duplicate clause step
                children.append(
                    OrNode(
                        sigma,
                        tuple(node(b, remaining - 2) for b in body),
                    )
                )
            made = AndNode(atom_, frontier=False, children=tuple(children))
        cache[key] = made
        return made

    return AtomTree(node(a, d), "ground-mgu", d, None, p)


# ---------------------------------------------------------------------------
# theta_bar and desaturation


class _ThetaBarProvider:
    """Depth-1 re-indexing: the sigma-fiber of the new root is the
    (sigma o theta)-fiber of the old root, children untouched."""

    def __init__(self, tree: AtomTree, theta: Substitution):
        self.tree = tree
        self.theta = theta
        self._cache: dict = {}
        self._labels = None

    def _in_bounds(self, sigma: Substitution) -> bool:
        d, m = self.tree.bounds
        return sigma.target <= m and all(
            term_depth(t) <= d for t in sigma.terms
        )

    def fiber(self, a: Atom, sigma: Substitution, remaining: int):
        if sigma.source != self.theta.target or not self._in_bounds(sigma):
            return ()
        hit = self._cache.get(sigma)
        if hit is None:
            composite = compose(self.theta, sigma)
            if self._in_bounds(composite):
                inner = self.tree.root.fiber(composite)
                hit = tuple(OrNode(sigma, o.children) for o in inner)
            else:
                # the label does not factor within the enumeration; a
                # truncation artifact, dropped by definition
                hit = ()
            self._cache[sigma] = hit
        return hit

    def fan(self, a: Atom, remaining: int):
        out = []
        for sigma in self.labels(a):
            out.extend(self.fiber(a, sigma, remaining))
        return tuple(out)

    def labels(self, a: Atom):
        # compose(theta, sigma) is one value per projection class of
        # sigma on theta's variables, so the whole class factors or
        # drops together
        if self._labels is None:
            provider = _sat_provider(self.tree.program, self.tree.bounds)
            occ = _term_vars(self.theta.terms)
            keep = []
            for arr in provider.classes(self.theta.target, occ):
                composite = compose(self.theta, arr[0])
                if not self._in_bounds(composite):
                    continue
                if self.tree.root.fiber(composite):
                    keep.extend(arr)
            keep.sort(key=subst_key)
            self._labels = tuple(keep)
        return self._labels


def theta_bar(tree: AtomTree, theta: Substitution) -> AtomTree:
    """Instantiate a saturated tree along theta.

    The root becomes apply(root, theta); a depth-1 or-node of the input
    labeled compose(theta, sigma) reappears labeled sigma with the same
    children; depth-1 labels with no factorization inside the enumeration
    bounds are dropped (a truncation artifact).  Deeper structure is
    shared untouched.
    """
    if tree.kind != "saturated":
        raise ValueError("theta_bar is defined on saturated trees")
    root = tree.root
    if root.label.context != theta.source:
        raise ValueError(
            f"cannot instantiate: root context {root.label.context} "
            f"!= source {theta.source}"
        )
    new_label = apply(root.label, theta)
    if root.frontier:
        new_root = AndNode(new_label, frontier=True, children=())
    else:
        new_root = AndNode(
            new_label,
            frontier=False,
            lazy=(_ThetaBarProvider(tree, theta), tree.depth_bound),
        )
    return AtomTree(
        new_root, "saturated", tree.depth_bound, tree.bounds, tree.program
    )


def desaturate(tree: AtomTree) -> AtomTree:
    """Keep exactly the identity-labeled or-nodes, recursively.

    Realizes the counit: the result is the coinductive tree of the root
    whenever the root's identity is inside the enumeration bounds.
    """
    if tree.kind != "saturated":
        raise ValueError("desaturate is defined on saturated trees")

    memo: dict = {}

    def walk(node: AndNode):
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if node.frontier:
            made = AndNode(node.label, frontier=True, children=())
        else:
            sigma = identity(node.label.context)
            children = tuple(
                OrNode(sigma, tuple(walk(c) for c in o.children))
                for o in node.fiber(sigma)
            )
            made = AndNode(node.label, frontier=False, children=children)
        memo[id(node)] = made
        return made

    return AtomTree(
        walk(tree.root), "coinductive", tree.depth_bound, tree.bounds,
        tree.program,
    )


# ---------------------------------------------------------------------------
# synched refutation subtrees


class SynchedSubtree(NamedTuple):
    """A finite subtree where every and-node keeps exactly one or-child
    and all or-nodes at one depth share one label.

    and_levels[k] lists the atoms at and-depth 2k; or_labels[k] is the
    shared label at or-depth 2k+1; bodies[k] records, one per atom of
    and_levels[k], the goal chosen below it.  The answer composes the
    or-labels root-down.
    """

    and_levels: tuple
    or_labels: tuple
    bodies: tuple
    answer: Substitution


def _synch_answer(root_context: int, or_labels) -> Substitution:
    if not or_labels:
        return identity(root_context)
    return compose(*or_labels)


def _term_vars(terms):
    out = set()
    stack = list(terms)
    while stack:
        t = stack.pop()
        if type(t) is Var:
            out.add(t.index)
        else:
            stack.extend(t.args)
    return tuple(sorted(out))


def _occurring_vars(a: Atom):
    return _term_vars(a.args)


def _factors_through(q: Substitution, theta: Substitution) -> bool:
    """Whether any t with compose(q, t) == theta exists.

    Simultaneous matching of q's terms against theta's; theta-side
    variables are rigid.  Used as a sound prune: a prefix that cannot
    factor can never complete to theta.
    """
    if q.source != theta.source:
        return False
    binding: dict = {}
    stack = list(zip(q.terms, theta.terms))
    while stack:
        pat, tgt = stack.pop()
        if type(pat) is Var:
            seen = binding.get(pat.index)
            if seen is None:
                binding[pat.index] = tgt
            elif seen != tgt:
                return False
        elif type(tgt) is App and pat.symbol == tgt.symbol:
            if len(pat.args) != len(tgt.args):
                return False
            stack.extend(zip(pat.args, tgt.args))
        else:
            return False
    return True


class SynchedRefutationSet:
    """The finite set of synched refutation subtrees of depth <= max_depth.

    The set is exact but is viewed lazily: once every open atom is
    ground, each enumerated retargeting of the answer extends a
    refutation, so the record count multiplies with the enumeration
    size and materializing all records is hopeless even at desk scale.
    Answers, counts, membership, and single witnesses are computed by
    dynamic programming on (open atom tuple, levels left) instead;
    iterating the view streams every record in canonical order and is
    meant for small sets only.

    The search works on atom tuples and memoized step tables, never on
    tree nodes, so it allocates no fans.  A branch ends exactly when
    every chosen body is empty.  Levels past the depth bound would sit
    below frontier nodes, so the budget never reaches them; deepening
    the tree can only add results.
    """

    def __init__(self, tree: AtomTree, max_depth: int):
        if tree.kind != "saturated":
            raise ValueError("synched search is defined on saturated trees")
        if max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if tree.depth_bound < max_depth:
            raise ValueError(
                f"tree truncated at {tree.depth_bound} cannot be searched "
                f"to {max_depth}"
            )
        self.tree = tree
        self.max_depth = max_depth
        self.max_labels = (max_depth + 1) // 2  # odd depths 1..2k-1
        self._provider = _sat_provider(tree.program, tree.bounds)
        self._closes: dict = {}
        self._cands: dict = {}
        self._ans: dict = {}
        self._counts: dict = {}

    # -- shared per-level machinery (classes, liveness and bodies live
    #    on the provider, shared with fan construction)

    def _live(self, a: Atom):
        return self._provider.live(a)

    def _bodies(self, a: Atom, sigma: Substitution):
        return self._provider.bodies(a, sigma)

    def _closing(self, a: Atom):
        """Arrows under which a has an empty body, as a frozenset.

        A one-level refutation of an atom tuple needs an arrow closing
        every member at once, so the last budget level reduces to an
        intersection of these sets instead of a walk over live arrows
        and their bodies.
        """
        hit = self._closes.get(a)
        if hit is None:
            provider = self._provider
            out = []
            for arr in provider.classes(a.context, _occurring_vars(a)):
                if any(not g.atoms for g in provider.bodies(a, arr[0])):
                    out.extend(arr)
            hit = frozenset(out)
            self._closes[a] = hit
        return hit

    def _candidates(self, atoms):
        """Arrows on which every open atom steps, in canonical order."""
        hit = self._cands.get(atoms)
        if hit is None:
            live = sorted(
                (self._live(a) for a in atoms), key=lambda ts: len(ts[0])
            )
            base = live[0][0]
            rest = [s for _, s in live[1:]]
            hit = tuple(x for x in base if all(x in s for s in rest))
            self._cands[atoms] = hit
        return hit

    def _choices(self, atoms, sigma):
        # one body per open atom, with the flattened next level
        for chosen in product(*[self._bodies(a, sigma) for a in atoms]):
            yield chosen, tuple(a for g in chosen for a in g.atoms)

    # -- answers

    def _answers(self, atoms, budget) -> frozenset:
        if budget == 0:
            return frozenset()
        key = (atoms, budget)
        hit = self._ans.get(key)
        if hit is not None:
            return hit
        if budget == 1:
            hit = frozenset.intersection(
                *[self._closing(a) for a in atoms]
            )
        else:
            occ = sorted(set().union(*map(_occurring_vars, atoms)))
            out = set()
            for arr in self._provider.classes(atoms[0].context, tuple(occ)):
                rep = arr[0]
                bs = [self._bodies(a, rep) for a in atoms]
                if not all(bs):
                    continue
                closes = False
                tails: set = set()
                for chosen in product(*bs):
                    nxt = tuple(a for g in chosen for a in g.atoms)
                    if not nxt:
                        closes = True
                    else:
                        tails |= self._answers(nxt, budget - 1)
                for sigma in arr:
                    if closes:
                        out.add(sigma)
                    for t in tails:
                        out.add(compose(sigma, t))
            hit = frozenset(out)
        self._ans[key] = hit
        return hit

    def answers(self) -> frozenset:
        """All computed answers, without materializing the subtrees."""
        return self._answers((self.tree.root.label,), self.max_labels)

    # -- counting

    def _count(self, atoms, budget) -> int:
        if budget == 0:
            return 0
        key = (atoms, budget)
        hit = self._counts.get(key)
        if hit is not None:
            return hit
        if budget == 1:
            # step sets are duplicate-free, so each closing arrow
            # contributes exactly one record
            total = len(
                frozenset.intersection(
                    *[self._closing(a) for a in atoms]
                )
            )
        else:
            occ = sorted(set().union(*map(_occurring_vars, atoms)))
            total = 0
            for arr in self._provider.classes(atoms[0].context, tuple(occ)):
                rep = arr[0]
                bs = [self._bodies(a, rep) for a in atoms]
                if not all(bs):
                    continue
                per = 0
                for chosen in product(*bs):
                    nxt = tuple(a for g in chosen for a in g.atoms)
                    per += (
                        1 if not nxt else self._count(nxt, budget - 1)
                    )
                total += len(arr) * per
        self._counts[key] = total
        return total

    def __len__(self) -> int:
        return self._count((self.tree.root.label,), self.max_labels)

    def __bool__(self) -> bool:
        return bool(self.answers())

    # -- record construction

    def _record(self, labels, levels, bodies) -> SynchedSubtree:
        return SynchedSubtree(
            levels,
            labels,
            bodies,
            _synch_answer(self.tree.root.label.context, labels),
        )

    def __iter__(self):
        def rec(atoms, budget, labels, levels, bodies):
            if budget == 0:
                return
            for sigma in self._candidates(atoms):
                for chosen, nxt in self._choices(atoms, sigma):
                    ls = labels + (sigma,)
                    lv = levels + (nxt,)
                    bd = bodies + (chosen,)
                    if not nxt:
                        yield self._record(ls, lv, bd)
                    else:
                        yield from rec(nxt, budget - 1, ls, lv, bd)

        root = self.tree.root.label
        yield from rec((root,), self.max_labels, (), ((root,),), ())

    def __contains__(self, s) -> bool:
        if not isinstance(s, SynchedSubtree):
            return False
        if len(s.or_labels) > self.max_labels:
            return False
        try:
            validate_synched_refutation(self.tree, s)
        except ValueError:
            return False
        return True

    def witness(self, theta: Substitution):
        """The canonically first subtree with answer theta, or None.

        Guided search: a branch survives only while its prefix composite
        still factors through theta, so junk retargetings die at once
        and no intermediate answer sets are computed.  theta itself need
        not be enumerated, only the labels along the chain are.
        """
        root = self.tree.root.label
        if theta.source != root.context:
            return None
        dead = set()

        def rec(atoms, budget, prefix, labels, levels, bodies):
            if budget == 0:
                return None
            key = (atoms, budget, prefix)
            if key in dead:
                return None
            for sigma in self._candidates(atoms):
                q = compose(prefix, sigma)
                if not _factors_through(q, theta):
                    continue
                for chosen, nxt in self._choices(atoms, sigma):
                    if not nxt:
                        if q == theta:
                            return self._record(
                                labels + (sigma,),
                                levels + (nxt,),
                                bodies + (chosen,),
                            )
                        continue
                    got = rec(
                        nxt,
                        budget - 1,
                        q,
                        labels + (sigma,),
                        levels + (nxt,),
                        bodies + (chosen,),
                    )
                    if got is not None:
                        return got
            dead.add(key)
            return None

        return rec(
            (root,), self.max_labels, identity(root.context), (),
            ((root,),), (),
        )


def find_synched_refutations(
    tree: AtomTree, max_depth: int
) -> SynchedRefutationSet:
    """The synched refutation subtrees of depth <= max_depth, as a lazy
    exact set view; see SynchedRefutationSet."""
    return SynchedRefutationSet(tree, max_depth)


def validate_synched_refutation(tree: AtomTree, s: SynchedSubtree) -> None:
    """Check that s embeds in tree as a synched refutation subtree.

    Walks level by level pulling only the fibers the subtree names, so
    validation never forces a full saturated fan.  Raises ValueError
    with the offending level and substitution when the walk fails.
    """
    if len(s.and_levels) != len(s.or_labels) + 1:
        raise ValueError("malformed subtree: level and label counts disagree")
    if len(s.bodies) != len(s.or_labels):
        raise ValueError("malformed subtree: body and label counts disagree")
    active = (tree.root,)
    if s.and_levels[0] != tuple(n.label for n in active):
        raise ValueError(
            f"subtree root {s.and_levels[0]} does not match tree root "
            f"{tree.root.label}"
        )
    for k, sigma in enumerate(s.or_labels):
        if len(s.bodies[k]) != len(active):
            raise ValueError(
                f"level {k}: {len(active)} active atoms but "
                f"{len(s.bodies[k])} chosen bodies"
            )
        next_active = []
        for node, chosen in zip(active, s.bodies[k]):
            found = None
            for o in node.fiber(sigma):
                if (
                    tuple(c.label for c in o.children) == chosen.atoms
                    and chosen.context == sigma.target
                ):
                    found = o
                    break
            if found is None:
                raise ValueError(
                    f"level {k}: no or-child labeled "
                    f"{format_substitution(sigma)} with the chosen body "
                    f"below {format_atom(node.label)}"
                )
            next_active.extend(found.children)
        active = tuple(next_active)
        if s.and_levels[k + 1] != tuple(n.label for n in active):
            raise ValueError(
                f"level {k + 1}: recorded atoms do not match the chosen bodies"
            )
    if active:
        raise ValueError(
            "not a refutation subtree: atoms remain open at the last level"
        )
    expected = _synch_answer(tree.root.label.context, s.or_labels)
    if s.answer != expected:
        raise ValueError(
            f"answer {format_substitution(s.answer)} does not equal the "
            f"composite {format_substitution(expected)}"
        )


def normalize_synched_refutation(tree: AtomTree, s: SynchedSubtree):
    """Push the whole answer to the first level.

    Returns the synched refutation subtree of theta_bar(tree, answer)
    obtained by instantiating level j with the composite of the labels
    from j on; all its or-labels are identities.  Read against the
    original tree (first label the answer, the rest identities) it
    carries the same answer.  The result is checked to embed in
    theta_bar(tree, answer); an answer outside the enumeration bounds is
    rejected by name, since the instantiated tree cannot hold the
    identity fiber in that case.
    """
    validate_synched_refutation(tree, s)
    theta = s.answer
    m = theta.target
    k = len(s.or_labels)
    d_bound, m_bound = tree.bounds
    if theta.target > m_bound or any(
        term_depth(t) > d_bound for t in theta.terms
    ):
        raise ValueError(
            f"answer {format_substitution(theta)} lies outside the "
            f"enumeration bounds (D={d_bound}, M={m_bound}); the normalized "
            "subtree has no identity fiber to live in"
        )
    suffixes = [None] * (k + 1)
    suffixes[k] = identity(m)
    for j in range(k - 1, -1, -1):
        suffixes[j] = compose(s.or_labels[j], suffixes[j + 1])
    id_m = identity(m)
    new_levels = tuple(
        tuple(apply(a, suffixes[j]) for a in level)
        for j, level in enumerate(s.and_levels)
    )
    new_bodies = tuple(
        tuple(
            Goal(tuple(apply(a, suffixes[j + 1]) for a in g.atoms), m)
            for g in s.bodies[j]
        )
        for j in range(k)
    )
    normalized = SynchedSubtree(new_levels, (id_m,) * k, new_bodies, id_m)
    validate_synched_refutation(theta_bar(tree, theta), normalized)
    return normalized
