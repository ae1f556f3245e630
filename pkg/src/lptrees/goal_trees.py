"""Goal-level semantics: parallel resolution steps over lists of atoms,
the or-trees they generate, concatenation of trees, the representation
of atom trees as goal trees, and refutation paths.

A goal steps by choosing one clause step per atom and concatenating the
bodies.  In the ground case every edge is the empty identity; under
saturation all atoms of the goal must synchronise on one common
substitution, which labels the edge.  The empty goal steps to itself
under every substitution in scope, so refutation paths may keep going
after the goal has been emptied.
"""

from itertools import product
from typing import NamedTuple

from .atom_trees import (
    AtomTree,
    _factors_through,
    _program_cache,
    _sat_provider,
    _term_vars,
    goal_key,
    ground_step,
)
from .program import Goal, Program, apply_goal, format_goal, is_ground
from .terms import (
    Substitution,
    compose,
    format_substitution,
    identity,
    iter_substitutions,
    max_var,
    subst_key,
    term_depth,
)


# ---------------------------------------------------------------------------
# nodes


class GoalNode:
    """Goal-labeled node; children are (edge, child) pairs in canonical
    order, possibly computed lazily.

    frontier means the node was not expanded because the depth bound was
    reached; its children are empty by fiat, not by semantics.
    """

    __slots__ = ("label", "frontier", "_children", "_lazy", "_index")

    def __init__(self, label: Goal, frontier: bool, children=None, lazy=None):
        self.label = label
        self.frontier = frontier
        self._children = children
        self._lazy = lazy  # (provider, handle, remaining) or None
        self._index = None

    @property
    def children(self) -> tuple:
        if self._children is None:
            provider, handle, remaining = self._lazy
            self._children = provider.fan(handle, remaining)
            self._lazy = None
        return self._children

    def fiber(self, edge: Substitution) -> tuple:
        """The children under edge, without forcing the whole fan."""
        if self._children is None:
            provider, handle, remaining = self._lazy
            return provider.fiber(handle, edge, remaining)
        if self._index is None:
            index: dict = {}
            for e, c in self._children:
                index.setdefault(e, []).append(c)
            self._index = {k: tuple(v) for k, v in index.items()}
        return self._index.get(edge, ())

    def edge_labels(self) -> tuple:
        """Sorted edges with at least one child, without forcing subtrees."""
        if self._children is None:
            provider, handle, remaining = self._lazy
            return provider.labels(handle)
        seen = []
        last = None
        for e, _ in self._children:
            if e != last:
                seen.append(e)
                last = e
        return tuple(seen)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, GoalNode):
            return NotImplemented
        if self.label != other.label or self.frontier != other.frontier:
            return False
        a, b = self.children, other.children
        if len(a) != len(b):
            return False
        return all(ea == eb and ca == cb for (ea, ca), (eb, cb) in zip(a, b))

    def __repr__(self):
        state = "frontier" if self.frontier else (
            "lazy" if self._children is None else f"{len(self._children)} children"
        )
        return f"GoalNode({format_goal(self.label)}, {state})"


class GoalTree:
    """A rooted or-tree over goals plus the data that fixes its meaning.

    kind is "ground" (identity edges only) or "saturated" (edges drawn
    from the substitutions enumerated at bounds = (D, M)).  Equality is
    truncation equality: kind, depth bound, bounds, and structure; the
    program is carried for the operators and search.
    """

    __slots__ = ("root", "kind", "depth_bound", "bounds", "program")

    def __init__(self, root: GoalNode, kind: str, depth_bound: int, bounds,
                 program: Program | None = None):
        self.root = root
        self.kind = kind
        self.depth_bound = depth_bound
        self.bounds = bounds  # (D, M) or None for ground
        self.program = program

    def __eq__(self, other):
        if not isinstance(other, GoalTree):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.depth_bound == other.depth_bound
            and self.bounds == other.bounds
            and self.root == other.root
        )

    def __repr__(self):
        return (
            f"GoalTree({self.kind}, root={format_goal(self.root.label)}, "
            f"d={self.depth_bound}, bounds={self.bounds})"
        )


def _canonical_children(entries) -> tuple:
    """Sort (edge, child) entries canonically and collapse structural
    repeats; only entries agreeing on edge and label are compared."""
    entries = sorted(
        entries, key=lambda ec: (subst_key(ec[0]), goal_key(ec[1].label))
    )
    out: list = []
    for e, c in entries:
        dup = False
        for e2, c2 in reversed(out):
            if e2 != e or c2.label != c.label:
                break
            if c2 is c or c2 == c:
                dup = True
                break
        if not dup:
            out.append((e, c))
    return tuple(out)


# ---------------------------------------------------------------------------
# parallel steps


def distribute(sets, context: int | None = None) -> tuple:
    """All concatenations picking one goal per position, as a sorted
    duplicate-free tuple.

    The empty input yields the empty goal alone; a position with no
    goals annihilates the whole product.
    """
    pools = [tuple(s) for s in sets]
    for pool in pools:
        for g in pool:
            if context is None:
                context = g.context
            elif g.context != context:
                raise ValueError(
                    f"distribute over mixed contexts: {g.context} vs {context}"
                )
    if not pools:
        return (Goal((), 0 if context is None else context),)
    out = []
    seen = set()
    for combo in product(*pools):
        made = Goal(tuple(a for g in combo for a in g.atoms), context)
        if made not in seen:
            seen.add(made)
            out.append(made)
    out.sort(key=goal_key)
    return tuple(out)


def parallel_step_ground(p: Program, l: Goal) -> tuple:
    """One parallel resolution step of a ground goal: every atom steps
    and the chosen bodies concatenate."""
    if not is_ground(p):
        raise ValueError("parallel_step_ground needs a ground program")
    if l.context != 0:
        raise ValueError("ground goals live in context 0")
    return distribute([ground_step(p, a) for a in l.atoms], context=0)


class ParallelStep:
    """The map theta -> one parallel step of the goal under theta, over
    enumerated theta.

    Behaves like a read-only mapping but computes entries on demand; the
    empty goal maps to itself under every theta.
    """

    def __init__(self, program: Program, l: Goal, bounds):
        self.program = program
        self.goal = l
        self.bounds = bounds

    def domain(self):
        d, m = self.bounds
        return iter_substitutions(
            self.goal.context, self.program.signature, d, m
        )

    def _in_bounds(self, theta: Substitution) -> bool:
        d, m = self.bounds
        return (
            theta.source == self.goal.context
            and theta.target <= m
            and all(term_depth(t) <= d for t in theta.terms)
        )

    def __getitem__(self, theta: Substitution) -> tuple:
        if not self._in_bounds(theta):
            raise KeyError(theta)
        provider = _sat_provider(self.program, self.bounds)
        return distribute(
            [provider.bodies(a, theta) for a in self.goal.atoms],
            context=theta.target,
        )

    def items(self):
        for theta in self.domain():
            yield theta, self[theta]


def parallel_step_sat(p: Program, l: Goal, bounds) -> ParallelStep:
    return ParallelStep(p, l, tuple(bounds))


# ---------------------------------------------------------------------------
# builders


def build_vtree_ground(p: Program, l: Goal, d: int) -> GoalTree:
    """Or-tree of the ground goal l truncated at depth d: one node per
    reachable goal, one identity edge per parallel step result."""
    if d < 0:
        raise ValueError("depth must be >= 0")
    if not is_ground(p):
        raise ValueError("build_vtree_ground needs a ground program")
    if l.context != 0 or any(
        max_var(t) > 0 for a in l.atoms for t in a.args
    ):
        raise ValueError("build_vtree_ground needs a ground goal in context 0")
    id0 = identity(0)
    cache = _program_cache(p).setdefault(("vtree-ground",), {})

    def node(g: Goal, remaining: int) -> GoalNode:
        key = (g, remaining)
        hit = cache.get(key)
        if hit is not None:
            return hit
        if remaining == 0:
            made = GoalNode(g, frontier=True, children=())
        else:
            made = GoalNode(
                g,
                frontier=False,
                children=tuple(
                    (id0, node(g2, remaining - 1))
                    for g2 in parallel_step_ground(p, g)
                ),
            )
        cache[key] = made
        return made

    return GoalTree(node(l, d), "ground", d, None, p)


class _VtreeProvider:
    """Shared lazy-node factory for saturated or-trees over one program.

    A node's edges are the enumerated substitutions on which every atom
    of its goal can step; the empty goal takes every enumerated
    substitution from its context.  Nodes are pooled per (goal, depth
    left), so equal subtrees are identical objects.
    """

    def __init__(self, program: Program, bounds):
        self.program = program
        self.bounds = bounds
        self.sat = _sat_provider(program, bounds)
        self.nodes: dict = {}
        self.edges: dict = {}
        self.kid_sets: dict = {}

    def node(self, g: Goal, remaining: int) -> GoalNode:
        key = (g, remaining)
        hit = self.nodes.get(key)
        if hit is None:
            if remaining < 1:
                hit = GoalNode(g, frontier=True, children=())
            else:
                hit = GoalNode(g, frontier=False, lazy=(self, g, remaining))
            self.nodes[key] = hit
        return hit

    def labels(self, g: Goal) -> tuple:
        hit = self.edges.get(g)
        if hit is None:
            if not g.atoms:
                hit = self.sat.arrows(g.context)
            else:
                common = self.sat.live(g.atoms[0])[1]
                for a in g.atoms[1:]:
                    if not common:
                        break
                    common = common & self.sat.live(a)[1]
                hit = tuple(sorted(common, key=subst_key))
            self.edges[g] = hit
        return hit

    def kids(self, g: Goal, edge: Substitution) -> tuple:
        key = (g, edge)
        hit = self.kid_sets.get(key)
        if hit is None:
            if not g.atoms:
                hit = (Goal((), edge.target),)
            else:
                hit = distribute(
                    [self.sat.bodies(a, edge) for a in g.atoms],
                    context=edge.target,
                )
            self.kid_sets[key] = hit
        return hit

    def fan(self, g: Goal, remaining: int) -> tuple:
        out = []
        for edge in self.labels(g):
            for kid in self.kids(g, edge):
                out.append((edge, self.node(kid, remaining - 1)))
        return tuple(out)

    def fiber(self, g: Goal, edge: Substitution, remaining: int) -> tuple:
        if not self.sat._in_bounds(g.context, edge):
            return ()
        return tuple(
            self.node(kid, remaining - 1) for kid in self.kids(g, edge)
        )


def _vtree_provider(p: Program, bounds) -> _VtreeProvider:
    cache = _program_cache(p)
    key = ("vtree", bounds)
    hit = cache.get(key)
    if hit is None:
        hit = _VtreeProvider(p, bounds)
        cache[key] = hit
    return hit


def build_saturated_vtree(p: Program, l: Goal, d: int, bounds) -> GoalTree:
    """Saturated or-tree of the goal l truncated at depth d; edges run
    over the enumerated substitutions on which the whole goal can
    synchronise."""
    if d < 0:
        raise ValueError("depth must be >= 0")
    provider = _vtree_provider(p, tuple(bounds))
    return GoalTree(provider.node(l, d), "saturated", d, tuple(bounds), p)


# ---------------------------------------------------------------------------
# concatenation


class _ConcatProvider:
    """Pairwise synchronisation of two trees: children pair up only on a
    common edge label, and pair nodes are pooled by source identity."""

    def __init__(self):
        self.nodes: dict = {}
        self.pins: list = []

    def node(self, n1: GoalNode, n2: GoalNode) -> GoalNode:
        key = (id(n1), id(n2))
        hit = self.nodes.get(key)
        if hit is None:
            label = Goal(n1.label.atoms + n2.label.atoms, n1.label.context)
            if n1.frontier or n2.frontier:
                hit = GoalNode(label, frontier=True, children=())
            else:
                hit = GoalNode(label, frontier=False, lazy=(self, (n1, n2), 0))
            self.nodes[key] = hit
            self.pins.append((n1, n2))  # ids stay valid while memoized
        return hit

    def fan(self, handle, remaining) -> tuple:
        n1, n2 = handle
        by_edge: dict = {}
        for e, c in n2.children:
            by_edge.setdefault(e, []).append(c)
        entries = []
        for e, c1 in n1.children:
            for c2 in by_edge.get(e, ()):
                entries.append((e, self.node(c1, c2)))
        return _canonical_children(entries)

    def fiber(self, handle, edge, remaining) -> tuple:
        n1, n2 = handle
        entries = []
        for c1 in n1.fiber(edge):
            for c2 in n2.fiber(edge):
                entries.append((edge, self.node(c1, c2)))
        return tuple(c for _, c in _canonical_children(entries))

    def labels(self, handle) -> tuple:
        n1, n2 = handle
        second = set(n2.edge_labels())
        return tuple(e for e in n1.edge_labels() if e in second)


def concat_ground(t1: GoalTree, t2: GoalTree) -> GoalTree:
    """Concatenate two ground or-trees: root labels concatenate and the
    children pair up stepwise."""
    if t1.kind != "ground" or t2.kind != "ground":
        raise ValueError("concat_ground needs two ground trees")
    if t1.depth_bound != t2.depth_bound:
        raise ValueError(
            f"depth bounds differ: {t1.depth_bound} vs {t2.depth_bound}"
        )
    provider = _ConcatProvider()
    return GoalTree(
        provider.node(t1.root, t2.root), "ground", t1.depth_bound, None,
        t1.program,
    )


def concat_sat(t1: GoalTree, t2: GoalTree) -> GoalTree:
    """Concatenate two saturated or-trees; children pair only on equal
    edge labels, so both goals advance under one substitution."""
    if t1.kind != "saturated" or t2.kind != "saturated":
        raise ValueError("concat_sat needs two saturated trees")
    if t1.root.label.context != t2.root.label.context:
        raise ValueError(
            f"root contexts differ: {t1.root.label.context} vs "
            f"{t2.root.label.context}"
        )
    if t1.bounds != t2.bounds:
        raise ValueError(f"bounds differ: {t1.bounds} vs {t2.bounds}")
    provider = _ConcatProvider()
    return GoalTree(
        provider.node(t1.root, t2.root), "saturated",
        min(t1.depth_bound, t2.depth_bound), t1.bounds, t1.program,
    )


# ---------------------------------------------------------------------------
# representation of atom trees as goal trees


class _ReprProvider:
    """Or-tree view of an and-or tree, read off the tree's own nodes.

    Sibling and-children concatenate into one goal node, or-labels move
    to the edges, and recursion distributes over the or-choices; one
    goal step consumes one and-level and one or-level of the source.
    """

    def __init__(self, tree: AtomTree):
        self.tree = tree
        self.saturated = tree.kind == "saturated"
        self.nodes: dict = {}
        self.pins: list = []
        self.scopes: dict = {}

    def scope(self, context: int) -> tuple:
        """Edges available to the empty goal at this context."""
        if not self.saturated:
            return (identity(0),)
        hit = self.scopes.get(context)
        if hit is None:
            d, m = self.tree.bounds
            hit = tuple(
                iter_substitutions(context, self.tree.program.signature, d, m)
            )
            self.scopes[context] = hit
        return hit

    def _in_scope(self, context: int, edge: Substitution) -> bool:
        if edge.source != context:
            return False
        if not self.saturated:
            return edge == identity(0)
        d, m = self.tree.bounds
        return edge.target <= m and all(
            term_depth(t) <= d for t in edge.terms
        )

    def node(self, ns: tuple, context: int, r: int) -> GoalNode:
        key = (tuple(id(n) for n in ns), context, r)
        hit = self.nodes.get(key)
        if hit is None:
            label = Goal(tuple(n.label for n in ns), context)
            if r == 0:
                hit = GoalNode(label, frontier=True, children=())
            else:
                hit = GoalNode(
                    label, frontier=False, lazy=(self, (ns, context), r)
                )
            self.nodes[key] = hit
            self.pins.append(ns)
        return hit

    def labels(self, handle) -> tuple:
        ns, context = handle
        if not ns:
            return self.scope(context)
        first = ns[0].fan_labels()
        if len(ns) == 1:
            return first
        common = set(first)
        for n in ns[1:]:
            if not common:
                return ()
            common &= set(n.fan_labels())
        return tuple(e for e in first if e in common)

    def kids(self, ns: tuple, edge: Substitution, r: int) -> tuple:
        pools = [n.fiber(edge) for n in ns]
        if any(not pool for pool in pools):
            return ()
        out = []
        seen = set()
        for combo in product(*pools):
            child_ns = tuple(c for o in combo for c in o.children)
            made = self.node(child_ns, edge.target, r - 1)
            if id(made) not in seen:
                seen.add(id(made))
                out.append(made)
        out.sort(key=lambda n: goal_key(n.label))
        return tuple(out)

    def fan(self, handle, r: int) -> tuple:
        ns, _ = handle
        out = []
        for edge in self.labels(handle):
            for kid in self.kids(ns, edge, r):
                out.append((edge, kid))
        return tuple(out)

    def fiber(self, handle, edge, r: int) -> tuple:
        ns, context = handle
        if not ns:
            if not self._in_scope(context, edge):
                return ()
            return (self.node((), edge.target, r - 1),)
        return self.kids(ns, edge, r)


def repr_ground(tree: AtomTree) -> GoalTree:
    """The or-tree of the singleton goal at the root, computed from the
    and-or tree alone.  A branch dies as soon as one conjunct has no
    step, which prunes everything its siblings could still do."""
    if tree.kind != "ground-mgu":
        raise ValueError("repr_ground needs a ground-mgu tree")
    provider = _ReprProvider(tree)
    r = tree.depth_bound // 2
    root = provider.node((tree.root,), tree.root.label.context, r)
    return GoalTree(root, "ground", r, None, tree.program)


def repr_sat(tree: AtomTree) -> GoalTree:
    """The same translation for saturated trees: or-node substitutions
    move to the edges and siblings synchronise on equal labels."""
    if tree.kind != "saturated":
        raise ValueError("repr_sat needs a saturated tree")
    provider = _ReprProvider(tree)
    r = tree.depth_bound // 2
    root = provider.node((tree.root,), tree.root.label.context, r)
    return GoalTree(root, "saturated", r, tree.bounds, tree.program)


# ---------------------------------------------------------------------------
# instantiation


class _GoalThetaBarProvider:
    """Depth-1 re-indexing at goal level: the sigma-fiber of the new
    root is the compose(theta, sigma)-fiber of the old root, children
    untouched."""

    def __init__(self, tree: GoalTree, theta: Substitution):
        self.tree = tree
        self.theta = theta
        self._labels = None

    def _in_bounds(self, sigma: Substitution) -> bool:
        d, m = self.tree.bounds
        return sigma.target <= m and all(
            term_depth(t) <= d for t in sigma.terms
        )

    def fiber(self, handle, sigma, remaining) -> tuple:
        if sigma.source != self.theta.target or not self._in_bounds(sigma):
            return ()
        composite = compose(self.theta, sigma)
        if not self._in_bounds(composite):
            return ()
        return self.tree.root.fiber(composite)

    def labels(self, handle) -> tuple:
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

    def fan(self, handle, remaining) -> tuple:
        out = []
        for sigma in self.labels(handle):
            for child in self.fiber(handle, sigma, remaining):
                out.append((sigma, child))
        return tuple(out)


def theta_bar_goal(tree: GoalTree, theta: Substitution) -> GoalTree:
    """Instantiate a saturated goal tree along theta.

    The root goal becomes its theta-instance; a depth-1 edge of the
    input labeled compose(theta, sigma) reappears labeled sigma with the
    same child; edges with no factorization inside the enumeration
    bounds are dropped (a truncation artifact).  Deeper structure is
    shared untouched.
    """
    if tree.kind != "saturated":
        raise ValueError("theta_bar_goal is defined on saturated trees")
    root = tree.root
    if root.label.context != theta.source:
        raise ValueError(
            f"cannot instantiate: root context {root.label.context} "
            f"!= source {theta.source}"
        )
    new_label = apply_goal(root.label, theta)
    if root.frontier:
        new_root = GoalNode(new_label, frontier=True, children=())
    else:
        new_root = GoalNode(
            new_label,
            frontier=False,
            lazy=(_GoalThetaBarProvider(tree, theta), None, tree.depth_bound),
        )
    return GoalTree(
        new_root, "saturated", tree.depth_bound, tree.bounds, tree.program
    )


# ---------------------------------------------------------------------------
# refutation paths


class RefutationPath(NamedTuple):
    """A root-to-empty-goal path: the node labels, the edge labels
    between them, and the composed answer."""

    nodes: tuple
    edges: tuple
    answer: Substitution


def _path_answer(context: int, edges) -> Substitution:
    if not edges:
        return identity(context)
    return compose(*edges)


class GoalRefutationSet:
    """The refutation paths of a goal tree with at most max_len edges,
    as a lazy exact set view.

    Iteration enumerates paths in canonical order; answers() folds the
    tree into the set of composed answers without materializing paths;
    witness looks for a single path with a requested answer.  Paths may
    pass through the empty goal and continue along its self-loop, so one
    refutation yields every composition the loop can reach.
    """

    def __init__(self, tree: GoalTree, max_len: int):
        if max_len < 0:
            raise ValueError("max_len must be >= 0")
        if tree.depth_bound < max_len:
            raise ValueError(
                f"tree depth {tree.depth_bound} is less than the search "
                f"length {max_len}"
            )
        self.tree = tree
        self.max_len = max_len
        self._ans: dict = {}
        self._reach: dict = {}
        self._dead: set = set()
        self._pin: list = []

    def _answers(self, node: GoalNode, budget: int) -> frozenset:
        key = (id(node), budget)
        hit = self._ans.get(key)
        if hit is not None:
            return hit
        self._pin.append(node)
        out = set()
        if not node.label.atoms:
            out.add(identity(node.label.context))
        if budget >= 1 and not node.frontier:
            for edge, child in node.children:
                for tail in self._answers(child, budget - 1):
                    out.add(compose(edge, tail))
        hit = frozenset(out)
        self._ans[key] = hit
        return hit

    def answers(self) -> frozenset:
        """All answers of refutation paths within the length bound."""
        return self._answers(self.tree.root, self.max_len)

    def _reachable(self, node: GoalNode, budget: int) -> bool:
        if not node.label.atoms:
            return True
        if budget == 0 or node.frontier:
            return False
        key = (id(node), budget)
        hit = self._reach.get(key)
        if hit is None:
            self._pin.append(node)
            hit = any(
                self._reachable(child, budget - 1)
                for _, child in node.children
            )
            self._reach[key] = hit
        return hit

    def __bool__(self) -> bool:
        return self._reachable(self.tree.root, self.max_len)

    def __iter__(self):
        seen = set()
        context = self.tree.root.label.context

        def rec(node, budget, nodes, edges):
            if not node.label.atoms:
                made = RefutationPath(
                    tuple(nodes), tuple(edges), _path_answer(context, edges)
                )
                key = (made.nodes, made.edges)
                if key not in seen:
                    seen.add(key)
                    yield made
            if budget >= 1 and not node.frontier:
                for edge, child in node.children:
                    nodes.append(child.label)
                    edges.append(edge)
                    yield from rec(child, budget - 1, nodes, edges)
                    nodes.pop()
                    edges.pop()

        root = self.tree.root
        yield from rec(root, self.max_len, [root.label], [])

    def __len__(self) -> int:
        return sum(1 for _ in self)

    def __contains__(self, path) -> bool:
        try:
            nodes = tuple(path.nodes)
            edges = tuple(path.edges)
            answer = path.answer
        except AttributeError:
            return False
        if len(nodes) != len(edges) + 1 or len(edges) > self.max_len:
            return False
        root = self.tree.root
        if nodes[0] != root.label or nodes[-1].atoms:
            return False
        try:
            if answer != _path_answer(root.label.context, edges):
                return False
        except ValueError:
            return False

        def walk(node, i):
            if i == len(edges):
                return True
            return any(
                child.label == nodes[i + 1] and walk(child, i + 1)
                for child in node.fiber(edges[i])
            )

        return walk(root, 0)

    def witness(self, theta: Substitution):
        """One refutation path with answer theta, or None.

        The search composes edge prefixes and prunes branches whose
        prefix can no longer factor into theta.
        """
        root = self.tree.root
        if theta.source != root.label.context:
            return None

        def rec(node, budget, prefix, nodes, edges):
            if not node.label.atoms and prefix == theta:
                return RefutationPath(tuple(nodes), tuple(edges), theta)
            if budget == 0 or node.frontier:
                return None
            key = (id(node), budget, prefix)
            if key in self._dead:
                return None
            self._pin.append(node)
            for edge, child in node.children:
                nxt = compose(prefix, edge)
                if not _factors_through(nxt, theta):
                    continue
                nodes.append(child.label)
                edges.append(edge)
                hit = rec(child, budget - 1, nxt, nodes, edges)
                if hit is not None:
                    return hit
                nodes.pop()
                edges.pop()
            self._dead.add(key)
            return None

        return rec(
            root, self.max_len, identity(theta.source), [root.label], []
        )


def find_goal_refutations(tree: GoalTree, max_len: int) -> GoalRefutationSet:
    """Lazy view of all root-to-empty paths of length at most max_len."""
    return GoalRefutationSet(tree, max_len)


def _walk_path(tree: GoalTree, nodes, edges) -> None:
    """Follow the labels down the tree; error on the first step with no
    matching edge and child."""
    cur = tree.root
    for i, (edge, lbl) in enumerate(zip(edges, nodes[1:]), start=1):
        hit = None
        for child in cur.fiber(edge):
            if child.label == lbl:
                hit = child
                break
        if hit is None:
            raise ValueError(
                f"no {format_substitution(edge)}-edge to "
                f"{format_goal(lbl)} at step {i}"
            )
        cur = hit


def _check_path(tree: GoalTree, path: RefutationPath) -> None:
    nodes = tuple(path.nodes)
    edges = tuple(path.edges)
    if len(nodes) != len(edges) + 1:
        raise ValueError("node and edge counts do not match")
    if not nodes or nodes[0] != tree.root.label:
        raise ValueError("path does not start at the root")
    if nodes[-1].atoms:
        raise ValueError("path does not end at the empty goal")
    want = _path_answer(tree.root.label.context, edges)
    if path.answer != want:
        raise ValueError(
            f"answer {format_substitution(path.answer)} does not match "
            f"the composed edges {format_substitution(want)}"
        )
    _walk_path(tree, nodes, edges)


def normalize_goal_refutation(
    tree: GoalTree, path: RefutationPath
) -> RefutationPath:
    """Rewrite a refutation path of the tree so the whole answer sits on
    the first edge and every later edge is an identity.

    Each later node is instanced by the composition of the edges it had
    still ahead of it.  The rewritten path must itself live inside the
    tree; if the answer or the identity lies outside the enumeration
    bounds, the offending substitution is reported by name.
    """
    _check_path(tree, path)
    k = len(path.nodes)
    if k == 1:
        return path
    theta = path.answer
    idm = identity(theta.target)
    suffix = [None] * k
    suffix[k - 1] = idm
    for j in range(k - 2, 0, -1):
        suffix[j] = compose(path.edges[j], suffix[j + 1])
    new_nodes = [path.nodes[0]]
    for j in range(1, k):
        new_nodes.append(apply_goal(path.nodes[j], suffix[j]))
    made = RefutationPath(
        tuple(new_nodes), (theta,) + (idm,) * (k - 2), theta
    )
    try:
        _walk_path(tree, made.nodes, made.edges)
    except ValueError as err:
        raise ValueError(
            f"normalized path leaves the tree ({err}): the substitution "
            "is outside the enumeration bounds"
        ) from None
    return made
