"""Trees as certified polynomial endofunctors.

A tree is a diagram T0 <- T2 -> T1 -> T0 in which t is injective, s is
injective with singleton complement (the root), and every edge reaches the
root by iterating the walk-to-the-root map sigma.  Leaves are the edges
outside the image of t.  On top of certification this module provides the
tree order, the subtree calculus (ideal subtrees, pruning, enumeration),
grafting as a pushout, recursive decomposition, canonical forms,
automorphisms and hom-sets of tree embeddings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import (
    DistanceUndefined,
    NotALeaf,
    SBadComplement,
    SigmaDiverges,
    TNotInjective,
)
from .finset import FinMap, FinSet, label_key
from .polyend import PolyEndo, PolyMap, validate_map


@dataclass(frozen=True)
class Tree:
    """A certified tree: the underlying endofunctor plus cached root, leaves
    (in stored edge order) and the walk-to-the-root map."""

    underlying: PolyEndo
    root: object
    leaves: tuple
    sigma: FinMap

    @property
    def edges(self) -> FinSet:
        return self.underlying.p0

    @property
    def nodes(self) -> FinSet:
        return self.underlying.p1

    @property
    def marked_inputs(self) -> FinSet:
        return self.underlying.p2

    def fibre(self, b) -> tuple:
        return self.underlying.fibre(b)

    def arity(self, b) -> int:
        return len(self.underlying.fibre(b))

    def is_trivial(self) -> bool:
        return len(self.nodes) == 0

    def node_with_output(self, x):
        """The node whose output edge is x, or None if x is a leaf."""
        return _output_table(self.underlying).get(x)

    def input_at(self, x):
        """The marked-input pair fed by edge x, or None if x is the root."""
        return _input_table(self.underlying).get(x)

    def inner_edges(self) -> tuple:
        """Edges that are simultaneously an output and an input."""
        t_image = self.underlying.t.image()
        s_image = self.underlying.s.image()
        return tuple(x for x in self.edges if x in t_image and x in s_image)

    # tree order -----------------------------------------------------------

    def leq(self, x, y) -> bool:
        """x <= y iff iterating sigma from x reaches y (root is maximum)."""
        current = x
        while True:
            if current == y:
                return True
            if current == self.root:
                return False
            current = self.sigma(current)

    def distance(self, x, y) -> int:
        """Number of sigma steps from x up to y; raises if incomparable."""
        if self.leq(y, x):
            x, y = y, x
        if not self.leq(x, y):
            raise DistanceUndefined(f"{x!r} and {y!r} are incomparable")
        steps, current = 0, x
        while current != y:
            current = self.sigma(current)
            steps += 1
        return steps

    def join(self, x, y):
        """Nearest common ancestor of x and y."""
        ancestors = {x}
        current = x
        while current != self.root:
            current = self.sigma(current)
            ancestors.add(current)
        current = y
        while current not in ancestors:
            current = self.sigma(current)
        return current

    def incomparable(self, x, y) -> bool:
        return not self.leq(x, y) and not self.leq(y, x)


@lru_cache(maxsize=None)
def _output_table(P: PolyEndo) -> dict:
    return {P.t(b): b for b in P.p1}


@lru_cache(maxsize=None)
def _input_table(P: PolyEndo) -> dict:
    return {P.s(e): e for e in P.p2}


def certify_tree(P: PolyEndo) -> Tree:
    """Check the four tree axioms and return the certified Tree.

    Finiteness is automatic.  Failures name the violated axiom with a
    witness: TNotInjective (axiom 2), SBadComplement (axiom 3, which also
    rejects the empty diagram), SigmaDiverges (axiom 4).
    """
    t, s, p = P.t, P.s, P.p
    seen = {}
    for b in P.p1:
        x = t(b)
        if x in seen:
            raise TNotInjective((seen[x], b))
        seen[x] = b
    s_seen = {}
    for e in P.p2:
        x = s(e)
        if x in s_seen:
            raise SBadComplement(
                len(P.p0) - len(set(s(e) for e in P.p2)),
                f"s identifies {s_seen[x]!r} and {e!r}",
            )
        s_seen[x] = e
    complement = [x for x in P.p0 if x not in s_seen]
    if len(complement) != 1:
        raise SBadComplement(len(complement))
    root = complement[0]

    def step(x):
        return root if x == root else t(p(s_seen[x]))

    sigma = FinMap.make(P.p0, P.p0, step)
    for x in P.p0:
        trail, current = [], x
        for _ in range(len(P.p0) + 1):
            if current == root:
                break
            trail.append(current)
            current = sigma(current)
        else:
            raise SigmaDiverges(tuple(trail[: len(P.p0)]))
    t_image = t.image()
    leaves = tuple(x for x in P.p0 if x not in t_image)
    return Tree(P, root, leaves, sigma)


def _fresh_root_label(inputs: FinSet):
    label = "root"
    while label in inputs:
        label += "_"
    return label


def one_node_tree(inputs: FinSet) -> Tree:
    """The tree E+1 <- E -> 1 -> E+1 with the given input edges as leaves
    and a fresh root label."""
    root = _fresh_root_label(inputs)
    edges = FinSet(tuple(inputs) + (root,))
    node = FinSet(("n",))
    marked = FinSet(tuple(("in", x) for x in inputs))
    s = FinMap.make(marked, edges, lambda e: e[1])
    p = FinMap.make(marked, node, lambda e: "n")
    t = FinMap.make(node, edges, lambda b: root)
    return certify_tree(PolyEndo(edges, node, marked, s, p, t))


def trivial_tree(label="r") -> Tree:
    edges = FinSet((label,))
    s = FinMap(FinSet(()), edges, ())
    p = FinMap(FinSet(()), FinSet(()), ())
    t = FinMap(FinSet(()), edges, ())
    return certify_tree(PolyEndo(edges, FinSet(()), FinSet(()), s, p, t))


def linear_tree(n_nodes: int) -> Tree:
    """The linear tree with n unary nodes and n+1 edges, e0 at the root."""
    result = trivial_tree("e0")
    for k in range(n_nodes):
        upper = one_node_tree(FinSet((f"l{k}",)))
        result = graft(upper, result, result.leaves[0] if k else "e0").tree
    return canonical_relabel(result)


def tree_order(T: Tree) -> Tree:
    """The tree order interface (leq/join/distance/incomparable) is carried
    by the certified tree itself; returned for discoverability."""
    return T


# subtrees ---------------------------------------------------------------


@dataclass(frozen=True)
class Subtree:
    """A subtree of an ambient tree: the three subset inclusions, recorded
    as frozen sets of labels.  A nontrivial subtree is determined by its
    node set; trivial subtrees are a single edge."""

    ambient: Tree
    edge_set: frozenset
    node_set: frozenset
    marked_input_set: frozenset

    @property
    def root(self):
        inputs = {self.ambient.underlying.s(e) for e in self.marked_input_set}
        (root,) = [x for x in self.edge_set if x not in inputs]
        return root

    @property
    def leaf_set(self) -> tuple:
        """Leaves in the ambient's stored edge order."""
        outputs = {self.ambient.underlying.t(b) for b in self.node_set}
        return tuple(x for x in self.ambient.edges if x in self.edge_set and x not in outputs)

    def is_trivial(self) -> bool:
        return not self.node_set

    def sort_key(self):
        return tuple(sorted((label_key(x) for x in self.edge_set)))

    def as_tree(self) -> Tree:
        """The induced sub-diagram, certified, keeping the ambient labels."""
        amb = self.ambient.underlying
        edges = FinSet(tuple(x for x in amb.p0 if x in self.edge_set))
        nodes = FinSet(tuple(b for b in amb.p1 if b in self.node_set))
        marked = FinSet(tuple(e for e in amb.p2 if e in self.marked_input_set))
        return certify_tree(
            PolyEndo(
                edges,
                nodes,
                marked,
                FinMap.make(marked, edges, amb.s),
                FinMap.make(marked, nodes, amb.p),
                FinMap.make(nodes, edges, amb.t),
            )
        )

    def inclusion(self) -> PolyMap:
        sub = self.as_tree()
        amb = self.ambient.underlying
        return validate_map(
            sub.underlying,
            amb,
            FinMap.make(sub.underlying.p0, amb.p0, lambda x: x),
            FinMap.make(sub.underlying.p1, amb.p1, lambda b: b),
            FinMap.make(sub.underlying.p2, amb.p2, lambda e: e),
        )

    def contains(self, other: "Subtree") -> bool:
        return (
            self.edge_set >= other.edge_set
            and self.node_set >= other.node_set
            and self.marked_input_set >= other.marked_input_set
        )


def trivial_subtree(T: Tree, x) -> Subtree:
    if x not in T.edges:
        raise ValueError(f"{x!r} is not an edge")
    return Subtree(T, frozenset((x,)), frozenset(), frozenset())


def subtree_from_nodes(T: Tree, nodes) -> Subtree:
    """The subtree spanned by a nonempty admissible node set."""
    nodes = frozenset(nodes)
    if not nodes:
        raise ValueError("use trivial_subtree for the node-free case")
    amb = T.underlying
    edges = {amb.t(b) for b in nodes}
    marked = {e for e in amb.p2 if amb.p(e) in nodes}
    edges |= {amb.s(e) for e in marked}
    return Subtree(T, frozenset(edges), nodes, frozenset(marked))


def maximal_subtree(T: Tree) -> Subtree:
    if T.is_trivial():
        return trivial_subtree(T, T.root)
    return subtree_from_nodes(T, set(T.nodes))


def _parent_node(T: Tree, b):
    """The node fed by b's output edge, or None."""
    e = T.input_at(T.underlying.t(b))
    return None if e is None else T.underlying.p(e)


def _admissible_node_set(T: Tree, nodes: frozenset) -> bool:
    """Nonempty, with a unique maximal node, closed under the walk from each
    node up to that maximal node."""
    maximal = [b for b in nodes if _parent_node(T, b) not in nodes]
    if len(maximal) != 1:
        return False
    top = maximal[0]
    for b in nodes:
        current = b
        while current != top:
            current = _parent_node(T, current)
            if current is None or current not in nodes:
                return False
    return True


@lru_cache(maxsize=None)
def _enumerate_subtrees(T: Tree) -> tuple:
    result = [trivial_subtree(T, x) for x in T.edges]
    nontrivial = []
    for size in range(1, len(T.nodes) + 1):
        for combo in itertools.combinations(tuple(T.nodes), size):
            if _admissible_node_set(T, frozenset(combo)):
                nontrivial.append(subtree_from_nodes(T, combo))
    nontrivial.sort(key=Subtree.sort_key)
    return tuple(result + nontrivial)


def enumerate_subtrees(T: Tree) -> list:
    """All subtrees: one trivial per edge, one nontrivial per admissible node
    subset, in canonical order."""
    return list(_enumerate_subtrees(T))


def enumerate_marked_subtrees(T: Tree) -> list:
    """sub'(T): each subtree paired with each of its leaves (the trivial
    subtree's single edge counts as its leaf)."""
    result = []
    for sub in enumerate_subtrees(T):
        if sub.is_trivial():
            result.append((sub, sub.root))
        else:
            for leaf in sub.leaf_set:
                result.append((sub, leaf))
    return result


def ideal_subtree(T: Tree, z) -> Subtree:
    """The descendant-closed subtree of all edges <= z, rooted at z."""
    if z not in T.edges:
        raise ValueError(f"{z!r} is not an edge")
    amb = T.underlying
    d0 = frozenset(x for x in T.edges if T.leq(x, z))
    d1 = frozenset(b for b in T.nodes if amb.t(b) in d0)
    d2 = frozenset(e for e in amb.p2 if amb.p(e) in d1)
    return Subtree(T, d0, d1, d2)


def prune(T: Tree, z) -> Subtree:
    """The root-preserving subtree with all strict descendants of z removed;
    z becomes a leaf."""
    ideal = ideal_subtree(T, z)
    amb = T.underlying
    c1 = frozenset(b for b in T.nodes if b not in ideal.node_set)
    c2 = frozenset(e for e in amb.p2 if e not in ideal.marked_input_set)
    c0 = frozenset(amb.s(e) for e in c2) | {T.root}
    return Subtree(T, c0, c1, c2)


# grafting ---------------------------------------------------------------


@dataclass(frozen=True)
class Grafted:
    """Result of grafting: the new tree plus the two embeddings (the leg
    from the upper tree S is ideal, the leg from the lower tree T is
    root-preserving)."""

    tree: Tree
    upper_leg: PolyMap
    lower_leg: PolyMap


def graft(S: Tree, T: Tree, leaf_of_T) -> Grafted:
    """The pushout of S and T over a trivial tree, identifying root(S) with
    the given leaf of T; then relabelled with canonical fresh labels so
    iterated grafts do not grow label size."""
    if leaf_of_T not in T.leaves:
        raise NotALeaf(f"{leaf_of_T!r} is not a leaf of the lower tree")
    su, tu = S.underlying, T.underlying
    glue = ("G", S.root, leaf_of_T)

    def edge_s(x):
        return glue if x == S.root else ("L", x)

    def edge_t(x):
        return glue if x == leaf_of_T else ("R", x)

    p0 = FinSet(
        (glue,)
        + tuple(("L", x) for x in su.p0 if x != S.root)
        + tuple(("R", x) for x in tu.p0 if x != leaf_of_T)
    )
    p1 = FinSet(tuple(("L", b) for b in su.p1) + tuple(("R", b) for b in tu.p1))
    p2 = FinSet(tuple(("L", e) for e in su.p2) + tuple(("R", e) for e in tu.p2))

    def s_map(e):
        tag, orig = e
        return edge_s(su.s(orig)) if tag == "L" else edge_t(tu.s(orig))

    def t_map(b):
        tag, orig = b
        return edge_s(su.t(orig)) if tag == "L" else edge_t(tu.t(orig))

    raw = PolyEndo(
        p0,
        p1,
        p2,
        FinMap.make(p2, p0, s_map),
        FinMap.make(p2, p1, lambda e: (e[0], su.p(e[1]) if e[0] == "L" else tu.p(e[1]))),
        FinMap.make(p1, p0, t_map),
    )
    raw_tree = certify_tree(raw)
    relabelled, e_ren, n_ren, m_ren = _relabel_with_maps(raw_tree)
    upper = validate_map(
        su,
        relabelled.underlying,
        FinMap.make(su.p0, relabelled.underlying.p0, lambda x: e_ren[edge_s(x)]),
        FinMap.make(su.p1, relabelled.underlying.p1, lambda b: n_ren[("L", b)]),
        FinMap.make(su.p2, relabelled.underlying.p2, lambda e: m_ren[("L", e)]),
    )
    lower = validate_map(
        tu,
        relabelled.underlying,
        FinMap.make(tu.p0, relabelled.underlying.p0, lambda x: e_ren[edge_t(x)]),
        FinMap.make(tu.p1, relabelled.underlying.p1, lambda b: n_ren[("R", b)]),
        FinMap.make(tu.p2, relabelled.underlying.p2, lambda e: m_ren[("R", e)]),
    )
    return Grafted(relabelled, upper, lower)


def _relabel_with_maps(T: Tree):
    """Deterministic fresh labels e0,e1,../n0,n1,.. in root-first traversal
    order (following stored fibre order)."""
    amb = T.underlying
    e_ren, n_ren, m_ren = {}, {}, {}

    def visit(edge):
        e_ren[edge] = f"e{len(e_ren)}"
        b = T.node_with_output(edge)
        if b is None:
            return
        n_ren[b] = f"n{len(n_ren)}"
        for e in T.fibre(b):
            m_ren[e] = ("in", f"e{len(e_ren)}")
            visit(amb.s(e))

    visit(T.root)
    p0 = FinSet(tuple(f"e{i}" for i in range(len(e_ren))))
    p1 = FinSet(tuple(f"n{i}" for i in range(len(n_ren))))
    p2 = FinSet(tuple(sorted(m_ren.values(), key=label_key)))
    inv_e = {v: k for k, v in e_ren.items()}
    inv_n = {v: k for k, v in n_ren.items()}
    inv_m = {v: k for k, v in m_ren.items()}
    s = FinMap.make(p2, p0, lambda e: e_ren[amb.s(inv_m[e])])
    p = FinMap.make(p2, p1, lambda e: n_ren[amb.p(inv_m[e])])
    t = FinMap.make(p1, p0, lambda b: e_ren[amb.t(inv_n[b])])
    return certify_tree(PolyEndo(p0, p1, p2, s, p, t)), e_ren, n_ren, m_ren


def canonical_relabel(T: Tree) -> Tree:
    return _relabel_with_maps(T)[0]


# recursion, canonical form, isomorphisms --------------------------------


@dataclass(frozen=True)
class Decomposition:
    """Either the trivial tree at an edge, or a root node with one ideal
    branch per input edge."""

    kind: str  # "trivial" | "node"
    edge: object = None
    node: object = None
    branches: tuple = ()  # pairs (marked input e, ideal_subtree at s(e))


def recursive_decompose(T: Tree) -> Decomposition:
    b = T.node_with_output(T.root)
    if b is None:
        return Decomposition("trivial", edge=T.root)
    branches = tuple(
        (e, ideal_subtree(T, T.underlying.s(e))) for e in T.fibre(b)
    )
    return Decomposition("node", node=b, branches=branches)


def regraft(decomp: Decomposition) -> Tree:
    """Rebuild a tree from its decomposition (up to isomorphism)."""
    if decomp.kind == "trivial":
        return trivial_tree()
    count = len(decomp.branches)
    result = one_node_tree(FinSet(tuple(("br", i) for i in range(count))))
    pending = {i: ("br", i) for i in range(count)}
    for i, (_e, branch) in enumerate(decomp.branches):
        grafted = graft(branch.as_tree(), result, pending[i])
        for j in range(i + 1, count):
            pending[j] = grafted.lower_leg.a0(pending[j])
        result = grafted.tree
    return result


@lru_cache(maxsize=None)
def canonical_form(T: Tree):
    """AHU-style encoding: a leaf is ("leaf",), a node is ("node",) plus the
    sorted tuple of its branches' encodings.  The two tags keep a leaf edge
    distinct from an edge capped by a nullary node.  Equal encodings iff
    isomorphic in TEmb."""

    def encode(edge):
        b = T.node_with_output(edge)
        if b is None:
            return ("leaf",)
        children = [encode(T.underlying.s(e)) for e in T.fibre(b)]
        return ("node",) + tuple(sorted(children))

    return encode(T.root)


def are_isomorphic(S: Tree, T: Tree) -> bool:
    return canonical_form(S) == canonical_form(T)


def _edge_bijections(S: Tree, T: Tree, s_edge, t_edge):
    """All bijections (as dicts on edges) from the ideal subtree of S at
    s_edge to the ideal subtree of T at t_edge, recursively."""
    sb = S.node_with_output(s_edge)
    tb = T.node_with_output(t_edge)
    if sb is None and tb is None:
        yield {s_edge: t_edge}
        return
    if sb is None or tb is None:
        return
    s_children = [S.underlying.s(e) for e in S.fibre(sb)]
    t_children = [T.underlying.s(e) for e in T.fibre(tb)]
    if len(s_children) != len(t_children):
        return
    t_codes = [
        canonical_form(ideal_subtree(T, c).as_tree()) for c in t_children
    ]
    s_codes = [
        canonical_form(ideal_subtree(S, c).as_tree()) for c in s_children
    ]
    for perm in itertools.permutations(range(len(t_children))):
        if any(s_codes[i] != t_codes[perm[i]] for i in range(len(perm))):
            continue
        branch_choices = [
            list(_edge_bijections(S, T, s_children[i], t_children[perm[i]]))
            for i in range(len(perm))
        ]
        for combo in itertools.product(*branch_choices):
            mapping = {s_edge: t_edge}
            for part in combo:
                mapping.update(part)
            yield mapping


def polymap_from_edge_map(S: Tree, T: Tree, edge_map: dict) -> PolyMap:
    """The tree embedding determined by an edge assignment: nodes follow
    outputs, marked inputs follow (source, node) pairs.  Raises if the
    assignment does not come from an embedding."""
    node_map = {}
    for b in S.nodes:
        image = T.node_with_output(edge_map[S.underlying.t(b)])
        if image is None:
            raise ValueError("edge map does not send a node output to one")
        node_map[b] = image
    input_map = {}
    for e in S.marked_inputs:
        b2 = node_map[S.underlying.p(e)]
        candidates = [
            e2
            for e2 in T.fibre(b2)
            if T.underlying.s(e2) == edge_map[S.underlying.s(e)]
        ]
        if len(candidates) != 1:
            raise ValueError("edge map incompatible with fibres")
        input_map[e] = candidates[0]
    return validate_map(
        S.underlying,
        T.underlying,
        FinMap.make(S.underlying.p0, T.underlying.p0, edge_map.__getitem__),
        FinMap.make(S.underlying.p1, T.underlying.p1, node_map.__getitem__),
        FinMap.make(S.underlying.p2, T.underlying.p2, input_map.__getitem__),
    )


@lru_cache(maxsize=None)
def _tree_isomorphisms(S: Tree, T: Tree) -> tuple:
    if len(S.edges) != len(T.edges) or canonical_form(S) != canonical_form(T):
        return ()
    result = [
        polymap_from_edge_map(S, T, mapping)
        for mapping in _edge_bijections(S, T, S.root, T.root)
    ]
    result.sort(key=lambda m: tuple(label_key(m.a0(x)) for x in S.edges))
    return tuple(result)


def tree_isomorphisms(S: Tree, T: Tree) -> list:
    """All isomorphisms S -> T, enumerated recursively by matching sibling
    branches within canonical-form classes."""
    return list(_tree_isomorphisms(S, T))


def automorphisms(T: Tree) -> list:
    """The full automorphism group of T in TEmb."""
    return tree_isomorphisms(T, T)


@lru_cache(maxsize=None)
def _hom_temb(S: Tree, T: Tree) -> tuple:
    cf = canonical_form(S)
    result = []
    for sub in enumerate_subtrees(T):
        sub_tree = sub.as_tree()
        if canonical_form(sub_tree) != cf:
            continue
        inc = sub.inclusion()
        for iso in tree_isomorphisms(S, sub_tree):
            result.append(iso.then(inc))
    return tuple(result)


def hom_temb(S: Tree, T: Tree) -> list:
    """All tree embeddings S -> T: one per (image subtree, isomorphism)."""
    return list(_hom_temb(S, T))


def factor_root_ideal(phi: PolyMap):
    """Factor a tree embedding as a root-preserving map followed by the
    inclusion of the ideal subtree below the image of the root."""
    S = certify_tree(phi.source)
    T = certify_tree(phi.target)
    middle = ideal_subtree(T, phi.a0(S.root))
    middle_tree = middle.as_tree()
    root_pres = validate_map(
        S.underlying,
        middle_tree.underlying,
        FinMap.make(S.underlying.p0, middle_tree.underlying.p0, phi.a0),
        FinMap.make(S.underlying.p1, middle_tree.underlying.p1, phi.a1),
        FinMap.make(S.underlying.p2, middle_tree.underlying.p2, phi.a2),
    )
    return root_pres, middle.inclusion()
