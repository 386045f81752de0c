"""P-trees: trees decorated over a fixed polynomial endofunctor P, their
rigidity, and the bounded enumeration of the set tr(P) of isomorphism
classes as a least fixpoint W = colours + P(W).

A decoration is a validated morphism tree -> P; the cartesian condition
gives a bijection of each node's inputs with the fibre of its decorating
operation, and edge decorations are forced from node decorations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import ArityUnsupported, ColourMismatch
from .finset import FinMap, FinSet, label_key
from .polyend import PolyEndo, PolyMap, validate_map
from .tree import (
    Grafted,
    Tree,
    canonical_form,
    certify_tree,
    graft,
    one_node_tree,
    tree_isomorphisms,
    trivial_tree,
)


@dataclass(frozen=True)
class PTree:
    """A tree with a structure map to a fixed base endofunctor."""

    tree: Tree
    decoration: PolyMap

    def __post_init__(self):
        if self.decoration.source != self.tree.underlying:
            raise ValueError("decoration must start at the tree")

    @property
    def base(self) -> PolyEndo:
        return self.decoration.target

    @property
    def root_colour(self):
        return self.decoration.a0(self.tree.root)

    def node_count(self) -> int:
        return len(self.tree.nodes)

    def edge_count(self) -> int:
        return len(self.tree.edges)


def ptree_canonical_form(pt: PTree):
    """Decoration-aware canonical encoding.  A leaf is its colour; a node is
    (decorating operation, branch encodings in the base fibre's stored
    order).  Exact because P-trees are rigid: equal encodings iff
    isomorphic over the base."""
    T, dec, P = pt.tree, pt.decoration, pt.base

    def encode(edge):
        b = T.node_with_output(edge)
        if b is None:
            return ("leaf", dec.a0(edge))
        by_target = {dec.a2(e): e for e in T.fibre(b)}
        branches = tuple(
            encode(T.underlying.s(by_target[e2])) for e2 in P.fibre(dec.a1(b))
        )
        return ("node", dec.a1(b), branches)

    return encode(T.root)


def ptrees_isomorphic(a: PTree, b: PTree) -> bool:
    if a.base != b.base:
        return False
    return ptree_canonical_form(a) == ptree_canonical_form(b)


def decorations(T: Tree, P: PolyEndo) -> list:
    """All structure maps T -> P, by root-first backtracking over node
    decorations and fibre bijections.  For a truncated base, a node arity
    beyond the bound is an error rather than an empty answer."""
    if P.arity_bound is not None:
        for n in T.nodes:
            if T.arity(n) > P.arity_bound:
                raise ArityUnsupported(
                    f"node {n!r} has arity {T.arity(n)} > bound {P.arity_bound}"
                )
    if T.is_trivial():
        result = []
        for colour in P.p0:
            a0 = FinMap.make(T.underlying.p0, P.p0, lambda x: colour)
            empty1 = FinMap(T.underlying.p1, P.p1, ())
            empty2 = FinMap(T.underlying.p2, P.p2, ())
            result.append(PTree(T, validate_map(T.underlying, P, a0, empty1, empty2)))
        return result

    order = _root_first_nodes(T)
    results = []

    def assign(i, a0, a1, a2):
        if i == len(order):
            results.append(
                PTree(
                    T,
                    validate_map(
                        T.underlying,
                        P,
                        FinMap.make(T.underlying.p0, P.p0, a0.__getitem__),
                        FinMap.make(T.underlying.p1, P.p1, a1.__getitem__),
                        FinMap.make(T.underlying.p2, P.p2, a2.__getitem__),
                    ),
                )
            )
            return
        n = order[i]
        out_edge = T.underlying.t(n)
        fib_t = T.fibre(n)
        for b in P.p1:
            fib_p = P.fibre(b)
            if len(fib_p) != len(fib_t):
                continue
            if out_edge in a0 and a0[out_edge] != P.t(b):
                continue
            for images in itertools.permutations(fib_p):
                a0_new = dict(a0)
                a0_new[out_edge] = P.t(b)
                a1[n] = b
                for e, e2 in zip(fib_t, images):
                    a2[e] = e2
                    a0_new[T.underlying.s(e)] = P.s(e2)
                assign(i + 1, a0_new, a1, a2)
        a1.pop(n, None)

    assign(0, {}, {}, {})
    return results


def _root_first_nodes(T: Tree) -> list:
    order = []

    def visit(edge):
        b = T.node_with_output(edge)
        if b is None:
            return
        order.append(b)
        for e in T.fibre(b):
            visit(T.underlying.s(e))

    visit(T.root)
    return order


def automorphisms_over_base(pt: PTree) -> list:
    """Tree automorphisms commuting with the decoration."""
    return [
        phi
        for phi in tree_isomorphisms(pt.tree, pt.tree)
        if phi.then(pt.decoration) == pt.decoration
    ]


def is_rigid(pt: PTree) -> bool:
    """Whether the only automorphism over the base is the identity."""
    return len(automorphisms_over_base(pt)) == 1


def trivial_ptree(P: PolyEndo, colour) -> PTree:
    T = trivial_tree()
    a0 = FinMap.make(T.underlying.p0, P.p0, lambda x: colour)
    return PTree(
        T,
        validate_map(
            T.underlying,
            P,
            a0,
            FinMap(T.underlying.p1, P.p1, ()),
            FinMap(T.underlying.p2, P.p2, ()),
        ),
    )


def one_node_ptree(P: PolyEndo, b) -> PTree:
    """The one-node P-tree decorated by operation b, leaves labelled by the
    fibre elements themselves."""
    fib = P.fibre(b)
    T = one_node_tree(FinSet(fib))
    node = tuple(T.nodes)[0]
    a0 = FinMap.make(
        T.underlying.p0,
        P.p0,
        lambda x: P.t(b) if x == T.root else P.s(x),
    )
    a1 = FinMap.make(T.underlying.p1, P.p1, lambda n: b)
    a2 = FinMap.make(T.underlying.p2, P.p2, lambda e: e[1])
    return PTree(T, validate_map(T.underlying, P, a0, a1, a2))


def graft_ptree(upper: PTree, lower: PTree, leaf) -> PTree:
    """Graft decorated trees; the upper root colour must equal the lower
    leaf colour, and the decorations are transported along the pushout legs."""
    return _graft_ptree_with_legs(upper, lower, leaf)[0]


def _graft_ptree_with_legs(upper: PTree, lower: PTree, leaf):
    if upper.base != lower.base:
        raise ValueError("grafting requires a common base")
    if upper.root_colour != lower.decoration.a0(leaf):
        raise ColourMismatch("colour mismatch at the grafting leaf")
    g: Grafted = graft(upper.tree, lower.tree, leaf)
    P = upper.base
    d0, d1, d2 = {}, {}, {}
    for pt, leg in ((upper, g.upper_leg), (lower, g.lower_leg)):
        src = pt.tree.underlying
        for x in src.p0:
            d0[leg.a0(x)] = pt.decoration.a0(x)
        for b in src.p1:
            d1[leg.a1(b)] = pt.decoration.a1(b)
        for e in src.p2:
            d2[leg.a2(e)] = pt.decoration.a2(e)
    new = g.tree.underlying
    pt = PTree(
        g.tree,
        validate_map(
            g.tree.underlying,
            P,
            FinMap.make(new.p0, P.p0, d0.__getitem__),
            FinMap.make(new.p1, P.p1, d1.__getitem__),
            FinMap.make(new.p2, P.p2, d2.__getitem__),
        ),
    )
    return pt, g


def build_ptree(P: PolyEndo, b, branches: dict) -> PTree:
    """The P-tree with root operation b and, for each fibre element e of b,
    the branch P-tree branches[e] grafted onto the corresponding leaf."""
    result = one_node_ptree(P, b)
    fib = P.fibre(b)
    pending = {e: e for e in fib}  # leaf label of the one-node tree = e
    for e in fib:
        result, g = _graft_ptree_with_legs(branches[e], result, pending.pop(e))
        for e_rest in pending:
            pending[e_rest] = g.lower_leg.a0(pending[e_rest])
    return result


@dataclass(frozen=True)
class PTreeClassSet:
    """Isomorphism classes of P-trees within a bound, with canonical
    representatives ordered by (node count, encoding)."""

    base: PolyEndo
    classes: tuple
    max_nodes: int | None
    max_edges: int | None

    def by_node_count(self) -> dict:
        counts = {}
        for pt in self.classes:
            counts.setdefault(pt.node_count(), []).append(pt)
        return counts

    def counts_by_edges(self) -> dict:
        counts = {}
        for pt in self.classes:
            counts[pt.edge_count()] = counts.get(pt.edge_count(), 0) + 1
        return counts


def enumerate_ptrees(
    P: PolyEndo, max_nodes: int | None = None, max_edges: int | None = None
) -> PTreeClassSet:
    """Least-fixpoint enumeration of tr(P) within the bounds.

    W starts as the trivial P-trees (one per colour); each round adds, for
    every (operation b, assignment f of known classes to the inputs of b
    with matching colours), the grafted P-tree, deduplicated by canonical
    form.  Also asserts the Lambek condition within the bound: distinct
    (b, f) pairs never produce the same class.
    """
    if max_nodes is None and max_edges is None:
        raise ValueError("at least one bound is required")
    classes = {}
    for colour in P.p0:
        pt = trivial_ptree(P, colour)
        classes[ptree_canonical_form(pt)] = pt
    produced_by = {}
    key_of_code = {}
    changed = True
    while changed:
        changed = False
        snapshot = sorted(classes.items(), key=lambda kv: label_key(kv[0]))
        for b in P.p1:
            fib = P.fibre(b)
            options = [
                [
                    (code, pt)
                    for code, pt in snapshot
                    if pt.root_colour == P.s(e)
                ]
                for e in fib
            ]
            node_budget = None if max_nodes is None else max_nodes - 1
            edge_budget = None if max_edges is None else max_edges - 1

            def combos(i, nodes, edges, prefix):
                if node_budget is not None and nodes > node_budget:
                    return
                if edge_budget is not None and edges > edge_budget:
                    return
                if i == len(options):
                    yield tuple(prefix)
                    return
                for code, branch in options[i]:
                    prefix.append((code, branch))
                    yield from combos(
                        i + 1,
                        nodes + branch.node_count(),
                        edges + branch.edge_count(),
                        prefix,
                    )
                    prefix.pop()

            for combo in combos(0, 0, 0, []):
                key = (b, tuple(code for code, _pt in combo))
                if key in produced_by:
                    continue
                pt = build_ptree(P, b, dict(zip(fib, (pt for _c, pt in combo))))
                code = ptree_canonical_form(pt)
                if code in key_of_code:
                    raise AssertionError(
                        f"Lambek violation: {key!r} and {key_of_code[code]!r} "
                        f"produce the same class"
                    )
                produced_by[key] = code
                key_of_code[code] = key
                if code not in classes:
                    classes[code] = pt
                    changed = True
    ordered = sorted(
        classes.values(),
        key=lambda pt: (pt.node_count(), label_key(ptree_canonical_form(pt))),
    )
    return PTreeClassSet(P, tuple(ordered), max_nodes, max_edges)


def undecorated_tree_classes(max_edges: int) -> list:
    """All isomorphism classes of trees with at most max_edges edges, as
    canonical representatives ordered by (edge count, canonical form)."""
    if max_edges < 1:
        raise ValueError("a tree has at least one edge")
    seed = trivial_tree("e0")
    classes = {canonical_form(seed): seed}
    changed = True
    while changed:
        changed = False
        snapshot = sorted(classes.items(), key=lambda kv: label_key(kv[0]))
        for arity in range(0, max_edges):
            for combo in itertools.combinations_with_replacement(snapshot, arity):
                edges = 1 + sum(len(t.edges) for _c, t in combo)
                if edges > max_edges:
                    continue
                built = _tree_with_branches([t for _c, t in combo])
                code = canonical_form(built)
                if code not in classes:
                    classes[code] = built
                    changed = True
    return sorted(
        classes.values(),
        key=lambda t: (len(t.edges), label_key(canonical_form(t))),
    )


def _tree_with_branches(branches: list) -> Tree:
    count = len(branches)
    result = one_node_tree(FinSet(tuple(("br", i) for i in range(count))))
    pending = {i: ("br", i) for i in range(count)}
    for i, branch in enumerate(branches):
        grafted = graft(branch, result, pending[i])
        for j in range(i + 1, count):
            pending[j] = grafted.lower_leg.a0(pending[j])
        result = grafted.tree
    return result
