"""The category of trees and free monads.

A morphism of trees S -> T is stored in adjunction form: an edge map
S0 -> T0 together with an assignment of a subtree of T to each node of S,
whose leaves correspond to the node's inputs through the edge map.  This
is exponentially smaller than the induced map of free-monad carriers,
which is materialised on demand.

The module also builds the free monad on a tree (carrier sub/sub') and,
within a bound, on an arbitrary endofunctor (carrier from the class
enumeration), provides the hom-set enumeration, the class predicates
(free, boundary-preserving, surjective, injective), the generic/free and
surjective/injective factorisations, edge contraction, and the posets of
generic injections and reduced covers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    BoundExceeded,
    MiddleNotCartesian,
    NotInnerEdge,
    SquareNotCommuting,
    TrivialTreeError,
)
from .finset import FinMap, FinSet, label_key
from .polyend import (
    PolyEndo,
    PolyMap,
    associator,
    compose,
    compose_polymaps,
    identity_endofunctor,
    left_unitor,
    right_unitor,
    validate_map,
)
from .ptree import (
    PTree,
    _graft_ptree_with_legs,
    enumerate_ptrees,
    ptree_canonical_form,
)
from .tree import (
    Subtree,
    Tree,
    canonical_form,
    certify_tree,
    enumerate_subtrees,
    maximal_subtree,
    polymap_from_edge_map,
    subtree_from_nodes,
    tree_isomorphisms,
    trivial_subtree,
)


# morphisms of trees -------------------------------------------------------


@dataclass(frozen=True)
class OmegaMorphism:
    """A morphism S -> T in the category of trees, in adjunction form.

    edge_pairs lists (x, edge image) for every edge of S in stored order;
    node_pairs lists (b, image subtree of T) for every node of S.  The
    leaf-bijection at a node is induced: the input e corresponds to the
    leaf edge_map(s(e)) of the image subtree.  A morphism is completely
    determined by its edge map.
    """

    source: Tree
    target: Tree
    edge_pairs: tuple
    node_pairs: tuple

    def edge(self, x):
        return _edge_dict(self)[x]

    def node_image(self, b) -> Subtree:
        return _node_dict(self)[b]

    def edge_map(self) -> dict:
        return dict(_edge_dict(self))


@lru_cache(maxsize=None)
def _edge_dict(phi: OmegaMorphism) -> dict:
    return dict(phi.edge_pairs)


@lru_cache(maxsize=None)
def _node_dict(phi: OmegaMorphism) -> dict:
    return dict(phi.node_pairs)


def omega_morphism(
    S: Tree, T: Tree, edge_map: dict, node_images: dict, validate: bool = True
) -> OmegaMorphism:
    """Certify the adjunction-form data as a morphism S -> T.

    Checks that the image subtree of each node is rooted at the image of
    the node's output edge and that the edge map restricts to a bijection
    from the node's inputs onto the subtree's leaves."""
    src = S.underlying
    if validate:
        for x in S.edges:
            if edge_map[x] not in T.edges:
                raise ValueError(f"edge image {edge_map[x]!r} not in target")
        for b in S.nodes:
            sub = node_images[b]
            if sub.ambient is not T and sub.ambient != T:
                raise ValueError(f"image of {b!r} lives in the wrong tree")
            if sub.root != edge_map[src.t(b)]:
                raise ValueError(
                    f"image of {b!r} is not rooted at the output's image"
                )
            images = [edge_map[src.s(e)] for e in S.fibre(b)]
            if len(set(images)) != len(images) or set(images) != set(
                sub.leaf_set
            ):
                raise ValueError(
                    f"inputs of {b!r} do not match the image's leaves"
                )
    edge_pairs = tuple((x, edge_map[x]) for x in S.edges)
    node_pairs = tuple((b, node_images[b]) for b in S.nodes)
    return OmegaMorphism(S, T, edge_pairs, node_pairs)


def identity_omega(T: Tree) -> OmegaMorphism:
    return omega_morphism(
        T,
        T,
        {x: x for x in T.edges},
        {b: subtree_from_nodes(T, (b,)) for b in T.nodes},
        validate=False,
    )


def from_embedding(phi: PolyMap, S: Tree = None, T: Tree = None) -> OmegaMorphism:
    """The tree morphism induced by a tree embedding (each node goes to the
    one-node subtree at its image)."""
    S = certify_tree(phi.source) if S is None else S
    T = certify_tree(phi.target) if T is None else T
    return omega_morphism(
        S,
        T,
        {x: phi.a0(x) for x in S.edges},
        {b: subtree_from_nodes(T, (phi.a1(b),)) for b in S.nodes},
    )


def image_subtree(phi: OmegaMorphism, sub: Subtree) -> Subtree:
    """The image of a subtree of the source: the union of the node images
    (grafting of images), or a trivial subtree if everything collapses."""
    nodes = set()
    for b in sub.node_set:
        nodes |= phi.node_image(b).node_set
    if not nodes:
        return trivial_subtree(phi.target, phi.edge(sub.root))
    return subtree_from_nodes(phi.target, nodes)


def compose_omega(psi: OmegaMorphism, phi: OmegaMorphism) -> OmegaMorphism:
    """The composite psi after phi, by grafting: each node image of phi is
    pushed forward through psi."""
    if phi.target != psi.source:
        raise ValueError("composition endpoints do not match")
    edge_map = {x: psi.edge(phi.edge(x)) for x in phi.source.edges}
    node_images = {
        b: image_subtree(psi, phi.node_image(b)) for b in phi.source.nodes
    }
    return omega_morphism(phi.source, psi.target, edge_map, node_images)


# hom enumeration ----------------------------------------------------------


@lru_cache(maxsize=None)
def _hom_omega(S: Tree, T: Tree) -> tuple:
    by_root = {}
    for sub in enumerate_subtrees(T):
        leaves = (sub.root,) if sub.is_trivial() else sub.leaf_set
        by_root.setdefault((sub.root, len(leaves)), []).append((sub, leaves))
    order = _root_first_order(S)
    src = S.underlying
    results = []

    def assign(i, edge_map, node_images):
        if i == len(order):
            results.append(
                omega_morphism(S, T, dict(edge_map), dict(node_images), validate=False)
            )
            return
        b = order[i]
        fib = S.fibre(b)
        options = by_root.get((edge_map[src.t(b)], len(fib)), ())
        for sub, leaves in options:
            node_images[b] = sub
            for perm in itertools.permutations(leaves):
                for e, leaf in zip(fib, perm):
                    edge_map[src.s(e)] = leaf
                assign(i + 1, edge_map, node_images)
        node_images.pop(b, None)

    for y in T.edges:
        assign(0, {S.root: y}, {})
    results.sort(key=lambda m: tuple(label_key(v) for _k, v in m.edge_pairs))
    return tuple(results)


def hom_omega(S: Tree, T: Tree) -> list:
    """All tree morphisms S -> T.

    Root-first search: pick an edge of T for the root of S, then give each
    node of S (parents before children) a subtree of T rooted at the image
    of its output edge with exactly as many leaves as the node has inputs,
    in every possible leaf correspondence."""
    return list(_hom_omega(S, T))


def _root_first_order(S: Tree) -> list:
    order = []

    def visit(edge):
        b = S.node_with_output(edge)
        if b is None:
            return
        order.append(b)
        for e in S.fibre(b):
            visit(S.underlying.s(e))

    visit(S.root)
    return order


# class predicates ---------------------------------------------------------


def is_injective(phi: OmegaMorphism) -> bool:
    """Injective componentwise on the induced map of carriers."""
    edges = [phi.edge(x) for x in phi.source.edges]
    if len(set(edges)) != len(edges):
        return False
    images = [
        _subtree_key(image_subtree(phi, sub))
        for sub in enumerate_subtrees(phi.source)
    ]
    return len(set(images)) == len(images)


def is_surjective(phi: OmegaMorphism) -> bool:
    """Surjective componentwise on the induced map of carriers."""
    edge_image = {phi.edge(x) for x in phi.source.edges}
    if edge_image != set(phi.target.edges):
        return False
    hit = set()
    marked_hit = set()
    for sub in enumerate_subtrees(phi.source):
        img = image_subtree(phi, sub)
        hit.add(_subtree_key(img))
        leaves = (sub.root,) if sub.is_trivial() else sub.leaf_set
        for leaf in leaves:
            marked_hit.add((_subtree_key(img), phi.edge(leaf)))
    needed = set()
    marked_needed = set()
    for sub in enumerate_subtrees(phi.target):
        needed.add(_subtree_key(sub))
        leaves = (sub.root,) if sub.is_trivial() else sub.leaf_set
        for leaf in leaves:
            marked_needed.add((_subtree_key(sub), leaf))
    return hit == needed and marked_hit == marked_needed


def is_boundary_preserving(phi: OmegaMorphism) -> bool:
    """Root goes to the root and leaves go bijectively to the leaves."""
    if phi.edge(phi.source.root) != phi.target.root:
        return False
    images = [phi.edge(l) for l in phi.source.leaves]
    return len(set(images)) == len(images) and set(images) == set(
        phi.target.leaves
    )


def free_conditions(phi: OmegaMorphism) -> tuple:
    """Seven equivalent characterisations of the free morphisms (the tree
    embeddings), evaluated independently.  The suite asserts they agree."""
    S, T = phi.source, phi.target
    # 1. the edge map extends to a tree embedding
    try:
        polymap_from_edge_map(S, T, phi.edge_map())
        cond1 = True
    except (ValueError, SquareNotCommuting, MiddleNotCartesian):
        cond1 = False
    # 2. the edge map preserves distances
    cond2 = True
    for x in S.edges:
        for y in S.edges:
            if S.leq(x, y):
                if not T.leq(phi.edge(x), phi.edge(y)) or T.distance(
                    phi.edge(x), phi.edge(y)
                ) != S.distance(x, y):
                    cond2 = False
    # 3. the image of every one-node subtree is a one-node subtree
    cond3 = all(
        len(phi.node_image(b).node_set) == 1 for b in S.nodes
    )
    # 4. the image of every subtree is isomorphic to it
    cond4 = all(
        canonical_form(image_subtree(phi, sub).as_tree())
        == canonical_form(sub.as_tree())
        for sub in enumerate_subtrees(S)
    )
    inj = is_injective(phi)
    hit = {_subtree_key(image_subtree(phi, sub)) for sub in enumerate_subtrees(S)}
    # 5. injective, and the image subtrees are closed under taking subtrees
    cond5 = inj
    if cond5:
        by_key = {_subtree_key(sub): sub for sub in enumerate_subtrees(T)}
        for key in hit:
            big = by_key[key]
            for small in enumerate_subtrees(T):
                if big.contains(small) and _subtree_key(small) not in hit:
                    cond5 = False
    # 6. injective, and every image subtree uses only hit edges
    edge_image = {phi.edge(x) for x in S.edges}
    cond6 = inj and all(
        set(image_subtree(phi, sub).edge_set) <= edge_image
        for sub in enumerate_subtrees(S)
    )
    # 7. injective, and the image of the maximal subtree uses only hit edges
    cond7 = inj and set(
        image_subtree(phi, maximal_subtree(S)).edge_set
    ) <= edge_image
    return (cond1, cond2, cond3, cond4, cond5, cond6, cond7)


def is_free(phi: OmegaMorphism) -> bool:
    return all(len(phi.node_image(b).node_set) == 1 for b in phi.source.nodes)


def _subtree_key(sub: Subtree):
    # the edge set alone does not determine a subtree: a trivial subtree
    # and a nullary-node subtree can share it
    return (
        tuple(sorted(sub.edge_set, key=label_key)),
        tuple(sorted(sub.node_set, key=label_key)),
    )


# factorisations -----------------------------------------------------------


def factor_generic_free(phi: OmegaMorphism):
    """Factor phi as a boundary-preserving (generic) morphism onto the image
    of the maximal subtree, followed by the free inclusion of that image."""
    mid_sub = image_subtree(phi, maximal_subtree(phi.source))
    middle = mid_sub.as_tree()
    generic = omega_morphism(
        phi.source,
        middle,
        phi.edge_map(),
        {
            b: Subtree(
                middle,
                phi.node_image(b).edge_set,
                phi.node_image(b).node_set,
                phi.node_image(b).marked_input_set,
            )
            for b in phi.source.nodes
        },
    )
    free = from_embedding(mid_sub.inclusion(), middle, phi.target)
    return generic, free


def factor_surj_inj(phi: OmegaMorphism):
    """Factor phi as a surjection (deleting every node whose image is
    trivial) followed by an injection."""
    S, T = phi.source, phi.target
    src = S.underlying
    deleted = frozenset(
        b for b in S.nodes if phi.node_image(b).is_trivial()
    )
    input_of = {}
    for b in deleted:
        (e,) = src.fibre(b)
        input_of[src.s(e)] = b

    def rep(x):
        while x in input_of:
            x = src.t(input_of[x])
        return x

    kept_edges = tuple(x for x in S.edges if x not in input_of)
    kept_nodes = tuple(b for b in S.nodes if b not in deleted)
    kept_marked = tuple(
        e for e in src.p2 if src.p(e) not in deleted
    )
    p0 = FinSet(kept_edges)
    p1 = FinSet(kept_nodes)
    p2 = FinSet(kept_marked)
    middle = certify_tree(
        PolyEndo(
            p0,
            p1,
            p2,
            FinMap.make(p2, p0, lambda e: rep(src.s(e))),
            FinMap.make(p2, p1, src.p),
            FinMap.make(p1, p0, lambda b: rep(src.t(b))),
        )
    )
    surj_images = {}
    for b in S.nodes:
        if b in deleted:
            surj_images[b] = trivial_subtree(middle, rep(src.t(b)))
        else:
            surj_images[b] = subtree_from_nodes(middle, (b,))
    surj = omega_morphism(S, middle, {x: rep(x) for x in S.edges}, surj_images)
    inj = omega_morphism(
        middle,
        T,
        {x: phi.edge(x) for x in kept_edges},
        {b: phi.node_image(b) for b in kept_nodes},
    )
    return surj, inj


def triple_factor(phi: OmegaMorphism):
    """Factor phi as surjection, boundary-preserving injection, free map."""
    surj, inj = factor_surj_inj(phi)
    generic, free = factor_generic_free(inj)
    return surj, generic, free


def count_boundary_preserving(S: Tree, T: Tree) -> int:
    return sum(1 for phi in hom_omega(S, T) if is_boundary_preserving(phi))


# contraction and the two posets -------------------------------------------


def contract(T: Tree, x):
    """Contract the inner edge x: the node above and the node below fuse
    into one node labelled (above, below).  Returns the contracted tree and
    the boundary-preserving injection T/x -> T sending the fused node to
    the two-node subtree."""
    amb = T.underlying
    b = T.node_with_output(x)
    e = T.input_at(x)
    if b is None or e is None:
        raise NotInnerEdge(f"{x!r} is not an inner edge")
    c = amb.p(e)
    merged = (b, c)

    def node_label(n):
        return merged if n in (b, c) else n

    nodes, seen_merged = [], False
    for n in T.nodes:
        if n in (b, c):
            if not seen_merged:
                nodes.append(merged)
                seen_merged = True
        else:
            nodes.append(n)
    p0 = FinSet(tuple(y for y in T.edges if y != x))
    p1 = FinSet(tuple(nodes))
    p2 = FinSet(tuple(m for m in amb.p2 if m != e))
    contracted = certify_tree(
        PolyEndo(
            p0,
            p1,
            p2,
            FinMap.make(p2, p0, amb.s),
            FinMap.make(p2, p1, lambda m: node_label(amb.p(m))),
            FinMap.make(
                p1, p0, lambda n: amb.t(c) if n == merged else amb.t(n)
            ),
        )
    )
    images = {}
    for n in contracted.nodes:
        if n == merged:
            images[n] = subtree_from_nodes(T, (b, c))
        else:
            images[n] = subtree_from_nodes(T, (n,))
    phi = omega_morphism(
        contracted, T, {y: y for y in contracted.edges}, images
    )
    return contracted, phi


def generic_injections(T: Tree) -> list:
    """One generic injection into T per subset of inner edges, obtained by
    contracting the subset; ordered by subset.  The poset structure is
    subset inclusion."""
    if T.is_trivial():
        raise TrivialTreeError("the trivial tree has no node to cover")
    inner = T.inner_edges()
    result = []
    for size in range(len(inner) + 1):
        for combo in itertools.combinations(inner, size):
            current, phi = T, identity_omega(T)
            for x in combo:
                current, step = contract(current, x)
                phi = compose_omega(phi, step)
            result.append((frozenset(combo), phi))
    return result


def reduced_covers(T: Tree) -> list:
    """One reduced cover of T per subset of inner edges: cut the tree at the
    subset's edges and take the resulting one-per-node partition into
    subtrees.  Ordered by subset; refinement reverses subset inclusion."""
    if T.is_trivial():
        raise TrivialTreeError("the trivial tree has no node to cover")
    inner = T.inner_edges()
    amb = T.underlying
    result = []
    for size in range(len(inner) + 1):
        for combo in itertools.combinations(inner, size):
            cut = set(combo)
            parent = {b: b for b in T.nodes}

            def find(b):
                while parent[b] != b:
                    parent[b] = parent[parent[b]]
                    b = parent[b]
                return b

            for x in inner:
                if x in cut:
                    continue
                above = T.node_with_output(x)
                below = amb.p(T.input_at(x))
                parent[find(above)] = find(below)
            components = {}
            for b in T.nodes:
                components.setdefault(find(b), set()).add(b)
            members = tuple(
                sorted(
                    (subtree_from_nodes(T, comp) for comp in components.values()),
                    key=Subtree.sort_key,
                )
            )
            result.append((frozenset(combo), members))
    return result


# free monads --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FreeMonad:
    """The free monad on a tree (exact) or on an endofunctor (within a
    bound).  The carrier is colours <- marked classes -> classes ->
    colours; unit inserts trivial trees, mult grafts.  For a bounded base
    the multiplication is defined on the sub-endofunctor of the composite
    whose grafts stay within the bound."""

    base: object
    carrier: PolyEndo
    unit: PolyMap
    mult: PolyMap
    reps: tuple
    max_nodes: int | None
    max_edges: int | None
    full_domain: bool

    @property
    def mult_domain(self) -> PolyEndo:
        return self.mult.source

    def rep_of(self, label):
        return dict(self.reps)[label]


def _sub_label(sub: Subtree):
    # both components are needed: a trivial subtree and a nullary-node
    # subtree occupy the same edge set
    return (
        "sub",
        tuple(sorted(sub.edge_set, key=label_key)),
        tuple(sorted(sub.node_set, key=label_key)),
    )


def free_monad(
    base, max_nodes: int | None = None, max_edges: int | None = None
) -> FreeMonad:
    if isinstance(base, Tree):
        return _tree_free_monad(base)
    if max_nodes is None and max_edges is None:
        raise ValueError("a bounded base needs at least one bound")
    return _bounded_free_monad(base, max_nodes, max_edges)


@lru_cache(maxsize=None)
def _tree_free_monad(T: Tree) -> FreeMonad:
    subs = enumerate_subtrees(T)
    reps = tuple((_sub_label(sub), sub) for sub in subs)
    by_label = dict(reps)
    by_nodes = {frozenset(sub.node_set): sub for sub in subs if not sub.is_trivial()}
    labels = tuple(label for label, _sub in reps)
    marked = []
    for label, sub in reps:
        leaves = (sub.root,) if sub.is_trivial() else sub.leaf_set
        for leaf in leaves:
            marked.append((label, leaf))
    p1 = FinSet(labels)
    p2 = FinSet(tuple(marked))
    carrier = PolyEndo(
        T.underlying.p0,
        p1,
        p2,
        FinMap.make(p2, T.underlying.p0, lambda m: m[1]),
        FinMap.make(p2, p1, lambda m: m[0]),
        FinMap.make(p1, T.underlying.p0, lambda l: by_label[l].root),
    )
    ident = identity_endofunctor(T.underlying.p0)
    unit = validate_map(
        ident,
        carrier,
        FinMap.identity(T.underlying.p0),
        FinMap.make(ident.p1, p1, lambda x: ("sub", (x,), ())),
        FinMap.make(ident.p2, p2, lambda x: (("sub", (x,), ()), x)),
    )
    domain = compose(carrier, carrier)

    def graft_label(node):
        label, f = node
        base_sub = by_label[label]
        nodes = set(base_sub.node_set)
        for branch_label in f:
            nodes |= by_label[branch_label].node_set
        if not nodes:
            return ("sub", (base_sub.root,), ())
        return _sub_label(by_nodes[frozenset(nodes)])

    mult = validate_map(
        domain,
        carrier,
        FinMap.identity(T.underlying.p0),
        FinMap.make(domain.p1, p1, graft_label),
        FinMap.make(domain.p2, p2, lambda m: (graft_label(m[0]), m[2][1])),
    )
    return FreeMonad(T, carrier, unit, mult, reps, None, None, True)


def _graft_with_tracking(base: PTree, branches: dict):
    """Graft a branch onto every leaf of the base, tracking where each
    branch leaf ends up.  Returns the grafted P-tree and the map
    (base leaf, branch leaf) -> edge of the result."""
    current = base
    pending = {leaf: leaf for leaf in base.tree.leaves}
    origin = {}
    for leaf in base.tree.leaves:
        branch = branches[leaf]
        current, g = _graft_ptree_with_legs(branch, current, pending.pop(leaf))
        for key in origin:
            origin[key] = g.lower_leg.a0(origin[key])
        for key in pending:
            pending[key] = g.lower_leg.a0(pending[key])
        for bleaf in branch.tree.leaves:
            origin[(leaf, bleaf)] = g.upper_leg.a0(bleaf)
    return current, origin


def _unique_iso_over_base(a: PTree, b: PTree) -> PolyMap:
    found = [
        phi
        for phi in tree_isomorphisms(a.tree, b.tree)
        if phi.then(b.decoration) == a.decoration
    ]
    if len(found) != 1:
        raise AssertionError("class representatives must be rigid")
    return found[0]


def _bounded_free_monad(P: PolyEndo, max_nodes, max_edges) -> FreeMonad:
    classes = enumerate_ptrees(P, max_nodes=max_nodes, max_edges=max_edges)
    reps = tuple(
        (("tr", i), pt) for i, pt in enumerate(classes.classes)
    )
    by_label = dict(reps)
    label_of_code = {
        ptree_canonical_form(pt): label for label, pt in reps
    }
    labels = tuple(label for label, _pt in reps)
    marked = []
    for label, pt in reps:
        for leaf in pt.tree.leaves:
            marked.append((label, leaf))
    p1 = FinSet(labels)
    p2 = FinSet(tuple(marked))
    carrier = PolyEndo(
        P.p0,
        p1,
        p2,
        FinMap.make(
            p2, P.p0, lambda m: by_label[m[0]].decoration.a0(m[1])
        ),
        FinMap.make(p2, p1, lambda m: m[0]),
        FinMap.make(p1, P.p0, lambda l: by_label[l].root_colour),
    )
    ident = identity_endofunctor(P.p0)
    trivial_label = {
        pt.root_colour: label for label, pt in reps if pt.node_count() == 0
    }
    unit = validate_map(
        ident,
        carrier,
        FinMap.identity(P.p0),
        FinMap.make(ident.p1, p1, lambda c: trivial_label[c]),
        FinMap.make(
            ident.p2,
            p2,
            lambda c: (trivial_label[c], by_label[trivial_label[c]].tree.root),
        ),
    )
    # the within-bound part of the composite carrier o carrier
    nodes = []
    inputs = []
    a1 = {}
    a2 = {}
    for label, pt in reps:
        leaves = pt.tree.leaves
        colour_options = [
            [
                l2
                for l2, pt2 in reps
                if pt2.root_colour == pt.decoration.a0(leaf)
            ]
            for leaf in leaves
        ]
        node_room = (
            None if max_nodes is None else max_nodes - pt.node_count()
        )
        edge_room = (
            None if max_edges is None else max_edges - pt.edge_count()
        )

        def assignments(i, nodes_used, edges_used, prefix):
            if node_room is not None and nodes_used > node_room:
                return
            if edge_room is not None and edges_used > edge_room:
                return
            if i == len(leaves):
                yield tuple(prefix)
                return
            for l2 in colour_options[i]:
                pt2 = by_label[l2]
                prefix.append(l2)
                yield from assignments(
                    i + 1,
                    nodes_used + pt2.node_count(),
                    edges_used + pt2.edge_count() - 1,
                    prefix,
                )
                prefix.pop()

        for f in assignments(0, 0, 0, []):
            node = (label, f)
            nodes.append(node)
            branches = dict(zip(leaves, (by_label[l2] for l2 in f)))
            grafted, origin = _graft_with_tracking(pt, branches)
            code = ptree_canonical_form(grafted)
            if code not in label_of_code:
                raise BoundExceeded(
                    f"graft of {node!r} leaves the enumerated bound"
                )
            result_label = label_of_code[code]
            iso = _unique_iso_over_base(grafted, by_label[result_label])
            a1[node] = result_label
            assignment = dict(zip(leaves, f))
            for leaf in leaves:
                l2 = assignment[leaf]
                for bleaf in by_label[l2].tree.leaves:
                    m = (node, (label, leaf), (l2, bleaf))
                    inputs.append(m)
                    a2[m] = (result_label, iso.a0(origin[(leaf, bleaf)]))
    dom_p1 = FinSet(tuple(nodes))
    dom_p2 = FinSet(tuple(inputs))
    domain = PolyEndo(
        P.p0,
        dom_p1,
        dom_p2,
        FinMap.make(dom_p2, P.p0, lambda m: carrier.s(m[2])),
        FinMap.make(dom_p2, dom_p1, lambda m: m[0]),
        FinMap.make(dom_p1, P.p0, lambda n: carrier.t(n[0])),
    )
    mult = validate_map(
        domain,
        carrier,
        FinMap.identity(P.p0),
        FinMap.make(dom_p1, p1, a1.__getitem__),
        FinMap.make(dom_p2, p2, a2.__getitem__),
    )
    return FreeMonad(P, carrier, unit, mult, reps, max_nodes, max_edges, False)


def check_monad_laws(fm: FreeMonad) -> bool:
    """Unit and associativity laws.

    With a full multiplication domain (tree bases) the laws are checked as
    equalities of composite maps built with compose, the associator and the
    unitors.  With a bounded domain they are checked elementwise on every
    composite that stays within the bound."""
    if fm.full_domain:
        C = fm.carrier
        ident = PolyMap.identity(C)
        mu = fm.mult
        left = compose_polymaps(fm.unit, ident).then(mu) == left_unitor(C)
        right = compose_polymaps(ident, fm.unit).then(mu) == right_unitor(C)
        assoc = compose_polymaps(mu, ident).then(mu) == associator(
            C, C, C
        ).then(compose_polymaps(ident, mu)).then(mu)
        return left and right and assoc
    return _bounded_unit_laws(fm) and _bounded_assoc_law(fm)


def _bounded_unit_laws(fm: FreeMonad) -> bool:
    by_label = dict(fm.reps)
    domain_nodes = set(fm.mult.source.p1)
    trivial_label = {
        pt.root_colour: label
        for label, pt in fm.reps
        if pt.node_count() == 0
    }
    for label, pt in fm.reps:
        troot = trivial_label[pt.root_colour]
        n = (troot, (label,))
        if n not in domain_nodes or fm.mult.a1(n) != label:
            return False
        tleaf = by_label[troot].tree.root
        for leaf in pt.tree.leaves:
            if fm.mult.a2((n, (troot, tleaf), (label, leaf))) != (label, leaf):
                return False
        f = tuple(
            trivial_label[pt.decoration.a0(leaf)] for leaf in pt.tree.leaves
        )
        n = (label, f)
        if n not in domain_nodes or fm.mult.a1(n) != label:
            return False
        for leaf, l2 in zip(pt.tree.leaves, f):
            if fm.mult.a2((n, (label, leaf), (l2, by_label[l2].tree.root))) != (
                label,
                leaf,
            ):
                return False
    return True


def _bounded_assoc_law(fm: FreeMonad) -> bool:
    by_label = dict(fm.reps)
    domain_nodes = set(fm.mult.source.p1)
    for n in fm.mult.source.p1:
        label, f = n
        pt = by_label[label]
        leaves = pt.tree.leaves
        r = fm.mult.a1(n)
        rep_r = by_label[r]
        for g_tuple in _leaf_assignments(fm, rep_r):
            outer = (r, g_tuple)
            if outer not in domain_nodes:
                continue
            g = dict(zip(rep_r.tree.leaves, g_tuple))
            # regroup: first graft each branch with its share of g
            f2 = []
            chain = {}
            for leaf, l2 in zip(leaves, f):
                inner_assignment = []
                for bleaf in by_label[l2].tree.leaves:
                    _r, rleaf = fm.mult.a2((n, (label, leaf), (l2, bleaf)))
                    inner_assignment.append((bleaf, g[rleaf]))
                inner = (l2, tuple(l3 for _b, l3 in inner_assignment))
                if inner not in domain_nodes:
                    return False
                f2.append(fm.mult.a1(inner))
                for bleaf, l3 in inner_assignment:
                    for cleaf in by_label[l3].tree.leaves:
                        _lab, mid = fm.mult.a2((inner, (l2, bleaf), (l3, cleaf)))
                        chain[(leaf, bleaf, cleaf)] = mid
            regrouped = (label, tuple(f2))
            if regrouped not in domain_nodes:
                return False
            if fm.mult.a1(regrouped) != fm.mult.a1(outer):
                return False
            # leaf-level agreement of the two composites
            for leaf, l2, l4 in zip(leaves, f, f2):
                for bleaf in by_label[l2].tree.leaves:
                    _r, rleaf = fm.mult.a2((n, (label, leaf), (l2, bleaf)))
                    l3 = g[rleaf]
                    for cleaf in by_label[l3].tree.leaves:
                        lhs = fm.mult.a2((outer, (r, rleaf), (l3, cleaf)))
                        rhs = fm.mult.a2(
                            (
                                regrouped,
                                (label, leaf),
                                (l4, chain[(leaf, bleaf, cleaf)]),
                            )
                        )
                        if lhs != rhs:
                            return False
    return True


def _leaf_assignments(fm: FreeMonad, pt: PTree):
    """All class assignments to the leaves of pt that keep the graft within
    the bound."""
    by_label = dict(fm.reps)
    leaves = pt.tree.leaves
    options = [
        [
            label
            for label, pt2 in fm.reps
            if pt2.root_colour == pt.decoration.a0(leaf)
        ]
        for leaf in leaves
    ]
    node_room = (
        None if fm.max_nodes is None else fm.max_nodes - pt.node_count()
    )
    edge_room = (
        None if fm.max_edges is None else fm.max_edges - pt.edge_count()
    )

    def go(i, nodes_used, edges_used, prefix):
        if node_room is not None and nodes_used > node_room:
            return
        if edge_room is not None and edges_used > edge_room:
            return
        if i == len(leaves):
            yield tuple(prefix)
            return
        for label in options[i]:
            pt2 = by_label[label]
            prefix.append(label)
            yield from go(
                i + 1,
                nodes_used + pt2.node_count(),
                edges_used + pt2.edge_count() - 1,
                prefix,
            )
            prefix.pop()

    yield from go(0, 0, 0, [])


# elements and their factorisation -----------------------------------------


def factor_element(fm: FreeMonad, phi: PolyMap):
    """Factor a map from a one-node tree into a bounded free-monad carrier
    through the tree underlying the selected class.

    Returns (R, generic, free): R is the class representative named by the
    node's image, generic is the boundary-preserving morphism from the
    one-node source onto R's tree, and free is the induced map of carriers
    free_monad(R.tree) -> fm.carrier; generic materialised then composed
    with free recovers phi."""
    E = certify_tree(phi.source)
    if len(E.nodes) != 1:
        raise ValueError("elements are maps out of a one-node tree")
    (node,) = tuple(E.nodes)
    R = fm.rep_of(phi.a1(node))
    generic = omega_morphism(
        E,
        R.tree,
        {
            E.root: R.tree.root,
            **{
                E.underlying.s(e): phi.a2(e)[1]
                for e in E.marked_inputs
            },
        },
        {node: maximal_subtree(R.tree)},
    )
    free = free_map_of_ptree(fm, R)
    return R, generic, free


def free_map_of_ptree(fm: FreeMonad, R: PTree) -> PolyMap:
    """The map of carriers free_monad(R.tree) -> fm.carrier sending a
    subtree of R's tree to the class of its induced decoration."""
    sub_fm = _tree_free_monad(R.tree)
    label_of_code = {
        ptree_canonical_form(pt): label for label, pt in fm.reps
    }
    by_label = dict(fm.reps)
    images = {}
    isos = {}
    for label, sub in sub_fm.reps:
        sub_tree = sub.as_tree()
        inc = sub.inclusion()
        decorated = PTree(sub_tree, inc.then(R.decoration))
        code = ptree_canonical_form(decorated)
        if code not in label_of_code:
            raise BoundExceeded("subtree class beyond the enumerated bound")
        images[label] = label_of_code[code]
        isos[label] = _unique_iso_over_base(decorated, by_label[images[label]])

    def on_mark(m):
        label, leaf = m
        return (images[label], isos[label].a0(leaf))

    return validate_map(
        sub_fm.carrier,
        fm.carrier,
        R.decoration.a0,
        FinMap.make(sub_fm.carrier.p1, fm.carrier.p1, images.__getitem__),
        FinMap.make(sub_fm.carrier.p2, fm.carrier.p2, on_mark),
    )


# materialisation and fullness ---------------------------------------------


def materialize(phi: OmegaMorphism) -> PolyMap:
    """The induced map between the free-monad carriers of source and
    target."""
    fm_s = _tree_free_monad(phi.source)
    fm_t = _tree_free_monad(phi.target)
    images = {
        label: _sub_label(image_subtree(phi, sub)) for label, sub in fm_s.reps
    }
    return validate_map(
        fm_s.carrier,
        fm_t.carrier,
        FinMap.make(
            phi.source.underlying.p0, phi.target.underlying.p0, phi.edge
        ),
        FinMap.make(fm_s.carrier.p1, fm_t.carrier.p1, images.__getitem__),
        FinMap.make(
            fm_s.carrier.p2,
            fm_t.carrier.p2,
            lambda m: (images[m[0]], phi.edge(m[1])),
        ),
    )


def carrier_maps(S: Tree, T: Tree) -> list:
    """Every valid endofunctor map between the free-monad carriers of S and
    T, found by extending each edge assignment; used to confirm that all of
    them come from tree morphisms."""
    fm_s = _tree_free_monad(S)
    fm_t = _tree_free_monad(T)
    subs_t = enumerate_subtrees(T)
    by_boundary = {}
    for sub in subs_t:
        leaves = (sub.root,) if sub.is_trivial() else sub.leaf_set
        key = (sub.root, frozenset(leaves))
        by_boundary.setdefault(key, []).append(sub)
    found = []
    s_edges = tuple(S.edges)
    for choice in itertools.product(tuple(T.edges), repeat=len(s_edges)):
        a0 = dict(zip(s_edges, choice))
        options = []
        ok = True
        for label, sub in fm_s.reps:
            leaves = (sub.root,) if sub.is_trivial() else sub.leaf_set
            images = [a0[l] for l in leaves]
            if len(set(images)) != len(images):
                ok = False
                break
            key = (a0[sub.root], frozenset(images))
            candidates = by_boundary.get(key, [])
            if not candidates:
                ok = False
                break
            options.append((label, candidates))
        if not ok:
            continue
        for combo in itertools.product(*(cands for _l, cands in options)):
            images = {
                label: _sub_label(sub)
                for (label, _c), sub in zip(options, combo)
            }
            try:
                found.append(
                    validate_map(
                        fm_s.carrier,
                        fm_t.carrier,
                        FinMap.make(
                            S.underlying.p0, T.underlying.p0, a0.__getitem__
                        ),
                        FinMap.make(
                            fm_s.carrier.p1,
                            fm_t.carrier.p1,
                            images.__getitem__,
                        ),
                        FinMap.make(
                            fm_s.carrier.p2,
                            fm_t.carrier.p2,
                            lambda m: (images[m[0]], a0[m[1]]),
                        ),
                    )
                )
            except (SquareNotCommuting, MiddleNotCartesian, ValueError):
                continue
    return found
