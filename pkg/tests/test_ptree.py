import pytest

from polytree import (
    BoundExceeded,
    ColourMismatch,
    automorphisms_over_base,
    build_ptree,
    decorations,
    enumerate_ptrees,
    free_monoid_truncated,
    graft_ptree,
    identity_endofunctor,
    is_rigid,
    linear_tree,
    one_node_ptree,
    ptree_canonical_form,
    ptrees_isomorphic,
    trivial_ptree,
    trivial_tree,
    undecorated_tree_classes,
    FinSet,
)

import oracles
from util import binary_op_polyend, positive_arity_monoid


M3 = free_monoid_truncated(3)


def test_trivial_and_one_node():
    pt = trivial_ptree(M3, tuple(M3.p0)[0])
    assert pt.node_count() == 0 and pt.edge_count() == 1
    single = one_node_ptree(M3, 2)
    assert single.node_count() == 1 and single.edge_count() == 3


def test_decorations_of_linear_tree():
    # a chain of two unary-compatible nodes: each node picks any arity-1 op
    line = linear_tree(2)
    assert len(decorations(line, M3)) == 1
    ident = identity_endofunctor(FinSet(("c",)))
    assert len(decorations(line, ident)) == 1


def test_identity_ptrees_are_linear():
    ident = identity_endofunctor(FinSet(("c",)))
    classes = enumerate_ptrees(ident, max_nodes=6)
    assert len(classes.classes) == 7
    assert sorted(pt.node_count() for pt in classes.classes) == list(range(7))


def test_truncated_monoid_counts_match_plane_trees():
    classes = enumerate_ptrees(M3, max_edges=4)
    by_edges = classes.counts_by_edges()
    assert [by_edges[e] for e in range(1, 5)] == oracles.plane_tree_counts(
        range(0, 4), 4
    )


def test_positive_arity_counts_are_catalan():
    p = positive_arity_monoid(4)
    classes = enumerate_ptrees(p, max_edges=5)
    by_edges = classes.counts_by_edges()
    assert [by_edges[e] for e in range(1, 6)] == [1, 1, 2, 5, 14]


def test_binary_op_complete_tree_counts():
    # closed terms of W = 1 + W^2: Catalan numbers by count of binary nodes
    w = binary_op_polyend()
    classes = enumerate_ptrees(w, max_edges=7)
    by_nodes = {}
    for pt in classes.classes:
        if pt.tree.leaves:
            continue
        n = sum(1 for b in pt.tree.nodes if pt.decoration.a1(b) == "m")
        by_nodes[n] = by_nodes.get(n, 0) + 1
    assert by_nodes == {0: 1, 1: 1, 2: 2, 3: 5}


def test_canonical_form_distinguishes_decorations():
    w = binary_op_polyend()
    two_node = [
        pt
        for pt in enumerate_ptrees(w, max_nodes=2).classes
        if sum(1 for b in pt.tree.nodes if pt.decoration.a1(b) == "m") == 2
    ]
    assert len(two_node) == 2
    a, b = two_node
    assert ptree_canonical_form(a) != ptree_canonical_form(b)
    assert not ptrees_isomorphic(a, b)


def test_graft_ptree_respects_colours():
    red_blue = FinSet(("red", "blue"))
    ident = identity_endofunctor(red_blue)
    red = trivial_ptree(ident, "red")
    blue = trivial_ptree(ident, "blue")
    grafted = graft_ptree(red, red, red.tree.root)
    assert grafted.edge_count() == 1
    with pytest.raises(ColourMismatch):
        graft_ptree(blue, red, red.tree.root)


def test_enumerate_needs_a_bound():
    with pytest.raises((ValueError, BoundExceeded)):
        enumerate_ptrees(M3)


def test_all_generated_ptrees_are_rigid():
    for pt in enumerate_ptrees(M3, max_edges=4).classes:
        assert is_rigid(pt)
        assert len(automorphisms_over_base(pt)) == 1


def test_undecorated_classes_match_oracle():
    counts = {}
    for t in undecorated_tree_classes(5):
        counts[len(t.edges)] = counts.get(len(t.edges), 0) + 1
    assert [counts[e] for e in range(1, 6)] == oracles.unordered_tree_counts(5)
