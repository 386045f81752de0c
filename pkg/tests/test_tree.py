import random

import pytest

from polytree import (
    DistanceUndefined,
    FinSet,
    NotALeaf,
    SBadComplement,
    SigmaDiverges,
    TNotInjective,
    canonical_form,
    canonical_relabel,
    certify_tree,
    enumerate_subtrees,
    graft,
    hom_temb,
    ideal_subtree,
    linear_tree,
    maximal_subtree,
    one_node_tree,
    prune,
    recursive_decompose,
    regraft,
    tree_isomorphisms,
    trivial_tree,
    undecorated_tree_classes,
)

import oracles
from util import polyend_from_table


def tree_from_table(colours, nodes):
    return certify_tree(polyend_from_table(colours, nodes))


CORK = tree_from_table(
    ["r", "a", "b", "c"], {"u": (("a", "b"), "r"), "v": (("c",), "a")}
)


def test_certify_small_trees():
    assert trivial_tree().is_trivial()
    t = one_node_tree(FinSet(("x", "y")))
    assert len(t.nodes) == 1 and set(t.leaves) == {"x", "y"}
    assert CORK.root == "r"
    assert set(CORK.leaves) == {"b", "c"}


def test_empty_diagram_rejected():
    empty = polyend_from_table([], {})
    with pytest.raises(SBadComplement) as err:
        certify_tree(empty)
    assert err.value.axiom == 3


def test_t_non_injective_rejected():
    bad = polyend_from_table(["r", "a"], {"u": (("a",), "r"), "v": (("a",), "r")})
    with pytest.raises(TNotInjective) as err:
        certify_tree(bad)
    assert err.value.axiom == 2


def test_sigma_cycle_rejected():
    # a loop: single edge consumed and produced by the same node
    bad = polyend_from_table(["x", "r"], {"u": (("x",), "x")})
    with pytest.raises((SigmaDiverges, SBadComplement)) as err:
        certify_tree(bad)
    assert err.value.axiom in (3, 4)


def test_tree_order():
    assert CORK.leq("c", "r")
    assert CORK.distance("c", "r") == 2
    assert CORK.join("b", "c") == "r"
    assert CORK.incomparable("b", "c")
    with pytest.raises(DistanceUndefined):
        CORK.distance("b", "c")


def test_subtree_enumeration_matches_oracle():
    for t in undecorated_tree_classes(4):
        assert len(enumerate_subtrees(t)) == oracles.subtree_count(t)


def test_prune_and_ideal():
    assert sorted(ideal_subtree(CORK, "a").edge_set) == ["a", "c"]
    pruned = prune(CORK, "a")
    assert sorted(pruned.edge_set) == ["a", "b", "r"]
    assert "v" not in pruned.node_set


def test_maximal_subtree_is_whole_tree():
    top = maximal_subtree(CORK)
    assert top.edge_set == set(CORK.edges)
    assert top.node_set == set(CORK.nodes)


def test_graft_requires_a_leaf():
    with pytest.raises(NotALeaf):
        graft(CORK, CORK, "a")


def test_graft_legs_embed():
    g = graft(CORK, CORK, "c")
    assert len(g.tree.edges) == 7
    assert g.upper_leg.a0.is_injective()
    assert g.lower_leg.a0.is_injective()
    # legs agree on the glued edge
    assert g.upper_leg.a0(CORK.root) == g.lower_leg.a0("c")


def test_decompose_regraft_roundtrip():
    for t in undecorated_tree_classes(4):
        decomp = recursive_decompose(t)
        assert canonical_form(regraft(decomp)) == canonical_form(t)


def test_canonical_form_is_relabelling_invariant():
    rng = random.Random(7)
    classes = undecorated_tree_classes(4)
    for t in classes:
        relabelled = canonical_relabel(t)
        assert canonical_form(relabelled) == canonical_form(t)
    # distinct classes get distinct forms
    forms = {canonical_form(t) for t in classes}
    assert len(forms) == len(classes)


def test_leaf_and_nullary_cap_are_distinct_classes():
    bare = trivial_tree()
    capped = tree_from_table(["r"], {"u": ((), "r")})
    assert canonical_form(bare) != canonical_form(capped)


def test_isomorphisms_of_symmetric_tree():
    cherry = one_node_tree(FinSet(("x", "y")))
    autos = tree_isomorphisms(cherry, cherry)
    assert len(autos) == 2


def test_hom_temb_counts():
    line = linear_tree(2)
    assert len(hom_temb(trivial_tree(), line)) == 3
    assert len(hom_temb(linear_tree(1), line)) == 2
    assert len(hom_temb(line, linear_tree(1))) == 0
