import math

import pytest

from polytree import (
    FinSet,
    NotInnerEdge,
    TrivialTreeError,
    check_monad_laws,
    compose_omega,
    contract,
    count_boundary_preserving,
    factor_generic_free,
    factor_surj_inj,
    free_conditions,
    free_monad,
    from_embedding,
    generic_injections,
    hom_omega,
    hom_temb,
    identity_omega,
    is_boundary_preserving,
    is_free,
    is_injective,
    is_surjective,
    linear_tree,
    omega_morphism,
    one_node_tree,
    reduced_covers,
    triple_factor,
    trivial_subtree,
    trivial_tree,
    undecorated_tree_classes,
)
from polytree.omega import carrier_maps, factor_element, materialize

import oracles
from util import edge_map_of


L1, L2, L3 = linear_tree(1), linear_tree(2), linear_tree(3)


def test_identity_and_composition():
    ident = identity_omega(L2)
    assert edge_map_of(compose_omega(ident, ident)) == edge_map_of(ident)


def test_hom_counts_on_linear_trees_match_monotone_maps():
    for m, t in [(L1, L2), (L2, L1), (L1, L3), (L3, L3)]:
        expected = oracles.monotone_map_count(
            len(m.nodes) + 1, len(t.nodes) + 1
        )
        assert len(hom_omega(m, t)) == expected


def test_unary_deletion_is_surjective_not_injective():
    deletion = omega_morphism(
        L1,
        trivial_tree("e0"),
        {edge: "e0" for edge in L1.edges},
        {b: trivial_subtree(trivial_tree("e0"), "e0") for b in L1.nodes},
    )
    assert is_surjective(deletion)
    assert not is_injective(deletion)
    assert is_boundary_preserving(deletion)
    assert not is_free(deletion)


def test_embeddings_are_free():
    for phi in hom_temb(L1, L3):
        lifted = from_embedding(phi)
        assert is_free(lifted)
        conds = free_conditions(lifted)
        assert all(conds)


def test_factorisations_recompose():
    for phi in hom_omega(L3, L2):
        surj, inj = factor_surj_inj(phi)
        assert is_surjective(surj) and is_injective(inj)
        assert edge_map_of(compose_omega(inj, surj)) == edge_map_of(phi)
        gen, free = factor_generic_free(phi)
        assert is_boundary_preserving(gen) and is_free(free)
        assert edge_map_of(compose_omega(free, gen)) == edge_map_of(phi)
        s, g, f = triple_factor(phi)
        assert edge_map_of(compose_omega(f, compose_omega(g, s))) == edge_map_of(phi)


def test_n_factorial_boundary_preserving():
    for n in range(4):
        source = one_node_tree(FinSet(tuple(f"l{i}" for i in range(n))))
        for target in undecorated_tree_classes(4):
            if len(target.leaves) != n:
                continue
            assert count_boundary_preserving(source, target) == math.factorial(n)


def test_contract_inner_edge():
    inner = L2.inner_edges()
    assert len(inner) == 1
    smaller, phi = contract(L2, inner[0])
    assert len(smaller.nodes) == 1
    assert is_boundary_preserving(phi) and is_injective(phi)
    with pytest.raises(NotInnerEdge):
        contract(L2, L2.root)


def test_generic_injections_and_covers_count():
    for t in [L1, L2, L3]:
        n_inner = len(t.inner_edges())
        assert len(generic_injections(t)) == 2**n_inner
        assert len(reduced_covers(t)) == 2**n_inner
    with pytest.raises(TrivialTreeError):
        generic_injections(trivial_tree())


def test_tree_free_monad_laws():
    for t in [trivial_tree(), L2]:
        fm = free_monad(t)
        assert check_monad_laws(fm)
    # carrier nodes of the free monad on a tree are its subtrees
    fm = free_monad(L2)
    assert len(fm.carrier.p1) == 6


def test_free_monad_on_nullary_capped_tree():
    # a tree containing a nullary node once broke carrier labelling
    for t in undecorated_tree_classes(2):
        assert check_monad_laws(free_monad(t))


def test_carrier_maps_realise_tree_morphisms():
    maps = carrier_maps(L1, L2)
    assert len(maps) == len(hom_omega(L1, L2))
    materialised = {
        tuple(sorted((x, m.a0(x)) for x in L1.edges))
        for m in (materialize(phi) for phi in hom_omega(L1, L2))
    }
    direct = {
        tuple(sorted((x, m.a0(x)) for x in L1.edges)) for m in maps
    }
    assert materialised == direct


def test_factor_element():
    from polytree import FinMap, free_monoid_truncated, validate_map

    fm = free_monad(free_monoid_truncated(2), max_edges=3)
    carrier = fm.carrier
    for label, pt in fm.reps:
        source = one_node_tree(FinSet(tuple(pt.tree.leaves)))
        phi = validate_map(
            source.underlying,
            carrier,
            FinMap.make(
                source.edges,
                carrier.p0,
                lambda x: pt.root_colour
                if x == source.root
                else pt.decoration.a0(x),
            ),
            FinMap.make(source.nodes, carrier.p1, lambda _b: label),
            FinMap.make(source.marked_inputs, carrier.p2, lambda m: (label, m[1])),
        )
        middle, gen, free_part = factor_element(fm, phi)
        assert middle is pt
        assert is_boundary_preserving(gen)
        assert free_part.a1(
            max(
                free_monad(pt.tree).carrier.p1,
                key=lambda l: (len(l[1]), len(l[2])),
            )
        ) == label
