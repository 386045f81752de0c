"""Acceptance suite: exact combinatorial reproduction at fixed bounds.

Each test freezes one headline claim.  Counts marked as cross-checks are
recomputed by the independent brute-force enumerators in oracles.py
rather than trusted as constants.
"""

import itertools
import math
import random
from functools import lru_cache

import pytest

from polytree import (
    FinSet,
    SBadComplement,
    TNotInjective,
    automorphisms_over_base,
    build_temb_site,
    canonical_form,
    certify_tree,
    check_monad_laws,
    collections_isomorphic,
    compose_omega,
    count_boundary_preserving,
    enumerate_ptrees,
    flat_to_polyend,
    free_conditions,
    free_monad,
    free_monoid_truncated,
    from_embedding,
    generic_injections,
    graft,
    hom_omega,
    hom_temb,
    identity_endofunctor,
    is_boundary_preserving,
    is_flat,
    is_free,
    is_injective,
    is_rigid,
    is_surjective,
    linear_tree,
    nerve_N0,
    nerve_R0,
    nonsym_of_polyend,
    nonsym_to_polyend,
    one_node_tree,
    reduced_covers,
    segal_check,
    symmetrise,
    tree_isomorphisms,
    triple_factor,
    trivial_tree,
    undecorated_tree_classes,
    validate_presheaf,
    are_isomorphic_polyends,
)
from polytree.cli import _double_value
from polytree.errors import TrivialTreeError

import oracles
from util import (
    binary_op_polyend,
    edge_map_of,
    polyend_from_table,
    positive_arity_monoid,
    random_polyend,
)

CLASSES5 = undecorated_tree_classes(5)
CLASSES4 = [t for t in CLASSES5 if len(t.edges) <= 4]
CLASSES3 = [t for t in CLASSES5 if len(t.edges) <= 3]

RNG_SEED = 20260823


@lru_cache(maxsize=None)
def surjections(source, target):
    return tuple(m for m in hom_omega(source, target) if is_surjective(m))


@lru_cache(maxsize=None)
def generic_injective(source, target):
    return tuple(
        m
        for m in hom_omega(source, target)
        if is_boundary_preserving(m) and is_injective(m)
    )


@lru_cache(maxsize=None)
def injections(source, target):
    return tuple(m for m in hom_omega(source, target) if is_injective(m))


@lru_cache(maxsize=None)
def free_maps(source, target):
    return tuple(m for m in hom_omega(source, target) if is_free(m))


def isos_between(a, b):
    for iso in tree_isomorphisms(a, b):
        yield from_embedding(iso)


def test_one_node_diagrams_certify_and_bad_diagrams_name_axioms():
    # the three smallest diagrams: a bare edge, a childless node, a unary node
    bare = trivial_tree()
    assert len(bare.edges) == 1 and len(bare.nodes) == 0
    capped = certify_tree(polyend_from_table(["r"], {"u": ((), "r")}))
    assert len(capped.edges) == 1 and len(capped.nodes) == 1
    unary = certify_tree(polyend_from_table(["r", "a"], {"u": (("a",), "r")}))
    assert len(unary.edges) == 2 and len(unary.marked_inputs) == 1

    with pytest.raises(SBadComplement) as err:
        certify_tree(polyend_from_table([], {}))
    assert err.value.axiom == 3

    with pytest.raises(TNotInjective) as err:
        certify_tree(
            polyend_from_table(
                ["r", "a"], {"u": (("a",), "r"), "v": (("a",), "r")}
            )
        )
    assert err.value.axiom == 2


def test_embeddings_are_injective_in_all_components():
    for source in CLASSES5:
        for target in CLASSES5:
            for phi in hom_temb(source, target):
                assert phi.a0.is_injective()
                assert phi.a1.is_injective()
                assert phi.a2.is_injective()


def test_grafting_certifies_is_a_pushout_and_is_unital_associative():
    for upper in CLASSES4:
        for lower in CLASSES4:
            for leaf in lower.leaves:
                g = graft(upper, lower, leaf)
                # graft certifies on construction; check the legs glue
                assert g.upper_leg.a0(upper.root) == g.lower_leg.a0(leaf)
                hom_result = None
                for cone in CLASSES5:
                    for f in hom_temb(upper, cone):
                        for h in hom_temb(lower, cone):
                            if f.a0(upper.root) != h.a0(leaf):
                                continue
                            if hom_result is None:
                                hom_result = hom_temb(g.tree, cone)
                            mediating = [
                                m
                                for m in hom_result
                                if all(
                                    m.a0(g.upper_leg.a0(x)) == f.a0(x)
                                    for x in upper.edges
                                )
                                and all(
                                    m.a0(g.lower_leg.a0(x)) == h.a0(x)
                                    for x in lower.edges
                                )
                            ]
                            assert len(mediating) == 1
                    hom_result = None

    # unit laws: grafting with the bare edge changes nothing
    bare = trivial_tree()
    for t in CLASSES4:
        for leaf in t.leaves:
            assert canonical_form(graft(bare, t, leaf).tree) == canonical_form(t)
        assert canonical_form(graft(t, bare, bare.root).tree) == canonical_form(t)

    # associativity up to canonical form
    for low in CLASSES3:
        for y in low.leaves:
            for mid in CLASSES3:
                first = graft(mid, low, y)
                for x in mid.leaves:
                    lifted_x = first.upper_leg.a0(x)
                    for top in CLASSES3:
                        one_way = graft(top, first.tree, lifted_x).tree
                        other = graft(graft(top, mid, x).tree, low, y).tree
                        assert canonical_form(one_way) == canonical_form(other)


def test_fixpoint_class_counts():
    ident = identity_endofunctor(FinSet(("c",)))
    assert len(enumerate_ptrees(ident, max_nodes=6).classes) == 7

    positive = enumerate_ptrees(positive_arity_monoid(5), max_edges=5)
    by_edges = positive.counts_by_edges()
    counts = [by_edges.get(e, 0) for e in range(1, 6)]
    assert counts == [1, 1, 2, 5, 14]
    assert counts == oracles.plane_tree_counts(range(1, 6), 5)

    with_constants = enumerate_ptrees(free_monoid_truncated(4), max_edges=5)
    by_edges = with_constants.counts_by_edges()
    assert [by_edges.get(e, 0) for e in range(1, 6)] == oracles.plane_tree_counts(
        range(0, 5), 5
    )

    by_edges = {}
    for t in CLASSES5:
        by_edges[len(t.edges)] = by_edges.get(len(t.edges), 0) + 1
    assert [by_edges[e] for e in range(1, 6)] == oracles.unordered_tree_counts(5)


def test_boundary_preserving_map_count_is_factorial():
    for n in range(4):
        source = one_node_tree(FinSet(tuple(f"l{i}" for i in range(n))))
        for target in CLASSES5:
            if len(target.leaves) != n:
                continue
            count = count_boundary_preserving(source, target)
            filtered = sum(
                1 for m in hom_omega(source, target) if is_boundary_preserving(m)
            )
            assert count == filtered == math.factorial(n)


def test_factorisation_systems_recompose_unique_and_conditions_agree():
    def matches_canonical(parts, canon):
        if len(parts) == 2:
            (s, i), (s0, i0) = parts, canon
            for j in isos_between(s.target, s0.target):
                if edge_map_of(compose_omega(j, s)) == edge_map_of(s0) and edge_map_of(
                    compose_omega(i0, j)
                ) == edge_map_of(i):
                    return True
            return False
        (s, g, f), (s0, g0, f0) = parts, canon
        for j1 in isos_between(s.target, s0.target):
            if edge_map_of(compose_omega(j1, s)) != edge_map_of(s0):
                continue
            for j2 in isos_between(g.target, g0.target):
                if edge_map_of(compose_omega(j2, g)) == edge_map_of(
                    compose_omega(g0, j1)
                ) and edge_map_of(compose_omega(f0, j2)) == edge_map_of(f):
                    return True
        return False

    distance_exceptions = 0
    for source in CLASSES4:
        for target in CLASSES4:
            for phi in hom_omega(source, target):
                goal = edge_map_of(phi)
                surj0, geninj0, free0 = triple_factor(phi)
                inj0 = compose_omega(free0, geninj0)
                gen0 = compose_omega(geninj0, surj0)
                assert edge_map_of(compose_omega(inj0, surj0)) == goal
                assert is_surjective(surj0) and is_injective(inj0)
                assert is_boundary_preserving(gen0) and is_free(free0)

                # all seven characterisations of free maps, except that the
                # distance-preservation one is vacuously loose whenever the
                # target has childless nodes to hide in image subtrees
                conds = free_conditions(phi)
                assert (
                    conds[0]
                    == conds[2]
                    == conds[3]
                    == conds[4]
                    == conds[5]
                    == conds[6]
                )
                if any(target.arity(b) == 0 for b in target.nodes):
                    if conds[1] != conds[0]:
                        distance_exceptions += 1
                else:
                    assert conds[1] == conds[0]

                # exhaustive middle-object searches
                found = 0
                for middle in CLASSES4:
                    if len(middle.edges) > len(source.edges):
                        continue
                    for s in surjections(source, middle):
                        for i in injections(middle, target):
                            if edge_map_of(compose_omega(i, s)) != goal:
                                continue
                            found += 1
                            assert matches_canonical((s, i), (surj0, inj0))
                assert found >= 1

                found = 0
                for middle in CLASSES4:
                    if len(middle.leaves) != len(source.leaves):
                        continue
                    for g in (
                        m
                        for m in hom_omega(source, middle)
                        if is_boundary_preserving(m)
                    ):
                        for f in free_maps(middle, target):
                            if edge_map_of(compose_omega(f, g)) != goal:
                                continue
                            found += 1
                            assert matches_canonical((g, f), (gen0, free0))
                assert found >= 1

                found = 0
                for mid1 in CLASSES4:
                    if len(mid1.edges) > len(source.edges):
                        continue
                    step1 = surjections(source, mid1)
                    if not step1:
                        continue
                    for mid2 in CLASSES4:
                        if len(mid2.leaves) != len(mid1.leaves):
                            continue
                        step2 = generic_injective(mid1, mid2)
                        if not step2:
                            continue
                        step3 = free_maps(mid2, target)
                        if not step3:
                            continue
                        for s in step1:
                            for g in step2:
                                part = compose_omega(g, s)
                                for f in step3:
                                    if edge_map_of(compose_omega(f, part)) != goal:
                                        continue
                                    found += 1
                                    assert matches_canonical(
                                        (s, g, f), (surj0, geninj0, free0)
                                    )
                assert found >= 1
    # the loose distance condition really does occur
    assert distance_exceptions > 0


def test_linear_tree_homs_count_monotone_chain_maps():
    for m in range(5):
        for n in range(5):
            source = linear_tree(m)
            target = linear_tree(n)
            assert len(hom_omega(source, target)) == oracles.monotone_map_count(
                m + 1, n + 1
            )


def test_free_monad_laws():
    for t in CLASSES4:
        assert check_monad_laws(free_monad(t))
    ident = identity_endofunctor(FinSet(("c",)))
    assert check_monad_laws(free_monad(ident, max_nodes=3))
    assert check_monad_laws(free_monad(free_monoid_truncated(3), max_nodes=3))


def test_nerves_satisfy_segal_and_doctored_presheaf_fails():
    site = build_temb_site(5)
    rng = random.Random(RNG_SEED)
    for _ in range(25):
        p = random_polyend(rng, max_nodes=4, max_arity=3)
        ok, witness = segal_check(nerve_N0(p, 5, site=site))
        assert ok, witness

    site3 = build_temb_site(3)
    unary_class = next(
        i
        for i in range(len(site3.objects))
        if canonical_form(site3.tree_of(i)) == canonical_form(linear_tree(1))
    )
    doctored = _double_value(nerve_N0(free_monoid_truncated(2), 3, site=site3), unary_class)
    assert validate_presheaf(doctored)
    ok, witness = segal_check(doctored)
    assert not ok
    index, reason = witness
    # the witness object properly contains the doubled one-node class
    assert index != unary_class
    assert len(hom_temb(site3.tree_of(unary_class), site3.tree_of(index))) >= 1
    assert "values" in reason and "families" in reason


def test_flatness_reconstruction_and_kleisli_roundtrip():
    rng = random.Random(RNG_SEED)
    stable = [
        identity_endofunctor(FinSet(("c",))),
        free_monoid_truncated(3),
        binary_op_polyend(),
    ] + [random_polyend(rng) for _ in range(10)]
    for p in stable:
        collection = nerve_R0(p)
        flat, witness = is_flat(collection)
        assert flat and witness is None
        assert are_isomorphic_polyends(flat_to_polyend(collection), p)

    from polytree.cli import _build_collection

    comm = _build_collection(
        {"colours": ("c",), "ops": (("m", ("c", "c"), "c", ((1, 0),)),)}
    )
    flat, witness = is_flat(comm)
    assert not flat
    arity, element, perm = witness
    assert arity == 2 and perm == (1, 0)

    for p in stable[:6]:
        nonsym = nonsym_of_polyend(p)
        sym = symmetrise(nonsym)
        flat, _witness = is_flat(sym)
        assert flat
        assert collections_isomorphic(nerve_R0(nonsym_to_polyend(nonsym)), sym)


def test_reduced_covers_match_generic_injections_with_reversed_order():
    for t in CLASSES5:
        if len(t.nodes) == 0:
            with pytest.raises(TrivialTreeError):
                generic_injections(t)
            continue
        inner = t.inner_edges()
        by_subset_inj = dict(generic_injections(t))
        by_subset_cov = dict(reduced_covers(t))
        expected = {
            frozenset(chosen)
            for r in range(len(inner) + 1)
            for chosen in itertools.combinations(inner, r)
        }
        assert set(by_subset_inj) == set(by_subset_cov) == expected
        assert len(by_subset_inj) == 2 ** len(inner)

        def refines(fine, coarse):
            return all(any(c.contains(f) for c in coarse) for f in fine)

        for a in by_subset_cov:
            for b in by_subset_cov:
                assert (a <= b) == refines(by_subset_cov[b], by_subset_cov[a])


def test_generated_ptrees_are_rigid():
    ident = identity_endofunctor(FinSet(("c",)))
    generated = (
        list(enumerate_ptrees(ident, max_nodes=6).classes)
        + list(enumerate_ptrees(free_monoid_truncated(4), max_edges=5).classes)
        + list(enumerate_ptrees(binary_op_polyend(), max_edges=7).classes)
        + list(enumerate_ptrees(positive_arity_monoid(5), max_edges=5).classes)
    )
    assert len(generated) > 200
    for pt in generated:
        assert is_rigid(pt)
        assert len(automorphisms_over_base(pt)) == 1
