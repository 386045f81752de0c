"""Polynomial endofunctors over finite sets, rooted trees, free monads,
and the associated presheaf/collection machinery, verified at desk scale.

Everything is a labeled finite set or a map between them.  A polynomial
endofunctor is a diagram  P0 <- P2 -> P1 -> P0;  a tree is such a diagram
satisfying four axioms.  On top of that the package builds subtree calculus,
grafting, decorated trees, the category of trees with free-monad morphisms,
factorisation systems, nerves and Segal/flatness checks.
"""

from .errors import (
    PolytreeError,
    NonCommuting,
    SquareNotCommuting,
    MiddleNotCartesian,
    ColourMismatch,
    BoundExceeded,
    TreeAxiomError,
    TNotInjective,
    SBadComplement,
    SigmaDiverges,
    NotALeaf,
    NotInnerEdge,
    TrivialTreeError,
    ArityUnsupported,
    NotFlat,
    DistanceUndefined,
    ParseError,
)
from .finset import (
    FinSet,
    FinMap,
    label_key,
    sum_,
    pullback,
    is_cartesian,
    pushout_over_singleton,
    all_maps,
)
from .polyend import (
    PolyEndo,
    PolyMap,
    SlicedObject,
    ElementsCategory,
    identity_endofunctor,
    free_monoid_truncated,
    validate_map,
    evaluate,
    compose,
    compose_polymaps,
    associator,
    left_unitor,
    right_unitor,
    elements_category,
    slice_to_presheaf,
    presheaf_to_slice,
    canonical_colimit_check,
    are_isomorphic_polyends,
)
from .tree import (
    Tree,
    Subtree,
    Grafted,
    certify_tree,
    trivial_tree,
    one_node_tree,
    linear_tree,
    trivial_subtree,
    subtree_from_nodes,
    maximal_subtree,
    enumerate_subtrees,
    enumerate_marked_subtrees,
    ideal_subtree,
    prune,
    graft,
    recursive_decompose,
    regraft,
    canonical_form,
    canonical_relabel,
    are_isomorphic,
    automorphisms,
    tree_isomorphisms,
    polymap_from_edge_map,
    factor_root_ideal,
    hom_temb,
)
from .ptree import (
    PTree,
    PTreeClassSet,
    ptree_canonical_form,
    ptrees_isomorphic,
    decorations,
    automorphisms_over_base,
    is_rigid,
    trivial_ptree,
    one_node_ptree,
    graft_ptree,
    build_ptree,
    enumerate_ptrees,
    undecorated_tree_classes,
)
from .omega import (
    FreeMonad,
    OmegaMorphism,
    omega_morphism,
    identity_omega,
    from_embedding,
    compose_omega,
    image_subtree,
    hom_omega,
    is_free,
    is_boundary_preserving,
    is_surjective,
    is_injective,
    free_conditions,
    factor_generic_free,
    factor_surj_inj,
    triple_factor,
    count_boundary_preserving,
    contract,
    generic_injections,
    reduced_covers,
    free_monad,
    check_monad_laws,
    materialize,
    factor_element,
)
from .presheaf import (
    FinitePresheaf,
    Collection,
    NonSymCollection,
    NerveVerdict,
    Site,
    build_temb_site,
    build_planar_site,
    nerve_N0,
    validate_presheaf,
    validate_collection,
    covering_families,
    is_cover,
    segal_check,
    restrict_to_elementary,
    sheaf_extend,
    planar_extend,
    planar_restrict,
    nerve_R0,
    nonsym_of_polyend,
    nonsym_to_polyend,
    symmetrise,
    is_flat,
    flat_to_polyend,
    collections_isomorphic,
    nerve_theorem_check,
)
from .cli import Document, parse, render, run

__all__ = [name for name in dir() if not name.startswith("_")]
