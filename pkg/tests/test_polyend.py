import pytest

from polytree import (
    FinMap,
    FinSet,
    MiddleNotCartesian,
    are_isomorphic_polyends,
    associator,
    compose,
    compose_polymaps,
    evaluate,
    free_monoid_truncated,
    identity_endofunctor,
    left_unitor,
    right_unitor,
    validate_map,
)
from polytree.polyend import canonical_colimit_check

from util import binary_op_polyend, polyend_from_table


def test_identity_endofunctor_evaluates_to_identity():
    colours = FinSet(("c0", "c1"))
    ident = identity_endofunctor(colours)
    x = FinSet(("x0", "x1", "x2"))
    over = FinMap.make(x, colours, lambda v: "c0" if v == "x0" else "c1")
    value, value_over = evaluate(ident, x, over)
    assert len(value) == len(x)


def test_free_monoid_truncated_shape():
    m = free_monoid_truncated(3)
    assert len(m.p0) == 1
    assert len(m.p1) == 4
    assert len(m.p2) == 0 + 1 + 2 + 3
    assert m.arity_bound == 3


def test_evaluate_counts_tuples():
    m = free_monoid_truncated(2)
    x = FinSet(("x", "y"))
    over = FinMap.make(x, m.p0, lambda _: tuple(m.p0)[0])
    value, _ = evaluate(m, x, over)
    # one empty tuple, two singletons, four pairs
    assert len(value) == 1 + 2 + 4


def test_compose_sizes_match_polynomial_substitution():
    m = free_monoid_truncated(2)
    mm = compose(m, m)
    # nodes: arity-i outer with an inner node per input: 1 + 3 + 9
    assert len(mm.p1) == 13


def test_validate_map_rejects_non_cartesian_middle():
    p = binary_op_polyend()
    q = polyend_from_table(["c"], {"m": (("c",), "c"), "u": ((), "c")})
    with pytest.raises(MiddleNotCartesian):
        validate_map(
            p,
            q,
            FinMap.identity(p.p0),
            FinMap.make(p.p1, q.p1, lambda b: b),
            FinMap.make(p.p2, q.p2, lambda e: ("m", 0)),
        )


def test_unitors_and_associator_are_isomorphisms():
    p = binary_op_polyend()
    lu = left_unitor(p)
    ru = right_unitor(p)
    assert lu.a1.is_bijective() and lu.a2.is_bijective()
    assert ru.a1.is_bijective() and ru.a2.is_bijective()
    a = associator(p, p, p)
    assert a.a1.is_bijective() and a.a2.is_bijective()


def test_compose_polymaps_horizontal():
    p = binary_op_polyend()
    ident_map = validate_map(
        p, p, FinMap.identity(p.p0), FinMap.identity(p.p1), FinMap.identity(p.p2)
    )
    both = compose_polymaps(ident_map, ident_map)
    assert both.source.p1 == compose(p, p).p1


def test_isomorphic_after_relabelling():
    p = binary_op_polyend()
    q = polyend_from_table(["d"], {"mm": (("d", "d"), "d"), "uu": ((), "d")})
    assert are_isomorphic_polyends(p, q)
    r = polyend_from_table(["d"], {"mm": (("d", "d"), "d")})
    assert not are_isomorphic_polyends(p, r)


def test_canonical_colimit_check():
    assert canonical_colimit_check(binary_op_polyend())
    assert canonical_colimit_check(free_monoid_truncated(2))
