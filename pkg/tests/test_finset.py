import pytest
from hypothesis import given, strategies as st

from polytree import (
    FinMap,
    FinSet,
    NonCommuting,
    all_maps,
    is_cartesian,
    pullback,
    pushout_over_singleton,
    sum_,
)
from polytree.finset import pullback_universal_ok, pushout_universal_ok


def small_set(prefix, n):
    return FinSet(tuple(f"{prefix}{i}" for i in range(n)))


def test_finset_rejects_duplicates():
    with pytest.raises(ValueError):
        FinSet(("a", "a"))


def test_finmap_basics():
    a, b = small_set("a", 3), small_set("b", 2)
    f = FinMap.make(a, b, lambda x: "b0" if x == "a0" else "b1")
    assert f("a0") == "b0"
    assert f.fibre("b1") == ("a1", "a2")
    assert f.image() == {"b0", "b1"}
    assert not f.is_injective()
    assert f.is_surjective()
    assert FinMap.identity(a).is_bijective()


def test_then_composes_in_diagram_order():
    a, b, c = small_set("a", 2), small_set("b", 2), small_set("c", 2)
    f = FinMap.make(a, b, lambda x: "b" + x[1])
    g = FinMap.make(b, c, lambda x: "c" + x[1])
    h = f.then(g)
    assert h("a1") == "c1"


@given(st.data())
def test_composition_is_associative(data):
    sizes = data.draw(st.tuples(*[st.integers(1, 3)] * 4))
    sets = [small_set(p, n) for p, n in zip("abcd", sizes)]
    maps = []
    for src, tgt in zip(sets, sets[1:]):
        table = {
            x: data.draw(st.sampled_from(tuple(tgt)), label=f"image of {x}")
            for x in src
        }
        maps.append(FinMap.make(src, tgt, table.__getitem__))
    f, g, h = maps
    assert f.then(g).then(h) == f.then(g.then(h))


def test_sum_injections_are_jointly_surjective():
    a, b = small_set("a", 2), small_set("b", 3)
    total, inl, inr = sum_(a, b)
    assert len(total) == 5
    assert inl.image() | inr.image() == total.as_set()


def test_pullback_square_is_cartesian_and_universal():
    a, b, c = small_set("a", 3), small_set("b", 2), small_set("c", 2)
    f = FinMap.make(a, c, lambda x: "c0" if x == "a0" else "c1")
    g = FinMap.make(b, c, lambda x: "c" + x[1])
    total, pr1, pr2 = pullback(f, g)
    assert is_cartesian(pr1, pr2, f, g)
    assert pullback_universal_ok(f, g)


def test_non_cartesian_square_detected():
    a = small_set("a", 2)
    one = FinSet(("x",))
    to_one = FinMap.make(a, one, lambda _: "x")
    # A -> 1 over 1 <- A is a pullback only if A x A == A
    assert not is_cartesian(FinMap.identity(a), FinMap.identity(a), to_one, to_one)


def test_is_cartesian_raises_on_non_commuting():
    a = small_set("a", 2)
    swap = FinMap.make(a, a, lambda x: "a1" if x == "a0" else "a0")
    ident = FinMap.identity(a)
    with pytest.raises(NonCommuting):
        is_cartesian(swap, ident, ident, ident)


def test_pushout_over_singleton_glues_one_point():
    a, b = small_set("a", 2), small_set("b", 2)
    point = FinSet(("p",))
    f = FinMap.make(point, a, lambda _: "a1")
    g = FinMap.make(point, b, lambda _: "b0")
    total, leg_a, leg_b = pushout_over_singleton(f, g)
    assert len(total) == 3
    assert leg_a("a1") == leg_b("b0")
    assert pushout_universal_ok(f, g)


def test_all_maps_counts():
    a, b = small_set("a", 2), small_set("b", 3)
    assert len(list(all_maps(a, b))) == 9
