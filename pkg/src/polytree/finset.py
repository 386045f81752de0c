"""Labeled finite sets and total maps, plus the handful of categorical
constructions the rest of the package is built from: binary sums, pullbacks,
pushouts over a singleton, and cartesian-square testing.

Labels are opaque hashable atoms (strings, ints, or nested tuples thereof).
Constructions produce structured labels with a fixed, documented scheme:

* ``sum_``      tags the two copies as ``("L", x)`` and ``("R", x)``
* ``pullback``  uses the pair ``(x, y)`` itself
* ``pushout_over_singleton`` uses ``("G", a, b)`` for the glued class and
  ``("L", x)`` / ``("R", y)`` for the untouched elements

so that equal inputs always give identical outputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping

from .errors import NonCommuting

Label = Any


def label_key(label: Label):
    """Total order on heterogeneous labels, used for canonical sorting."""
    if isinstance(label, tuple):
        return (2, tuple(label_key(part) for part in label))
    if isinstance(label, str):
        return (1, label)
    return (0, repr(label))


@dataclass(frozen=True)
class FinSet:
    """An ordered finite set of distinct labels; iteration order is stored order."""

    elements: tuple

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise ValueError(f"duplicate labels in {self.elements!r}")

    @staticmethod
    def of(elements: Iterable[Label]) -> "FinSet":
        return FinSet(tuple(elements))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, label):
        return label in self.elements

    def index(self, label) -> int:
        return self.elements.index(label)

    def as_set(self) -> frozenset:
        return frozenset(self.elements)


EMPTY = FinSet(())


@dataclass(frozen=True)
class FinMap:
    """A total map between finite sets, stored as pairs in source order."""

    source: FinSet
    target: FinSet
    pairs: tuple

    def __post_init__(self):
        mapping = dict(self.pairs)
        if len(mapping) != len(self.source):
            raise ValueError("assignment is not total on the source")
        for x in self.source:
            if x not in mapping:
                raise ValueError(f"no image for {x!r}")
            if mapping[x] not in self.target:
                raise ValueError(f"image {mapping[x]!r} of {x!r} not in target")
        object.__setattr__(self, "_mapping", mapping)

    @staticmethod
    def make(source: FinSet, target: FinSet, assignment) -> "FinMap":
        """Build from a dict or a callable, pairing in source order."""
        if isinstance(assignment, Mapping):
            fn: Callable = assignment.__getitem__
        else:
            fn = assignment
        return FinMap(source, target, tuple((x, fn(x)) for x in source))

    @staticmethod
    def identity(a: FinSet) -> "FinMap":
        return FinMap(a, a, tuple((x, x) for x in a))

    def __call__(self, x):
        return self._mapping[x]

    def then(self, g: "FinMap") -> "FinMap":
        """Post-compose: (self.then(g))(x) = g(self(x))."""
        if g.source != self.target:
            raise ValueError("composition mismatch")
        return FinMap(self.source, g.target, tuple((x, g(self(x))) for x in self.source))

    def fibre(self, y) -> tuple:
        """Preimage of y, in source order."""
        return tuple(x for x in self.source if self(x) == y)

    def image(self) -> frozenset:
        return frozenset(self(x) for x in self.source)

    def is_injective(self) -> bool:
        return len(self.image()) == len(self.source)

    def is_surjective(self) -> bool:
        return self.image() == self.target.as_set()

    def is_bijective(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def inverse(self) -> "FinMap":
        if not self.is_bijective():
            raise ValueError("not a bijection")
        return FinMap(self.target, self.source, tuple((self(x), x) for x in self.source))

    def restrict(self, sub_source: FinSet) -> "FinMap":
        return FinMap.make(sub_source, self.target, self)


def sum_(a: FinSet, b: FinSet):
    """Disjoint union with injections; copies tagged ("L", x) and ("R", x)."""
    elements = tuple(("L", x) for x in a) + tuple(("R", x) for x in b)
    total = FinSet(elements)
    inl = FinMap(a, total, tuple((x, ("L", x)) for x in a))
    inr = FinMap(b, total, tuple((x, ("R", x)) for x in b))
    return total, inl, inr


def pullback(f: FinMap, g: FinMap):
    """Pullback of f and g over their shared target, with both projections.

    Elements are the pairs (x, y) with f(x) = g(y), ordered by the source
    orders of f then g.
    """
    if f.target != g.target:
        raise ValueError("pullback requires a shared target")
    elements = tuple((x, y) for x in f.source for y in g.source if f(x) == g(y))
    total = FinSet(elements)
    pr1 = FinMap(total, f.source, tuple(((x, y), x) for (x, y) in elements))
    pr2 = FinMap(total, g.source, tuple(((x, y), y) for (x, y) in elements))
    return total, pr1, pr2


def is_cartesian(top: FinMap, left: FinMap, right: FinMap, bottom: FinMap) -> bool:
    """Whether the commuting square

        A --top--> B
        |left      |right
        C --bot--> D

    is a pullback.  Raises NonCommuting if right∘top != bottom∘left.
    """
    if top.source != left.source or right.target != bottom.target:
        raise ValueError("square maps do not fit together")
    if top.target != right.source or left.target != bottom.source:
        raise ValueError("square maps do not fit together")
    for x in top.source:
        if right(top(x)) != bottom(left(x)):
            raise NonCommuting(f"square does not commute at {x!r}")
    _, pr1, pr2 = pullback(right, bottom)
    seen = set()
    for x in top.source:
        pair = (top(x), left(x))
        if pair in seen:
            return False
        seen.add(pair)
    return len(seen) == len(pr1.source)


def pushout_over_singleton(f: FinMap, g: FinMap):
    """Pushout of A <- 1 -> B, identifying the two marked elements.

    The glued class is labelled ("G", mark_a, mark_b); the other elements
    keep their labels under "L"/"R" tags.  Returns (set, leg_a, leg_b).
    """
    if len(f.source) != 1 or len(g.source) != 1:
        raise ValueError("pushout_over_singleton requires singleton source")
    if f.source != g.source:
        raise ValueError("the two legs must share their singleton source")
    (point,) = f.source
    mark_a, mark_b = f(point), g(point)
    glue = ("G", mark_a, mark_b)
    elements = (glue,)
    elements += tuple(("L", x) for x in f.target if x != mark_a)
    elements += tuple(("R", y) for y in g.target if y != mark_b)
    total = FinSet(elements)
    leg_a = FinMap(
        f.target,
        total,
        tuple((x, glue if x == mark_a else ("L", x)) for x in f.target),
    )
    leg_b = FinMap(
        g.target,
        total,
        tuple((y, glue if y == mark_b else ("R", y)) for y in g.target),
    )
    return total, leg_a, leg_b


def all_maps(a: FinSet, b: FinSet):
    """All total maps a -> b, in lexicographic order of images."""
    if len(a) == 0:
        yield FinMap(a, b, ())
        return
    for images in itertools.product(tuple(b), repeat=len(a)):
        yield FinMap(a, b, tuple(zip(tuple(a), images)))


def _test_sets(cap: int):
    for size in range(cap + 1):
        yield FinSet(tuple(("z", i) for i in range(size)))


def pullback_universal_ok(f: FinMap, g: FinMap, size_cap: int = 3) -> bool:
    """Exhaustively check the universal property against cones from small sets."""
    pb, pr1, pr2 = pullback(f, g)
    for z in _test_sets(size_cap):
        for u in all_maps(z, f.source):
            for v in all_maps(z, g.source):
                if any(f(u(x)) != g(v(x)) for x in z):
                    continue
                mediating = [
                    m
                    for m in all_maps(z, pb)
                    if m.then(pr1) == u and m.then(pr2) == v
                ]
                if len(mediating) != 1:
                    return False
    return True


def pushout_universal_ok(f: FinMap, g: FinMap, size_cap: int = 3) -> bool:
    """Exhaustively check the pushout universal property against small cocones."""
    po, leg_a, leg_b = pushout_over_singleton(f, g)
    (point,) = f.source
    for z in _test_sets(size_cap):
        for u in all_maps(f.target, z):
            for v in all_maps(g.target, z):
                if u(f(point)) != v(g(point)):
                    continue
                mediating = [
                    m
                    for m in all_maps(po, z)
                    if leg_a.then(m) == u and leg_b.then(m) == v
                ]
                if len(mediating) != 1:
                    return False
    return True
