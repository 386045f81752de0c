"""Polynomial endofunctors P0 <- P2 -> P1 -> P0, their morphisms
(cartesian natural transformations), evaluation, composition, and the
bipartite elements category el(P).

Composite nodes are named by (b, f) pairs with f serialized in the stored
fibre order; every construction here is deterministic in the input label
order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import (
    ColourMismatch,
    MiddleNotCartesian,
    SquareNotCommuting,
)
from .finset import FinMap, FinSet, label_key


@dataclass(frozen=True)
class PolyEndo:
    """A diagram p0 <-s- p2 -p-> p1 -t-> p0 of finite sets.

    p0: edges/colours, p1: nodes/operations, p2: marked-input pairs.
    ``arity_bound`` is set only on truncations of an infinite endofunctor
    (see free_monoid_truncated); operations that would need arities beyond
    it refuse instead of silently returning partial answers.
    """

    p0: FinSet
    p1: FinSet
    p2: FinSet
    s: FinMap
    p: FinMap
    t: FinMap
    arity_bound: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.s.source != self.p2 or self.s.target != self.p0:
            raise ValueError("s must map p2 to p0")
        if self.p.source != self.p2 or self.p.target != self.p1:
            raise ValueError("p must map p2 to p1")
        if self.t.source != self.p1 or self.t.target != self.p0:
            raise ValueError("t must map p1 to p0")

    def fibre(self, b) -> tuple:
        """Marked-input pairs of node b, in stored order."""
        return self.p.fibre(b)

    def arity(self, b) -> int:
        return len(self.fibre(b))

    def max_arity(self) -> int:
        if self.arity_bound is not None:
            return self.arity_bound
        return max((self.arity(b) for b in self.p1), default=0)


@dataclass(frozen=True)
class PolyMap:
    """A validated morphism of polynomial endofunctors: three commuting
    squares with cartesian middle square.  Construct via validate_map."""

    source: PolyEndo
    target: PolyEndo
    a0: FinMap
    a1: FinMap
    a2: FinMap

    def then(self, other: "PolyMap") -> "PolyMap":
        if other.source != self.target:
            raise ValueError("composition mismatch")
        return PolyMap(
            self.source,
            other.target,
            self.a0.then(other.a0),
            self.a1.then(other.a1),
            self.a2.then(other.a2),
        )

    @staticmethod
    def identity(p: PolyEndo) -> "PolyMap":
        return PolyMap(
            p, p, FinMap.identity(p.p0), FinMap.identity(p.p1), FinMap.identity(p.p2)
        )


def validate_map(source: PolyEndo, target: PolyEndo, a0, a1, a2) -> PolyMap:
    """Certify (a0, a1, a2) as a morphism source -> target.

    Checks the three squares and, per node, that a2 restricts to a bijection
    of input fibres (the cartesian condition stated fibrewise).
    """
    if a0.source != source.p0 or a0.target != target.p0:
        raise ValueError("a0 endpoints wrong")
    if a1.source != source.p1 or a1.target != target.p1:
        raise ValueError("a1 endpoints wrong")
    if a2.source != source.p2 or a2.target != target.p2:
        raise ValueError("a2 endpoints wrong")
    for e in source.p2:
        if target.s(a2(e)) != a0(source.s(e)):
            raise SquareNotCommuting("s", e)
        if target.p(a2(e)) != a1(source.p(e)):
            raise SquareNotCommuting("p", e)
    for b in source.p1:
        if target.t(a1(b)) != a0(source.t(b)):
            raise SquareNotCommuting("t", b)
    for b in source.p1:
        images = [a2(e) for e in source.fibre(b)]
        if len(set(images)) != len(images) or set(images) != set(
            target.fibre(a1(b))
        ):
            raise MiddleNotCartesian(b)
    return PolyMap(source, target, a0, a1, a2)


def identity_endofunctor(colours: FinSet) -> PolyEndo:
    """The identity functor: I <- I -> I -> I with all maps the identity."""
    ident = FinMap.identity(colours)
    return PolyEndo(colours, colours, colours, ident, ident, ident)


def free_monoid_truncated(max_arity: int) -> PolyEndo:
    """The free-monoid endofunctor 1 <- N' -> N -> 1 truncated at max_arity.

    p1 = {0..max_arity}, p2 = {(i, n) | i < n <= max_arity}; the fibre over
    n has exactly n elements.  The result carries arity_bound = max_arity.
    """
    if max_arity < 0:
        raise ValueError("max_arity must be >= 0")
    point = FinSet(("*",))
    p1 = FinSet(tuple(range(max_arity + 1)))
    p2 = FinSet(tuple((i, n) for n in range(max_arity + 1) for i in range(n)))
    s = FinMap.make(p2, point, lambda e: "*")
    p = FinMap.make(p2, p1, lambda e: e[1])
    t = FinMap.make(p1, point, lambda b: "*")
    return PolyEndo(point, p1, p2, s, p, t, arity_bound=max_arity)


def evaluate(P: PolyEndo, X: FinSet, over: FinMap):
    """Evaluate P on a set X over the colours: sum over nodes b of the
    product over the fibre of b of the slices of X.

    Elements are (b, ((e1, x1), ..., (ek, xk))) with the fibre in stored
    order; the result is returned with its map to the colours (via t).
    """
    if over.source != X or over.target != P.p0:
        raise ValueError("X must come with a map to the colours of P")
    elements = []
    for b in P.p1:
        fib = P.fibre(b)
        slices = [tuple(x for x in X if over(x) == P.s(e)) for e in fib]
        for choice in itertools.product(*slices):
            elements.append((b, tuple(zip(fib, choice))))
    total = FinSet(tuple(elements))
    to_colours = FinMap.make(total, P.p0, lambda el: P.t(el[0]))
    return total, to_colours


def compose(P: PolyEndo, Q: PolyEndo) -> PolyEndo:
    """The composite endofunctor, with evaluate(compose(P,Q), X) naturally
    bijective to evaluate(P, evaluate(Q, X)).

    Nodes are pairs (b, f) with b a node of P and f assigning to each input
    e of b a node of Q with t(f(e)) = s(e); f is stored as a tuple in the
    fibre's stored order.  Marked inputs are ((b, f), e, e') with e' an
    input of f(e).
    """
    if P.p0 != Q.p0:
        raise ColourMismatch("compose requires a shared colour set")
    nodes = []
    inputs = []
    for b in P.p1:
        fib = P.fibre(b)
        options = [
            tuple(q for q in Q.p1 if Q.t(q) == P.s(e)) for e in fib
        ]
        for f in itertools.product(*options):
            node = (b, f)
            nodes.append(node)
            for e, q in zip(fib, f):
                for e2 in Q.fibre(q):
                    inputs.append((node, e, e2))
    p1 = FinSet(tuple(nodes))
    p2 = FinSet(tuple(inputs))
    s = FinMap.make(p2, P.p0, lambda m: Q.s(m[2]))
    p = FinMap.make(p2, p1, lambda m: m[0])
    t = FinMap.make(p1, P.p0, lambda n: P.t(n[0]))
    return PolyEndo(P.p0, p1, p2, s, p, t)


def composite_assignment(P: PolyEndo, Q: PolyEndo, node) -> dict:
    """The map input-of-b -> node-of-Q encoded by a composite node (b, f)."""
    b, f = node
    return dict(zip(P.fibre(b), f))


def compose_polymaps(u: PolyMap, v: PolyMap) -> PolyMap:
    """Horizontal composition: from u: P -> P' and v: Q -> Q' over the same
    colour map, the induced map compose(P, Q) -> compose(P', Q')."""
    if u.a0 != v.a0:
        raise ColourMismatch("horizontal composition needs equal colour maps")
    src = compose(u.source, v.source)
    tgt = compose(u.target, v.target)

    def on_node(node):
        b, f = node
        assignment = dict(zip(u.source.fibre(b), f))
        b2 = u.a1(b)
        inv = {u.a2(e): e for e in u.source.fibre(b)}
        f2 = tuple(v.a1(assignment[inv[e2]]) for e2 in u.target.fibre(b2))
        return (b2, f2)

    a1 = FinMap.make(src.p1, tgt.p1, on_node)
    a2 = FinMap.make(
        src.p2, tgt.p2, lambda m: (on_node(m[0]), u.a2(m[1]), v.a2(m[2]))
    )
    return validate_map(src, tgt, u.a0, a1, a2)


def associator(P: PolyEndo, Q: PolyEndo, R: PolyEndo) -> PolyMap:
    """The canonical isomorphism compose(compose(P,Q), R) ->
    compose(P, compose(Q,R)), by re-bracketing the (b, f) labels."""
    left = compose(compose(P, Q), R)
    qr = compose(Q, R)
    right = compose(P, qr)

    def on_node(node):
        (b, f), g = node
        fib = P.fibre(b)
        assignment = dict(zip(fib, f))
        pq_fibre = [((b, f), e, e2) for e in fib for e2 in Q.fibre(assignment[e])]
        branch = dict(zip(pq_fibre, g))
        f2 = []
        for e in fib:
            q = assignment[e]
            h = tuple(branch[((b, f), e, e2)] for e2 in Q.fibre(q))
            f2.append((q, h))
        return (b, tuple(f2))

    def on_input(m):
        node, epq, e3 = m
        (b, f), _g = node
        _node, e, e2 = epq
        b2, f2 = on_node(node)
        assignment = dict(zip(P.fibre(b), f2))
        return ((b2, f2), e, (assignment[e], e2, e3))

    a1 = FinMap.make(left.p1, right.p1, on_node)
    a2 = FinMap.make(left.p2, right.p2, on_input)
    return validate_map(left, right, FinMap.identity(P.p0), a1, a2)


def left_unitor(P: PolyEndo) -> PolyMap:
    """The canonical isomorphism compose(Id, P) -> P."""
    ident = identity_endofunctor(P.p0)
    src = compose(ident, P)
    a1 = FinMap.make(src.p1, P.p1, lambda n: n[1][0])
    a2 = FinMap.make(src.p2, P.p2, lambda m: m[2])
    return validate_map(src, P, FinMap.identity(P.p0), a1, a2)


def right_unitor(P: PolyEndo) -> PolyMap:
    """The canonical isomorphism compose(P, Id) -> P."""
    ident = identity_endofunctor(P.p0)
    src = compose(P, ident)
    a1 = FinMap.make(src.p1, P.p1, lambda n: n[0])
    a2 = FinMap.make(src.p2, P.p2, lambda m: m[1])
    return validate_map(src, P, FinMap.identity(P.p0), a1, a2)


@dataclass(frozen=True)
class SlicedObject:
    """An endofunctor together with a structure map into a fixed base."""

    total: PolyEndo
    structure_map: PolyMap

    def __post_init__(self):
        if self.structure_map.source != self.total:
            raise ValueError("structure map must start at the total object")

    @property
    def base(self) -> PolyEndo:
        return self.structure_map.target


@dataclass(frozen=True)
class ElementsCategory:
    """The bipartite category el(P): objects P0 + P1, one generating arrow
    per node (from its output colour) and per marked input (from its
    source colour to its node)."""

    objects: FinSet
    arrows: FinSet
    src: FinMap
    tgt: FinMap


def elements_category(P: PolyEndo) -> ElementsCategory:
    objects = FinSet(tuple(("e", i) for i in P.p0) + tuple(("n", b) for b in P.p1))
    arrows = FinSet(tuple(("t", b) for b in P.p1) + tuple(("s", e) for e in P.p2))

    def source_of(a):
        kind, x = a
        return ("e", P.t(x)) if kind == "t" else ("e", P.s(x))

    def target_of(a):
        kind, x = a
        return ("n", x) if kind == "t" else ("n", P.p(x))

    return ElementsCategory(
        objects,
        arrows,
        FinMap.make(arrows, objects, source_of),
        FinMap.make(arrows, objects, target_of),
    )


@dataclass
class ElPresheaf:
    """A presheaf on el(P): one FinSet per object, one FinMap per generating
    arrow, acting contravariantly (the map attached to an arrow u -> v goes
    X(v) -> X(u))."""

    category: ElementsCategory
    values: dict
    action: dict


def slice_to_presheaf(q: SlicedObject) -> ElPresheaf:
    """The fibrewise presheaf of a sliced object: value at a colour i is the
    a0-fibre over i, at a node b the a1-fibre over b; arrows act by t and
    by transporting along the middle-square bijections."""
    base = q.base
    total = q.total
    cat = elements_category(base)
    values = {}
    for i in base.p0:
        values[("e", i)] = FinSet(q.structure_map.a0.fibre(i))
    for b in base.p1:
        values[("n", b)] = FinSet(q.structure_map.a1.fibre(b))
    action = {}
    for b in base.p1:
        action[("t", b)] = FinMap.make(
            values[("n", b)], values[("e", base.t(b))], total.t
        )
    for e in base.p2:
        source_value = values[("n", base.p(e))]

        def act(n, e=e):
            for m in total.fibre(n):
                if q.structure_map.a2(m) == e:
                    return total.s(m)
            raise AssertionError("cartesian middle square violated")

        action[("s", e)] = FinMap.make(
            source_value, values[("e", base.s(e))], act
        )
    return ElPresheaf(cat, values, action)


def presheaf_to_slice(base: PolyEndo, X: ElPresheaf) -> SlicedObject:
    """Reassemble a sliced object from a presheaf on el(base) by taking sums
    of the values; inverse to slice_to_presheaf up to isomorphism over base."""
    p0 = FinSet(tuple((i, x) for i in base.p0 for x in X.values[("e", i)]))
    p1 = FinSet(tuple((b, n) for b in base.p1 for n in X.values[("n", b)]))
    p2 = FinSet(
        tuple((e, n) for e in base.p2 for n in X.values[("n", base.p(e))])
    )
    s = FinMap.make(p2, p0, lambda m: (base.s(m[0]), X.action[("s", m[0])](m[1])))
    p = FinMap.make(p2, p1, lambda m: (base.p(m[0]), m[1]))
    t = FinMap.make(p1, p0, lambda n: (base.t(n[0]), X.action[("t", n[0])](n[1])))
    total = PolyEndo(p0, p1, p2, s, p, t)
    structure = validate_map(
        total,
        base,
        FinMap.make(p0, base.p0, lambda x: x[0]),
        FinMap.make(p1, base.p1, lambda n: n[0]),
        FinMap.make(p2, base.p2, lambda m: m[0]),
    )
    return SlicedObject(total, structure)


def canonical_colimit_check(P: PolyEndo) -> bool:
    """Whether the colimit of the element diagram of P (computed by the
    presheaf round trip on the identity slice) is isomorphic to P."""
    q = SlicedObject(P, PolyMap.identity(P))
    back = presheaf_to_slice(P, slice_to_presheaf(q))
    return are_isomorphic_polyends(
        back.total, P, over=(back.structure_map, PolyMap.identity(P))
    )


def _node_invariant(P: PolyEndo, b):
    return len(P.fibre(b))


def are_isomorphic_polyends(P: PolyEndo, Q: PolyEndo, over=None) -> bool:
    """Whether P and Q are isomorphic as polynomial endofunctors, by
    backtracking search over label bijections respecting s, p, t (with
    fibre-size pruning).  With over=(u: P->B, v: Q->B), the isomorphism is
    additionally required to commute with the structure maps."""
    if (len(P.p0), len(P.p1), len(P.p2)) != (len(Q.p0), len(Q.p1), len(Q.p2)):
        return False
    u = v = None
    if over is not None:
        u, v = over
        if u.source != P or v.source != Q or u.target != v.target:
            raise ValueError("over must be structure maps of P and Q to one base")

    p_nodes = tuple(P.p1)

    def extend_nodes(index, beta1, used):
        if index == len(p_nodes):
            yield dict(beta1)
            return
        b = p_nodes[index]
        for c in Q.p1:
            if c in used:
                continue
            if _node_invariant(P, b) != _node_invariant(Q, c):
                continue
            if u is not None and v.a1(c) != u.a1(b):
                continue
            beta1[b] = c
            used.add(c)
            yield from extend_nodes(index + 1, beta1, used)
            del beta1[b]
            used.discard(c)

    for beta1 in extend_nodes(0, {}, set()):
        beta0 = {}
        consistent = True
        for b, c in beta1.items():
            x, y = P.t(b), Q.t(c)
            if beta0.get(x, y) != y:
                consistent = False
                break
            beta0[x] = y
        if not consistent or len(set(beta0.values())) != len(beta0):
            continue
        rest_p = [x for x in P.p0 if x not in beta0]
        rest_q = [y for y in Q.p0 if y not in set(beta0.values())]
        for images in itertools.permutations(rest_q):
            full = dict(beta0)
            full.update(zip(rest_p, images))
            if u is not None and any(v.a0(full[x]) != u.a0(x) for x in P.p0):
                continue
            if _fibres_match(P, Q, beta1, full, u, v):
                return True
    return False


def _fibres_match(P, Q, beta1, beta0, u, v) -> bool:
    for b, c in beta1.items():
        def key_p(e):
            return (label_key(beta0[P.s(e)]), label_key(u.a2(e)) if u else None)

        def key_q(e):
            return (label_key(Q.s(e)), label_key(v.a2(e)) if v else None)

        if sorted(map(key_p, P.fibre(b))) != sorted(map(key_q, Q.fibre(c))):
            return False
    return True
