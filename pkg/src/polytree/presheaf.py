"""Finite presheaves on truncated tree sites.

A site is a finite full subcategory of tree embeddings: objects are the
canonical tree classes up to an edge bound (with a planar variant whose
objects are planar tree classes and whose arrows respect the planar
structure).  On top of presheaves the module provides the nerve of an
endofunctor, covering families and the Segal condition, restriction to
elementary trees and sheaf extension, symmetric and nonsymmetric
collections, symmetrisation, flatness, and the reconstruction check that
recognises nerves of polynomial endofunctors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import ArityUnsupported, BoundExceeded, NotFlat
from .finset import FinMap, FinSet, label_key
from .polyend import PolyEndo, PolyMap, free_monoid_truncated
from .ptree import (
    PTree,
    decorations,
    enumerate_ptrees,
    undecorated_tree_classes,
)
from .tree import (
    Tree,
    hom_temb,
    subtree_from_nodes,
    trivial_subtree,
)


# sites --------------------------------------------------------------------


@dataclass(eq=False)
class Site:
    """A finite category of trees and embeddings, truncated by edge count.

    kind is "temb" (objects are canonical trees, arrows all embeddings) or
    "planar" (objects are planar tree classes, arrows the embeddings that
    respect the planar structure)."""

    kind: str
    max_edges: int
    objects: tuple
    homs: dict

    def tree_of(self, i) -> Tree:
        obj = self.objects[i]
        return obj.tree if isinstance(obj, PTree) else obj

    def trivial_index(self) -> int:
        for i in range(len(self.objects)):
            if self.tree_of(i).is_trivial():
                return i
        raise ValueError("site has no trivial object")

    def elementary_index(self, arity: int):
        """The object with exactly one node and the given arity, or None."""
        for i in range(len(self.objects)):
            T = self.tree_of(i)
            if len(T.nodes) == 1 and len(T.leaves) == arity:
                return i
        return None


@lru_cache(maxsize=None)
def build_temb_site(max_edges: int) -> Site:
    objects = tuple(undecorated_tree_classes(max_edges))
    homs = {}
    for i, S in enumerate(objects):
        for j, T in enumerate(objects):
            homs[(i, j)] = tuple(hom_temb(S, T))
    return Site("temb", max_edges, objects, homs)


@lru_cache(maxsize=None)
def build_planar_site(max_edges: int) -> Site:
    base = free_monoid_truncated(max(max_edges - 1, 0))
    objects = tuple(enumerate_ptrees(base, max_edges=max_edges).classes)
    homs = {}
    for i, S in enumerate(objects):
        for j, T in enumerate(objects):
            homs[(i, j)] = tuple(
                phi
                for phi in hom_temb(S.tree, T.tree)
                if phi.then(T.decoration) == S.decoration
            )
    return Site("planar", max_edges, objects, homs)


def arrow_index(site: Site, i: int, j: int, a0_pairs) -> int:
    """Locate an arrow by its edge map (embeddings are determined by it)."""
    for k, phi in enumerate(site.homs[(i, j)]):
        if all(phi.a0(x) == y for x, y in a0_pairs):
            return k
    raise ValueError("no such arrow in the site")


# presheaves ---------------------------------------------------------------


@dataclass(eq=False)
class FinitePresheaf:
    """Value sets indexed by site objects, with one contravariant map per
    arrow: action[(i, j, k)] sends X(objects[j]) to X(objects[i]) along the
    k-th arrow objects[i] -> objects[j]."""

    site: Site
    values: dict
    action: dict

    def value(self, i) -> FinSet:
        return self.values[i]

    def restrict(self, i, j, k) -> FinMap:
        return self.action[(i, j, k)]


def validate_presheaf(X: FinitePresheaf) -> bool:
    """Identities act as identities; contravariant functoriality on every
    composable pair of arrows in the site."""
    site = X.site
    for i in range(len(site.objects)):
        T = site.tree_of(i)
        k = arrow_index(site, i, i, [(x, x) for x in T.edges])
        if X.action[(i, i, k)] != FinMap.identity(X.values[i]):
            return False
    for (i, j), arrows in site.homs.items():
        for k1, f in enumerate(arrows):
            for l in range(len(site.objects)):
                for k2, g in enumerate(site.homs[(j, l)]):
                    composite = f.then(g)
                    S = site.tree_of(i)
                    k3 = arrow_index(
                        site, i, l, [(x, composite.a0(x)) for x in S.edges]
                    )
                    if X.action[(i, l, k3)] != X.action[(j, l, k2)].then(
                        X.action[(i, j, k1)]
                    ):
                        return False
    return True


def _dec_label(d: PolyMap):
    return (
        "dec",
        tuple((x, d.a0(x)) for x in d.source.p0),
        tuple((b, d.a1(b)) for b in d.source.p1),
        tuple((e, d.a2(e)) for e in d.source.p2),
    )


def nerve_N0(P: PolyEndo, max_edges: int, site: Site = None) -> FinitePresheaf:
    """The nerve: X(T) = structure maps T -> P, restriction by
    precomposition with the embeddings."""
    site = build_temb_site(max_edges) if site is None else site
    values = {}
    decoded = {}
    for i in range(len(site.objects)):
        T = site.tree_of(i)
        try:
            decs = decorations(T, P)
        except ArityUnsupported as exc:
            raise BoundExceeded(str(exc)) from exc
        labelled = {_dec_label(pt.decoration): pt.decoration for pt in decs}
        values[i] = FinSet(tuple(labelled))
        decoded[i] = labelled
    action = {}
    for (i, j), arrows in site.homs.items():
        for k, phi in enumerate(arrows):
            action[(i, j, k)] = FinMap.make(
                values[j],
                values[i],
                lambda lab, phi=phi, j=j: _dec_label(
                    phi.then(decoded[j][lab])
                ),
            )
    return FinitePresheaf(site, values, action)


# covers and the Segal condition -------------------------------------------


def is_cover(T: Tree, family) -> bool:
    """Jointly surjective on nodes and on edges."""
    nodes = set()
    edges = set()
    for sub in family:
        nodes |= sub.node_set
        edges |= sub.edge_set
    return nodes == set(T.nodes) and edges == set(T.edges)


def covering_families(T: Tree) -> list:
    """The basis covers: the elementary family of all one-node subtrees,
    plus every reduced cover; for the trivial tree, just itself."""
    from .omega import reduced_covers

    if T.is_trivial():
        return [(trivial_subtree(T, T.root),)]
    elementary = tuple(
        sorted(
            (subtree_from_nodes(T, (b,)) for b in T.nodes),
            key=lambda s: s.sort_key(),
        )
    )
    families = [elementary]
    seen = {frozenset((sub.edge_set, sub.node_set) for sub in elementary)}
    for _subset, members in reduced_covers(T):
        key = frozenset((sub.edge_set, sub.node_set) for sub in members)
        if key not in seen:
            seen.add(key)
            families.append(members)
    return families


def _elementary_embeddings(site: Site, i: int):
    """For each node of the i-th object, the canonical embedding of the
    matching elementary object onto its one-node subtree."""
    T = site.tree_of(i)
    result = []
    for b in T.nodes:
        target_edges = subtree_from_nodes(T, (b,)).edge_set
        j = site.elementary_index(T.arity(b))
        if j is None:
            raise BoundExceeded(
                f"site lacks the elementary tree of arity {T.arity(b)}"
            )
        found = None
        for k, phi in enumerate(site.homs[(j, i)]):
            if {phi.a0(x) for x in site.tree_of(j).edges} == target_edges:
                found = (b, j, k, phi)
                break
        result.append(found)
    return result


@lru_cache(maxsize=None)
def _trivial_arrow_table(site_id, i):
    site = _SITE_REGISTRY[site_id]
    ti = site.trivial_index()
    root = site.tree_of(ti).root
    table = {}
    for k, phi in enumerate(site.homs[(ti, i)]):
        table[phi.a0(root)] = k
    return ti, table


_SITE_REGISTRY = {}


def _register(site: Site):
    _SITE_REGISTRY[id(site)] = site
    return id(site)


def segal_check(X: FinitePresheaf):
    """Whether the comparison of each value set with the set of compatible
    families over the object's elementary cover is a bijection.

    A family picks an element over every one-node subtree and every edge,
    agreeing along the edge inclusions.  Returns (True, None) or (False,
    witness) where the witness names the object and the failure."""
    site = X.site
    sid = _register(site)
    for i in range(len(site.objects)):
        T = site.tree_of(i)
        if T.is_trivial():
            continue
        node_data = _elementary_embeddings(site, i)
        ti, triv_table_i = _trivial_arrow_table(sid, i)
        comparison = {}
        for v in X.values[i]:
            key_nodes = tuple(
                X.action[(j, i, k)](v) for _b, j, k, _phi in node_data
            )
            key_edges = tuple(
                X.action[(ti, i, triv_table_i[x])](v) for x in T.edges
            )
            comparison[v] = (key_nodes, key_edges)
        if len(set(comparison.values())) != len(comparison):
            return False, (i, "comparison not injective")
        families = set()
        chosen = []

        def extend(idx, edge_assign):
            if idx == len(node_data):
                families.add(
                    (
                        tuple(chosen),
                        tuple(edge_assign[x] for x in T.edges),
                    )
                )
                return
            _b, j, k, phi = node_data[idx]
            Tj = site.tree_of(j)
            _tj, triv_table_j = _trivial_arrow_table(sid, j)
            for c in X.values[j]:
                new_assign = dict(edge_assign)
                ok = True
                for y in Tj.edges:
                    a = X.action[(ti, j, triv_table_j[y])](c)
                    tgt = phi.a0(y)
                    if tgt in new_assign and new_assign[tgt] != a:
                        ok = False
                        break
                    new_assign[tgt] = a
                if ok:
                    chosen.append(c)
                    extend(idx + 1, new_assign)
                    chosen.pop()

        extend(0, {})
        if set(comparison.values()) != families:
            return False, (
                i,
                f"{len(set(comparison.values()))} values vs "
                f"{len(families)} compatible families",
            )
    return True, None


# collections --------------------------------------------------------------


def _compose_perm(a: tuple, b: tuple) -> tuple:
    return tuple(a[b[i]] for i in range(len(a)))


def _transposition(n: int, i: int) -> tuple:
    perm = list(range(n))
    perm[i], perm[i + 1] = perm[i + 1], perm[i]
    return tuple(perm)


@dataclass(eq=False)
class Collection:
    """Colours, one op set per nonempty arity, n+1 colour projections
    (inputs first, output last), and the symmetric action stored as the
    adjacent-transposition generators.

    The action is a right action: action(n, p) applied to x permutes the
    projections so that input i of the result reads input p(i) of x."""

    colours: FinSet
    ops: dict
    projections: dict
    generators: dict

    def arities(self):
        return sorted(self.ops)

    def action(self, n: int, perm: tuple) -> FinMap:
        return _action_table(self, n)[perm]


@lru_cache(maxsize=None)
def _action_table(C: Collection, n: int) -> dict:
    identity = tuple(range(n))
    table = {identity: FinMap.identity(C.ops[n])}
    frontier = [identity]
    while frontier:
        new_frontier = []
        for perm in frontier:
            for idx in range(max(n - 1, 0)):
                new = _compose_perm(perm, _transposition(n, idx))
                mapped = table[perm].then(C.generators[n][idx])
                if new in table:
                    if table[new] != mapped:
                        raise ValueError("generators are inconsistent")
                else:
                    table[new] = mapped
                    new_frontier.append(new)
        frontier = new_frontier
    return table


def validate_collection(C: Collection) -> bool:
    """Projection endpoints, generator involutivity, well-definedness of the
    derived action, and the projection-permuting law."""
    for n in C.arities():
        projs = C.projections[n]
        if len(projs) != n + 1:
            return False
        for proj in projs:
            if proj.source != C.ops[n] or proj.target != C.colours:
                return False
        for idx, gen in enumerate(C.generators[n]):
            if gen.then(gen) != FinMap.identity(C.ops[n]):
                return False
            tau = _transposition(n, idx)
            for x in C.ops[n]:
                for j in range(n):
                    if projs[j](gen(x)) != projs[tau[j]](x):
                        return False
                if projs[n](gen(x)) != projs[n](x):
                    return False
        try:
            table = _action_table(C, n)
        except ValueError:
            return False
        if len(table) != _factorial(n):
            return False
    return True


def _factorial(n: int) -> int:
    result = 1
    for k in range(2, n + 1):
        result *= k
    return result


def restrict_to_elementary(X: FinitePresheaf) -> Collection:
    """The collection of values on the trivial and one-node objects, with
    projections and symmetries read off from the site's arrows."""
    site = X.site
    sid = _register(site)
    ti = site.trivial_index()
    colours = X.values[ti]
    ops, projections, generators = {}, {}, {}
    for n in range(site.max_edges):
        e = site.elementary_index(n)
        if e is None:
            continue
        if len(X.values[e]) == 0:
            continue
        ops[n] = X.values[e]
        E = site.tree_of(e)
        _t, triv_table = _trivial_arrow_table(sid, e)
        projs = [
            X.action[(ti, e, triv_table[leaf])] for leaf in E.leaves
        ]
        projs.append(X.action[(ti, e, triv_table[E.root])])
        projections[n] = tuple(projs)
        gens = []
        for idx in range(max(n - 1, 0)):
            tau = _transposition(n, idx)
            pairs = [(E.leaves[i], E.leaves[tau[i]]) for i in range(n)]
            pairs.append((E.root, E.root))
            k = arrow_index(site, e, e, pairs)
            gens.append(X.action[(e, e, k)])
        generators[n] = tuple(gens)
    return Collection(colours, ops, projections, generators)


def nerve_R0(P: PolyEndo) -> Collection:
    """The collection of P: an arity-n operation is a node with an ordering
    of its inputs; the symmetric groups act by reordering."""
    arity_nodes = {}
    for b in P.p1:
        arity_nodes.setdefault(P.arity(b), []).append(b)
    ops, projections, generators = {}, {}, {}
    for n, nodes in sorted(arity_nodes.items()):
        elements = tuple(
            (b, order)
            for b in nodes
            for order in itertools.permutations(P.fibre(b))
        )
        ops[n] = FinSet(elements)
        projs = [
            FinMap.make(ops[n], P.p0, lambda x, i=i: P.s(x[1][i]))
            for i in range(n)
        ]
        projs.append(FinMap.make(ops[n], P.p0, lambda x: P.t(x[0])))
        projections[n] = tuple(projs)
        gens = []
        for idx in range(max(n - 1, 0)):
            tau = _transposition(n, idx)
            gens.append(
                FinMap.make(
                    ops[n],
                    ops[n],
                    lambda x, tau=tau: (
                        x[0],
                        tuple(x[1][tau[i]] for i in range(len(tau))),
                    ),
                )
            )
        generators[n] = tuple(gens)
    return Collection(P.p0, ops, projections, generators)


@dataclass(eq=False)
class NonSymCollection:
    """Colours and one op set per nonempty arity with n+1 colour
    projections; no symmetries."""

    colours: FinSet
    ops: dict
    projections: dict

    def arities(self):
        return sorted(self.ops)


def nonsym_of_polyend(P: PolyEndo) -> NonSymCollection:
    """Read P as a nonsymmetric collection using the stored fibre order."""
    arity_nodes = {}
    for b in P.p1:
        arity_nodes.setdefault(P.arity(b), []).append(b)
    ops, projections = {}, {}
    for n, nodes in sorted(arity_nodes.items()):
        ops[n] = FinSet(tuple(nodes))
        projs = [
            FinMap.make(ops[n], P.p0, lambda b, i=i: P.s(P.fibre(b)[i]))
            for i in range(n)
        ]
        projs.append(FinMap.make(ops[n], P.p0, lambda b: P.t(b)))
        projections[n] = tuple(projs)
    return NonSymCollection(P.p0, ops, projections)


def nonsym_to_polyend(C: NonSymCollection) -> PolyEndo:
    """The endofunctor with one node per operation and inputs in the
    operation's stated order."""
    nodes = tuple((n, c) for n in C.arities() for c in C.ops[n])
    inputs = tuple((n, c, i) for n, c in nodes for i in range(n))
    p1 = FinSet(nodes)
    p2 = FinSet(inputs)
    return PolyEndo(
        C.colours,
        p1,
        p2,
        FinMap.make(p2, C.colours, lambda m: C.projections[m[0]][m[2]](m[1])),
        FinMap.make(p2, p1, lambda m: (m[0], m[1])),
        FinMap.make(p1, C.colours, lambda node: C.projections[node[0]][node[0]](node[1])),
    )


def symmetrise(C: NonSymCollection) -> Collection:
    """The free symmetric collection on C: arity n becomes S_n x C(n) with
    the regular action on the first factor."""
    ops, projections, generators = {}, {}, {}
    for n in C.arities():
        elements = tuple(
            (perm, c)
            for perm in itertools.permutations(range(n))
            for c in C.ops[n]
        )
        ops[n] = FinSet(elements)
        projs = [
            FinMap.make(
                ops[n],
                C.colours,
                lambda x, i=i: C.projections[n][x[0][i]](x[1]),
            )
            for i in range(n)
        ]
        projs.append(
            FinMap.make(ops[n], C.colours, lambda x: C.projections[n][n](x[1]))
        )
        projections[n] = tuple(projs)
        gens = []
        for idx in range(max(n - 1, 0)):
            tau = _transposition(n, idx)
            gens.append(
                FinMap.make(
                    ops[n],
                    ops[n],
                    lambda x, tau=tau: (_compose_perm(x[0], tau), x[1]),
                )
            )
        generators[n] = tuple(gens)
    return Collection(C.colours, ops, projections, generators)


def is_flat(C: Collection):
    """Free symmetric action, equivalently: no operation is fixed by a
    nonidentity permutation (any fixing permutation stabilises the colour
    tuple).  Returns (True, None) or (False, (arity, element, perm))."""
    for n in C.arities():
        identity = tuple(range(n))
        for perm in itertools.permutations(range(n)):
            if perm == identity:
                continue
            act = C.action(n, perm)
            for x in C.ops[n]:
                if act(x) == x:
                    return False, (n, x, perm)
    return True, None


def flat_to_polyend(C: Collection) -> PolyEndo:
    """One node per orbit of operations (least representative in stored
    order), inputs labelled by position."""
    flat, witness = is_flat(C)
    if not flat:
        raise NotFlat(*witness)
    reps = []
    for n in C.arities():
        seen = set()
        for x in C.ops[n]:
            if x in seen:
                continue
            orbit = {
                C.action(n, perm)(x)
                for perm in itertools.permutations(range(n))
            }
            seen |= orbit
            reps.append((n, x))
    nodes = tuple(("op", n, x) for n, x in reps)
    inputs = tuple(("in", n, x, i) for n, x in reps for i in range(n))
    p1 = FinSet(nodes)
    p2 = FinSet(inputs)
    return PolyEndo(
        C.colours,
        p1,
        p2,
        FinMap.make(
            p2, C.colours, lambda m: C.projections[m[1]][m[3]](m[2])
        ),
        FinMap.make(p2, p1, lambda m: ("op", m[1], m[2])),
        FinMap.make(
            p1, C.colours, lambda node: C.projections[node[1]][node[1]](node[2])
        ),
    )


def collections_isomorphic(C: Collection, D: Collection) -> bool:
    """Existence of a colour bijection and equivariant, projection-
    compatible bijections of every op set."""
    if C.arities() != D.arities():
        return False
    if len(C.colours) != len(D.colours):
        return False
    for n in C.arities():
        if len(C.ops[n]) != len(D.ops[n]):
            return False
    d_colours = tuple(D.colours)
    for image in itertools.permutations(d_colours):
        beta = dict(zip(tuple(C.colours), image))
        if all(_ops_match(C, D, n, beta) for n in C.arities()):
            return True
    return False


def _ops_match(C: Collection, D: Collection, n: int, beta: dict) -> bool:
    def c_key(x):
        return tuple(beta[C.projections[n][i](x)] for i in range(n + 1))

    def d_key(y):
        return tuple(D.projections[n][i](y) for i in range(n + 1))

    c_groups, d_groups = {}, {}
    for x in C.ops[n]:
        c_groups.setdefault(c_key(x), []).append(x)
    for y in D.ops[n]:
        d_groups.setdefault(d_key(y), []).append(y)
    if set(c_groups) != set(d_groups):
        return False
    if any(len(c_groups[k]) != len(d_groups[k]) for k in c_groups):
        return False
    keys = sorted(c_groups, key=label_key)
    groups = [(c_groups[k], d_groups[k]) for k in keys]

    def search(idx, theta):
        if idx == len(groups):
            for m in range(max(n - 1, 0)):
                gc = C.generators[n][m]
                gd = D.generators[n][m]
                if any(theta[gc(x)] != gd(theta[x]) for x in C.ops[n]):
                    return False
            return True
        cs, ds = groups[idx]
        for image in itertools.permutations(ds):
            theta.update(zip(cs, image))
            if search(idx + 1, theta):
                return True
        return False

    return search(0, {})


# sheaf extension and the nerve theorem ------------------------------------


def _fam_label(T: Tree, edge_assign: dict, node_assign: dict):
    return (
        "fam",
        tuple((x, edge_assign[x]) for x in T.edges),
        tuple((b, node_assign[b]) for b in T.nodes),
    )


def sheaf_extend(C: Collection, max_edges: int, site: Site = None) -> FinitePresheaf:
    """The presheaf whose value on T is the set of compatible families:
    a colour per edge and an operation per node, matching along the
    incidences (the right Kan extension computed concretely)."""
    site = build_temb_site(max_edges) if site is None else site
    values = {}
    decoded = {}
    for i in range(len(site.objects)):
        T = site.tree_of(i)
        families = []
        node_list = tuple(T.nodes)

        def extend(idx, edge_assign, node_assign):
            if idx == len(node_list):
                if T.is_trivial():
                    for colour in C.colours:
                        families.append(({T.root: colour}, {}))
                else:
                    families.append((dict(edge_assign), dict(node_assign)))
                return
            b = node_list[idx]
            n = T.arity(b)
            fib = T.fibre(b)
            for c in C.ops.get(n, ()):
                out_colour = C.projections[n][n](c)
                new_assign = dict(edge_assign)
                tgt = T.underlying.t(b)
                if tgt in new_assign and new_assign[tgt] != out_colour:
                    continue
                new_assign[tgt] = out_colour
                ok = True
                for pos, e in enumerate(fib):
                    colour = C.projections[n][pos](c)
                    src = T.underlying.s(e)
                    if src in new_assign and new_assign[src] != colour:
                        ok = False
                        break
                    new_assign[src] = colour
                if ok:
                    node_assign[b] = c
                    extend(idx + 1, new_assign, node_assign)
                    node_assign.pop(b, None)

        extend(0, {}, {})
        labelled = {
            _fam_label(T, ea, na): (ea, na) for ea, na in families
        }
        values[i] = FinSet(tuple(labelled))
        decoded[i] = labelled
    action = {}
    for (i, j), arrows in site.homs.items():
        S = site.tree_of(i)
        T = site.tree_of(j)
        for k, phi in enumerate(arrows):
            def restrict(lab, phi=phi, S=S, T=T, j=j):
                edge_assign, node_assign = decoded[j][lab]
                new_edges = {y: edge_assign[phi.a0(y)] for y in S.edges}
                new_nodes = {}
                for b in S.nodes:
                    m = phi.a1(b)
                    n = S.arity(b)
                    positions = {
                        e2: pos for pos, e2 in enumerate(T.fibre(m))
                    }
                    perm = tuple(
                        positions[phi.a2(e)] for e in S.fibre(b)
                    )
                    new_nodes[b] = C.action(n, perm)(node_assign[m])
                return _fam_label(S, new_edges, new_nodes)

            action[(i, j, k)] = FinMap.make(values[j], values[i], restrict)
    return FinitePresheaf(site, values, action)


def planar_extend(C: NonSymCollection, max_edges: int, site: Site = None) -> FinitePresheaf:
    """The planar analogue of sheaf_extend on the planar site: operations
    sit on nodes in the planar input order; no symmetries are involved."""
    site = build_planar_site(max_edges) if site is None else site
    values = {}
    decoded = {}
    for i in range(len(site.objects)):
        obj = site.objects[i]
        T = obj.tree
        families = []
        node_list = tuple(T.nodes)

        def extend(idx, edge_assign, node_assign):
            if idx == len(node_list):
                if T.is_trivial():
                    for colour in C.colours:
                        families.append(({T.root: colour}, {}))
                else:
                    families.append((dict(edge_assign), dict(node_assign)))
                return
            b = node_list[idx]
            n = T.arity(b)
            for c in C.ops.get(n, ()):
                out_colour = C.projections[n][n](c)
                new_assign = dict(edge_assign)
                tgt = T.underlying.t(b)
                if tgt in new_assign and new_assign[tgt] != out_colour:
                    continue
                new_assign[tgt] = out_colour
                ok = True
                for e in T.fibre(b):
                    pos = obj.decoration.a2(e)[0]
                    colour = C.projections[n][pos](c)
                    src = T.underlying.s(e)
                    if src in new_assign and new_assign[src] != colour:
                        ok = False
                        break
                    new_assign[src] = colour
                if ok:
                    node_assign[b] = c
                    extend(idx + 1, new_assign, node_assign)
                    node_assign.pop(b, None)

        extend(0, {}, {})
        labelled = {_fam_label(T, ea, na): (ea, na) for ea, na in families}
        values[i] = FinSet(tuple(labelled))
        decoded[i] = labelled
    action = {}
    for (i, j), arrows in site.homs.items():
        S = site.tree_of(i)
        for k, phi in enumerate(arrows):
            def restrict(lab, phi=phi, S=S, j=j):
                edge_assign, node_assign = decoded[j][lab]
                new_edges = {y: edge_assign[phi.a0(y)] for y in S.edges}
                new_nodes = {
                    b: node_assign[phi.a1(b)] for b in S.nodes
                }
                return _fam_label(S, new_edges, new_nodes)

            action[(i, j, k)] = FinMap.make(values[j], values[i], restrict)
    return FinitePresheaf(site, values, action)


def planar_restrict(X: FinitePresheaf) -> NonSymCollection:
    """Values on the trivial and one-node planar objects, as a
    nonsymmetric collection; projections follow the planar leaf order."""
    site = X.site
    sid = _register(site)
    ti = site.trivial_index()
    colours = X.values[ti]
    ops, projections = {}, {}
    for n in range(site.max_edges):
        e = site.elementary_index(n)
        if e is None or len(X.values[e]) == 0:
            continue
        obj = site.objects[e]
        E = obj.tree
        _t, triv_table = _trivial_arrow_table(sid, e)
        leaf_at = {}
        for m in E.marked_inputs:
            leaf_at[obj.decoration.a2(m)[0]] = E.underlying.s(m)
        ops[n] = X.values[e]
        projs = [
            X.action[(ti, e, triv_table[leaf_at[i]])] for i in range(n)
        ]
        projs.append(X.action[(ti, e, triv_table[E.root])])
        projections[n] = tuple(projs)
    return NonSymCollection(colours, ops, projections)


@dataclass(frozen=True)
class NerveVerdict:
    is_nerve: bool
    reason: str
    witness: object
    polyend: object


def nerve_theorem_check(X: FinitePresheaf) -> NerveVerdict:
    """A presheaf is the nerve of a polynomial endofunctor iff it satisfies
    the Segal condition and its elementary restriction is flat; on success
    the endofunctor is reconstructed and its nerve compared with X."""
    ok, witness = segal_check(X)
    if not ok:
        return NerveVerdict(False, "segal condition fails", witness, None)
    C = restrict_to_elementary(X)
    flat, flat_witness = is_flat(C)
    if not flat:
        return NerveVerdict(False, "restriction is not flat", flat_witness, None)
    P = flat_to_polyend(C)
    if not collections_isomorphic(nerve_R0(P), C):
        return NerveVerdict(
            False, "reconstructed collection differs", None, P
        )
    N = nerve_N0(P, X.site.max_edges, site=X.site)
    for i in range(len(X.site.objects)):
        if len(N.values[i]) != len(X.values[i]):
            return NerveVerdict(
                False,
                "reconstructed nerve has a different value set",
                (i, len(N.values[i]), len(X.values[i])),
                P,
            )
    return NerveVerdict(True, "nerve of the reconstructed endofunctor", None, P)
