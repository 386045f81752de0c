"""Shared builders for the test suite."""

from polytree import FinMap, FinSet, PolyEndo


def polyend_from_table(colours, nodes):
    """Build an endofunctor from {node: (input colours, output colour)}."""
    p0 = FinSet(tuple(colours))
    p1 = FinSet(tuple(nodes))
    p2 = FinSet(
        tuple((b, i) for b, (ins, _out) in nodes.items() for i in range(len(ins)))
    )
    return PolyEndo(
        p0,
        p1,
        p2,
        FinMap.make(p2, p0, lambda m: nodes[m[0]][0][m[1]]),
        FinMap.make(p2, p1, lambda m: m[0]),
        FinMap.make(p1, p0, lambda b: nodes[b][1]),
    )


def random_polyend(rng, max_nodes=4, max_arity=3, max_colours=3):
    ncol = rng.randint(1, max_colours)
    colours = [f"c{i}" for i in range(ncol)]
    nodes = {}
    for i in range(rng.randint(1, max_nodes)):
        arity = rng.randint(0, max_arity)
        nodes[f"b{i}"] = (
            tuple(rng.choice(colours) for _ in range(arity)),
            rng.choice(colours),
        )
    return polyend_from_table(colours, nodes)


def binary_op_polyend():
    """One colour, one binary operation, one constant."""
    return polyend_from_table(["c"], {"m": (("c", "c"), "c"), "u": ((), "c")})


def positive_arity_monoid(max_arity):
    """One colour with one operation per arity 1..max_arity (no constant)."""
    return polyend_from_table(
        ["c"], {f"a{n}": (("c",) * n, "c") for n in range(1, max_arity + 1)}
    )


def edge_map_of(phi):
    return tuple(sorted(phi.edge_map().items(), key=repr))
