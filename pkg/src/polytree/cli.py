"""Command-line front end.

Documents declare named objects in a small text format:

    poly NAME { edges: e1 e2 ; node NAME : [in1, in2] -> out ; }
    tree NAME { ... }                      # poly + certification
    coll NAME { colours: c ; op m : (c, c) -> c fixed-by: (1 0) ; }
    map NAME : A -> B { edge x -> y ; node u -> trivial(e) ; }
    presheaf NAME { nerve: P ; max-edges: 3 ; double: T ; }

Comments run from '#' to the end of the line.  Repeated labels in a
node's input list create distinct marked inputs sharing a source, so
non-tree endofunctors are expressible.  A collection op denotes the free
symmetric orbit of the operation unless fixed-by lists permutations,
which are quotiented out (a binary op fixed by the swap is commutative).
A presheaf is the nerve of an endofunctor at a truncation; double names
a tree class whose value set gets one duplicated element, producing a
deliberately non-Segal presheaf.

Commands report on stdout and exit 0 for success or true verdicts, 1 for
false verdicts (with a witness), 2 for errors.  --json switches to a
stable machine-readable schema.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from .errors import (
    NotALeaf,
    NotFlat,
    NotInnerEdge,
    ParseError,
    PolytreeError,
    TreeAxiomError,
)
from .finset import FinMap, FinSet, label_key
from .polyend import PolyEndo, compose
from .presheaf import (
    Collection,
    FinitePresheaf,
    build_temb_site,
    collections_isomorphic,
    is_flat,
    nerve_N0,
    nerve_R0,
    nerve_theorem_check,
    segal_check,
    _compose_perm,
    _transposition,
)
from .ptree import enumerate_ptrees, undecorated_tree_classes
from .omega import (
    check_monad_laws,
    contract,
    free_monad,
    hom_omega,
    omega_morphism,
    triple_factor,
)
from .tree import (
    Tree,
    automorphisms,
    canonical_form,
    canonical_relabel,
    certify_tree,
    enumerate_subtrees,
    graft,
    prune,
    subtree_from_nodes,
    trivial_subtree,
)

SCHEMA_VERSION = 1

COMMANDS = (
    "validate",
    "subtrees",
    "graft",
    "prune",
    "contract",
    "hom",
    "factor",
    "enumerate-trees",
    "enumerate-ptrees",
    "automorphisms",
    "free-monad",
    "compose",
    "nerve",
    "segal-check",
    "flat-check",
    "nerve-theorem-check",
    "export-dot",
)


# tokenizer and parser -----------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    column: int


_PUNCT = set("{}:;,[]()")


def _tokenize(text: str) -> list:
    tokens = []
    line, column = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            column = 1
            i += 1
        elif ch in " \t\r":
            column += 1
            i += 1
        elif ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif text.startswith("->", i):
            tokens.append(Token("arrow", "->", line, column))
            i += 2
            column += 2
        elif ch in _PUNCT:
            tokens.append(Token("punct", ch, line, column))
            i += 1
            column += 1
        elif ch.isalnum() or ch in "_*|":
            start = i
            while i < len(text) and (text[i].isalnum() or text[i] in "_*|-"):
                if text.startswith("->", i):
                    break
                i += 1
            tokens.append(Token("ident", text[start:i], line, column))
            column += i - start
        else:
            raise ParseError(f"unexpected character {ch!r}", line, column)
    return tokens


@dataclass
class Entry:
    kind: str
    spec: object
    value: object


@dataclass
class Document:
    entries: dict

    def get(self, name: str, kinds=None) -> Entry:
        if name not in self.entries:
            raise ParseError(f"unknown name {name!r}", 0, 0)
        entry = self.entries[name]
        if kinds is not None and entry.kind not in kinds:
            raise ParseError(
                f"{name!r} is a {entry.kind}, expected one of {kinds}", 0, 0
            )
        return entry


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        if self.pos >= len(self.tokens):
            last = self.tokens[-1] if self.tokens else Token("", "", 1, 1)
            return Token("eof", "", last.line, last.column + len(last.value))
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.column)

    def expect(self, kind: str, value: str = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            self.fail(f"expected {want!r}, found {tok.value!r}")
        return self.next()

    def ident(self) -> str:
        return self.expect("ident").value

    def document(self) -> Document:
        entries = {}
        while self.peek().kind != "eof":
            keyword_tok = self.peek()
            keyword = self.ident()
            if keyword not in ("poly", "tree", "coll", "map", "presheaf"):
                raise ParseError(
                    f"unknown declaration {keyword!r}",
                    keyword_tok.line,
                    keyword_tok.column,
                )
            name_tok = self.peek()
            name = self.ident()
            if name in entries:
                raise ParseError(
                    f"duplicate name {name!r}", name_tok.line, name_tok.column
                )
            if keyword in ("poly", "tree"):
                entries[name] = self.poly_entry(keyword)
            elif keyword == "coll":
                entries[name] = self.coll_entry()
            elif keyword == "map":
                entries[name] = self.map_entry(entries)
            else:
                entries[name] = self.presheaf_entry(entries)
        return Document(entries)

    def poly_entry(self, keyword: str) -> Entry:
        self.expect("punct", "{")
        self.expect("ident", "edges")
        self.expect("punct", ":")
        edges = []
        while self.peek().kind == "ident":
            tok = self.next()
            if tok.value in edges:
                raise ParseError(
                    f"duplicate edge {tok.value!r}", tok.line, tok.column
                )
            edges.append(tok.value)
        self.expect("punct", ";")
        nodes = []
        while self.peek().kind == "ident" and self.peek().value == "node":
            self.next()
            node_tok = self.peek()
            node = self.ident()
            if any(n == node for n, _i, _o in nodes):
                raise ParseError(
                    f"duplicate node {node!r}", node_tok.line, node_tok.column
                )
            self.expect("punct", ":")
            self.expect("punct", "[")
            inputs = []
            while self.peek().kind == "ident":
                tok = self.next()
                if tok.value not in edges:
                    raise ParseError(
                        f"unknown edge {tok.value!r}", tok.line, tok.column
                    )
                inputs.append(tok.value)
                if self.peek().value == ",":
                    self.next()
            self.expect("punct", "]")
            self.expect("arrow")
            out_tok = self.peek()
            out = self.ident()
            if out not in edges:
                raise ParseError(
                    f"unknown edge {out!r}", out_tok.line, out_tok.column
                )
            self.expect("punct", ";")
            nodes.append((node, tuple(inputs), out))
        close = self.peek()
        self.expect("punct", "}")
        spec = {"keyword": keyword, "edges": tuple(edges), "nodes": tuple(nodes)}
        p0 = FinSet(tuple(edges))
        p1 = FinSet(tuple(n for n, _i, _o in nodes))
        marked = tuple(
            (n, i) for n, inputs, _o in nodes for i in range(len(inputs))
        )
        p2 = FinSet(marked)
        by_node = {n: (inputs, out) for n, inputs, out in nodes}
        P = PolyEndo(
            p0,
            p1,
            p2,
            FinMap.make(p2, p0, lambda m: by_node[m[0]][0][m[1]]),
            FinMap.make(p2, p1, lambda m: m[0]),
            FinMap.make(p1, p0, lambda n: by_node[n][1]),
        )
        if keyword == "tree":
            try:
                value = certify_tree(P)
            except TreeAxiomError as exc:
                raise ParseError(
                    f"not a tree: {exc}", close.line, close.column
                ) from exc
            return Entry("tree", spec, value)
        return Entry("poly", spec, P)

    def coll_entry(self) -> Entry:
        self.expect("punct", "{")
        self.expect("ident", "colours")
        self.expect("punct", ":")
        colours = []
        while self.peek().kind == "ident":
            tok = self.next()
            if tok.value in colours:
                raise ParseError(
                    f"duplicate colour {tok.value!r}", tok.line, tok.column
                )
            colours.append(tok.value)
        self.expect("punct", ";")
        ops = []
        while self.peek().kind == "ident" and self.peek().value == "op":
            self.next()
            op_tok = self.peek()
            op = self.ident()
            if any(o == op for o, _i, _out, _f in ops):
                raise ParseError(
                    f"duplicate op {op!r}", op_tok.line, op_tok.column
                )
            self.expect("punct", ":")
            self.expect("punct", "(")
            inputs = []
            while self.peek().kind == "ident":
                tok = self.next()
                if tok.value not in colours:
                    raise ParseError(
                        f"unknown colour {tok.value!r}", tok.line, tok.column
                    )
                inputs.append(tok.value)
                if self.peek().value == ",":
                    self.next()
            self.expect("punct", ")")
            self.expect("arrow")
            out_tok = self.peek()
            out = self.ident()
            if out not in colours:
                raise ParseError(
                    f"unknown colour {out!r}", out_tok.line, out_tok.column
                )
            fixed = []
            if self.peek().kind == "ident" and self.peek().value == "fixed-by":
                self.next()
                self.expect("punct", ":")
                while self.peek().value == "(":
                    perm_tok = self.next()
                    images = []
                    while self.peek().kind == "ident":
                        images.append(self.next().value)
                    self.expect("punct", ")")
                    try:
                        perm = tuple(int(v) for v in images)
                    except ValueError:
                        raise ParseError(
                            "permutations are integer sequences",
                            perm_tok.line,
                            perm_tok.column,
                        ) from None
                    if sorted(perm) != list(range(len(inputs))):
                        raise ParseError(
                            f"not a permutation of 0..{len(inputs) - 1}",
                            perm_tok.line,
                            perm_tok.column,
                        )
                    if any(
                        inputs[perm[i]] != inputs[i]
                        for i in range(len(inputs))
                    ):
                        raise ParseError(
                            "fixed-by permutation must preserve the "
                            "input colours",
                            perm_tok.line,
                            perm_tok.column,
                        )
                    fixed.append(perm)
            self.expect("punct", ";")
            ops.append((op, tuple(inputs), out, tuple(fixed)))
        self.expect("punct", "}")
        spec = {"colours": tuple(colours), "ops": tuple(ops)}
        return Entry("coll", spec, _build_collection(spec))

    def map_entry(self, entries: dict) -> Entry:
        self.expect("punct", ":")
        src_tok = self.peek()
        src_name = self.ident()
        self.expect("arrow")
        tgt_tok = self.peek()
        tgt_name = self.ident()
        for name, tok in ((src_name, src_tok), (tgt_name, tgt_tok)):
            if name not in entries or entries[name].kind != "tree":
                raise ParseError(
                    f"{name!r} is not a defined tree", tok.line, tok.column
                )
        S: Tree = entries[src_name].value
        T: Tree = entries[tgt_name].value
        self.expect("punct", "{")
        edge_map = {}
        node_spec = {}
        open_tok = self.peek()
        while self.peek().kind == "ident":
            what = self.next()
            if what.value == "edge":
                x_tok = self.peek()
                x = self.ident()
                self.expect("arrow")
                y_tok = self.peek()
                y = self.ident()
                if x not in S.edges:
                    raise ParseError(
                        f"unknown source edge {x!r}", x_tok.line, x_tok.column
                    )
                if y not in T.edges:
                    raise ParseError(
                        f"unknown target edge {y!r}", y_tok.line, y_tok.column
                    )
                edge_map[x] = y
            elif what.value == "node":
                u_tok = self.peek()
                u = self.ident()
                if u not in S.nodes:
                    raise ParseError(
                        f"unknown source node {u!r}", u_tok.line, u_tok.column
                    )
                self.expect("arrow")
                kind_tok = self.peek()
                kind = self.ident()
                self.expect("punct", "(")
                args = []
                while self.peek().kind == "ident":
                    args.append(self.next())
                self.expect("punct", ")")
                if kind == "trivial":
                    if len(args) != 1 or args[0].value not in T.edges:
                        raise ParseError(
                            "trivial(...) takes one target edge",
                            kind_tok.line,
                            kind_tok.column,
                        )
                    node_spec[u] = ("trivial", (args[0].value,))
                elif kind == "nodes":
                    for tok in args:
                        if tok.value not in T.nodes:
                            raise ParseError(
                                f"unknown target node {tok.value!r}",
                                tok.line,
                                tok.column,
                            )
                    node_spec[u] = ("nodes", tuple(t.value for t in args))
                else:
                    raise ParseError(
                        "node image must be trivial(...) or nodes(...)",
                        kind_tok.line,
                        kind_tok.column,
                    )
            else:
                raise ParseError(
                    "expected 'edge' or 'node'", what.line, what.column
                )
            self.expect("punct", ";")
        close = self.peek()
        self.expect("punct", "}")
        missing = [x for x in S.edges if x not in edge_map]
        if missing:
            raise ParseError(
                f"edge images missing for {missing!r}", close.line, close.column
            )
        missing = [b for b in S.nodes if b not in node_spec]
        if missing:
            raise ParseError(
                f"node images missing for {missing!r}", close.line, close.column
            )
        node_images = {}
        for b, (kind, args) in node_spec.items():
            if kind == "trivial":
                node_images[b] = trivial_subtree(T, args[0])
            else:
                node_images[b] = subtree_from_nodes(T, args)
        try:
            phi = omega_morphism(S, T, edge_map, node_images)
        except (ValueError, PolytreeError) as exc:
            raise ParseError(
                f"not a tree morphism: {exc}", open_tok.line, open_tok.column
            ) from exc
        spec = {
            "source": src_name,
            "target": tgt_name,
            "edges": tuple(sorted(edge_map.items(), key=lambda kv: label_key(kv[0]))),
            "nodes": tuple(
                sorted(node_spec.items(), key=lambda kv: label_key(kv[0]))
            ),
        }
        return Entry("map", spec, phi)

    def presheaf_entry(self, entries: dict) -> Entry:
        self.expect("punct", "{")
        spec = {"nerve": None, "max-edges": None, "double": None}
        while self.peek().kind == "ident":
            key_tok = self.peek()
            key = self.ident()
            if key not in spec:
                raise ParseError(
                    f"unknown presheaf field {key!r}",
                    key_tok.line,
                    key_tok.column,
                )
            self.expect("punct", ":")
            val_tok = self.peek()
            val = self.ident()
            self.expect("punct", ";")
            if key == "max-edges":
                try:
                    spec[key] = int(val)
                except ValueError:
                    raise ParseError(
                        "max-edges takes an integer",
                        val_tok.line,
                        val_tok.column,
                    ) from None
            elif key == "nerve":
                if val not in entries or entries[val].kind not in (
                    "poly",
                    "tree",
                ):
                    raise ParseError(
                        f"{val!r} is not a defined endofunctor",
                        val_tok.line,
                        val_tok.column,
                    )
                spec[key] = val
            else:
                if val not in entries or entries[val].kind != "tree":
                    raise ParseError(
                        f"{val!r} is not a defined tree",
                        val_tok.line,
                        val_tok.column,
                    )
                spec[key] = val
        close = self.peek()
        self.expect("punct", "}")
        if spec["nerve"] is None or spec["max-edges"] is None:
            raise ParseError(
                "presheaf needs nerve: and max-edges:", close.line, close.column
            )
        return Entry("presheaf", spec, None)


def _build_collection(spec: dict) -> Collection:
    colours = FinSet(spec["colours"])
    by_arity = {}
    for op, inputs, out, fixed in spec["ops"]:
        by_arity.setdefault(len(inputs), []).append((op, inputs, out, fixed))
    import itertools

    ops, projections, generators = {}, {}, {}
    for n, group in sorted(by_arity.items()):
        elements = []
        info = {}
        for op, inputs, out, fixed in group:
            subgroup = _generated_subgroup(n, fixed)
            seen = set()
            for perm in itertools.permutations(range(n)):
                coset = frozenset(_compose_perm(h, perm) for h in subgroup)
                rep = min(coset)
                if rep in seen:
                    continue
                seen.add(rep)
                elements.append((op, rep))
            info[op] = (inputs, out, subgroup)
        ops[n] = FinSet(tuple(elements))

        def proj(i, info=info):
            def read(x):
                inputs, out, _h = info[x[0]]
                return out if i == n else inputs[x[1][i]]

            return read

        projections[n] = tuple(
            FinMap.make(ops[n], colours, proj(i)) for i in range(n + 1)
        )
        gens = []
        for idx in range(max(n - 1, 0)):
            tau = _transposition(n, idx)

            def act(x, tau=tau, info=info):
                _i, _o, subgroup = info[x[0]]
                moved = _compose_perm(x[1], tau)
                return (x[0], min(_compose_perm(h, moved) for h in subgroup))

            gens.append(FinMap.make(ops[n], ops[n], act))
        generators[n] = tuple(gens)
    return Collection(colours, ops, projections, generators)


def _generated_subgroup(n: int, perms) -> frozenset:
    identity = tuple(range(n))
    group = {identity}
    frontier = [identity]
    while frontier:
        new_frontier = []
        for g in frontier:
            for p in perms:
                h = _compose_perm(g, p)
                if h not in group:
                    group.add(h)
                    new_frontier.append(h)
        frontier = new_frontier
    return frozenset(group)


def parse(text: str) -> Document:
    return _Parser(text).document()


def render(doc: Document) -> str:
    """Canonical text for a document; parse(render(doc)) round-trips."""
    lines = []
    for name, entry in doc.entries.items():
        if entry.kind in ("poly", "tree"):
            spec = entry.spec
            lines.append(f"{spec['keyword']} {name} {{")
            lines.append("  edges: " + " ".join(spec["edges"]) + " ;")
            for node, inputs, out in spec["nodes"]:
                lines.append(
                    f"  node {node} : [" + ", ".join(inputs) + f"] -> {out} ;"
                )
            lines.append("}")
        elif entry.kind == "coll":
            spec = entry.spec
            lines.append(f"coll {name} {{")
            lines.append("  colours: " + " ".join(spec["colours"]) + " ;")
            for op, inputs, out, fixed in spec["ops"]:
                text = f"  op {op} : (" + ", ".join(inputs) + f") -> {out}"
                if fixed:
                    text += " fixed-by:" + "".join(
                        " (" + " ".join(str(i) for i in perm) + ")"
                        for perm in fixed
                    )
                lines.append(text + " ;")
            lines.append("}")
        elif entry.kind == "map":
            spec = entry.spec
            lines.append(
                f"map {name} : {spec['source']} -> {spec['target']} {{"
            )
            for x, y in spec["edges"]:
                lines.append(f"  edge {x} -> {y} ;")
            for u, (kind, args) in spec["nodes"]:
                lines.append(f"  node {u} -> {kind}(" + " ".join(args) + ") ;")
            lines.append("}")
        else:
            spec = entry.spec
            lines.append(f"presheaf {name} {{")
            lines.append(f"  nerve: {spec['nerve']} ;")
            lines.append(f"  max-edges: {spec['max-edges']} ;")
            if spec["double"] is not None:
                lines.append(f"  double: {spec['double']} ;")
            lines.append("}")
        lines.append("")
    return "\n".join(lines)


# presheaf realisation -----------------------------------------------------


def _build_presheaf(doc: Document, entry: Entry) -> FinitePresheaf:
    spec = entry.spec
    P = doc.get(spec["nerve"]).value
    if isinstance(P, Tree):
        P = P.underlying
    X = nerve_N0(P, spec["max-edges"])
    if spec["double"] is None:
        return X
    target = doc.get(spec["double"]).value
    site = X.site
    index = None
    for i in range(len(site.objects)):
        if canonical_form(site.tree_of(i)) == canonical_form(target):
            index = i
            break
    if index is None:
        raise PolytreeError("doubled tree class is beyond the truncation")
    return _double_value(X, index)


def _double_value(X: FinitePresheaf, i: int) -> FinitePresheaf:
    """Duplicate one element of X at object i, copying its restrictions.

    The object must have no nontrivial automorphisms for this to stay a
    presheaf; the 2-node linear tree is the intended target."""
    if len(X.values[i]) == 0:
        raise PolytreeError("cannot double an empty value set")
    site = X.site
    original = tuple(X.values[i])[0]
    extra = ("doubled", original)
    values = dict(X.values)
    values[i] = FinSet(tuple(X.values[i]) + (extra,))
    action = {}
    for (a, b, k), fmap in X.action.items():
        if b != i and a != i:
            action[(a, b, k)] = fmap
            continue
        source, target = values[b], values[a]
        arrow = site.homs[(a, b)][k]
        is_identity_arrow = a == b and all(
            arrow.a0(x) == x for x in site.tree_of(a).edges
        )

        def mapped(v, fmap=fmap, a=a, b=b, is_id=is_identity_arrow):
            if b == i and v == extra:
                if is_id:
                    return extra
                return fmap(original)
            return fmap(v)

        action[(a, b, k)] = FinMap.make(source, target, mapped)
    return FinitePresheaf(site, values, action)


# commands -----------------------------------------------------------------


def _tree_summary(T: Tree) -> dict:
    return {
        "edges": len(T.edges),
        "nodes": len(T.nodes),
        "leaves": len(T.leaves),
    }


def _dot(T: Tree, name: str) -> str:
    """DOT rendering; the left-to-right placement chosen by the layout tool
    carries no meaning, only the incidences do."""
    lines = [
        "// planar placement in this drawing carries no semantics;",
        "// only the incidence structure is meaningful.",
        f"digraph {name} {{",
        "  rankdir=BT;",
        "  node [shape=circle];",
    ]
    for b in T.nodes:
        lines.append(f'  "{b}" [label="{b}"];')
    stubs = []
    for x in T.edges:
        above = T.node_with_output(x)
        below_mark = T.input_at(x)
        below = None if below_mark is None else T.underlying.p(below_mark)
        if above is None:
            stub = f"leaf_{len(stubs)}"
            stubs.append(stub)
            lines.append(f'  "{stub}" [shape=point, label=""];')
            upper = stub
        else:
            upper = str(above)
        if below is None:
            stub = "root_out"
            if stub not in stubs:
                stubs.append(stub)
                lines.append(f'  "{stub}" [shape=point, label=""];')
            lower = stub
        else:
            lower = str(below)
        lines.append(f'  "{upper}" -> "{lower}" [label="{x}"];')
    lines.append("}")
    return "\n".join(lines)


def _as_tree(entry: Entry) -> Tree:
    if entry.kind == "tree":
        return entry.value
    return certify_tree(entry.value)


def run(doc: Document, command: str, names: list, options: dict):
    """Execute one command.  Returns (text report, json payload, exit code)."""
    payload = {"schema_version": SCHEMA_VERSION, "command": command}
    max_edges = options.get("max_edges")
    max_nodes = options.get("max_nodes")

    if command == "validate":
        entry = doc.get(names[0])
        if entry.kind == "tree":
            T = entry.value
        else:
            try:
                T = certify_tree(entry.value)
            except TreeAxiomError as exc:
                payload.update(
                    {"ok": False, "axiom": exc.axiom, "detail": str(exc)}
                )
                return (
                    f"not a tree: {exc}",
                    payload,
                    1,
                )
        info = _tree_summary(T)
        payload.update({"ok": True, **info})
        return (
            f"tree: OK, {info['edges']} edges, {info['nodes']} nodes, "
            f"{info['leaves']} leaves",
            payload,
            0,
        )

    if command == "subtrees":
        T = _as_tree(doc.get(names[0]))
        subs = enumerate_subtrees(T)
        listing = [sorted(sub.edge_set, key=label_key) for sub in subs]
        payload.update({"count": len(subs), "subtrees": listing})
        text = f"{len(subs)} subtrees"
        if not options.get("count_only"):
            text += "\n" + "\n".join(
                "  {" + " ".join(str(x) for x in edges) + "}"
                for edges in listing
            )
        return text, payload, 0

    if command == "graft":
        upper = _as_tree(doc.get(names[0]))
        lower = _as_tree(doc.get(names[1]))
        leaf = names[2]
        result = canonical_relabel(graft(upper, lower, leaf).tree)
        info = _tree_summary(result)
        payload.update({"ok": True, **info, "edges_list": list(result.edges)})
        return (
            f"grafted tree: {info['edges']} edges, {info['nodes']} nodes, "
            f"{info['leaves']} leaves",
            payload,
            0,
        )

    if command == "prune":
        T = _as_tree(doc.get(names[0]))
        sub = prune(T, names[1])
        edges = sorted(sub.edge_set, key=label_key)
        payload.update({"edges_list": [str(x) for x in edges]})
        return (
            "pruned subtree edges: " + " ".join(str(x) for x in edges),
            payload,
            0,
        )

    if command == "contract":
        T = _as_tree(doc.get(names[0]))
        result, _phi = contract(T, names[1])
        info = _tree_summary(result)
        payload.update({"ok": True, **info})
        return (
            f"contracted tree: {info['edges']} edges, {info['nodes']} nodes",
            payload,
            0,
        )

    if command == "hom":
        S = _as_tree(doc.get(names[0]))
        T = _as_tree(doc.get(names[1]))
        morphisms = hom_omega(S, T)
        edge_maps = [
            [[str(x), str(y)] for x, y in phi.edge_pairs] for phi in morphisms
        ]
        payload.update({"count": len(morphisms), "edge_maps": edge_maps})
        return f"{len(morphisms)} morphisms", payload, 0

    if command == "factor":
        phi = doc.get(names[0], kinds=("map",)).value
        surj, generic, free = triple_factor(phi)
        stages = {
            "surjection_middle_edges": len(surj.target.edges),
            "generic_middle_edges": len(generic.target.edges),
            "deleted_nodes": sum(
                1 for _b, sub in surj.node_pairs if sub.is_trivial()
            ),
        }
        payload.update(stages)
        return (
            "triple factorisation: surjection deletes "
            f"{stages['deleted_nodes']} nodes, boundary-preserving middle has "
            f"{stages['generic_middle_edges']} edges",
            payload,
            0,
        )

    if command == "enumerate-trees":
        if max_edges is None:
            raise PolytreeError("enumerate-trees needs --max-edges")
        classes = undecorated_tree_classes(max_edges)
        counts = {}
        for T in classes:
            counts[len(T.edges)] = counts.get(len(T.edges), 0) + 1
        payload.update(
            {
                "total": len(classes),
                "by_edges": [[k, counts[k]] for k in sorted(counts)],
            }
        )
        text = f"{len(classes)} tree classes\n" + "\n".join(
            f"  {k} edges: {counts[k]}" for k in sorted(counts)
        )
        return text, payload, 0

    if command == "enumerate-ptrees":
        entry = doc.get(names[0], kinds=("poly", "tree"))
        P = entry.value.underlying if entry.kind == "tree" else entry.value
        if max_edges is None and max_nodes is None:
            raise PolytreeError(
                "enumerate-ptrees needs --max-edges or --max-nodes"
            )
        classes = enumerate_ptrees(P, max_nodes=max_nodes, max_edges=max_edges)
        counts = {}
        for pt in classes.classes:
            counts[pt.edge_count()] = counts.get(pt.edge_count(), 0) + 1
        payload.update(
            {
                "total": len(classes.classes),
                "by_edges": [[k, counts[k]] for k in sorted(counts)],
            }
        )
        text = f"{len(classes.classes)} classes\n" + "\n".join(
            f"  {k} edges: {counts[k]}" for k in sorted(counts)
        )
        return text, payload, 0

    if command == "automorphisms":
        T = _as_tree(doc.get(names[0]))
        autos = automorphisms(T)
        payload.update({"count": len(autos)})
        return f"{len(autos)} automorphisms", payload, 0

    if command == "free-monad":
        entry = doc.get(names[0], kinds=("poly", "tree"))
        if entry.kind == "tree":
            fm = free_monad(entry.value)
        else:
            if max_edges is None and max_nodes is None:
                raise PolytreeError(
                    "free-monad on an endofunctor needs a bound"
                )
            fm = free_monad(
                entry.value, max_nodes=max_nodes, max_edges=max_edges
            )
        laws = check_monad_laws(fm)
        payload.update(
            {
                "classes": len(fm.carrier.p1),
                "marked": len(fm.carrier.p2),
                "laws": laws,
            }
        )
        text = (
            f"carrier: {len(fm.carrier.p1)} classes, "
            f"{len(fm.carrier.p2)} marked; laws: "
            + ("ok" if laws else "FAIL")
        )
        return text, payload, 0 if laws else 1

    if command == "compose":
        P = doc.get(names[0], kinds=("poly", "tree")).value
        Q = doc.get(names[1], kinds=("poly", "tree")).value
        P = P.underlying if isinstance(P, Tree) else P
        Q = Q.underlying if isinstance(Q, Tree) else Q
        R = compose(P, Q)
        payload.update({"nodes": len(R.p1), "marked": len(R.p2)})
        return (
            f"composite: {len(R.p1)} nodes, {len(R.p2)} marked inputs",
            payload,
            0,
        )

    if command == "nerve":
        entry = doc.get(names[0], kinds=("poly", "tree"))
        P = entry.value.underlying if entry.kind == "tree" else entry.value
        if max_edges is None:
            raise PolytreeError("nerve needs --max-edges")
        X = nerve_N0(P, max_edges)
        sizes = [len(X.values[i]) for i in range(len(X.site.objects))]
        payload.update({"value_sizes": sizes})
        return (
            "nerve value sizes: " + " ".join(str(s) for s in sizes),
            payload,
            0,
        )

    if command == "segal-check":
        entry = doc.get(names[0], kinds=("presheaf",))
        X = _build_presheaf(doc, entry)
        ok, witness = segal_check(X)
        payload.update({"ok": ok})
        if ok:
            return "segal: ok", payload, 0
        index, reason = witness
        edges = list(X.site.tree_of(index).edges)
        payload.update({"witness_tree_edges": edges, "reason": reason})
        return (
            f"segal: FAIL at the class with edges {edges} ({reason})",
            payload,
            1,
        )

    if command == "flat-check":
        entry = doc.get(names[0], kinds=("coll", "poly"))
        C = entry.value if entry.kind == "coll" else nerve_R0(entry.value)
        ok, witness = is_flat(C)
        payload.update({"ok": ok})
        if ok:
            return "flat: ok", payload, 0
        arity, element, perm = witness
        payload.update(
            {
                "arity": arity,
                "element": str(element),
                "permutation": list(perm),
            }
        )
        return (
            f"flat: FAIL, arity-{arity} element {element!r} fixed by "
            f"{perm}",
            payload,
            1,
        )

    if command == "nerve-theorem-check":
        entry = doc.get(names[0], kinds=("presheaf",))
        X = _build_presheaf(doc, entry)
        verdict = nerve_theorem_check(X)
        payload.update({"ok": verdict.is_nerve, "reason": verdict.reason})
        if verdict.is_nerve:
            return "nerve theorem: IsPolynomialMonadNerve", payload, 0
        return f"nerve theorem: FAIL ({verdict.reason})", payload, 1

    if command == "export-dot":
        T = _as_tree(doc.get(names[0]))
        text = _dot(T, names[0])
        payload.update({"dot": text})
        return text, payload, 0

    raise PolytreeError(f"unknown command {command!r}")


# entry point --------------------------------------------------------------


def _int_env(name: str):
    value = os.environ.get(name)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        return None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polytree",
        description="polynomial endofunctors and trees",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("names", nargs="*")
    parser.add_argument("-f", "--file", help="document file (default: stdin)")
    parser.add_argument(
        "--max-edges", type=int, default=_int_env("POLYTREE_MAX_EDGES")
    )
    parser.add_argument(
        "--max-nodes", type=int, default=_int_env("POLYTREE_MAX_NODES")
    )
    parser.add_argument("--json", action="store_true")
    parser.add_argument("--quiet", action="store_true")
    parser.add_argument("--count", action="store_true", dest="count_only")
    parser.add_argument("--out")
    args = parser.parse_args(argv)

    try:
        if args.file is not None:
            with open(args.file, encoding="utf-8") as handle:
                text = handle.read()
        else:
            text = sys.stdin.read()
        doc = parse(text)
        report, payload, code = run(
            doc,
            args.command,
            args.names,
            {
                "max_edges": args.max_edges,
                "max_nodes": args.max_nodes,
                "count_only": args.count_only,
            },
        )
    except ParseError as exc:
        if not args.quiet:
            print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        NotALeaf,
        NotInnerEdge,
        NotFlat,
        PolytreeError,
        IndexError,
        OSError,
    ) as exc:
        if not args.quiet:
            print(f"error: {exc}", file=sys.stderr)
        return 2

    output = json.dumps(payload, sort_keys=True) if args.json else report
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(output + "\n")
    elif not args.quiet:
        print(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
