import json

import pytest

from polytree import ParseError
from polytree.cli import main, parse, render, run

DOC = """
# fixture document
tree T {
  edges: r a b c ;
  node u : [a, b] -> r ;
  node v : [c] -> a ;
}
tree L1 {
  edges: r a ;
  node u : [a] -> r ;
}
poly BAD {
  edges: r a ;
  node u : [a] -> r ;
  node v : [a] -> r ;
}
poly M {
  edges: c ;
  node n0 : [] -> c ;
  node n1 : [c] -> c ;
  node n2 : [c, c] -> c ;
}
map del : L1 -> L1 {
  edge r -> r ;
  edge a -> r ;
  node u -> trivial(r) ;
}
coll Comm {
  colours: c ;
  op m : (c, c) -> c fixed-by: (1 0) ;
}
presheaf NM { nerve: M ; max-edges: 3 ; }
presheaf XD { nerve: M ; max-edges: 3 ; double: L1 ; }
"""


@pytest.fixture(scope="module")
def doc():
    return parse(DOC)


@pytest.fixture()
def docfile(tmp_path):
    path = tmp_path / "doc.poly"
    path.write_text(DOC)
    return str(path)


def test_round_trip_is_stable(doc):
    text = render(doc)
    again = parse(text)
    assert render(again) == text


def test_parse_error_positions():
    with pytest.raises(ParseError) as err:
        parse("poly P {\n  edges: a a ;\n}")
    assert err.value.line == 2
    assert "duplicate edge" in str(err.value)
    with pytest.raises(ParseError):
        parse("tree P { edges: a b ; node u : [b] -> a ; node v : [b] -> a ; }")


def test_validate_and_exit_codes(docfile, capsys):
    assert main(["validate", "T", "-f", docfile]) == 0
    out = capsys.readouterr().out
    assert "4 edges" in out
    assert main(["validate", "BAD", "-f", docfile]) == 1
    assert "axiom 2" in capsys.readouterr().out
    assert main(["validate", "nosuch", "-f", docfile]) == 2


def test_json_output_has_schema_version(docfile, capsys):
    assert main(["validate", "T", "--json", "-f", docfile]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema_version"] == 1
    assert payload["ok"] is True


def test_quiet_suppresses_output(docfile, capsys):
    assert main(["validate", "T", "--quiet", "-f", docfile]) == 0
    assert capsys.readouterr().out == ""


def test_graft_prune_contract_hom(doc):
    text, payload, code = run(doc, "graft", ["L1", "T", "c"], {})
    assert code == 0 and payload["edges"] == 5
    text, payload, code = run(doc, "prune", ["T", "a"], {})
    assert payload["edges_list"] == ["a", "b", "r"]
    text, payload, code = run(doc, "contract", ["T", "a"], {})
    assert payload["nodes"] == 1
    text, payload, code = run(doc, "hom", ["L1", "T"], {})
    assert payload["count"] == 5


def test_factor_and_enumerations(doc):
    _t, payload, code = run(doc, "factor", ["del"], {})
    assert code == 0 and payload["deleted_nodes"] == 1
    _t, payload, _c = run(doc, "enumerate-trees", [], {"max_edges": 3})
    assert payload["by_edges"] == [[1, 2], [2, 2], [3, 5]]
    _t, payload, _c = run(doc, "enumerate-ptrees", ["M"], {"max_edges": 3})
    assert payload["by_edges"] == [[1, 2], [2, 2], [3, 6]]


def test_free_monad_and_compose(doc):
    _t, payload, code = run(doc, "free-monad", ["T"], {})
    assert code == 0 and payload["laws"] is True
    _t, payload, _c = run(doc, "compose", ["M", "M"], {})
    assert payload["nodes"] == 13


def test_presheaf_commands(doc):
    _t, payload, code = run(doc, "segal-check", ["NM"], {})
    assert code == 0
    text, payload, code = run(doc, "segal-check", ["XD"], {})
    assert code == 1 and "witness_tree_edges" in payload
    _t, payload, code = run(doc, "flat-check", ["Comm"], {})
    assert code == 1 and payload["permutation"] == [1, 0]
    _t, payload, code = run(doc, "flat-check", ["M"], {})
    assert code == 0
    _t, payload, code = run(doc, "nerve-theorem-check", ["NM"], {})
    assert code == 0
    _t, payload, code = run(doc, "nerve-theorem-check", ["XD"], {})
    assert code == 1


def test_export_dot(doc, tmp_path):
    text, payload, code = run(doc, "export-dot", ["T"], {})
    assert code == 0
    assert text.splitlines()[0].startswith("//")
    assert "placement" in text
    assert "digraph T" in text


def test_dot_out_flag(docfile, tmp_path, capsys):
    target = tmp_path / "t.dot"
    assert main(["export-dot", "T", "-f", docfile, "--out", str(target)]) == 0
    assert "digraph T" in target.read_text()
    assert capsys.readouterr().out == ""


def test_env_var_bounds(docfile, capsys, monkeypatch):
    monkeypatch.setenv("POLYTREE_MAX_EDGES", "3")
    assert main(["enumerate-trees", "-f", docfile]) == 0
    assert "9 tree classes" in capsys.readouterr().out


def test_nullary_collection_and_tree_keyword():
    doc2 = parse(
        "coll C { colours: a b ; op k : () -> a ; op m : (a, b) -> b ; }\n"
        "tree S { edges: r ; node u : [] -> r ; }\n"
    )
    _t, payload, code = run(doc2, "validate", ["S"], {})
    assert code == 0 and payload["nodes"] == 1
    _t, _p, code = run(doc2, "flat-check", ["C"], {})
    assert code == 0
    with pytest.raises(ParseError):
        parse("tree S { edges: r a ; node u : [a] -> a ; }")
