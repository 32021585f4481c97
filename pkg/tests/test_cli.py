import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from hyperstab.cli import EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, main
from hyperstab.graph import complete_graph, disjoint_union, format_tree, path_tree, save_graph, save_tree, star_tree

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def schema(name):
    return json.loads((SCHEMAS / f"{name}.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    k4 = tmp_path / "k4.el"
    save_graph(complete_graph(4), k4)
    k5s = tmp_path / "k5s.el"
    save_graph(disjoint_union([complete_graph(5, offset=5 * i) for i in range(4)]), k5s)
    k30 = tmp_path / "k30.el"
    save_graph(complete_graph(30), k30)
    p3 = tmp_path / "p3.tree"  # the path with three edges
    save_tree(path_tree(4), p3)
    p6 = tmp_path / "p6.tree"
    save_tree(path_tree(6), p6)
    return {"k4": k4, "k5s": k5s, "k30": k30, "p3": p3, "p6": p6, "dir": tmp_path}


def test_gen_then_contains(capsys, files):
    g = files["dir"] / "g.el"
    code, out, _ = run(capsys, "gen", "cliques", "--n", 9, "--d", 3, "--out", g)
    assert code == EXIT_OK and g.read_text().startswith("9 9")
    code, out, _ = run(capsys, "oracle", "contains", g, files["p3"])
    doc = json.loads(out)
    jsonschema.validate(doc, schema("contains"))
    assert code == EXIT_OK and doc["answer"] == "no"


def test_contains_yes(capsys, files):
    code, out, _ = run(capsys, "oracle", "contains", files["k4"], files["p3"])
    doc = json.loads(out)
    jsonschema.validate(doc, schema("contains"))
    assert doc["answer"] == "yes" and doc["embedding"]["validated"]


@pytest.mark.parametrize("mode", ["exact", "flow"])
def test_cutdense(capsys, files, mode):
    code, out, _ = run(capsys, "cutdense", mode, files["k4"])
    doc = json.loads(out)
    jsonschema.validate(doc, schema("cutdense"))
    assert code == EXIT_OK
    assert doc["q"] == ("1/1" if mode == "exact" else "3/80")


def test_decompose(capsys, files):
    code, out, _ = run(capsys, "decompose", files["k5s"], "--q", "1/2")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("decompose"))
    assert doc["num_deleted"] == 0 and len(doc["components"]) == 4


def test_cover(capsys, files):
    code, out, _ = run(capsys, "oracle", "cover", files["k4"])
    doc = json.loads(out)
    jsonschema.validate(doc, schema("cover"))
    assert doc["size"] == 3 and doc["optimal"]


def test_scan(capsys):
    code, out, err = run(capsys, "oracle", "scan", "--n", 5, "--d", 2)
    doc = json.loads(out)
    jsonschema.validate(doc, schema("scan"))
    assert doc["counterexamples"] == [] and "runtime" in err


@pytest.mark.parametrize("method", ["greedy", "expander", "cutdense"])
def test_embed_methods(capsys, files, method):
    code, out, _ = run(capsys, "embed", files["k30"], files["p6"], "--method", method, "--p", "1/32")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("embed"))
    assert code == EXIT_OK and doc["found"] and doc["embedding"]["validated"]


def test_embed_pieces(capsys, files):
    a = complete_graph(12)
    b = complete_graph(12, offset=11)
    host = files["dir"] / "chain.el"
    save_graph(a.union(b), host)
    spec = files["dir"] / "pieces.json"
    spec.write_text(json.dumps({"pieces": [list(range(12)), list(range(11, 23))], "tree": [[1, 0]], "root": 0,
                                "connectors": [[0, 1, 11]]}))
    tree = files["dir"] / "p8.tree"
    save_tree(path_tree(8), tree)
    code, out, _ = run(capsys, "embed", host, tree, "--method", "pieces", "--pieces", spec, "--delta-cap", 2)
    doc = json.loads(out)
    jsonschema.validate(doc, schema("embed"))
    assert code == EXIT_OK and doc["found"]


def test_embed_not_found(capsys, files):
    code, out, _ = run(capsys, "embed", files["k5s"], files["p6"], "--method", "expander")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("embed"))
    assert code == EXIT_INCONCLUSIVE and not doc["found"]


def test_embed_greedy_precondition(capsys, files):
    code, out, _ = run(capsys, "embed", files["k4"], files["p6"])
    assert code == EXIT_INCONCLUSIVE and "error" in json.loads(out)


def test_hyperstab_certificate(capsys, files):
    code, out, _ = run(capsys, "hyperstab", files["k5s"], files["p6"], "--eps", "0.5", "--delta-cap", 3,
                       "--seed", 7)
    doc = json.loads(out)
    jsonschema.validate(doc, schema("structure_result"))
    assert code == EXIT_OK and doc["outcome"] == "Certificate"


def test_hyperstab_embedding(capsys, files):
    code, out, _ = run(capsys, "hyperstab", files["k30"], files["p6"])
    doc = json.loads(out)
    jsonschema.validate(doc, schema("structure_result"))
    assert code == EXIT_OK and doc["outcome"] == "EmbeddingFound"


def test_hyperstab_inconclusive(capsys, files):
    k12 = files["dir"] / "k12.el"
    save_graph(complete_graph(12), k12)
    code, out, _ = run(capsys, "hyperstab", k12, files["p6"])
    doc = json.loads(out)
    jsonschema.validate(doc, schema("structure_result"))
    if doc["outcome"] == "Inconclusive":
        assert code == EXIT_INCONCLUSIVE and doc["report"]["hypothesis_failed"]
    else:
        assert code == EXIT_OK


def test_warnings_on_stderr(capsys, files):
    _, _, err = run(capsys, "hyperstab", files["k5s"], files["p6"])
    assert "warning: hierarchy" in err


def test_strict_hierarchy_is_usage_error(capsys, files):
    code, _, err = run(capsys, "hyperstab", files["k5s"], files["p6"], "--strict-hierarchy")
    assert code == EXIT_USAGE and "error" in err


def test_usage_errors(capsys, files):
    with pytest.raises(SystemExit) as exc:
        main(["cutdense", "fast", str(files["k4"])])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["hyperstab", str(files["k4"]), str(files["p6"]), "--bogus"])
    assert exc.value.code == EXIT_USAGE
    capsys.readouterr()
    bad = files["dir"] / "bad.el"
    bad.write_text("3 1\n0 0\n")
    code, _, err = run(capsys, "cutdense", "exact", bad)
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "cutdense", "exact", files["dir"] / "missing.el")
    assert code == EXIT_USAGE


def test_global_flags_after_subcommand(capsys, files):
    out_file = files["dir"] / "o.json"
    code, out, _ = run(capsys, "cutdense", "exact", files["k4"], "--out", out_file)
    assert code == EXIT_OK and out == "" and json.loads(out_file.read_text())["q"] == "1/1"


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "hyperstab.cli", *map(str, argv)], capture_output=True)


def test_byte_identical_runs(files):
    for argv in (["hyperstab", files["k5s"], files["p6"], "--seed", 7],
                 ["decompose", files["k5s"], "--q", "1/4", "--seed", 3],
                 ["embed", files["k30"], files["p6"], "--method", "cutdense", "--p", "1/32", "--seed", 2]):
        a, b = _cli(*argv), _cli(*argv)
        assert a.returncode == b.returncode == 0
        assert a.stdout == b.stdout and a.stdout
