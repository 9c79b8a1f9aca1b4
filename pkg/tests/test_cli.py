import json

import pytest

from pretrans.cli import main
from pretrans.formula import parse, from_json


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


@pytest.fixture
def chain3(tmp_path):
    return write(tmp_path, "chain3.json", {"worlds": 3, "edges": [[0, 1], [1, 2]]})


@pytest.fixture
def chain_model(tmp_path):
    return write(tmp_path, "m.json", {"worlds": 3, "edges": [[0, 1], [1, 2]], "valuation": {"p0": [2]}})


def test_valid_scheme(chain3, capsys):
    assert main(["valid", "--frame", chain3, "--scheme", "Trans", "--n", "2"]) == 0
    assert capsys.readouterr().out.strip() == "valid"
    assert main(["valid", "--frame", chain3, "--scheme", "Trans", "--n", "1"]) == 1
    assert main(["valid", "--frame", chain3, "--scheme", "Trans", "--n", "1", "--bruteforce"]) == 1


def test_valid_json_has_refutation(chain3, capsys):
    assert main(["valid", "--frame", chain3, "--formula", "<><>p0 -> <>p0", "--json"]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data["valid"] is False and data["refutation"] == {"valuation": {"p0": [2]}, "world": 0}


def test_valid_logic(chain3):
    assert main(["valid", "--frame", chain3, "--logic", "K4_sigma", "--n", "2"]) == 0
    assert main(["valid", "--frame", chain3, "--logic", "K4"]) == 1


def test_bounds(capsys):
    assert main(["bounds", "--n", "2", "--psi", "2"]) == 0
    assert capsys.readouterr().out.strip() == "N=4 M=16 C_k4=546 C_gl=34"
    assert main(["bounds", "--n", "0", "--psi", "2"]) == 2


def test_parse_roundtrip(tmp_path, capsys):
    assert main(["parse", "--text", "<>p0 -> p0"]) == 0
    tree = json.loads(capsys.readouterr().out)
    assert from_json(tree) == parse("<>p0 -> p0")
    path = write(tmp_path, "tree.json", tree)
    assert main(["parse", "--in", path, "--render"]) == 0
    assert capsys.readouterr().out.strip() == "<>p0 -> p0"


def test_usage_errors():
    assert main([]) == 2
    assert main(["parse", "--text", "<>p0 ->"]) == 2
    assert main(["valid", "--frame", "/nonexistent.json", "--scheme", "Trans", "--n", "1"]) == 2
    assert main(["bounds", "--n", "x", "--psi", "1"]) == 2
    assert main(["valid", "--frame", "/nonexistent.json"]) == 2


def test_eval(chain_model, capsys):
    assert main(["eval", "--model", chain_model, "--formula", "<><>p0", "--world", "0"]) == 0
    assert main(["eval", "--model", chain_model, "--formula", "<><>p0"]) == 1


def test_frame_check(chain3, capsys):
    assert main(["frame-check", "--frame", chain3, "--n", "2", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["n_transitive"] and data["conversely_well_founded"]
    assert main(["frame-check", "--frame", chain3, "--logic", "K4"]) == 1


def test_filter_writes_artifacts(tmp_path, chain_model, capsys):
    trace, out, dot = (str(tmp_path / n) for n in ("t.json", "o.json", "o.dot"))
    code = main(["filter", "--model", chain_model, "--formula", "<><>p0", "--x", "0", "--n", "2",
                 "--trace", trace, "--out", out, "--dot", dot])
    assert code == 0
    assert json.loads(open(trace).read())["layers"] == [[0], [1], [2], []]
    # the kept model is readable as a model again
    assert main(["eval", "--model", out, "--formula", "<><>p0", "--world", "0"]) == 0
    assert "digraph" in open(dot).read()


def test_filter_gl_variant(tmp_path, capsys):
    m = write(tmp_path, "t.json", {"worlds": 3, "edges": [[0, 1], [1, 2], [0, 2]], "valuation": {"p0": [2]}})
    assert main(["filter", "--model", m, "--formula", "~<>p0", "--variant", "gl", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["root"] == 1 and data["selective"]


def test_filter_rejects_wrong_frame(tmp_path):
    m = write(tmp_path, "c.json", {"worlds": 2, "edges": [[0, 1], [1, 0]], "valuation": {"p0": [0]}})
    assert main(["filter", "--model", m, "--formula", "<><>p0", "--x", "0"]) == 2


def test_search_and_reload(tmp_path, capsys):
    out = str(tmp_path / "s.json")
    assert main(["search", "--logic", "wK4", "--formula", "<><>p0 -> <>p0", "--out", out, "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["verdict"] == "countermodel" and data["world"] == 0
    assert main(["eval", "--model", out, "--formula", "<><>p0 -> <>p0", "--world", "0"]) == 1
    assert main(["search", "--logic", "wK4", "--formula", "<><>p0 -> <>p0 | p0"]) == 1


def test_search_seed_determines_output(capsys):
    args = ["search", "--logic", "GL", "--formula", "<>p0 -> <><>p0", "--max-worlds", "5",
            "--max-frames", "40", "--exhaustive-up-to", "0", "--json"]
    outs = []
    for _ in range(2):
        main(args + ["--seed", "3"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_include(capsys):
    args = ["include", "--weak-logic", "K4_1n", "--weak-n", "3", "--strong-logic", "K4_1n"]
    assert main(args + ["--strong-n", "4"]) == 1
    assert main(["include", "--weak-logic", "K4_1n", "--weak-n", "5",
                 "--strong-logic", "K4_1n", "--strong-n", "3"]) == 0


def test_include_logic_file(tmp_path):
    spec = write(tmp_path, "l.json", {"name": "mine", "axioms": [{"scheme": "A4", "gamma": "<><>p0"}], "n": 1})
    assert main(["include", "--weak-logic", "wK4", "--strong-logic-file", spec]) == 0


def test_paths(tmp_path, capsys):
    m = write(tmp_path, "c.json", {"worlds": 2, "edges": [[0, 1], [1, 0]]})
    p = write(tmp_path, "p.json", [0, "top", 1, "top", 0])
    assert main(["paths", "--model", m, "--path", p, "--json"]) == 1
    assert json.loads(capsys.readouterr().out)["witness"] == [1, 0]
    p = write(tmp_path, "q.json", [0, "top", 1])
    assert main(["paths", "--model", m, "--path", p]) == 0
    f = write(tmp_path, "f.json", {"worlds": 4, "edges": [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]})
    g = write(tmp_path, "g.json", [[0, 1], [2, 3]])
    assert main(["paths", "--frame", f, "--grid", g, "--n", "1"]) == 0
    assert "i=0 i'=1 j=0" in capsys.readouterr().out
    bad = write(tmp_path, "b.json", [[1, 0], [2, 3]])
    assert main(["paths", "--frame", f, "--grid", bad, "--n", "1"]) == 2


def test_catalog(capsys):
    assert main(["catalog"]) == 0
    assert "GL_sigma" in capsys.readouterr().out
    assert main(["catalog", "--show", "GLn", "--n", "3", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["cwf"] is True and data["axioms"] == [{"scheme": "ALob", "beta": "<><>p0"}]


def test_threads_flag_and_env(monkeypatch, capsys):
    assert main(["bounds", "--n", "1", "--psi", "1", "--threads", "2"]) == 0
    assert main(["bounds", "--n", "1", "--psi", "1", "--threads", "0"]) == 2
