"""Command line behaviour: output formats, exit codes, error routing."""

import json

import pytest

from tangles import Atom, Neg, instantiate, pretty
from tangles.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def chain_model(tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps({
        "worlds": ["w0", "w1", "w2"],
        "rel": [["w0", "w1"], ["w1", "w2"], ["w0", "w2"]],
        "val": {"p": ["w0", "w1"]},
    }))
    return str(path)


@pytest.fixture
def fork_model(tmp_path):
    path = tmp_path / "fork.json"
    path.write_text(json.dumps({
        "worlds": ["r", "x", "y"],
        "rel": [["r", "x"], ["r", "y"], ["x", "x"], ["y", "y"]],
    }))
    return str(path)


@pytest.fixture
def sierpinski_space(tmp_path):
    path = tmp_path / "sierpinski.json"
    path.write_text(json.dumps({
        "points": ["x", "y"],
        "opens": [[], ["x"], ["x", "y"]],
        "val": {"p": ["x"]},
    }))
    return str(path)


# ---------------------------------------------------------------------------
# fmt


def test_fmt_normalizes(capsys):
    code, out, _ = run(capsys, "fmt", "((p)) & (q | r)")
    assert code == 0
    assert out.strip() == "p & (q | r)"


def test_fmt_structured(capsys):
    code, out, _ = run(capsys, "fmt", "--format", "structured", "[]p -> q")
    assert code == 0
    assert json.loads(out) == {"atoms": ["p", "q"], "formula": "[]p -> q"}


def test_fmt_parse_error(capsys):
    code, out, err = run(capsys, "fmt", "p &")
    assert code == 2
    assert not out
    assert err.startswith("error:")


def test_formula_file(capsys, tmp_path):
    path = tmp_path / "phi.txt"
    path.write_text("[]p -> p\n")
    code, out, _ = run(capsys, "fmt", "--formula-file", str(path))
    assert code == 0
    assert out.strip() == "[]p -> p"
    # inline and file together, or neither, are usage errors
    assert run(capsys, "fmt", "p", "--formula-file", str(path))[0] == 2
    assert run(capsys, "fmt")[0] == 2


def test_no_subcommand_exits_with_usage():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# mc


def test_mc_text_and_exit(capsys, chain_model):
    code, out, _ = run(capsys, "mc", chain_model, "<>p")
    assert code == 1  # not true everywhere
    assert out.splitlines() == ["w0: true", "w1: false", "w2: false"]
    assert run(capsys, "mc", chain_model, "true")[0] == 0


def test_mc_world_exit(capsys, chain_model):
    assert run(capsys, "mc", chain_model, "<>p", "--world", "w0")[0] == 0
    assert run(capsys, "mc", chain_model, "<>p", "--world", "w1")[0] == 1
    assert run(capsys, "mc", chain_model, "<>p", "--world", "nope")[0] == 2


def test_mc_structured_deterministic(capsys, chain_model):
    code, first, _ = run(capsys, "mc", "--format", "structured", chain_model, "<>p")
    _, second, _ = run(capsys, "mc", "--format", "structured", chain_model, "<>p")
    assert first == second
    data = json.loads(first)
    assert data == {
        "extension": ["w0"],
        "formula": "<>p",
        "holds_everywhere": False,
    }


def test_mc_parses_formula_before_opening_model(capsys, tmp_path):
    missing = str(tmp_path / "never-written.json")
    code, _, err = run(capsys, "mc", missing, "p &")
    assert code == 2
    assert "No such file" not in err


def test_mc_rejects_bad_model_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "worlds": ["w0"], "rel": [], "val": {"p": ["ghost"]},
    }))
    code, _, err = run(capsys, "mc", str(path), "p")
    assert code == 2
    assert "ghost" in err or "valuation" in err


def test_mc_dot(capsys, chain_model):
    code, out, _ = run(capsys, "mc", "--format", "dot", chain_model, "p")
    assert out.startswith("digraph")


# ---------------------------------------------------------------------------
# tmc


def test_tmc(capsys, sierpinski_space):
    code, out, _ = run(capsys, "tmc", sierpinski_space, "<d>p")
    assert code == 1
    assert out.splitlines() == ["x: false", "y: true"]
    assert run(capsys, "tmc", sierpinski_space, "<d>p", "--world", "y")[0] == 0
    _, out, _ = run(capsys, "tmc", "--format", "structured", sierpinski_space, "<>p")
    assert json.loads(out)["extension"] == ["x", "y"]


def test_tmc_rejects_non_topology(capsys, tmp_path):
    path = tmp_path / "notopo.json"
    path.write_text(json.dumps({"points": ["a", "b"], "opens": [["a"]]}))
    assert run(capsys, "tmc", str(path), "p")[0] == 2


# ---------------------------------------------------------------------------
# translate


def test_translate_modes(capsys):
    _, out, _ = run(capsys, "translate", "--mode", "mu", "<t>{p}")
    assert out.strip() == "nu _g0. <>(p & _g0)"
    _, out, _ = run(capsys, "translate", "--mode", "d", "[]p")
    assert out.strip() == "p & [d]p"
    _, out, _ = run(capsys, "translate", "--mode", "star", "[]p")
    assert out.strip() == "nu _g0. p & []_g0"
    code, out, _ = run(
        capsys, "translate", "--mode", "mu", "--format", "structured", "<t>{p}"
    )
    assert json.loads(out) == {
        "input": "<t>{p}", "mode": "mu", "output": "nu _g0. <>(p & _g0)",
    }


def test_translate_fragment_error(capsys):
    code, _, err = run(capsys, "translate", "--mode", "star", "<t>{p}")
    assert code == 2
    assert "fragment" in err


# ---------------------------------------------------------------------------
# analyze


def test_analyze_fork(capsys, fork_model):
    code, out, _ = run(capsys, "analyze", fork_model, "--format", "structured")
    assert code == 0
    data = json.loads(out)
    assert data["worlds"] == 3
    assert data["transitive"] is True
    assert data["reflexive"] is False
    assert data["serial"] is True
    assert data["connected"] is True
    assert data["path_components"] == 1
    assert data["locally_1_connected"] is False
    assert data["min_local_connectedness"] == 2
    by_worlds = {tuple(c["worlds"]): c for c in data["clusters"]}
    assert by_worlds[("r",)]["degenerate"] is True
    assert by_worlds[("x",)]["rank"] == 1
    assert by_worlds[("r",)]["rank"] == 2


def test_analyze_text_and_dot(capsys, fork_model):
    _, out, _ = run(capsys, "analyze", fork_model)
    assert "locally_1_connected: False" in out
    assert "cluster rank 2: r degenerate" in out
    _, out, _ = run(capsys, "analyze", fork_model, "--format", "dot")
    assert out.startswith("digraph")


# ---------------------------------------------------------------------------
# filtrate / untangle


def test_filtrate(capsys, chain_model):
    code, out, _ = run(capsys, "filtrate", chain_model, "<>p")
    assert code == 0
    assert "mode: standard" in out
    code, out, _ = run(
        capsys, "filtrate", chain_model, "<>p", "--mode", "refined",
        "--format", "structured",
    )
    data = json.loads(out)
    assert data["mode"] == "refined"
    assert len(data["classes"]) == 3
    assert set(data["model"]) == {"worlds", "rel", "val"}


def test_untangle_ok(capsys, chain_model):
    code, out, _ = run(capsys, "untangle", chain_model, "<t>{p}")
    assert code == 0
    assert "reduction: ok" in out


def test_untangle_reflexive_mode_failure(capsys, chain_model):
    code, out, err = run(
        capsys, "untangle", chain_model, "<t>{p}", "<>true", "--reflexive",
        "--format", "structured",
    )
    assert code == 1
    assert "reduction failed" in err
    data = json.loads(out)
    assert data["reduction_ok"] is False
    assert data["reduction_failure"]["formula"] == "<t>{p}"
    assert data["reduction_failure"]["source_truth"] is False


def test_untangle_roots_from_file(capsys, chain_model, tmp_path):
    roots = tmp_path / "roots.txt"
    roots.write_text("<t>{p}\n<>true\n")
    code, out, _ = run(
        capsys, "untangle", chain_model, "--formula-file", str(roots)
    )
    assert code == 0
    assert "reduction: ok" in out
    # roots both inline and from a file is a usage error
    assert run(
        capsys, "untangle", chain_model, "p", "--formula-file", str(roots)
    )[0] == 2
    assert run(capsys, "untangle", chain_model)[0] == 2


# ---------------------------------------------------------------------------
# sat / validate


def test_sat_found(capsys):
    code, out, _ = run(
        capsys, "sat", "--profile", "K4t", "--max", "2",
        "--format", "structured", "<t>{p, ~p}",
    )
    assert code == 0
    data = json.loads(out)
    assert data["worlds"] == ["w0", "w1"]
    assert sorted(map(tuple, data["rel"])) == [
        ("w0", "w0"), ("w0", "w1"), ("w1", "w0"), ("w1", "w1"),
    ]
    assert data["val"] == {"p": ["w0"]}


def test_sat_not_found_and_budget(capsys):
    code, _, err = run(
        capsys, "sat", "--profile", "K4", "--max", "3", "<>true & []false"
    )
    assert code == 1
    assert "no K4 model within 3 worlds" in err
    code, _, err = run(
        capsys, "sat", "--profile", "K4", "--max", "6", "--budget", "100",
        "<>true & []false",
    )
    assert code == 3
    assert "exhausted" in err
    assert run(capsys, "sat", "--profile", "K9", "--max", "2", "p")[0] == 2


def test_validate(capsys, fork_model, chain_model):
    g1 = pretty(instantiate("G1", Atom("p"), Neg(Atom("p"))))
    code, out, _ = run(capsys, "validate", "--frame", fork_model, g1)
    assert code == 1
    assert out.strip() == "fails at r under p={x}"
    code, out, _ = run(capsys, "validate", "--frame", fork_model, "<><>p -> <>p")
    assert code == 0
    assert out.strip() == "valid (8 valuations)"
    code, out, _ = run(
        capsys, "validate", "--frame", fork_model, "--format", "structured", g1
    )
    data = json.loads(out)
    assert data == {
        "checked": 3,
        "valid": False,
        "witness_valuation": {"p": ["x"]},
        "witness_world": "r",
    }
    code, _, err = run(
        capsys, "validate", "--frame", chain_model, "--budget", "2",
        "p | q | ~p",
    )
    assert code == 3


# ---------------------------------------------------------------------------
# axioms / fixture


def test_axioms(capsys):
    _, out, _ = run(capsys, "axioms", "--schema", "4", "-f", "p")
    assert out.strip() == "<><>p -> <>p"
    _, out, _ = run(capsys, "axioms", "--schema", "Tt", "-s", "p, q")
    assert out.strip() == "p & q -> <t>{p, q}"
    _, braced, _ = run(capsys, "axioms", "--schema", "Tt", "-s", "{p, q}")
    assert braced == out
    _, out, _ = run(capsys, "axioms", "--schema", "Ind", "-s", "p", "-f", "q")
    assert "<t>{p}" in out
    code, out, _ = run(
        capsys, "axioms", "--schema", "G1", "--format", "structured"
    )
    assert json.loads(out)["schema"] == "G1"
    assert run(capsys, "axioms", "--schema", "Z")[0] == 2
    assert run(capsys, "axioms", "--schema", "Fix")[0] == 2


def test_fixture_figure3(capsys):
    code, out, _ = run(capsys, "fixture", "figure3", "--m", "0")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "worlds: a0 b0 b1"
    assert any(line.startswith("p0:") for line in lines)
    code, out, _ = run(capsys, "fixture", "figure3", "--m", "0", "--constraints")
    assert code == 0
    assert "E (<>p0 & <>r & <>g)" in out
    code, out, _ = run(
        capsys, "fixture", "figure3", "--m", "4", "--constraints",
        "--format", "structured",
    )
    data = json.loads(out)
    assert set(data) == {"model", "constraints"}
    assert len(data["constraints"]) == 6  # indices up to 4 // 3 == 1
    assert run(capsys, "fixture", "figure3", "--m", "-1")[0] == 2
