import json

import pytest

from convtails.cli import EXIT_USAGE, main, read_config


def run(tmp_path, *argv):
    return main(list(argv) + ["--out", str(tmp_path)])


def test_subexp_holds_exit_0(tmp_path):
    assert run(tmp_path, "test", "subexp", "--law", "pareto(alpha=1.5)") == 0
    body = json.loads((tmp_path / "test_subexp.json").read_text())
    assert body["verdict"] == "holds"
    assert body["config"]["law"] == "pareto(alpha=1.5)"
    assert body["config"]["version"]


def test_longtail_exponential_exit_1(tmp_path):
    assert run(tmp_path, "test", "longtail", "--law", "exponential(lambda=1)") == 1


def test_precondition_exit_2(tmp_path):
    assert run(tmp_path, "lemma", "h3", "--h", "3") == 2


def test_closure_example(tmp_path):
    code = run(tmp_path, "theorem", "closure.S", "--F", "pareto(alpha=1)", "--G", "pareto(alpha=1)",
               "--p", "0.5")
    assert code == 0
    body = json.loads((tmp_path / "theorem_closure.S.json").read_text())
    assert body["details"]["sub_verdicts"] == ["holds"] * 4


@pytest.mark.parametrize("argv, needle", [
    (["theorem", "nope"], "long.add.5"),
    (["lemma", "nope"], "h3plus"),
    (["test", "longtail", "--law", "nope(a=1)"], "pareto"),
    (["test", "longtail"], "--law"),
    (["frobnicate"], "invalid choice"),
    ([], "usage"),
])
def test_usage_errors_exit_64(tmp_path, capsys, argv, needle):
    assert main(argv + (["--out", str(tmp_path)] if argv[:1] in (["test"], ["lemma"], ["theorem"]) else [])) == EXIT_USAGE
    assert needle in capsys.readouterr().err


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nF = pareto(alpha=1)\nG = pareto(alpha=1)\nx = 100, 1000\n")
    assert read_config(str(cfg))["x"] == "100, 1000"
    assert run(tmp_path, "conv-tail", "--config", str(cfg)) == 0
    text = (tmp_path / "conv_tail.csv").read_text()
    assert "# x=[100.0, 1000.0]" in text
    assert text.splitlines()[-2].startswith("100.0,0.0209190239")
    assert run(tmp_path, "conv-tail", "--config", str(cfg), "--x", "10") == 0
    assert "# x=[10.0]" in (tmp_path / "conv_tail.csv").read_text()
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(tmp_path, "conv-tail", "--config", str(bad)) == EXIT_USAGE


def test_outputs_are_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["mc", "conv-tail", "--F", "pareto(alpha=1)", "--G", "pareto(alpha=1)",
                     "--x", "10,100", "--n", "20000", "--seed", "7", "--out", str(d)]) == 0
        assert main(["test", "longtail", "--law", "pareto(alpha=1)", "--out", str(d)]) == 0
    for name in ("mc_conv_tail.csv", "test_longtail.json", "test_longtail.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert not [p for p in a.iterdir() if p.name.startswith(".tmp")]


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("CONVTAILS_OUT", str(tmp_path))
    assert main(["families", "dump-breakpoints", "3"]) == 0
    lines = (tmp_path / "counterexample_breakpoints.csv").read_text().splitlines()
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "n,x_n,y_n,G_tail_at_y_n"
    assert len(body) == 4


def test_svg_and_decompose(tmp_path):
    assert run(tmp_path, "test", "longtail", "--law", "pareto(alpha=1)", "--svg") == 0
    assert (tmp_path / "test_longtail.svg").read_text().startswith("<svg")
    code = run(tmp_path, "decompose", "--F", "pareto(alpha=1)", "--G", "pareto(alpha=1)",
               "--h", "50", "--x", "100")
    assert code == 0
    body = json.loads((tmp_path / "decompose.json").read_text())
    assert abs(body["rows"][0]["residual_three"]) < 1e-10


def test_construct_h_and_big_jump(tmp_path, capsys):
    assert run(tmp_path, "construct-h", "--law", "pareto(alpha=1)") == 0
    body = json.loads((tmp_path / "construct_h.json").read_text())
    assert body["h"]["levels"] > 1000
    assert run(tmp_path, "mc", "big-jump", "--law", "pareto(alpha=1)", "--x", "100",
               "--n", "10000", "--seed", "3") == 0
    assert "ratio" in (tmp_path / "mc_big_jump.csv").read_text()


def test_families_list(tmp_path, capsys):
    assert run(tmp_path, "families", "list") == 0
    assert "counterexample" in capsys.readouterr().out
