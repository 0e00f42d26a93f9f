import io

import pytest

from hybridmu.cli import main
from hybridmu.proof import deserialize
from hybridmu.semantics import model_check, parse_model
from hybridmu.syntax import parse

LOOP = "world w\nedge w w\nprop p w\n"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out.splitlines(), err


@pytest.fixture
def write(tmp_path):
    def make(name, text):
        path = tmp_path / name
        path.write_text(text)
        return path
    return make


def test_parse(capsys, write):
    code, out, _ = run(capsys, "parse", write("f", "nu x. []x"))
    assert code == 0 and out == ["ok", "nu x. []x"]
    code, out, err = run(capsys, "parse", write("g", "mu x. x"))
    assert code == 2 and out == ["error"] and "unguarded occurrence of x" in err
    assert ":6:" in err
    code, out, _ = run(capsys, "parse", write("h", "p /\\ q").parent / "missing")
    assert code == 3 and out == ["error"]


def test_mc(capsys, write):
    m = write("m", LOOP)
    code, out, _ = run(capsys, "mc", m, "nu x.(p /\\ <>x)", "w")
    assert code == 0 and out == ["true"]
    code, out, _ = run(capsys, "mc", m, "mu x. <>x", "w")
    assert code == 0 and out[0] == "false"
    code, out, _ = run(capsys, "mc", m, "p", "v")
    assert code == 2 and out == ["error"]
    code, out, _ = run(capsys, "mc", m, "@'k p", "w")
    assert code == 2
    code, out, _ = run(capsys, "mc", write("bad", "edge a\n"), "p", "w")
    assert code == 2


def test_mc_certificate(capsys, write, tmp_path):
    m = write("m", "world w\n")
    code, out, _ = run(capsys, "mc", m, "mu x. <>x", "w", "--certificate")
    assert out == ["false", "fal w <>mu x. <>x", "fal w mu x. <>x"]
    cert = tmp_path / "cert"
    code, out, _ = run(capsys, "mc", m, "mu x. <>x", "w", "--certificate", "--out", cert)
    assert out == ["false"] and cert.read_text().count("\n") == 2


def test_prove_and_check(capsys, write, tmp_path):
    proof = tmp_path / "proof"
    code, out, _ = run(capsys, "prove", write("f", "p \\/ ~p"), "--out", proof)
    assert code == 0 and out == ["proved"]
    code, out, _ = run(capsys, "check", proof)
    assert code == 0 and out == ["accepted"]
    code, out, _ = run(capsys, "prove", write("g", "nu x. [](x \\/ []x)"), "--threads", "2")
    assert code == 0 and out[0] == "proved"
    assert deserialize("\n".join(out[1:]) + "\n").backedges


def test_prove_refuted(capsys, write, tmp_path):
    model = tmp_path / "model"
    code, out, _ = run(capsys, "prove", write("f", "p"), "--out", model)
    assert code == 1 and out[0] == "refuted" and out[1].startswith("world ")
    w = out[1].split()[1]
    assert not model_check(parse_model(model.read_text()), w, parse("p"))
    code, out, _ = run(capsys, "mc", model, "p", w)
    assert out == ["false"]


def test_prove_exhausted(capsys, write):
    code, out, _ = run(capsys, "prove", write("f", "nu x. [](x \\/ []x)"),
                       "--budget-steps", "3")
    assert code == 4 and out[0] == "exhausted"


def test_check_mutated(capsys, write, tmp_path):
    proof = tmp_path / "proof"
    run(capsys, "prove", write("f", "nu x. [](x \\/ []x)"), "--out", proof)
    text = proof.read_text()
    # one rule tag flipped to another unary rule
    bad = write("bad", text.replace("rule 0 rec 0 x.0", "rule 0 glob 0 x.0", 1))
    code, out, _ = run(capsys, "check", bad)
    assert code == 1 and out[0] == "rejected" and out[1].startswith("node 0:")
    bad = write("bad2", text.replace("backedge", "backedge x", 1))
    code, out, err = run(capsys, "check", bad)
    assert code == 2 and "malformed backedge" in err


def test_unfold(capsys, write, tmp_path):
    proof = tmp_path / "proof"
    run(capsys, "prove", write("f", "nu x. []x"), "--out", proof)
    code, out, _ = run(capsys, "unfold", proof, 0)
    assert code == 0 and out == ["ok", "0: |- @'r nu x. []x ^"]
    p = deserialize(proof.read_text())
    (leaf, target), = p.backedges.items()
    cycle = len(p.path(target, leaf)) - 1
    code, out, _ = run(capsys, "unfold", proof, target + 2 * cycle)
    lines = [line.split(": ", 1)[1] for line in out[1:]]
    assert len(lines) == target + 2 * cycle + 1
    assert lines[target:target + cycle] == lines[target + cycle:target + 2 * cycle]
    code, out, _ = run(capsys, "unfold", proof, -1)
    assert code == 2


def test_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("<>p \\/ []~p"))
    code, out, _ = run(capsys, "prove", "-")
    assert code == 0 and out[0] == "proved"
