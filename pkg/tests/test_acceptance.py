"""Acceptance criteria.  Each test prints one PASS/FAIL line; a summary of
all of them is printed at the end of the run."""
import contextlib
import io
import random
import time

import pytest

from gen import random_formula, random_model
from mutate import mutate, plain_valid
from hybridmu.cli import main
from hybridmu.proof import check_proof, goodness, lasso_trace_oracle, serialize
from hybridmu.prover import Budget, Proved, Refuted, prove
from hybridmu.semantics import dump_model, eval_denotational, model_check
from hybridmu.syntax import Mu, Nu, closure, negate, parse, preorder, symbol_count

VALID = ["@'r(p \\/ ~p)", "'i == 'i", "@'i p \\/ @'i ~p", "<>p \\/ []~p", "nu x. []x",
         "nu x. [](x \\/ []x)", "(mu x.(p \\/ []x)) \\/ (nu y.(~p /\\ <>y))"]
INVALID = ["p", "<>p", "mu x. <>x", "mu x. []x", "nu y. <>y", "@'i p"]
PER_FORMULA_SECONDS = 5


@pytest.fixture
def criterion(record_property):
    def mark(n, ok, detail=""):
        record_property("criterion", n)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
        return ok
    return mark


def cli(*argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
        code = main([str(a) for a in argv])
    return code, out.getvalue()


_cache = {}


def timed_prove(text, threads=1):
    k = (text, threads)
    if k not in _cache:
        t = time.perf_counter()
        res = prove(parse(text), Budget(threads=threads))
        _cache[k] = (res, time.perf_counter() - t)
    return _cache[k]


def test_1_oracle_equivalence(criterion):
    r = random.Random(2024)
    t = time.perf_counter()
    mismatches = 0
    for _ in range(500):
        while True:
            f = random_formula(r, depth=4, binders=2)
            if sum(isinstance(g, (Mu, Nu)) for g in preorder(f)) <= 2:
                break
        M = random_model(r, max_worlds=6)
        w = r.choice(sorted(M.W))
        if model_check(M, w, f) != (w in eval_denotational(M, f)):
            mismatches += 1
    elapsed = time.perf_counter() - t
    ok = mismatches == 0 and elapsed < 60
    criterion(1, ok, f"{mismatches} mismatches, {elapsed:.1f}s")
    assert ok


def test_2_valid_corpus(criterion, tmp_path):
    bad = []
    for k, text in enumerate(VALID):
        res, secs = timed_prove(text)
        if not isinstance(res, Proved) or secs >= PER_FORMULA_SECONDS:
            bad.append(text)
            continue
        path = tmp_path / f"proof{k}"
        path.write_text(serialize(res.proof))
        code, out = cli("check", path)
        if code != 0 or out.splitlines()[0] != "accepted":
            bad.append(text)
    ok = not bad
    criterion(2, ok, f"failed: {bad}" if bad else f"{len(VALID)} proved and checked")
    assert ok


def test_3_invalid_corpus(criterion, tmp_path):
    bad = []
    for k, text in enumerate(INVALID):
        res, secs = timed_prove(text)
        if not isinstance(res, Refuted) or secs >= PER_FORMULA_SECONDS or len(res.model.W) > 4:
            bad.append(text)
            continue
        path = tmp_path / f"model{k}"
        path.write_text(dump_model(res.model))
        code, out = cli("mc", path, text, res.world)
        if code != 0 or out.splitlines()[0] != "false":
            bad.append(text)
    ok = not bad
    criterion(3, ok, f"failed: {bad}" if bad else f"{len(INVALID)} refuted and confirmed")
    assert ok


def test_4_complement_sanity(criterion):
    # a contingent formula and its negation are both refutable, so this
    # cannot hold for the contingent part of the corpus
    bad = []
    for text in VALID + INVALID:
        f = parse(text)
        a = prove(f)
        b = prove(negate(f))
        if {type(a), type(b)} != {Proved, Refuted}:
            bad.append(f"{text} ({type(a).__name__}/{type(b).__name__})")
    ok = not bad
    criterion(4, ok, "; ".join(bad))
    assert ok


def test_5_checker_robustness(criterion):
    silent = 0
    counts = []
    for k, text in enumerate(VALID):
        proof = timed_prove(text)[0].proof
        r = random.Random(100 + k)
        done = 0
        while done < 100:
            m = mutate(proof, r)
            if m is None or m[0] == proof:
                continue
            q, _ = m
            v = check_proof(q)
            if v.accepted:
                silent += not plain_valid(q)
            else:
                silent += v.node not in q.nodes
            done += 1
        counts.append(done)
    ok = silent == 0
    criterion(5, ok, f"{sum(counts)} mutants, {silent} silent misidentifications")
    assert ok


def test_6_back_edge_semantics(criterion):
    edges = bad = 0
    for text in VALID:
        proof = timed_prove(text)[0].proof
        for leaf in proof.backedges:
            edges += 1
            if goodness(proof, leaf) is None or not lasso_trace_oracle(proof, leaf):
                bad += 1
    ok = bad == 0 and edges > 0
    criterion(6, ok, f"{edges} back edges, {bad} bad")
    assert ok


def test_7_closure_bound(criterion):
    r = random.Random(7)
    bad = 0
    for _ in range(1000):
        f = random_formula(r, depth=5)
        bad += len(closure(f)) > symbol_count(f)
    ok = bad == 0
    criterion(7, ok, f"{bad} violations in 1000 formulas")
    assert ok


def test_8_calculus_invariants(criterion):
    violations = []
    for text in VALID + INVALID:
        res = timed_prove(text)[0]
        violations += res.stats.violations
    ok = not violations
    criterion(8, ok, f"{len(violations)} violations")
    assert ok


def test_9_determinism(criterion, tmp_path):
    diff = []
    for k, text in enumerate(VALID + INVALID):
        path = tmp_path / f"f{k}"
        path.write_text(text)
        runs = [cli("prove", path), cli("prove", path), cli("prove", path, "--threads", "4")]
        if runs[0] != runs[1] or runs[0] != runs[2]:
            diff.append(text)
    ok = not diff
    criterion(9, ok, f"differs: {diff}" if diff else "")
    assert ok
