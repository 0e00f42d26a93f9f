"""Proof search: proofs for valid formulas, countermodels for the rest.

Run with: python3 demos/proving.py
"""
from hybridmu.proof import check_proof, goodness, lasso_trace_oracle, serialize
from hybridmu.prover import Budget, Proved, Refuted, prove
from hybridmu.semantics import dump_model, model_check
from hybridmu.syntax import parse

for text in ["<>p \\/ []~p", "nu x. [](x \\/ []x)", "(mu x.(p \\/ []x)) \\/ (nu y.(~p /\\ <>y))",
             "nu y. <>y", "@'i p"]:
    f = parse(text)
    res = prove(f)
    print("==", text)
    if isinstance(res, Proved):
        p = res.proof
        print(f"proved: {len(p.nodes)} nodes, {len(p.backedges)} back edges,",
              "checker says", check_proof(p))
        for leaf, target in p.backedges.items():
            print(f"  back edge {leaf} -> {target}: good name {goodness(p, leaf)},",
                  "trace oracle", lasso_trace_oracle(p, leaf))
    elif isinstance(res, Refuted):
        print("refuted at world", res.world)
        print(dump_model(res.model), end="")
        print("model check:", model_check(res.model, res.world, f))
    else:
        print("gave up:", res.report)

# the proof of the greatest fixpoint formula with its names and resets
print(serialize(prove(parse("nu x. []x")).proof))

# a budget that is too small
print(prove(parse("nu x. [](x \\/ []x)"), Budget(max_steps=5)))
