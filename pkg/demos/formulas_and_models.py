"""Formulas, models and model checking.

Run with: python3 demos/formulas_and_models.py
"""
from hybridmu.semantics import (KripkeModel, build_evaluation_game, dump_certificate,
                                eval_denotational, model_check, solve_parity)
from hybridmu.syntax import closure, negate, parse, show, unfold

# "p holds along some infinite path" and its dual
f = parse("nu x. (p /\\ <>x)")
print(show(f), "   negation:", show(negate(f)))
print("one unfolding:", show(unfold(f)))
print("closure:", [show(g) for g in closure(f)])

# nominals name single worlds, @'i jumps there
g = parse("@'i <>'j /\\ 'i != 'j")
print(show(g))

# a three-world model: a -> b -> b, c is a dead end
M = KripkeModel({"a", "b", "c"}, {("a", "b"), ("b", "b")},
                {"p": {"a", "b"}}, {"i": "a", "j": "b"})
print("worlds satisfying", show(f), "->", sorted(eval_denotational(M, f)))
for w in sorted(M.W):
    print(" ", w, model_check(M, w, f), model_check(M, w, g))

# model checking is a parity game; the winning regions come with strategies
ok, game, cert = model_check(M, "c", f, with_certificate=True)
print("c satisfies it:", ok)
print(dump_certificate(game, cert))

# the game can also be built and solved directly
game = build_evaluation_game(M, parse("mu x. <>x"))
print("mu x.<>x regions:", solve_parity(game).region)
