"""Plain sequents and the infinitary rules, traces and derived rules.

A plain sequent is a frozenset of At-formulas, read as a disjunction.
"""
from dataclasses import dataclass

from .syntax import (PropLit, NomLit, Or, And, Box, Dia, At, FIX, closure, key,
                     nominals, show, unfold)

TAG_ORDER = {"and": 0, "or": 1, "glob": 2, "eta": 3, "eq": 4, "com": 5}
RESERVED = "_n"


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class InfRule:
    tag: str
    principal: object = None
    side: object = None
    nominal: str = None


@dataclass(frozen=True)
class OriginalityContext:
    root: object            # the formula @r rho
    originals: frozenset

    @property
    def root_nominal(self):
        return self.root.nom


def make_context(rho, root_nom=None):
    used = nominals(rho)
    if any(n.startswith(RESERVED) for n in used):
        raise ValueError(f"nominals starting with {RESERVED} are reserved")
    if root_nom is None:
        root_nom = "r"
        k = 0
        while root_nom in used:
            root_nom = f"r{k}"
            k += 1
    if root_nom in used:
        raise ValueError(f"root nominal {root_nom} occurs in the formula")
    root = At(root_nom, rho)
    return OriginalityContext(root, frozenset(nominals(root)))


def seq_key(gamma):
    return tuple(sorted(key(f) for f in gamma))


def show_seq(gamma):
    return ", ".join(sorted(show(f) for f in gamma))


def seq_nominals(gamma):
    out = set()
    for f in gamma:
        out |= nominals(f)
    return out


def is_neq(f):
    return isinstance(f, At) and isinstance(f.body, NomLit) and not f.body.pos


def is_ground(f, ctx):
    return isinstance(f, At) and isinstance(f.body, NomLit) and f.body.name in ctx.originals


def is_literal(f):
    return isinstance(f, (PropLit, NomLit))


def complement(lit):
    return type(lit)(lit.name, not lit.pos)


def is_axiom(gamma):
    gamma = frozenset(gamma)
    if len(gamma) == 1:
        (f,) = gamma
        return isinstance(f, At) and f.body == NomLit(f.nom, True)
    if len(gamma) == 2:
        f, g = sorted(gamma, key=key)
        return (f.nom == g.nom and is_literal(f.body)
                and g.body == complement(f.body))
    return False


def find_axiom(gamma):
    """A sub-sequent of gamma that is an axiom, or None."""
    for f in sorted(gamma, key=key):
        if isinstance(f, At) and f.body == NomLit(f.nom, True):
            return frozenset([f])
        if isinstance(f, At) and is_literal(f.body):
            g = At(f.nom, complement(f.body))
            if g in gamma:
                return frozenset([f, g])
    return None


def _need(cond, msg):
    if not cond:
        raise RuleError(msg)


def expected_premises(concl, rule):
    """Premises prescribed for every rule except Mod and Weak."""
    f = rule.principal
    _need(f in concl, f"principal {show(f) if f is not None else None} not in conclusion")
    t = rule.tag
    if t == "and":
        _need(isinstance(f.body, And), "principal is not a conjunction")
        return [concl | {At(f.nom, f.body.left)}, concl | {At(f.nom, f.body.right)}]
    if t == "or":
        _need(isinstance(f.body, Or), "principal is not a disjunction")
        return [concl | {At(f.nom, f.body.left), At(f.nom, f.body.right)}]
    if t == "glob":
        _need(isinstance(f.body, At), "principal is not of the form @i@j F")
        return [concl | {f.body}]
    if t == "eta":
        _need(isinstance(f.body, FIX), "principal is not a fixpoint formula")
        return [concl | {At(f.nom, unfold(f.body))}]
    if t == "com":
        _need(is_neq(f), "principal is not an inequality")
        return [concl | {At(f.body.name, NomLit(f.nom, False))}]
    if t == "eq":
        s = rule.side
        _need(s in concl, "side formula not in conclusion")
        _need(is_neq(s), "side formula is not an inequality")
        _need(s.nom == f.nom, "side formula does not start with the principal's nominal")
        return [concl | {At(s.body.name, f.body)}]
    raise RuleError(f"unknown rule {t}")


def check_inf_instance(concl, rule, premises, ctx=None):
    """Raise RuleError unless the premises are exactly what the rule gives."""
    concl = frozenset(concl)
    premises = [frozenset(p) for p in premises]
    if rule.tag == "weak":
        _need(len(premises) == 1, "Weak takes one premise")
        _need(premises[0] <= concl, "Weak premise is not a subset of the conclusion")
        return True
    if rule.tag == "mod":
        _need(len(premises) == 1, "Mod takes one premise")
        f = rule.principal
        _need(f in concl, "principal not in conclusion")
        _need(isinstance(f.body, Box), "principal is not a box formula")
        j = rule.nominal
        _need(j is not None and j not in seq_nominals(concl), "Mod nominal is not fresh")
        p = premises[0]
        _need(concl | {At(j, f.body.body)} <= p, "Mod premise misses the box witness")
        dias = {g.body.body for g in concl if g.nom == f.nom and isinstance(g.body, Dia)}
        for g in p - concl:
            _need(g.nom == j and (g.body == f.body.body or g.body in dias),
                  f"Mod premise has unexpected {show(g)}")
        return True
    want = expected_premises(concl, rule)
    _need(len(premises) == len(want), f"{rule.tag} takes {len(want)} premise(s)")
    for n, (p, w) in enumerate(zip(premises, want)):
        _need(p == w, f"premise {n} does not match the {rule.tag} rule")
    return True


def is_repeating(concl, rule, premises):
    return all(frozenset(p) == frozenset(concl) for p in premises)


def trace_edge(concl, rule, k, frm, to, premises):
    """None if (frm, to) is not a trace step into premise k; otherwise a pair
    (True, x) where x is the unfolded variable or None."""
    if frm not in concl or to not in premises[k]:
        return None
    if frm == to:
        return (True, None)
    f = rule.principal
    t = rule.tag
    if frm != f and t != "mod":
        return None
    if t == "or" and to in (At(f.nom, f.body.left), At(f.nom, f.body.right)):
        return (True, None)
    if t == "and" and to == At(f.nom, (f.body.left, f.body.right)[k]):
        return (True, None)
    if t == "glob" and to == f.body:
        return (True, None)
    if t == "eq" and to == At(rule.side.body.name, f.body):
        return (True, None)
    if t in ("eta", "rec") and to == At(f.nom, unfold(f.body)):
        return (True, f.body.var)
    if t == "mod" and to.nom == rule.nominal:
        if frm == f and to.body == f.body.body:
            return (True, None)
        if frm.nom == f.nom and isinstance(frm.body, Dia) and to.body == frm.body.body:
            return (True, None)
    return None


def trace_step(concl, rule, k, frm, to, premises):
    return trace_edge(concl, rule, k, frm, to, premises) is not None


# ---------------------------------------------------------------- derived rules

def _instances(gamma, tags):
    for f in gamma:
        if not isinstance(f, At):
            continue
        b = f.body
        if "and" in tags and isinstance(b, And):
            yield InfRule("and", f)
        elif "or" in tags and isinstance(b, Or):
            yield InfRule("or", f)
        elif "glob" in tags and isinstance(b, At):
            yield InfRule("glob", f)
        elif "eta" in tags and isinstance(b, FIX):
            yield InfRule("eta", f)


def _pick(cands):
    cands.sort(key=lambda c: (key(c[0].principal), TAG_ORDER[c[0].tag],
                              [seq_key(p) for p in c[1]]))
    return cands[0] if cands else None


def deterministic_step(gamma, ctx=None):
    """The ≺-least progressing instance of and/or/Glob/eta, or None.

    An and-instance whose premise repeats the conclusion is not counted
    as progressing: one conjunct is already present."""
    gamma = frozenset(gamma)
    cands = []
    for rule in _instances(gamma, ("and", "or", "glob", "eta")):
        prem = expected_premises(gamma, rule)
        if any(p == gamma for p in prem):
            continue
        cands.append((rule, prem))
    return _pick(cands)


def ground_step(gamma, ctx):
    gamma = frozenset(gamma)
    assert deterministic_step(gamma, ctx) is None, "ground rule used before saturation"
    cands = []
    for f in gamma:
        if is_neq(f) and f.nom in ctx.originals and f.body.name in ctx.originals:
            rule = InfRule("com", f)
            prem = expected_premises(gamma, rule)
            if prem[0] != gamma:
                cands.append((rule, prem))
    eqs = []
    for s in gamma:
        if not is_neq(s) or s.body.name not in ctx.originals:
            continue
        for f in gamma:
            if f.nom == s.nom:
                rule = InfRule("eq", f, s)
                prem = expected_premises(gamma, rule)
                if prem[0] != gamma:
                    eqs.append((s.body.name, rule, prem))
    if eqs:
        least = min(i for i, _, _ in eqs)
        cands += [(r, p) for i, r, p in eqs if i == least]
    return _pick(cands)


def fresh_nominal(gamma):
    used = seq_nominals(gamma)
    k = 0
    while f"{RESERVED}{k}" in used:
        k += 1
    return f"{RESERVED}{k}"


def mod_premise(gamma, principal, j):
    i, phi = principal.nom, principal.body.body
    out = set(gamma) | {At(j, phi)}
    out |= {At(j, g.body.body) for g in gamma if g.nom == i and isinstance(g.body, Dia)}
    return frozenset(out)


def narrow_modal(gamma, principal, j, ctx):
    gamma = frozenset(gamma)
    if principal not in gamma or not isinstance(principal.body, Box):
        raise RuleError("principal is not a box formula of the sequent")
    if j in seq_nominals(gamma):
        raise RuleError(f"nominal {j} is not fresh")
    prem = mod_premise(gamma, principal, j)
    if is_ground(principal, ctx):
        return prem
    return frozenset(f for f in prem if f.nom in ctx.originals or f.nom == j)


# ---------------------------------------------------------------- invariants

def formula_bound(ctx):
    return len(closure(ctx.root)) + len(ctx.originals)


def invariant_violations(gamma, ctx):
    out = []
    orig = ctx.originals
    if any(nominals(f.body) - orig for f in gamma):
        out.append("only-original")
    if any(is_neq(f) and f.body.name not in orig for f in gamma):
        out.append("identity")
    if len(seq_nominals(gamma) - orig) > 1:
        out.append("narrow")
    bound = formula_bound(ctx)
    counts = {}
    for f in gamma:
        counts[f.nom] = counts.get(f.nom, 0) + 1
    if any(c > bound for c in counts.values()):
        out.append("bounded")
    return out


def saturate(gamma, ctx, branch=0):
    """Apply deterministic then ground steps until neither applies, taking
    premise `branch` of a conjunction.  Returns the final sequent and the
    rules used."""
    gamma = frozenset(gamma)
    bound = len(closure(ctx.root)) * len(seq_nominals(gamma) | ctx.originals) * 4
    used = []
    while True:
        step = deterministic_step(gamma, ctx) or ground_step(gamma, ctx)
        if step is None:
            return gamma, used
        rule, prem = step
        used.append(rule)
        gamma = prem[min(branch, len(prem) - 1)]
        assert len(used) <= bound, "saturation does not terminate (unguarded formula?)"
