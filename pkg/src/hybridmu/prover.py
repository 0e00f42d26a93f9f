"""Proof search in the annotated calculus.

Each sequent is saturated with a fixed loop (deterministic rule, ground
rule, control trimming, Thinning, Reset); saturated sequents branch on the
narrow modal rule.  A branch closes on an axiom or on a repeat of an
ancestor label whose cycle has a good name.  When every choice fails the
failed branches are turned into a candidate countermodel, which is only
reported after model checking confirms it.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .annotation import (ASeq, Name, SafRule, ann_less, member_key, restrict, saf_premises,
                         show_aseq, trim_control)
from .calculus import (RuleError, deterministic_step, find_axiom, fresh_nominal,
                       ground_step, invariant_violations, is_ground, make_context)
from .proof import Proof, ProofNode, check_proof, is_axiom_label
from .semantics import KripkeModel, eval_denotational, model_check
from .syntax import At, Box, NomLit, Nu, PropLit, dependency_order, make_well_named

PLACEHOLDER = "_n"


@dataclass
class Budget:
    max_depth: int = 2000
    max_steps: int = 200000
    memo_cap: int = 100000
    threads: int = 1


@dataclass
class Stats:
    nodes: int = 0
    memo_size: int = 0
    violations: list = field(default_factory=list)

    def merge(self, other):
        self.nodes += other.nodes
        self.memo_size = max(self.memo_size, other.memo_size)
        self.violations += other.violations


@dataclass
class Proved:
    proof: Proof
    stats: Stats = None


@dataclass
class Refuted:
    model: KripkeModel
    world: str
    stats: Stats = None


@dataclass
class Exhausted:
    report: str
    stats: Stats = None


class _PNode:
    __slots__ = ("label", "rule", "children", "back")

    def __init__(self, label):
        self.label = label
        self.rule = None
        self.children = []
        self.back = None


class WorldRef:
    """A saturated sequent on which every choice failed."""
    __slots__ = ("key", "label", "succ")

    def __init__(self, key, label):
        self.key = key
        self.label = label
        self.succ = []      # (nominal, WorldRef)


@dataclass
class _Ok:
    node: _PNode


@dataclass
class _Fail:
    kind: str               # "refuted" or "exhausted"
    low: float = math.inf   # shallowest ancestor the failure depends on
    world: WorldRef = None
    report: str = ""


@dataclass
class _Frame:
    label: ASeq
    node: _PNode
    world: WorldRef = None


def canonical(label, ctx):
    """Label with its non-original nominal renamed to a placeholder."""
    ren = lambda f: f if f.nom in ctx.originals else At(PLACEHOLDER, f.body)
    return ASeq(label.control, frozenset((ren(f), b) for f, b in label.members))


def fresh_name(control, x):
    k = 0
    while Name(x, k) in control:
        k += 1
    return Name(x, k)


class Searcher:
    def __init__(self, ctx, order, budget):
        self.ctx = ctx
        self.order = order
        self.budget = budget
        self.memo = {}
        self.steps = 0
        self.stats = Stats()
        self.path = []
        self.onpath = {}
        self.parallel = budget.threads > 1

    # ------------------------------------------------------------ saturation

    def _pick(self, s, f):
        return min((m for m in s.members if m[0] == f), key=member_key)

    def sat_step(self, s):
        """Next saturation rule and its premises, or None if saturated."""
        plain = s.plain()
        det = deterministic_step(plain, self.ctx)
        if det:
            rule = det[0]
            m = self._pick(s, rule.principal)
            if rule.tag == "eta":
                fix = rule.principal.body
                x = fix.var
                # drop just the names that break "b <= x" for the principal,
                # from the control and from every annotation
                drop = set(m[1]) - set(restrict(m[1], x, self.order))
                if drop:
                    keep = lambda a: tuple(n for n in a if n not in drop)
                    r = ASeq(keep(s.control), frozenset((f, keep(b)) for f, b in s.members))
                    return SafRule("exp"), [r]
                if isinstance(fix, Nu):
                    srule = SafRule("rec", m, name=fresh_name(s.control, x))
                else:
                    srule = SafRule("eta", m)
            else:
                srule = SafRule(rule.tag, m)
            return srule, saf_premises(s, srule, self.order)
        g = ground_step(plain, self.ctx)
        if g:
            rule = g[0]
            side = self._pick(s, rule.side) if rule.side is not None else None
            srule = SafRule(rule.tag, self._pick(s, rule.principal), side)
            return srule, saf_premises(s, srule, self.order)
        ctl = trim_control(s.control, s.members)
        if ctl != s.control:
            return SafRule("exp"), [ASeq(ctl, s.members)]
        for m in sorted(s.members, key=member_key):
            for m2 in sorted(s.members, key=member_key):
                if m2[0] == m[0] and m2 != m and ann_less(m[1], m2[1], s.control, self.order):
                    rest = s.members - {m2}
                    return SafRule("thin"), [ASeq(trim_control(s.control, rest), rest)]
        for x in s.control:
            rule = SafRule("reset", name=x)
            try:
                return rule, saf_premises(s, rule, self.order)
            except RuleError:
                pass
        return None

    def axiom_chain(self, s):
        """Weak then Exp down to an axiom, if s contains one."""
        ax = find_axiom(s.plain())
        if ax is None:
            return None
        chain = []
        keep = frozenset(m for m in s.members if m[0] in ax)
        if keep != s.members:
            chain.append((SafRule("weak"), ASeq(s.control, keep)))
        final = ASeq((), frozenset((f, ()) for f in ax))
        if final != ASeq(s.control, keep):
            chain.append((SafRule("exp"), final))
        return chain

    def choices(self, s):
        """Narrow modal expansions: (principal, [(rule, label), ...])."""
        out = []
        plain = s.plain()
        j = fresh_nominal(plain)
        for m in sorted(s.members, key=member_key):
            f, b = m
            if not isinstance(f.body, Box):
                continue
            mem = set(s.members) | {(At(j, f.body.body), b)}
            mem |= {(At(j, g.body.body), c) for g, c in s.members
                    if g.nom == f.nom and type(g.body).__name__ == "Dia"}
            p1 = ASeq(s.control, frozenset(mem))
            steps = [(SafRule("mod", m, nominal=j), p1)]
            if not is_ground(f, self.ctx):
                keep = frozenset((g, c) for g, c in mem
                                 if g.nom in self.ctx.originals or g.nom == j)
                if keep != p1.members:
                    steps.append((SafRule("weak"), ASeq(s.control, keep)))
            last = steps[-1][1]
            ctl = trim_control(last.control, last.members)
            if ctl != last.control:
                steps.append((SafRule("exp"), ASeq(ctl, last.members)))
            out.append((m, steps))
        return out

    # ------------------------------------------------------------ search

    def push(self, label, node, world=None):
        self.path.append(_Frame(label, node, world))
        self.onpath.setdefault(label, []).append(len(self.path) - 1)

    def pop(self):
        fr = self.path.pop()
        lst = self.onpath[fr.label]
        lst.pop()
        if not lst:
            del self.onpath[fr.label]

    def good_name(self, a, label):
        common = set(label.control)
        resets = set()
        for fr in self.path[a:]:
            common &= set(fr.label.control)
            if fr.node.rule is not None and fr.node.rule.tag == "reset":
                resets.add(fr.node.rule.name)
        return common & resets

    def solve(self, s):
        depth = len(self.path)
        self.steps += 1
        self.stats.nodes += 1
        if self.steps > self.budget.max_steps:
            return _Fail("exhausted", report="step budget exhausted")
        if depth > self.budget.max_depth:
            return _Fail("exhausted", report="depth budget exhausted")
        bad = invariant_violations(s.plain(), self.ctx)
        if bad:
            self.stats.violations.append((show_aseq(s), bad))
        node = _PNode(s)
        if is_axiom_label(s):
            return _Ok(node)
        chain = self.axiom_chain(s)
        if chain:
            cur = node
            for rule, lab in chain:
                cur.rule = rule
                nxt = _PNode(lab)
                cur.children = [nxt]
                cur = nxt
            return _Ok(node)
        if s in self.onpath:
            for a in reversed(self.onpath[s]):
                if self.good_name(a, s):
                    node.back = self.path[a].node
                    return _Ok(node)
            a = self.onpath[s][0]
            world = next(fr.world for fr in self.path[a:] if fr.world is not None)
            return _Fail("refuted", low=a, world=world)
        key = canonical(s, self.ctx)
        if key in self.memo:
            return self.memo[key]
        res = self._expand(s, node, depth, key)
        if isinstance(res, _Fail) and res.kind == "refuted" and res.low >= depth:
            if len(self.memo) < self.budget.memo_cap:
                self.memo[key] = res
                self.stats.memo_size = max(self.stats.memo_size, len(self.memo))
        return res

    def _expand(self, s, node, depth, key):
        step = self.sat_step(s)
        if step is not None:
            rule, prems = step
            node.rule = rule
            self.push(s, node)
            try:
                for p in prems:
                    r = self.solve(p)
                    if isinstance(r, _Fail):
                        return r
                    node.children.append(r.node)
            finally:
                self.pop()
            return _Ok(node)
        world = WorldRef(key, s)
        options = self.choices(s)
        if not options:
            return _Fail("refuted", world=world)
        if self.parallel:
            self.parallel = False
            results = self._parallel(s, node, world, options)
        else:
            results = []
            for opt in options:
                r = self._try(s, node, world, opt)
                results.append(r)
                if isinstance(r[1], _Ok):
                    break
        for (rule, _), r in results:
            if isinstance(r, _Ok):
                node.rule = rule
                node.children = [r.node]
                return _Ok(node)
        fails = [r for _, r in results]
        if any(f.kind == "exhausted" for f in fails):
            rep = next(f.report for f in fails if f.kind == "exhausted")
            return _Fail("exhausted", report=rep)
        for (m, _), f in zip(options, fails):
            world.succ.append((m[0].nom, f.world))
        return _Fail("refuted", low=min(f.low for f in fails), world=world)

    def _try(self, s, node, world, opt):
        m, steps = opt
        node.rule = steps[0][0]
        self.push(s, node, world)
        head = _PNode(steps[0][1])
        cur, pushed = head, 1
        try:
            for rule, lab in steps[1:]:
                cur.rule = rule
                self.push(cur.label, cur)
                pushed += 1
                nxt = _PNode(lab)
                cur.children = [nxt]
                cur = nxt
            r = self.solve(cur.label)
        finally:
            for _ in range(pushed):
                self.pop()
        if isinstance(r, _Ok):
            if steps[1:]:
                # splice the solved subtree under the Weak/Exp chain
                par = head
                while par.children and par.children[0] is not cur:
                    par = par.children[0]
                if par is cur:
                    head = r.node
                else:
                    par.children = [r.node]
            else:
                head = r.node
            return (steps[0][0], None), _Ok(head)
        return (steps[0][0], None), r

    def _parallel(self, s, node, world, options):
        def run(opt):
            sub = Searcher(self.ctx, self.order, self.budget)
            sub.parallel = False
            sub.memo = dict(self.memo)
            sub.steps = self.steps
            for fr in self.path:
                sub.push(fr.label, fr.node, fr.world)
            # back edges may point at node; its rule is reset below
            r = sub._try(s, node, world, opt)
            return sub, r

        with ThreadPoolExecutor(max_workers=self.budget.threads) as pool:
            outs = list(pool.map(run, options))
        results = []
        for sub, r in outs:
            self.stats.merge(sub.stats)
            self.steps = max(self.steps, sub.steps)
            results.append(r)
            if isinstance(r[1], _Ok):
                break
        return results


# ---------------------------------------------------------------- countermodels

def extract_countermodel(root_world, ctx, searcher=None):
    """Model read off the failed, saturated branches reachable from
    root_world: worlds are classes of nominals under the inequalities
    that occur, edges come from modal expansions."""
    labels, succ = {}, {}
    todo = [root_world]
    seen = set()
    while todo:
        w = todo.pop()
        if id(w) in seen:
            continue
        seen.add(id(w))
        if searcher is not None:
            assert searcher.sat_step(w.label) is None, "branch is not saturated"
        labels.setdefault(w.key, w.label)
        succ.setdefault(w.key, set())
        for nom, child in w.succ:
            succ[w.key].add((nom, child.key))
            todo.append(child)
    keys = sorted(labels, key=lambda k: show_aseq(k))
    orig = ctx.originals
    parent = {}

    def find(e):
        while parent.get(e, e) != e:
            e = parent[e]
        return e

    def union(a, b):
        a, b = find(a), find(b)
        if a != b:
            parent[max(a, b)] = min(a, b)

    def ent(nom, k):
        return ("o", nom) if nom in orig else ("w", show_aseq(k))

    ents = {("o", o) for o in orig}
    for k in keys:
        for f, _ in labels[k].members:
            ents.add(ent(f.nom, k))
            if isinstance(f.body, NomLit) and not f.body.pos:
                union(ent(f.nom, k), ent(f.body.name, k))
    classes = {}
    for e in sorted(ents):
        classes.setdefault(find(e), []).append(e)
    name = {}
    fresh = 0
    for root in sorted(classes):
        members = classes[root]
        origs = sorted(n for t, n in members if t == "o")
        if origs:
            w = origs[0]
        else:
            w = f"_w{fresh}"
            fresh += 1
        for e in members:
            name[e] = w
    W = set(name.values())
    R = set()
    V = {}
    for k in keys:
        for nom, k2 in succ[k]:
            R.add((name[find(ent(nom, k))], name[find(("w", show_aseq(k2)))]))
        for f, _ in labels[k].members:
            if isinstance(f.body, PropLit) and not f.body.pos:
                V.setdefault(f.body.name, set()).add(name[find(ent(f.nom, k))])
    A = {o: name[find(("o", o))] for o in orig}
    M = KripkeModel(W, R, V, A)
    return M, A[ctx.root_nominal]


# ---------------------------------------------------------------- entry point

def _to_proof(root, ctx, order):
    nodes, backs = {}, {}
    ids = {}
    stack = [root]
    order_ids = []
    while stack:
        n = stack.pop()
        ids[id(n)] = len(order_ids)
        order_ids.append(n)
        stack.extend(reversed(n.children))
    for n in order_ids:
        nodes[ids[id(n)]] = ProofNode(n.label, n.rule, tuple(ids[id(c)] for c in n.children))
        if n.back is not None:
            backs[ids[id(n)]] = ids[id(n.back)]
    return Proof(ctx.root, order, nodes, 0, backs)


def prove(rho, budget=None, root_nominal=None):
    """Search for a proof of rho; returns Proved, Refuted or Exhausted."""
    budget = budget or Budget()
    rho = make_well_named(rho)
    ctx = make_context(rho, root_nominal)
    order = dependency_order(rho)
    searcher = Searcher(ctx, order, budget)
    start = ASeq((), frozenset([(ctx.root, ())]))
    res = searcher.solve(start)
    stats = searcher.stats
    if isinstance(res, _Ok):
        proof = _to_proof(res.node, ctx, order)
        verdict = check_proof(proof)
        if not verdict.accepted:
            raise AssertionError(f"prover produced an invalid proof: {verdict}")
        return Proved(proof, stats)
    if res.kind == "exhausted":
        return Exhausted(res.report, stats)
    M, w = extract_countermodel(res.world, ctx, searcher)
    if model_check(M, w, rho) or w in eval_denotational(M, rho):
        return Exhausted("extracted model does not falsify the formula", stats)
    return Refuted(M, w, stats)
