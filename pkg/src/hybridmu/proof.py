"""Finite trees of annotated sequents with back edges: checking,
unfolding, a lasso trace oracle and a line-oriented file format."""
from dataclasses import dataclass, field

from .annotation import (ASeq, Name, SafRule, SAF_TAGS, ARITY, check_saf_instance,
                         member_key, parse_name, saf_trace_edge, show_aseq, show_word,
                         wellformed_problem)
from .calculus import OriginalityContext, RuleError, is_axiom
from .semantics import _sccs
from .syntax import At, ParseError, VariableOrder, dependencies, binders, Mu, nominals, parse, show


@dataclass(frozen=True)
class ProofNode:
    label: ASeq
    rule: SafRule = None
    children: tuple = ()


@dataclass
class Proof:
    root_formula: object        # @r rho
    order: VariableOrder
    nodes: dict                 # id -> ProofNode
    root: int
    backedges: dict = field(default_factory=dict)

    def parents(self):
        out = {}
        for n, node in self.nodes.items():
            for c in node.children:
                out[c] = n
        return out

    def path(self, top, leaf):
        """Node ids from top down to leaf (top must be an ancestor)."""
        par = self.parents()
        out = [leaf]
        while out[-1] != top:
            if out[-1] not in par:
                raise ValueError(f"{top} is not an ancestor of {leaf}")
            out.append(par[out[-1]])
        return out[::-1]

    def leaves(self):
        return [n for n, node in self.nodes.items() if not node.children]


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    node: int = None
    reason: str = ""

    def __str__(self):
        if self.accepted:
            return "accepted"
        return f"rejected node {self.node}: {self.reason}"


def context_of(proof):
    return OriginalityContext(proof.root_formula, frozenset(nominals(proof.root_formula)))


def order_problem(rho, order):
    defs = binders(rho)
    if sorted(order.order) != sorted(defs) or len(set(order.order)) != len(order.order):
        return "order does not list the bound variables exactly once"
    for x, y in dependencies(rho):
        if not order.less(x, y):
            return f"order puts {y} before {x}"
    for x, k in order.kinds:
        if k != ("mu" if isinstance(defs[x], Mu) else "nu"):
            return f"wrong binder kind for {x}"
    return None


def make_order(rho, names):
    defs = binders(rho)
    kinds = tuple((x, "mu" if isinstance(defs[x], Mu) else "nu") for x in names if x in defs)
    return VariableOrder(tuple(names), kinds)


def is_axiom_label(s):
    return (s.control == () and all(b == () for _, b in s.members)
            and is_axiom(s.plain()))


def goodness(proof, leaf):
    """Highest ranking name kept in every control on the cycle of the back
    edge at leaf and reset somewhere on it; None if there is none."""
    if leaf not in proof.backedges:
        raise ValueError(f"node {leaf} has no back edge")
    ids = proof.path(proof.backedges[leaf], leaf)
    common = set(proof.nodes[ids[0]].label.control)
    for n in ids[1:]:
        common &= set(proof.nodes[n].label.control)
    reset = {proof.nodes[n].rule.name for n in ids[:-1]
             if proof.nodes[n].rule is not None and proof.nodes[n].rule.tag == "reset"}
    good = common & reset
    if not good:
        return None
    ctl = proof.nodes[ids[0]].label.control
    return min(good, key=lambda x: (proof.order.rank(x.var), ctl.index(x)))


def check_proof(proof, ctx=None):
    """Accept or reject the proof, naming a node as witness on rejection.
    If ctx is given the proof must be about its root formula."""
    order = proof.order
    root = proof.root_formula
    if ctx is not None and ctx.root != root:
        return Verdict(False, proof.root, "proof is about a different root formula")
    if not isinstance(root, At) or root.nom in nominals(root.body):
        return Verdict(False, proof.root, "root formula is not @r rho with r fresh")
    prob = order_problem(root.body, order)
    if prob:
        return Verdict(False, proof.root, prob)
    ctx = context_of(proof)
    if proof.root not in proof.nodes:
        return Verdict(False, proof.root, "missing root node")
    start = ASeq((), frozenset([(root, ())]))
    if proof.nodes[proof.root].label != start:
        return Verdict(False, proof.root, "root label is not the empty-control root sequent")
    # tree shape
    seen = set()
    todo = [proof.root]
    while todo:
        n = todo.pop()
        if n in seen:
            return Verdict(False, n, "node reached twice")
        seen.add(n)
        for c in proof.nodes[n].children:
            if c not in proof.nodes:
                return Verdict(False, n, f"dangling child {c}")
            todo.append(c)
    for n in sorted(proof.nodes):
        if n not in seen:
            return Verdict(False, n, "node not reachable from the root")
    for n in sorted(proof.nodes):
        node = proof.nodes[n]
        prob = wellformed_problem(node.label, order)
        if prob:
            return Verdict(False, n, f"ill-formed sequent: {prob}")
        if node.children:
            if node.rule is None:
                return Verdict(False, n, "internal node without a rule")
            prems = [proof.nodes[c].label for c in node.children]
            try:
                check_saf_instance(node.label, node.rule, prems, ctx, order)
            except (RuleError, ValueError) as e:
                return Verdict(False, n, f"rule instance error: {e}")
        else:
            if node.rule is not None:
                return Verdict(False, n, "leaf carries a rule")
            if n in proof.backedges:
                continue
            if not is_axiom_label(node.label):
                return Verdict(False, n, "leaf is neither an axiom nor back-edged")
    par = proof.parents()
    for leaf, target in sorted(proof.backedges.items()):
        if leaf not in proof.nodes or proof.nodes[leaf].children:
            return Verdict(False, leaf, "back edge does not start at a leaf")
        u = leaf
        while u in par and par[u] != target:
            u = par[u]
        if u not in par:
            return Verdict(False, leaf, f"back edge target {target} is not a proper ancestor")
        if proof.nodes[target].label != proof.nodes[leaf].label:
            return Verdict(False, leaf, "label mismatch on back edge")
        if goodness(proof, leaf) is None:
            return Verdict(False, leaf, "no good name for back edge")
    return Verdict(True)


# ---------------------------------------------------------------- unfolding

@dataclass
class Unfolded:
    node: int
    label: ASeq
    children: list


def unfold_proof(proof, depth):
    """Depth-bounded prefix of the unfolding along back edges."""
    def grow(n, d):
        label = proof.nodes[n].label
        src = proof.backedges.get(n, n)
        kids = []
        if d < depth:
            kids = [grow(c, d + 1) for c in proof.nodes[src].children]
        return Unfolded(n, label, kids)
    return grow(proof.root, 0)


def show_unfolded(t, indent=0):
    lines = ["  " * indent + f"{t.node}: {show_aseq(t.label)}"]
    for c in t.children:
        lines.append(show_unfolded(c, indent + 1))
    return "\n".join(lines)


# ---------------------------------------------------------------- lasso oracle

def lasso_trace_oracle(proof, leaf):
    """Does repeating the cycle of leaf's back edge forever carry a good
    infinite trace?"""
    if leaf not in proof.backedges:
        raise ValueError(f"node {leaf} has no back edge")
    ids = proof.path(proof.backedges[leaf], leaf)
    m = len(ids) - 1
    verts = []
    vid = {}
    for p in range(m):
        for f in sorted(proof.nodes[ids[p]].label.plain(), key=show):
            vid[(p, f)] = len(verts)
            verts.append((p, f))
    edges = []      # (u, v, unfolded variable or None)
    for p in range(m):
        node = proof.nodes[ids[p]]
        k = node.children.index(ids[p + 1])
        prems = [proof.nodes[c].label for c in node.children]
        nxt = proof.nodes[ids[p + 1]].label.plain()
        for f in node.label.plain():
            for g in nxt:
                step = saf_trace_edge(node.label, node.rule, k, f, g, prems)
                if step is not None:
                    edges.append((vid[(p, f)], vid[((p + 1) % m, g)], step[1]))
    order = proof.order
    for x in order.order:
        if not order.is_nu(x):
            continue
        r = order.rank(x)
        allowed = [(u, v, y) for u, v, y in edges if y is None or order.rank(y) >= r]
        adj = {v: [] for v in range(len(verts))}
        for u, v, _ in allowed:
            adj[u].append(v)
        comp_of = {}
        for c, comp in enumerate(_sccs(set(adj), adj)):
            for v in comp:
                comp_of[v] = c
        if any(y == x and comp_of[u] == comp_of[v] for u, v, y in allowed):
            return True
    return False


# ---------------------------------------------------------------- files

class ProofFormatError(ValueError):
    pass


def _rule_args(rule, label):
    ordered = label.ordered()
    out = [rule.tag]
    if rule.principal is not None:
        out.append(str(ordered.index(rule.principal)))
    if rule.side is not None:
        out.append(str(ordered.index(rule.side)))
    if rule.nominal is not None:
        out.append("'" + rule.nominal)
    if rule.name is not None:
        out.append(str(rule.name))
    return " ".join(out)


def serialize(proof):
    lines = [f"root {show(proof.root_formula)}", "order " + " ".join(proof.order.order)]
    for n in sorted(proof.nodes):
        node = proof.nodes[n]
        lines.append(f"node {n} {show_aseq(node.label)}")
        if node.rule is not None:
            lines.append(f"rule {n} {_rule_args(node.rule, node.label)} -> "
                         + ",".join(str(c) for c in node.children))
    for leaf, target in sorted(proof.backedges.items()):
        lines.append(f"backedge {leaf} {target}")
    return "\n".join(lines) + "\n"


def _parse_label(text, lineno):
    if "|-" not in text:
        raise ProofFormatError(f"line {lineno}: missing |-")
    ctl, _, rest = text.partition("|-")
    try:
        control = tuple(parse_name(t) for t in ctl.split())
        members = []
        for part in rest.split(","):
            if not part.strip():
                continue
            ftxt, hat, ann = part.rpartition("^")
            if not hat:
                raise ProofFormatError(f"line {lineno}: member without ^")
            f = parse(ftxt)
            if not isinstance(f, At):
                raise ProofFormatError(f"line {lineno}: member does not start with @")
            members.append((f, tuple(parse_name(t) for t in ann.split())))
    except (ParseError, ValueError) as e:
        if isinstance(e, ProofFormatError):
            raise
        raise ProofFormatError(f"line {lineno}: {e}")
    return ASeq(control, frozenset(members))


def deserialize(text):
    root = None
    order_names = None
    labels, rules, backedges = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw, _, rest = line.partition(" ")
        if kw == "root":
            try:
                root = parse(rest)
            except ParseError as e:
                raise ProofFormatError(f"line {lineno}: {e}")
        elif kw == "order":
            order_names = rest.split()
        elif kw == "node":
            nid, _, lab = rest.strip().partition(" ")
            if not nid.isdigit():
                raise ProofFormatError(f"line {lineno}: bad node id {nid!r}")
            if int(nid) in labels:
                raise ProofFormatError(f"line {lineno}: node {nid} defined twice")
            labels[int(nid)] = (_parse_label(lab, lineno), lineno)
        elif kw == "rule":
            head, arrow, kids = rest.partition("->")
            toks = head.split()
            if not arrow or len(toks) < 2 or not toks[0].isdigit():
                raise ProofFormatError(f"line {lineno}: malformed rule line")
            try:
                kid_ids = tuple(int(k) for k in kids.replace(",", " ").split())
            except ValueError:
                raise ProofFormatError(f"line {lineno}: bad premise list")
            rules[int(toks[0])] = (toks[1], toks[2:], kid_ids, lineno)
        elif kw == "backedge":
            toks = rest.split()
            if len(toks) != 2 or not all(t.isdigit() for t in toks):
                raise ProofFormatError(f"line {lineno}: malformed backedge line")
            backedges[int(toks[0])] = (int(toks[1]), lineno)
        else:
            raise ProofFormatError(f"line {lineno}: unknown keyword {kw!r}")
    if root is None or order_names is None:
        raise ProofFormatError("missing root or order header")
    nodes = {}
    for n, (label, _) in labels.items():
        rule, kids = None, ()
        if n in rules:
            tag, args, kids, lineno = rules[n]
            rule = _parse_rule(tag, args, label, lineno)
            if len(kids) != ARITY.get(tag, 1):
                raise ProofFormatError(f"line {lineno}: {tag} needs {ARITY.get(tag, 1)} premise(s)")
            for k in kids:
                if k not in labels:
                    raise ProofFormatError(f"line {lineno}: dangling node reference {k}")
        nodes[n] = ProofNode(label, rule, kids)
    for n, (_, _, _, lineno) in rules.items():
        if n not in labels:
            raise ProofFormatError(f"line {lineno}: rule for unknown node {n}")
    child = {c for node in nodes.values() for c in node.children}
    roots = [n for n in nodes if n not in child]
    if len(roots) != 1:
        raise ProofFormatError("proof must have exactly one root node")
    proof = Proof(root, make_order(root.body if isinstance(root, At) else root, order_names),
                  nodes, roots[0], {})
    par = proof.parents()
    for leaf, (target, lineno) in backedges.items():
        if leaf not in nodes or target not in nodes:
            raise ProofFormatError(f"line {lineno}: dangling node reference")
        u = leaf
        while u in par and par[u] != target:
            u = par[u]
        if u not in par:
            raise ProofFormatError(f"line {lineno}: back edge target {target} is not an ancestor of {leaf}")
        proof.backedges[leaf] = target
    return proof


def _parse_rule(tag, args, label, lineno):
    if tag not in SAF_TAGS:
        raise ProofFormatError(f"line {lineno}: unknown rule tag {tag!r}")
    ordered = label.ordered()
    idx, nominal, name = [], None, None
    for a in args:
        if a.isdigit():
            if int(a) >= len(ordered):
                raise ProofFormatError(f"line {lineno}: member index {a} out of range")
            idx.append(ordered[int(a)])
        elif a.startswith("'"):
            nominal = a[1:]
        else:
            try:
                name = parse_name(a)
            except ValueError as e:
                raise ProofFormatError(f"line {lineno}: {e}")
    if len(idx) > 2:
        raise ProofFormatError(f"line {lineno}: too many member indices")
    principal = idx[0] if idx else None
    side = idx[1] if len(idx) > 1 else None
    return SafRule(tag, principal, side, nominal, name)
