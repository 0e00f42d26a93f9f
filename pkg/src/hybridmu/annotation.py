"""Names, name words and annotated sequents; checking of annotated rule
instances (including Thinning)."""
from dataclasses import dataclass
from typing import NamedTuple

from .calculus import InfRule, RuleError, seq_nominals, trace_edge, is_neq
from .syntax import And, Or, At, Box, Dia, FIX, Nu, NomLit, key, show, unfold


class Name(NamedTuple):
    var: str
    index: int

    def __str__(self):
        return f"{self.var}.{self.index}"


def parse_name(text):
    var, _, idx = text.rpartition(".")
    if not var or not idx.isdigit():
        raise ValueError(f"bad name {text!r}")
    return Name(var, int(idx))


def show_word(word):
    return " ".join(str(n) for n in word)


# ---------------------------------------------------------------- words

def restrict(a, x, order):
    """a|x: drop the names of variables ranked above x."""
    r = order.rank(x)
    return tuple(n for n in a if order.rank(n.var) <= r)


def below(b, x, order):
    """b <= x: no name of a variable y > x occurs in b."""
    return restrict(b, x, order) == tuple(b)


def subseq(a, b):
    it = iter(b)
    return all(any(n == m for m in it) for n in a)


def _all_lcs(a, b):
    # table of sets of longest common subsequences of suffixes
    n, m = len(a), len(b)
    T = [[{()} for _ in range(m + 1)] for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                T[i][j] = {(a[i],) + w for w in T[i + 1][j + 1]}
            else:
                l1 = len(next(iter(T[i + 1][j])))
                l2 = len(next(iter(T[i][j + 1])))
                if l1 > l2:
                    T[i][j] = T[i + 1][j]
                elif l2 > l1:
                    T[i][j] = T[i][j + 1]
                else:
                    T[i][j] = T[i + 1][j] | T[i][j + 1]
    return T[0][0]


def meet(a, b):
    """Unique longest common subsequence, or None."""
    words = _all_lcs(tuple(a), tuple(b))
    return next(iter(words)) if len(words) == 1 else None


def ann_less(b, c, a, order):
    """b <_a c."""
    b, c, a = tuple(b), tuple(c), tuple(a)
    if not (subseq(b, a) and subseq(c, a)):
        raise ValueError("annotations must be subsequences of the control")
    for x in order.order:
        if order.is_nu(x):
            bx, cx = restrict(b, x, order), restrict(c, x, order)
            if len(cx) < len(bx) and bx[:len(cx)] == cx:
                return True
    d = 0
    while d < len(b) and d < len(c) and b[d] == c[d]:
        d += 1
    if d < len(b) and d < len(c):
        z, z2 = b[d], c[d]
        if z.var == z2.var and a.index(z) < a.index(z2):
            return True
    return False


# ---------------------------------------------------------------- sequents

@dataclass(frozen=True)
class ASeq:
    control: tuple
    members: frozenset      # of (At-formula, annotation tuple)

    def plain(self):
        return frozenset(f for f, _ in self.members)

    def ordered(self):
        return sorted(self.members, key=member_key)

    def __str__(self):
        return show_aseq(self)


def member_key(m):
    return (key(m[0]), tuple((n.var, n.index) for n in m[1]))


def aseq(control, members):
    return ASeq(tuple(control), frozenset((f, tuple(b)) for f, b in members))


def show_member(m):
    f, b = m
    return f"{show(f)} ^ {show_word(b)}".rstrip()


def show_aseq(s):
    ctl = show_word(s.control)
    return f"{ctl} |- " + ", ".join(show_member(m) for m in s.ordered()) if ctl \
        else "|- " + ", ".join(show_member(m) for m in s.ordered())


def used_names(members):
    out = set()
    for _, b in members:
        out.update(b)
    return out


def trim_control(control, members):
    used = used_names(members)
    return tuple(n for n in control if n in used)


def wellformed_problem(s, order):
    a = s.control
    if len(set(a)) != len(a):
        return "control repeats a name"
    known = set(order.order)
    for n in a:
        if n.var not in known:
            return f"name {n} of unknown variable"
    for f, b in s.members:
        if not isinstance(f, At):
            return f"{show(f)} does not start with a satisfaction operator"
        if len(set(b)) != len(b):
            return f"annotation of {show(f)} repeats a name"
        if any(order.rank(u.var) > order.rank(v.var) for u, v in zip(b, b[1:])):
            return f"annotation of {show(f)} is decreasing"
        if not subseq(b, a):
            return f"annotation of {show(f)} is not a subsequence of the control"
    return None


def names_theory(s, x):
    return frozenset(f for f, b in s.members if x in b)


# ---------------------------------------------------------------- rules

@dataclass(frozen=True)
class SafRule:
    tag: str
    principal: tuple = None     # a member of the conclusion
    side: tuple = None
    nominal: str = None
    name: Name = None

    def inf(self):
        """The plain rule the instance projects to (for traces)."""
        return InfRule(self.tag, self.principal[0] if self.principal else None,
                       self.side[0] if self.side else None, self.nominal)


SAF_TAGS = ("and", "or", "eq", "com", "glob", "mod", "eta", "rec", "reset",
            "exp", "weak", "thin")
ARITY = {"and": 2}


def _need(cond, msg):
    if not cond:
        raise RuleError(msg)


def saf_premises(concl, rule, order):
    """Premises of the deterministic rules (all but mod/exp/weak/thin)."""
    t = rule.tag
    if t == "reset":
        x = rule.name
        _need(x in concl.control, f"reset name {x} not in control")
        hit = [m for m in concl.members if x in m[1]]
        _need(hit, f"no annotation contains {x}")
        prefix = None
        out = set(concl.members) - set(hit)
        for f, b in hit:
            k = b.index(x)
            _need(k + 1 < len(b) and b[k + 1].var == x.var,
                  f"annotation of {show(f)} does not extend {x} by a name of {x.var}")
            _need(prefix is None or b[:k] == prefix,
                  f"annotation of {show(f)} has a different prefix before {x}")
            prefix = b[:k]
            out.add((f, b[:k + 1]))
        return [ASeq(concl.control, frozenset(out))]
    m = rule.principal
    _need(m in concl.members, "principal is not a member of the conclusion")
    f, b = m
    add = lambda *ms: ASeq(concl.control, concl.members | set(ms))
    if t == "and":
        _need(isinstance(f.body, And), "principal is not a conjunction")
        return [add((At(f.nom, f.body.left), b)), add((At(f.nom, f.body.right), b))]
    if t == "or":
        _need(isinstance(f.body, Or), "principal is not a disjunction")
        return [add((At(f.nom, f.body.left), b), (At(f.nom, f.body.right), b))]
    if t == "glob":
        _need(isinstance(f.body, At), "principal is not of the form @i@j F")
        return [add((f.body, b))]
    if t == "eta":
        _need(isinstance(f.body, FIX), "principal is not a fixpoint formula")
        _need(below(b, f.body.var, order), f"annotation not <= {f.body.var}")
        return [add((At(f.nom, unfold(f.body)), b))]
    if t == "rec":
        _need(isinstance(f.body, Nu), "principal is not a greatest fixpoint")
        x = f.body.var
        _need(below(b, x, order), f"annotation not <= {x}")
        n = rule.name
        _need(n is not None and n.var == x, "Rec name is not a name of the unfolded variable")
        _need(n not in concl.control, f"Rec name {n} is not fresh")
        return [ASeq(concl.control + (n,),
                     concl.members | {(At(f.nom, unfold(f.body)), b + (n,))})]
    if t == "com":
        _need(is_neq(f), "principal is not an inequality")
        return [add((At(f.body.name, NomLit(f.nom, False)), b))]
    if t == "eq":
        s = rule.side
        _need(s in concl.members, "side formula is not a member of the conclusion")
        g = s[0]
        _need(is_neq(g), "side formula is not an inequality")
        _need(g.nom == f.nom, "side formula does not start with the principal's nominal")
        return [add((At(g.body.name, f.body), b))]
    raise RuleError(f"unknown rule {t}")


def check_saf_instance(concl, rule, premises, ctx=None, order=None):
    """Raise RuleError unless the instance is correct."""
    t = rule.tag
    _need(t in SAF_TAGS, f"unknown rule {t}")
    _need(len(premises) == ARITY.get(t, 1),
          f"{t} takes {ARITY.get(t, 1)} premise(s), got {len(premises)}")
    if t == "thin":
        return check_thinning(concl, premises[0], order)
    if t == "weak":
        p = premises[0]
        _need(p.control == concl.control, "Weak changes the control")
        _need(p.members <= concl.members, "Weak premise is not a subset of the conclusion")
        return True
    if t == "exp":
        return _check_exp(concl, premises[0])
    if t == "mod":
        m = rule.principal
        _need(m in concl.members, "principal is not a member of the conclusion")
        f, b = m
        _need(isinstance(f.body, Box), "principal is not a box formula")
        j = rule.nominal
        _need(j is not None and j not in seq_nominals(concl.plain()),
              f"Mod nominal {j} is not fresh")
        p = premises[0]
        _need(p.control == concl.control, "Mod changes the control")
        _need(concl.members | {(At(j, f.body.body), b)} <= p.members,
              "Mod premise misses the box witness")
        dias = {(g.body.body, c) for g, c in concl.members
                if g.nom == f.nom and isinstance(g.body, Dia)}
        for g, c in p.members - concl.members:
            _need(g.nom == j and ((g.body, c) == (f.body.body, b) or (g.body, c) in dias),
                  f"Mod premise has unexpected member {show(g)}")
        return True
    want = saf_premises(concl, rule, order)
    for n, (p, w) in enumerate(zip(premises, want)):
        _need(p == w, f"premise {n} does not match the {t} rule")
    return True


def _check_exp(concl, prem):
    a2, a = concl.control, prem.control
    _need(subseq(a, a2), "Exp premise control is not a subsequence")
    _need({f for f, _ in concl.members} == {f for f, _ in prem.members},
          "Exp changes the formulas")

    def fits(b, b2):
        m = meet(b2, a)
        return subseq(b, b2) and m is not None and subseq(m, b)

    for f, b2 in concl.members:
        _need(any(g == f and fits(b, b2) for g, b in prem.members),
              f"Exp annotation of {show(f)} is not matched")
    for g, b in prem.members:
        _need(any(g == f and fits(b, b2) for f, b2 in concl.members),
              f"Exp premise annotation of {show(g)} has no source")
    return True


def check_thinning(concl, prem, order):
    _need(prem.members <= concl.members, "Thinning premise is not part of the conclusion")
    gone = concl.members - prem.members
    _need(len(gone) == 1, "Thinning removes exactly one annotated formula")
    (f, c), = gone
    kept = [b for g, b in prem.members if g == f]
    _need(kept, "Thinning keeps no other annotation of the formula")
    _need(any(ann_less(b, c, concl.control, order) for b in kept),
          "removed annotation is not the larger one")
    _need(prem.control == trim_control(concl.control, prem.members),
          "control not correctly trimmed")
    return True


def saf_trace_edge(concl, rule, k, frm, to, premises):
    """Trace step between plain formulas across an annotated instance."""
    return trace_edge(concl.plain(), rule.inf(), k, frm, to,
                      [p.plain() for p in premises])
