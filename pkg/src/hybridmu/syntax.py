"""Formulas of the hybrid mu-calculus in negation normal form.

Parsing, printing, negation, renaming, unfolding, variable order and
Fischer-Ladner closure.
"""
import re
from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class PropLit:
    name: str
    pos: bool = True


@dataclass(frozen=True)
class NomLit:
    name: str
    pos: bool = True


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Dia:
    body: object


@dataclass(frozen=True)
class Box:
    body: object


@dataclass(frozen=True)
class At:
    nom: str
    body: object


@dataclass(frozen=True)
class Mu:
    var: str
    body: object


@dataclass(frozen=True)
class Nu:
    var: str
    body: object


FIX = (Mu, Nu)
BINARY = (Or, And)
MODAL = (Dia, Box)


class ParseError(ValueError):
    def __init__(self, msg, pos=None):
        self.msg = msg
        self.pos = pos
        super().__init__(msg if pos is None else f"{msg} at position {pos}")


def neq(i, j):
    """i != j, stored as @i ~j."""
    return At(i, NomLit(j, False))


def eq(i, j):
    return At(i, NomLit(j, True))


# ---------------------------------------------------------------- printing

def _open_ended(f):
    # does the printed form end inside a binder scope?
    if isinstance(f, FIX):
        return True
    if isinstance(f, MODAL):
        return _open_ended(f.body)
    if isinstance(f, At) and not isinstance(f.body, NomLit):
        return _open_ended(f.body)
    return False


@lru_cache(maxsize=None)
def show(f):
    """Canonical ASCII print; parse(show(f)) == f."""
    if isinstance(f, PropLit):
        return f.name if f.pos else "~" + f.name
    if isinstance(f, NomLit):
        return ("'" if f.pos else "~'") + f.name
    if isinstance(f, BINARY):
        left = show(f.left)
        if _open_ended(f.left):
            left = "(" + left + ")"
        op = " \\/ " if isinstance(f, Or) else " /\\ "
        return "(" + left + op + show(f.right) + ")"
    if isinstance(f, Dia):
        return "<>" + show(f.body)
    if isinstance(f, Box):
        return "[]" + show(f.body)
    if isinstance(f, At):
        if isinstance(f.body, NomLit):
            return f"'{f.nom} {'==' if f.body.pos else '!='} '{f.body.name}"
        return f"@'{f.nom} " + show(f.body)
    if isinstance(f, Mu):
        return f"mu {f.var}. " + show(f.body)
    if isinstance(f, Nu):
        return f"nu {f.var}. " + show(f.body)
    raise TypeError(f"not a formula: {f!r}")


def key(f):
    """Sort key realising the fixed global order on formulas."""
    return show(f)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op>/\\|\\/|<>|\[\]|==|!=|[@~().])
  | (?P<nom>'[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)
""", re.VERBOSE)

KEYWORDS = {"mu", "nu"}


def tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if kind == "ident" and val in KEYWORDS:
                kind = "kw"
            toks.append((kind, val, pos))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self.scope = []      # stack of (var, modal depth at binding)
        self.depth = 0       # number of enclosing modalities

    def peek(self):
        return self.toks[self.i]

    def take(self, val=None, kind=None):
        tok = self.toks[self.i]
        if (val is not None and tok[1] != val) or (kind is not None and tok[0] != kind):
            want = val if val is not None else kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want}, got {got}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        f = self.conj()
        while self.peek()[1] == "\\/":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek()[1] == "/\\":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        kind, val, pos = self.peek()
        if val in ("<>", "[]"):
            self.take()
            self.depth += 1
            body = self.unary()
            self.depth -= 1
            return Dia(body) if val == "<>" else Box(body)
        if val == "@":
            self.take()
            nom = self.take(kind="nom")[1][1:]
            return At(nom, self.unary())
        if val == "~":
            self.take()
            kind, val, pos = self.peek()
            if kind == "nom":
                self.take()
                return NomLit(val[1:], False)
            if kind == "ident":
                self.take()
                if any(v == val for v, _ in self.scope):
                    raise ParseError(f"negated fixpoint variable {val}", pos)
                return PropLit(val, False)
            raise ParseError("negation applies only to literals", pos)
        if kind == "kw":
            self.take()
            var = self.take(kind="ident")[1]
            self.take(".")
            self.scope.append((var, self.depth))
            body = self.expr()
            self.scope.pop()
            return Mu(var, body) if val == "mu" else Nu(var, body)
        return self.primary()

    def primary(self):
        kind, val, pos = self.peek()
        if val == "(":
            self.take()
            f = self.expr()
            self.take(")")
            return f
        if kind == "ident":
            self.take()
            for v, d in reversed(self.scope):
                if v == val:
                    if d == self.depth:
                        raise ParseError(f"unguarded occurrence of {val}", pos)
                    break
            return PropLit(val)
        if kind == "nom":
            self.take()
            if self.peek()[1] in ("==", "!="):
                op = self.take()[1]
                other = self.take(kind="nom")[1][1:]
                return At(val[1:], NomLit(other, op == "=="))
            return NomLit(val[1:])
        raise ParseError(f"unexpected {val or 'end of input'}", pos)


def parse(text, rename=False):
    """Parse a formula; with rename=True clashing binders are renamed apart."""
    p = _Parser(text)
    f = p.expr()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {val}", pos)
    if rename:
        return make_well_named(f)
    problem = well_named_problem(f)
    if problem:
        raise ParseError(problem)
    return f


# ---------------------------------------------------------------- structure

def children(f):
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, (Dia, Box, At, Mu, Nu)):
        return (f.body,)
    return ()


def preorder(f):
    yield f
    for c in children(f):
        yield from preorder(c)


def symbol_count(f):
    return sum(1 for _ in preorder(f))


@lru_cache(maxsize=None)
def free_vars(f):
    if isinstance(f, PropLit):
        return frozenset([f.name])
    if isinstance(f, FIX):
        return free_vars(f.body) - {f.var}
    out = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def bound_vars(f):
    return {g.var for g in preorder(f) if isinstance(g, FIX)}


def binders(f):
    """Map from variable to its (unique) binder subformula."""
    out = {}
    for g in preorder(f):
        if isinstance(g, FIX):
            out.setdefault(g.var, g)
    return out


def nominals(f):
    out = set()
    for g in preorder(f):
        if isinstance(g, At):
            out.add(g.nom)
        elif isinstance(g, NomLit):
            out.add(g.name)
    return out


def props(f):
    """Free propositional letters."""
    return set(free_vars(f))


def is_guarded(f):
    def ok(g, unguarded):
        if isinstance(g, PropLit):
            return g.name not in unguarded
        if isinstance(g, MODAL):
            return ok(g.body, frozenset())
        if isinstance(g, FIX):
            return ok(g.body, unguarded | {g.var})
        return all(ok(c, unguarded) for c in children(g))
    return ok(f, frozenset())


def well_named_problem(f):
    """None if f is locally well-named: no variable is both free and bound,
    none is bound by both mu and nu, and the dependency relation has no
    cycle.  Several binders may share a variable (unfolding creates such
    copies).  Otherwise a description of the first problem found."""
    if not is_guarded(f):
        return "unguarded fixpoint variable"
    free = free_vars(f)
    kinds = {}
    for g in preorder(f):
        if isinstance(g, FIX):
            if g.var in free:
                return f"variable {g.var} is both free and bound"
            k = "mu" if isinstance(g, Mu) else "nu"
            if kinds.setdefault(g.var, k) != k:
                return f"variable {g.var} is bound by both mu and nu"
            if any(PropLit(g.var, False) == h for h in preorder(g.body)):
                return f"negated fixpoint variable {g.var}"
    succ = {}
    for x, y in dependencies(f):
        succ.setdefault(x, set()).add(y)
    # a cycle in the dependency graph, by depth-first search
    state = {}

    def cyclic(x):
        state[x] = 1
        for y in succ.get(x, ()):
            if state.get(y) == 1 or (y not in state and cyclic(y)):
                return True
        state[x] = 2
        return False

    for x in sorted(succ):
        if x not in state and cyclic(x):
            return f"variable {x} depends on itself"
    return None


def is_well_named(f):
    return well_named_problem(f) is None


def _subst_var(f, old, new):
    if isinstance(f, PropLit):
        return PropLit(new, f.pos) if f.name == old else f
    if isinstance(f, FIX):
        if f.var == old:
            return f
        return type(f)(f.var, _subst_var(f.body, old, new))
    if isinstance(f, BINARY):
        return type(f)(_subst_var(f.left, old, new), _subst_var(f.right, old, new))
    if isinstance(f, At):
        return At(f.nom, _subst_var(f.body, old, new))
    if isinstance(f, MODAL):
        return type(f)(_subst_var(f.body, old, new))
    return f


def make_well_named(f):
    """Alpha-rename a formula that is not locally well-named so that each
    variable names a single binder formula; renamed variables get primes
    (x, x', x'', ...).  Well-named input is returned unchanged."""
    if is_well_named(f):
        return f
    free = free_vars(f)

    def walk(g, scope, defs):
        if isinstance(g, FIX):
            cand = g.var
            while True:
                if cand not in free and cand not in scope:
                    trial = dict(defs)
                    body = walk(_subst_var(g.body, g.var, cand) if cand != g.var else g.body,
                                scope | {cand}, trial)
                    res = type(g)(cand, body)
                    if trial.get(cand, res) == res:
                        trial[cand] = res
                        defs.clear()
                        defs.update(trial)
                        return res
                cand += "'"
        if isinstance(g, BINARY):
            return type(g)(walk(g.left, scope, defs), walk(g.right, scope, defs))
        if isinstance(g, At):
            return At(g.nom, walk(g.body, scope, defs))
        if isinstance(g, MODAL):
            return type(g)(walk(g.body, scope, defs))
        return g

    return walk(f, frozenset(), {})


def negate(f):
    """Dual formula in negation normal form."""
    def neg(g, bound):
        if isinstance(g, PropLit):
            return g if g.name in bound else PropLit(g.name, not g.pos)
        if isinstance(g, NomLit):
            return NomLit(g.name, not g.pos)
        if isinstance(g, Or):
            return And(neg(g.left, bound), neg(g.right, bound))
        if isinstance(g, And):
            return Or(neg(g.left, bound), neg(g.right, bound))
        if isinstance(g, Dia):
            return Box(neg(g.body, bound))
        if isinstance(g, Box):
            return Dia(neg(g.body, bound))
        if isinstance(g, At):
            return At(g.nom, neg(g.body, bound))
        if isinstance(g, Mu):
            return Nu(g.var, neg(g.body, bound | {g.var}))
        if isinstance(g, Nu):
            return Mu(g.var, neg(g.body, bound | {g.var}))
        raise TypeError(f"not a formula: {g!r}")
    return neg(f, frozenset())


def substitute(f, x, g):
    """Replace free occurrences of variable x in f by g."""
    if isinstance(f, PropLit):
        return g if f.name == x else f
    if isinstance(f, FIX):
        if f.var == x:
            return f
        return type(f)(f.var, substitute(f.body, x, g))
    if isinstance(f, BINARY):
        return type(f)(substitute(f.left, x, g), substitute(f.right, x, g))
    if isinstance(f, At):
        return At(f.nom, substitute(f.body, x, g))
    if isinstance(f, MODAL):
        return type(f)(substitute(f.body, x, g))
    return f


@lru_cache(maxsize=None)
def unfold(f):
    if not isinstance(f, FIX):
        raise ValueError(f"not a fixpoint formula: {show(f)}")
    return substitute(f.body, f.var, f)


# ---------------------------------------------------------------- variable order

@dataclass(frozen=True)
class VariableOrder:
    """Linear order on bound variables; earlier = higher ranking."""
    order: tuple
    kinds: tuple   # pairs (var, 'mu' | 'nu'), in order

    def kind(self, x):
        return dict(self.kinds)[x]

    def rank(self, x):
        return self.order.index(x)

    def less(self, x, y):
        return self.order.index(x) < self.order.index(y)

    def is_nu(self, x):
        return self.kind(x) == "nu"


def dependencies(f):
    """Pairs (x, y) with x <_f y: some binder for y has x free."""
    defs = binders(f)
    out = set()
    for g in preorder(f):
        if isinstance(g, FIX):
            out.update((x, g.var) for x in free_vars(g) if x in defs)
    return out


def dependency_order(f):
    problem = well_named_problem(f)
    if problem:
        raise ValueError(problem)
    defs = binders(f)
    first = list(defs)   # insertion order = first occurrence in preorder
    deps = dependencies(f)
    if any(x == y for x, y in deps):
        raise ValueError("dependency relation is not irreflexive")
    placed = []
    left = set(first)
    while left:
        ready = [x for x in first if x in left
                 and not any(a in left and b == x for a, b in deps)]
        if not ready:
            raise ValueError("dependency relation is cyclic")
        placed.append(ready[0])
        left.remove(ready[0])
    kinds = tuple((x, "mu" if isinstance(defs[x], Mu) else "nu") for x in placed)
    return VariableOrder(tuple(placed), kinds)


# ---------------------------------------------------------------- closure

@dataclass(frozen=True)
class Closure:
    formulas: tuple

    @property
    def index(self):
        return {f: i for i, f in enumerate(self.formulas)}

    def __len__(self):
        return len(self.formulas)

    def __contains__(self, f):
        return f in set(self.formulas)

    def __iter__(self):
        return iter(self.formulas)


def closure_step(f):
    """Formulas the four closure clauses demand from f."""
    if isinstance(f, BINARY):
        return [f.left, f.right]
    if isinstance(f, (Dia, Box, At)):
        return [f.body]
    if isinstance(f, FIX):
        return [unfold(f)]
    return []


@lru_cache(maxsize=None)
def closure(f):
    seen = {f}
    todo = [f]
    while todo:
        g = todo.pop()
        for h in closure_step(g):
            if h not in seen:
                seen.add(h)
                todo.append(h)
    return Closure(tuple(sorted(seen, key=key)))
