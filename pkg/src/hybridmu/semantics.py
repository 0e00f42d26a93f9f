"""Kripke models, fixpoint evaluation, evaluation games and a parity solver."""
from dataclasses import dataclass, field

from .syntax import (PropLit, NomLit, Or, And, Dia, Box, At, Mu, Nu, FIX,
                     closure, dependency_order, make_well_named, nominals, show, unfold)

VER, FAL = 0, 1


class ModelError(ValueError):
    pass


@dataclass
class KripkeModel:
    W: set
    R: set = field(default_factory=set)
    V: dict = field(default_factory=dict)
    A: dict = field(default_factory=dict)

    def __post_init__(self):
        self.W = set(self.W)
        self.R = set(self.R)
        self.V = {p: set(ws) for p, ws in self.V.items()}
        self.A = dict(self.A)
        if not self.W:
            raise ModelError("model has no worlds")
        for u, v in self.R:
            if u not in self.W or v not in self.W:
                raise ModelError(f"edge {u} {v} leaves the model")
        for p, ws in self.V.items():
            if not ws <= self.W:
                raise ModelError(f"valuation of {p} leaves the model")
        for i, w in self.A.items():
            if w not in self.W:
                raise ModelError(f"nominal {i} names unknown world {w}")

    def succ(self, w):
        return sorted(v for u, v in self.R if u == w)

    def check_nominals(self, f):
        missing = sorted(nominals(f) - set(self.A))
        if missing:
            raise ModelError(f"unassigned nominal {missing[0]}")


def parse_model(text):
    W, R, V, A = [], set(), {}, {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].split()
        if not line:
            continue
        kw, args = line[0], line[1:]
        want = {"world": 1, "edge": 2, "prop": 2, "nom": 2}.get(kw)
        if want is None or len(args) != want:
            raise ModelError(f"line {n}: cannot read {' '.join(line)!r}")
        if kw == "world":
            if args[0] not in W:
                W.append(args[0])
        elif kw == "edge":
            R.add((args[0], args[1]))
        elif kw == "prop":
            V.setdefault(args[0], set()).add(args[1])
        else:
            A[args[0].lstrip("'")] = args[1]
    return KripkeModel(W, R, V, A)


def dump_model(M):
    lines = [f"world {w}" for w in sorted(M.W)]
    lines += [f"edge {u} {v}" for u, v in sorted(M.R)]
    lines += [f"prop {p} {w}" for p in sorted(M.V) for w in sorted(M.V[p])]
    lines += [f"nom {i} {w}" for i, w in sorted(M.A.items())]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- denotational

def eval_denotational(M, f, env=None):
    """Set of worlds where f holds, by structural recursion and naive
    fixpoint iteration."""
    env = env or {}
    W = frozenset(M.W)

    def ev(g, env):
        if isinstance(g, PropLit):
            if g.name in env:
                return env[g.name]
            s = frozenset(M.V.get(g.name, ()))
            return s if g.pos else W - s
        if isinstance(g, NomLit):
            if g.name not in M.A:
                raise ModelError(f"unassigned nominal {g.name}")
            s = frozenset([M.A[g.name]])
            return s if g.pos else W - s
        if isinstance(g, Or):
            return ev(g.left, env) | ev(g.right, env)
        if isinstance(g, And):
            return ev(g.left, env) & ev(g.right, env)
        if isinstance(g, Dia):
            s = ev(g.body, env)
            return frozenset(u for u, v in M.R if v in s)
        if isinstance(g, Box):
            s = ev(g.body, env)
            bad = {u for u, v in M.R if v not in s}
            return W - bad
        if isinstance(g, At):
            if g.nom not in M.A:
                raise ModelError(f"unassigned nominal {g.nom}")
            return W if M.A[g.nom] in ev(g.body, env) else frozenset()
        if isinstance(g, FIX):
            cur = frozenset() if isinstance(g, Mu) else W
            for _ in range(len(W) + 1):
                nxt = ev(g.body, {**env, g.var: cur})
                if isinstance(g, Mu):
                    assert cur <= nxt, "mu iteration is not increasing"
                else:
                    assert nxt <= cur, "nu iteration is not decreasing"
                if nxt == cur:
                    return cur
                cur = nxt
            raise AssertionError("fixpoint iteration did not stabilise")
        raise TypeError(f"not a formula: {g!r}")

    return set(ev(f, env))


# ---------------------------------------------------------------- parity games

@dataclass
class ParityGame:
    positions: list      # labels, e.g. (world, closure index)
    owner: list
    prio: list
    moves: list          # list of tuples of position indices
    formulas: tuple = ()

    def __len__(self):
        return len(self.positions)

    def index(self):
        return {p: n for n, p in enumerate(self.positions)}


@dataclass
class WinningCertificate:
    region: list         # winner (VER/FAL) per position
    strategy: dict       # position -> chosen move, for owned winning positions


def priorities_for(order):
    """Priority of the unfolding position of each variable."""
    n = len(order.order)
    out = {}
    for k, x in enumerate(order.order):
        i = n - k
        out[x] = 2 * i if order.is_nu(x) else 2 * i + 1
    return out


def build_evaluation_game(M, rho):
    M.check_nominals(rho)
    cl = closure(rho).formulas
    idx = {f: n for n, f in enumerate(cl)}
    pr = priorities_for(dependency_order(rho))
    worlds = sorted(M.W)
    positions, owner, prio, moves = [], [], [], []
    pos_id = {}
    for w in worlds:
        for n in range(len(cl)):
            pos_id[(w, n)] = len(positions)
            positions.append((w, n))
    truth_cache = {}
    for w, n in positions:
        f = cl[n]
        mv = ()
        if isinstance(f, (PropLit, NomLit)):
            if f not in truth_cache:
                truth_cache[f] = eval_denotational(M, f)
            owner.append(FAL if w in truth_cache[f] else VER)
        elif isinstance(f, (Or, And)):
            owner.append(VER if isinstance(f, Or) else FAL)
            mv = tuple(dict.fromkeys((pos_id[(w, idx[f.left])], pos_id[(w, idx[f.right])])))
        elif isinstance(f, (Dia, Box)):
            owner.append(VER if isinstance(f, Dia) else FAL)
            mv = tuple(pos_id[(v, idx[f.body])] for v in M.succ(w))
        elif isinstance(f, At):
            owner.append(VER)
            mv = (pos_id[(M.A[f.nom], idx[f.body])],)
        else:
            owner.append(VER)
            mv = (pos_id[(w, idx[unfold(f)])],)
        prio.append(pr[f.var] if isinstance(f, FIX) else 0)
        moves.append(mv)
    return ParityGame(positions, owner, prio, moves, cl)


def _attractor(game, player, target, nodes, preds):
    attr = set(target)
    strat = {}
    count = {}
    queue = list(target)
    while queue:
        v = queue.pop()
        for u in preds[v]:
            if u not in nodes or u in attr:
                continue
            if game.owner[u] == player:
                attr.add(u)
                strat[u] = v
                queue.append(u)
            else:
                if u not in count:
                    count[u] = sum(1 for m in game.moves[u] if m in nodes)
                count[u] -= 1
                if count[u] == 0:
                    attr.add(u)
                    queue.append(u)
    return attr, strat


def solve_parity(game):
    """Zielonka's recursive algorithm (max priority wins, even = Ver).
    A player with no move loses."""
    n = len(game)
    # total game: stuck positions move to a sink won by the opponent
    sink = {VER: n, FAL: n + 1}
    moves = [list(m) for m in game.moves] + [[n], [n + 1]]
    owner = list(game.owner) + [VER, VER]
    prio = list(game.prio) + [0, 1]
    for v in range(n):
        if not moves[v]:
            moves[v] = [sink[1 - owner[v]]]
    g = ParityGame(list(range(n + 2)), owner, prio, moves)
    preds = [[] for _ in range(n + 2)]
    for u in range(n + 2):
        for v in moves[u]:
            preds[v].append(u)

    def choose_inside(v, nodes):
        return next(m for m in g.moves[v] if m in nodes)

    def z(nodes):
        if not nodes:
            return [set(), set()], {}
        d = max(g.prio[v] for v in nodes)
        p = d % 2
        top = {v for v in nodes if g.prio[v] == d}
        a, astrat = _attractor(g, p, top, nodes, preds)
        win, strat = z(nodes - a)
        if not win[1 - p]:
            win = [set(), set()]
            win[p] = set(nodes)
            for v in top:
                if g.owner[v] == p:
                    strat[v] = choose_inside(v, nodes)
            strat.update(astrat)
            return win, strat
        b, bstrat = _attractor(g, 1 - p, win[1 - p], nodes, preds)
        keep = {v: m for v, m in strat.items() if v in win[1 - p] and g.owner[v] == 1 - p}
        win2, strat2 = z(nodes - b)
        win2[1 - p] |= b
        strat2.update(keep)
        strat2.update(bstrat)
        return win2, strat2

    win, strat = z(set(range(n + 2)))
    region = [VER if v in win[VER] else FAL for v in range(n)]
    strategy = {v: m for v, m in strat.items()
                if v < n and g.owner[v] == region[v] and m < n}
    return WinningCertificate(region, dict(sorted(strategy.items())))


def verify_certificate(game, cert):
    n = len(game)
    if len(cert.region) != n or any(r not in (VER, FAL) for r in cert.region):
        return False
    edges = {}
    for v in range(n):
        p = cert.region[v]
        if game.owner[v] == p:
            m = cert.strategy.get(v)
            if m is None or m not in game.moves[v] or cert.region[m] != p:
                return False
            edges[v] = [m]
        else:
            if any(cert.region[m] != p for m in game.moves[v]):
                return False
            edges[v] = list(game.moves[v])
    # every cycle in a region must have its maximum priority won by the owner
    for p in (VER, FAL):
        region = [v for v in range(n) if cert.region[v] == p]
        for d in sorted({game.prio[v] for v in region}):
            if d % 2 == p:
                continue
            sub = {v for v in region if game.prio[v] <= d}
            for comp in _sccs(sub, edges):
                if any(game.prio[v] == d for v in comp) and _has_cycle(comp, edges):
                    return False
    return True


def _has_cycle(comp, edges):
    if len(comp) > 1:
        return True
    v = next(iter(comp))
    return v in edges[v]


def _sccs(nodes, edges):
    """Tarjan's algorithm, iterative."""
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = 0
    for root in sorted(nodes):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on.add(v)
            succ = [m for m in edges[v] if m in nodes]
            if i < len(succ):
                work.append((v, i + 1))
                m = succ[i]
                if m not in index:
                    work.append((m, 0))
                elif m in on:
                    low[v] = min(low[v], index[m])
                continue
            if low[v] == index[v]:
                comp = set()
                while True:
                    m = stack.pop()
                    on.discard(m)
                    comp.add(m)
                    if m == v:
                        break
                out.append(comp)
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return out


def model_check(M, w, f, with_certificate=False):
    """Is f true at w? Decided by solving the evaluation game."""
    if w not in M.W:
        raise ModelError(f"unknown world {w}")
    f = make_well_named(f)
    game = build_evaluation_game(M, f)
    cert = solve_parity(game)
    pos = game.index()[(w, game.formulas.index(f))]
    ok = cert.region[pos] == VER
    if with_certificate:
        return ok, game, cert
    return ok


def dump_certificate(game, cert):
    lines = []
    for v, (w, n) in enumerate(game.positions):
        who = "ver" if cert.region[v] == VER else "fal"
        line = f"{who} {w} {show(game.formulas[n])}"
        if v in cert.strategy:
            w2, n2 = game.positions[cert.strategy[v]]
            line += f" -> {w2} {show(game.formulas[n2])}"
        lines.append(line)
    return "\n".join(lines) + "\n"
