"""The one-step operator on value maps, bounded value iteration and acyclic solving."""

from dataclasses import dataclass, field

from .core_model import INF, MIN, ValidationError, fmt_rational
from .pwl import PieceCapExceeded, RegionFn, combine, pullback, region_fn_to_json
from .region import region_of

DEFAULT_CAP = 10 ** 5


class ValueMap(dict):
    """Region-game state -> :class:`RegionFn`."""

    def __init__(self, rg, parts=()):
        super().__init__(parts)
        self.rg = rg

    def value(self, loc, nu, closure=False):
        """Value at a configuration; with ``closure`` also the limit from an adjacent state."""
        rg = self.rg
        s = rg.index.get((loc, region_of(nu, rg.N, rg.game.clock_bound)))
        if s is not None:
            return self[s].eval(nu)
        if closure:
            for s, (l, r) in enumerate(rg.states):
                if l == loc and s in self and r.closure_contains(nu):
                    return self[s].eval(nu)
        raise ValueError(f"configuration ({loc}, {nu}) is not a state of the region game")

    def same_as(self, other):
        return all(self[s].equals(other[s]) for s in self)

    def piece_counts(self):
        return {s: f.pieces() for s, f in self.items()}

    def to_json(self, fmt=fmt_rational):
        rg = self.rg
        out = []
        for s in sorted(self):
            loc, _ = rg.states[s]
            d = region_fn_to_json(self[s], rg.game.clocks, fmt)
            d["location"] = loc
            out.append(d)
        return out


def initial_map(rg):
    V = ValueMap(rg)
    for s in range(len(rg)):
        V[s] = rg.final_fn(s) if rg.is_target(s) else RegionFn(rg.region(s), tag=INF)
    return V


def step_state(rg, V, s, cap=DEFAULT_CAP):
    """The operator at one state: best transition after the best delay."""
    if rg.is_target(s):
        return rg.final_fn(s)
    lower = rg.owner(s) == MIN
    r = rg.region(s)
    best = None
    for t in rg.out[s]:
        cand = pullback(r, t.mid, V[t.dst], rg.rate(s), t.weight, lower, cap)
        best = cand if best is None else combine(best, cand, lower)
    if best is None:
        return RegionFn(r, tag=INF)
    if best.ncells() > cap:
        raise PieceCapExceeded(f"state {rg.label(s)}: {best.ncells()} cells exceed the cap {cap}")
    return best


def apply_F(rg, V, cap=DEFAULT_CAP):
    return ValueMap(rg, {s: step_state(rg, V, s, cap) for s in range(len(rg))})


@dataclass
class IterationResult:
    values: ValueMap
    steps: int
    stabilized: bool
    pieces: list = field(default_factory=list)  # total piece count after each step


def value_iteration(rg, k, cap=DEFAULT_CAP, start=None):
    """``k`` applications of the operator from the initial map (or ``start``).

    Stops early when an application changes nothing, since every later
    iterate is then the same.
    """
    V = initial_map(rg) if start is None else start
    pieces = []
    for i in range(k):
        W = apply_F(rg, V, cap)
        pieces.append(sum(W.piece_counts().values()))
        if W.same_as(V):
            return IterationResult(W, i + 1, True, pieces)
        V = W
    return IterationResult(V, k, False, pieces)


def topological_order(rg):
    """States so that successors come first; raises if the region game has a cycle."""
    indeg = [0] * len(rg)
    for t in rg.transitions:
        indeg[t.src] += 1
    order = [s for s in range(len(rg)) if indeg[s] == 0]
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        for t in rg.inc[s]:
            indeg[t.src] -= 1
            if indeg[t.src] == 0:
                order.append(t.src)
    if len(order) != len(rg):
        raise ValidationError("cyclic", "region game has a cycle")
    return order


def solve_acyclic(rg, cap=DEFAULT_CAP):
    """Exact values of an acyclic region game by one backward sweep."""
    V = ValueMap(rg)
    for s in topological_order(rg):
        V[s] = step_state(rg, V, s, cap)
    return V
