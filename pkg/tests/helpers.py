"""Shared fixtures for the test-suite: random games, samplers and a grid brute force."""

import random
from fractions import Fraction
from pathlib import Path

import numpy as np

from wtg.core_model import MAX, game_from_dict

GAMES = Path(__file__).resolve().parent.parent / "games"
OPS = ["<", "<=", "=", ">=", ">"]


def random_game_dict(rng, n_clocks=1, M=1, n_locs=4, max_out=3, wmax=3, affine_final=True,
                     loops=True, escape=False):
    """A random game with one target ``t`` and weights in [-wmax, wmax].

    With ``escape`` every location also gets an unguarded transition to the target.
    """
    clocks = ["x", "y"][:n_clocks]
    names = [f"l{i}" for i in range(n_locs - 1)]
    locs = [{"id": n, "owner": rng.choice(["min", "max"]), "rate": rng.randint(-wmax, wmax)}
            for n in names]
    locs.append({"id": "t", "owner": "min", "rate": 0, "target": True})
    trans = []
    for i, n in enumerate(names):
        for _ in range(rng.randint(1, max_out)):
            choices = names + ["t"] if loops else names[i + 1:] + ["t"]
            dst = rng.choice(choices)
            guard = []
            for _ in range(rng.randint(0, 2)):
                guard.append({"clock": rng.choice(clocks), "op": rng.choice(OPS),
                              "const": rng.randint(0, M)})
            resets = [c for c in clocks if rng.random() < 0.4]
            trans.append({"from": n, "to": dst, "guard": guard, "resets": resets,
                          "weight": rng.randint(-wmax, wmax)})
        if escape:
            trans.append({"from": n, "to": "t", "guard": [], "resets": [],
                          "weight": rng.randint(-wmax, wmax)})
    if affine_final and rng.random() < 0.5:
        fw = {"const": rng.randint(-wmax, wmax)}
        fw[rng.choice(clocks)] = rng.choice([-1, 1])
    else:
        fw = rng.randint(-wmax, wmax)
    return {"clocks": clocks, "clock_bound": M, "initial": names[0], "locations": locs,
            "transitions": trans, "final_weights": {"t": fw}}


def random_game(rng, **kw):
    return game_from_dict(random_game_dict(rng, **kw))


def random_point(r, rng, den=97):
    """A random rational valuation inside region ``r``."""
    m = len(r.blocks)
    while True:
        us = sorted(Fraction(rng.randint(1, den - 1), den * r.N) for _ in range(m))
        if len(set(us)) == m:
            nu = r.point(tuple(us))
            if r.contains(nu):
                return nu


def delay_into(nu, mid, rng, M):
    """A random delay ``d`` with ``nu + d`` in region ``mid``, or None."""
    N = mid.N
    cuts = sorted({Fraction(k, N) - v for v in nu for k in range(0, N * (M + 1) + 1)
                   if Fraction(k, N) - v >= 0} | {Fraction(0)})
    cands = []
    for a, b in zip(cuts, cuts[1:] + [cuts[-1] + 1]):
        cands.append((a, a))
        cands.append((a, b))
    for a, b in cands:
        d = a if a == b else a + (b - a) * Fraction(rng.randint(1, 98), 99)
        if mid.contains(tuple(v + d for v in nu)):
            return d
    return None


def finite(v):
    return v not in (float("inf"), float("-inf"))


def grid_value_iteration(g, k, step_den=64):
    """k steps of the operator with delays restricted to multiples of ``1/step_den``.

    Returns ``{location: ndarray}`` indexed by clock values times ``step_den``
    on ``[0, M]``; floats are exact here since every value is a multiple of
    ``1/step_den`` of moderate size.
    """
    n = g.n_clocks
    G = g.clock_bound * step_den
    shape = (G + 1,) * n
    coords = np.indices(shape)
    vals = {}
    for l, loc in g.locations.items():
        if loc.target:
            vals[l] = _final_grid(g, l, coords, step_den)
        else:
            vals[l] = np.full(shape, np.inf)
    for _ in range(k):
        new = {}
        for l, loc in g.locations.items():
            if loc.target:
                new[l] = vals[l]
                continue
            maximize = loc.owner == MAX
            best = np.full(shape, -np.inf if maximize else np.inf)
            seen = np.zeros(shape, dtype=bool)
            for t in g.out[l]:
                for j in range(G + 1):
                    moved = coords + j
                    ok = np.all(moved <= G, axis=0)
                    for a in t.guard.constraints:
                        ok &= _atom(moved[a.clock], a.op, int(a.const * step_den))
                    if not ok.any():
                        continue
                    tgt = [np.where(ok, 0 if x in t.resets else np.minimum(moved[x], G), 0) for x in range(n)]
                    cont = vals[t.target][tuple(tgt)]
                    cand = loc.rate * j / step_den + t.weight + cont
                    if maximize:
                        best = np.where(ok, np.maximum(best, cand), best)
                    else:
                        best = np.where(ok, np.minimum(best, cand), best)
                    seen |= ok
            new[l] = np.where(seen, best, np.inf)
        vals = new
    return vals


def _atom(v, op, c):
    return {"<": v < c, "<=": v <= c, "=": v == c, ">=": v >= c, ">": v > c}[op]


def _final_grid(g, l, coords, den):
    fw = g.final_weight(l)
    out = np.empty(coords.shape[1:])
    for idx in np.ndindex(*coords.shape[1:]):
        out[idx] = float(fw.eval(tuple(Fraction(i, den) for i in idx)))
    return out


def full_region_game(g, N=1, allow_deadlock=True):
    """Region game over every (location, region) pair, not only the reachable ones."""
    from wtg.region import all_regions, build_region_game
    init = [(l, r.representative) for l in g.locations for r in all_regions(g.n_clocks, g.clock_bound, N)]
    return build_region_game(g, N, initial=init, allow_deadlock=allow_deadlock)


def load(name):
    from wtg.core_model import load_game
    return load_game(str(GAMES / name))


def seeded(seed):
    return random.Random(seed)


# --- brute-force oracles on region games ---------------------------------------------

def reach_sets(rg):
    """State -> set of states reachable in one or more steps."""
    out = {}
    for s in range(len(rg)):
        seen, todo = set(), [t.dst for t in rg.out[s]]
        while todo:
            v = todo.pop()
            if v not in seen:
                seen.add(v)
                todo.extend(t.dst for t in rg.out[v])
        out[s] = seen
    return out


def forced_within(rg, player, target, k):
    """States from which ``player`` forces ``target`` in at most ``k`` steps (game-tree search)."""
    win = set(target)
    for _ in range(k):
        new = set(win)
        for s in range(len(rg)):
            succ = [t.dst for t in rg.out[s]]
            if not succ or s in win:
                continue
            if rg.owner(s) == player:
                ok = any(d in win for d in succ)
            else:
                ok = all(d in win for d in succ)
            if ok:
                new.add(s)
        win = new
    return win


def corner_traversal(rg, path):
    """Start corner -> set of (end corner, weight) after following ``path`` once."""
    from wtg.region import corner_moves
    s0 = rg.transitions[path[0]].src
    rel = {}
    for k0 in range(len(rg.region(s0).corners)):
        cur = {(k0, 0)}
        for ti in path:
            t = rg.transitions[ti]
            rate = rg.rate(t.src)
            mv = corner_moves(rg.region(t.src), t.mid, rg.region(t.dst), t.resets)
            cur = {(kd, w + d * rate + t.weight) for k, w in cur for ks, kd, d in mv if ks == k}
        rel[k0] = cur
    return rel


def closed_corner_weights(rel):
    """Weights of the simple cycles of the graph that one traversal induces on corners."""
    out = set()

    def dfs(start, v, acc, seen):
        for u, w in rel[v]:
            if u == start:
                out.add(acc + w)
            elif u > start and u not in seen:
                dfs(start, u, acc + w, seen | {u})

    for s in rel:
        dfs(s, s, 0, {s})
    return out


def is_zero_cycle(rg, path):
    ws = closed_corner_weights(corner_traversal(rg, path))
    return bool(ws) and ws == {0}
