"""1/N-regions, the region game and the corner-point abstraction.

A region is stored by the integer parts ``iota`` (in units of 1/N), the set
of clocks whose scaled value is an integer (``zero``) and the remaining
clocks grouped into blocks of equal fractional part, in increasing order.
Clocks are referred to by their index in the game's clock tuple.

Inside a region with ``m`` blocks we use local coordinates ``u_1..u_m``:
``u_j`` is the offset of block ``j`` above its grid point, so the closure
of the region is the simplex ``0 <= u_1 <= ... <= u_m <= 1/N``.  A delay
shifts every offset by the same amount, which keeps the geometry simple.
"""

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .core_model import MIN, ValidationError


@dataclass(frozen=True)
class NRegion:
    N: int
    M: int
    iota: tuple
    zero: tuple
    blocks: tuple

    @property
    def n(self):
        return len(self.iota)

    @property
    def dim(self):
        return len(self.blocks)

    @cached_property
    def block_of(self):
        """Clock index -> block number (0 for the zero block)."""
        b = [0] * self.n
        for j, blk in enumerate(self.blocks, start=1):
            for x in blk:
                b[x] = j
        return tuple(b)

    @cached_property
    def base(self):
        return tuple(Fraction(i, self.N) for i in self.iota)

    def point(self, u):
        """Clock valuation of local coordinates ``u``."""
        b = self.block_of
        return tuple(self.base[x] + (u[b[x] - 1] if b[x] else 0) for x in range(self.n))

    def local(self, nu):
        """Local coordinates of a valuation in the closure, or None if outside."""
        u = [None] * self.dim
        base = self.base
        for x in range(self.n):
            off = nu[x] - base[x]
            j = self.block_of[x]
            if j == 0:
                if off != 0:
                    return None
            elif u[j - 1] is None:
                u[j - 1] = off
            elif u[j - 1] != off:
                return None
        prev = Fraction(0)
        for v in u:
            if v < prev:
                return None
            prev = v
        if u and u[-1] > Fraction(1, self.N):
            return None
        return tuple(u)

    @cached_property
    def simplex(self):
        """Vertices of the closure in local coordinates; vertex k lifts the top k blocks."""
        m, h = self.dim, Fraction(1, self.N)
        return tuple(tuple(h if j >= m - k else Fraction(0) for j in range(m)) for k in range(m + 1))

    @cached_property
    def corners(self):
        return tuple(self.point(v) for v in self.simplex)

    @cached_property
    def representative(self):
        """A valuation strictly inside the region."""
        m = self.dim
        return self.point(tuple(Fraction(j + 1, (m + 1) * self.N) for j in range(m)))

    def contains(self, nu):
        return region_of(nu, self.N, self.M) == self

    def closure_contains(self, nu):
        return self.local(nu) is not None

    def describe(self, clocks):
        parts = []
        N = self.N
        for x in self.zero:
            parts.append(f"{clocks[x]}={_q(self.iota[x], N)}")
        for blk in self.blocks:
            for x in blk:
                parts.append(f"{_q(self.iota[x], N)}<{clocks[x]}<{_q(self.iota[x] + 1, N)}")
        order = " < ".join("frac(" + ",".join(clocks[x] for x in blk) + ")" for blk in self.blocks)
        s = ", ".join(parts)
        return s + (f" [{order}]" if len(self.blocks) > 1 else "")


def _q(i, N):
    v = Fraction(i, N)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def region_of(nu, N, M):
    """The 1/N-region containing valuation ``nu`` (all clocks within [0, M])."""
    iota, fracs = [], {}
    for x, v in enumerate(nu):
        v = Fraction(v)
        if v < 0 or v > M:
            raise ValueError(f"clock value {v} outside [0, {M}]")
        s = v * N
        i = s.numerator // s.denominator
        iota.append(i)
        fracs[x] = s - i
    zero = tuple(x for x in range(len(nu)) if fracs[x] == 0)
    levels = sorted({f for f in fracs.values() if f != 0})
    blocks = tuple(tuple(x for x in range(len(nu)) if fracs[x] == f) for f in levels)
    return NRegion(N, M, tuple(iota), zero, blocks)


def successor(r):
    """Immediate strict time successor, or None once a clock sits at M."""
    MN = r.M * r.N
    if r.zero:
        if any(r.iota[x] == MN for x in r.zero):
            return None
        return NRegion(r.N, r.M, r.iota, (), (r.zero,) + r.blocks)
    top = r.blocks[-1]
    iota = list(r.iota)
    for x in top:
        iota[x] += 1
    return NRegion(r.N, r.M, tuple(iota), tuple(sorted(top)), r.blocks[:-1])


def time_successors(r):
    """Strict time successors of ``r`` in order of elapsing time (``r`` itself excluded)."""
    out = []
    s = successor(r)
    while s is not None:
        out.append(s)
        s = successor(s)
    return out


def reset_region(r, resets):
    if not resets:
        return r
    iota = tuple(0 if x in resets else i for x, i in enumerate(r.iota))
    zero = tuple(sorted(set(r.zero) | set(resets)))
    blocks = tuple(b for b in (tuple(x for x in blk if x not in resets) for blk in r.blocks) if b)
    return NRegion(r.N, r.M, iota, zero, blocks)


def all_regions(n, M, N):
    """Every 1/N-region of ``n`` clocks bounded by M."""
    MN = M * N
    out = []
    for iota in itertools.product(range(MN + 1), repeat=n):
        capped = {x for x in range(n) if iota[x] == MN}
        for zero, blocks in _ordered_partitions(tuple(range(n))):
            if not capped <= set(zero):
                continue
            out.append(NRegion(N, M, iota, zero, blocks))
    return out


def _ordered_partitions(items):
    """(zero, blocks) pairs: a subset with zero fraction plus an ordered partition of the rest."""
    n = len(items)
    for mask in range(1 << n):
        zero = tuple(items[i] for i in range(n) if mask >> i & 1)
        rest = [items[i] for i in range(n) if not mask >> i & 1]
        for blocks in _set_orderings(rest):
            yield zero, blocks


def _set_orderings(items):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for sub in _set_orderings(rest):
        # put `first` into an existing block or as a new block at any position
        for i in range(len(sub)):
            yield sub[:i] + (tuple(sorted(sub[i] + (first,))),) + sub[i + 1:]
        for i in range(len(sub) + 1):
            yield sub[:i] + ((first,),) + sub[i:]


def subregions(r, N):
    """The 1/N-regions contained in region ``r`` (``N`` a multiple of ``r.N``)."""
    if N % r.N:
        raise ValueError("granularity must be a multiple of the region's")
    k = N // r.N
    out = []
    ranges = []
    for x in range(r.n):
        lo = r.iota[x] * k
        ranges.append([lo] if x in r.zero or r.iota[x] == r.M * r.N else range(lo, lo + k))
    for iota in itertools.product(*ranges):
        capped = {x for x in range(r.n) if iota[x] == r.M * N}
        for zero, blocks in _ordered_partitions(tuple(range(r.n))):
            if not capped <= set(zero):
                continue
            cand = NRegion(N, r.M, iota, zero, blocks)
            if region_of(cand.representative, r.N, r.M) == r:
                out.append(cand)
    return out


def coarsen(r, N):
    """The 1/N-region containing the (finer) region ``r``.

    A clock's position inside its coarse cell is its fine offset ``iota % k``
    followed by its fine fractional rank, so sorting on that pair gives the
    coarse blocks.
    """
    if N == r.N:
        return r
    k = r.N // N
    pos = r.block_of
    iota = tuple(i // k for i in r.iota)
    zero, keyed = [], {}
    for x in range(r.n):
        rem = r.iota[x] % k
        if rem == 0 and pos[x] == 0:
            zero.append(x)
        else:
            keyed.setdefault((rem, pos[x]), []).append(x)
    blocks = tuple(tuple(keyed[q]) for q in sorted(keyed))
    return NRegion(N, r.M, iota, tuple(zero), blocks)


@dataclass(frozen=True)
class RegionTransition:
    index: int
    src: int
    dst: int
    mid: NRegion
    resets: frozenset
    weight: int
    edge: int


class RegionGame:
    """Reachable part of the region game at granularity N."""

    def __init__(self, game, N, states, transitions, initial):
        self.game = game
        self.N = N
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}
        self.transitions = transitions
        self.initial = initial
        self.out = [[] for _ in states]
        self.inc = [[] for _ in states]
        for t in transitions:
            self.out[t.src].append(t)
            self.inc[t.dst].append(t)

    def __len__(self):
        return len(self.states)

    def location(self, s):
        return self.game.locations[self.states[s][0]]

    def owner(self, s):
        return self.location(s).owner

    def rate(self, s):
        return self.location(s).rate

    def is_target(self, s):
        return self.location(s).target

    def region(self, s):
        return self.states[s][1]

    def final_fn(self, s):
        loc, r = self.states[s]
        return self.game.final_weight(loc).on_region(r)

    def state_of(self, loc, nu):
        return self.index.get((loc, region_of(nu, self.N, self.game.clock_bound)))

    def label(self, s):
        loc, r = self.states[s]
        return f"{loc}|{r.describe(self.game.clocks)}"

    def succ(self, s):
        return [t.dst for t in self.out[s]]


def enabled_moves(game, r, transition):
    """Regions reachable from ``r`` by a delay (zero included) in which the guard holds."""
    out = []
    for mid in [r] + time_successors(r):
        if transition.guard.holds(mid.representative):
            out.append(mid)
    return out


def build_region_game(game, N=1, initial=None, allow_deadlock=False):
    """Breadth-first construction of the reachable region game.

    ``initial`` is a list of (location, valuation) pairs; by default the
    game's initial location at the zero valuation.  Zero delays are allowed,
    so a region counts among its own time successors.
    """
    M = game.clock_bound
    zero_val = tuple(Fraction(0) for _ in game.clocks)
    if initial is None:
        initial = [(game.initial, zero_val)]
    states, index, trans = [], {}, []
    queue = deque()

    def visit(key):
        if key not in index:
            index[key] = len(states)
            states.append(key)
            queue.append(key)
        return index[key]

    init = [visit((loc, region_of(nu, N, M))) for loc, nu in initial]
    while queue:
        key = queue.popleft()
        loc, r = key
        s = index[key]
        if game.locations[loc].target:
            continue
        for t in game.out[loc]:
            for mid in enabled_moves(game, r, t):
                d = visit((t.target, reset_region(mid, t.resets)))
                trans.append(RegionTransition(len(trans), s, d, mid, t.resets, t.weight, t.index))
    rg = RegionGame(game, N, states, trans, init)
    if not allow_deadlock:
        for s in range(len(states)):
            if not rg.is_target(s) and not rg.out[s]:
                raise ValidationError("deadlock", f"deadlocked non-target state {rg.label(s)}")
    return rg


def corner_moves(src, mid, dst, resets):
    """Corner-level moves of a region transition.

    Yields ``(k_src, k_dst, delay)``: from corner ``k_src`` of ``src`` wait
    ``delay`` to reach a corner of the closure of ``mid``, then reset into
    corner ``k_dst`` of ``dst``.  The moves only depend on the regions'
    shapes and relative offsets, which is what the cache is keyed on.
    """
    resets = frozenset(resets)
    key = (src.N, src.zero, src.blocks, mid.zero, mid.blocks, dst.zero, dst.blocks, resets,
           tuple(a - b for a, b in zip(mid.iota, src.iota)),
           tuple(a - (0 if x in resets else b) for x, (a, b) in enumerate(zip(dst.iota, src.iota))))
    hit = _MOVES.get(key)
    if hit is None:
        hit = _MOVES[key] = _corner_moves(src, mid, dst, resets)
    return hit


_MOVES = {}


def _corner_moves(src, mid, dst, resets):
    dst_idx = {c: k for k, c in enumerate(dst.corners)}
    out = []
    for ks, v in enumerate(src.corners):
        for w in mid.corners:
            d = w[0] - v[0] if v else Fraction(0)
            if d < 0 or any(w[x] - v[x] != d for x in range(len(v))):
                continue
            after = tuple(Fraction(0) if x in resets else w[x] for x in range(len(w)))
            out.append((ks, dst_idx[after], d))
    return tuple(out)


class CornerGame:
    """Finite weighted game over corner states ``(region state, corner index)``."""

    def __init__(self, rg, states=None):
        self.rg = rg
        self.states = sorted(range(len(rg)) if states is None else states)
        keep = set(self.states)
        self.vertices = [(s, k) for s in self.states for k in range(len(rg.region(s).corners))]
        self.vindex = {v: i for i, v in enumerate(self.vertices)}
        self.edges = []
        for s in self.states:
            rate = rg.rate(s)
            for t in rg.out[s]:
                if t.dst not in keep:
                    continue
                for ks, kd, d in corner_moves(rg.region(s), t.mid, rg.region(t.dst), t.resets):
                    self.edges.append((self.vindex[(s, ks)], self.vindex[(t.dst, kd)],
                                       d * rate + t.weight, t.index, d))

    def owner(self, v):
        return self.rg.owner(self.vertices[v][0])

    def final_weights(self):
        out = {}
        for i, (s, k) in enumerate(self.vertices):
            if self.rg.is_target(s):
                r = self.rg.region(s)
                out[i] = self.rg.final_fn(s).eval_local(r.simplex[k])
        return out

    def to_untimed(self):
        from .untimed_solver import FiniteWeightedGame
        return FiniteWeightedGame([self.owner(v) for v in range(len(self.vertices))],
                                  [(a, b, w) for a, b, w, _, _ in self.edges],
                                  self.final_weights())

    def corner(self, v):
        s, k = self.vertices[v]
        return self.rg.region(s).corners[k]


def build_corner_game(rg, states=None):
    return CornerGame(rg, states)


def region_game_dot(rg):
    lines = ["digraph regiongame {"]
    for s in range(len(rg)):
        shape = "box" if rg.owner(s) != MIN else ("doublecircle" if rg.is_target(s) else "circle")
        lines.append(f'  s{s} [label="{rg.label(s)}", shape={shape}];')
    for t in rg.transitions:
        lines.append(f'  s{t.src} -> s{t.dst} [label="w={t.weight}"];')
    lines.append("}")
    return "\n".join(lines)


def corner_game_dot(cg):
    rg = cg.rg
    lines = ["digraph cornergame {"]
    clocks = rg.game.clocks
    for i, (s, k) in enumerate(cg.vertices):
        c = ",".join(f"{clocks[x]}={v}" for x, v in enumerate(rg.region(s).corners[k]))
        shape = "box" if rg.owner(s) != MIN else "circle"
        lines.append(f'  c{i} [label="{rg.states[s][0]} ({c})", shape={shape}];')
    for a, b, w, _, _ in cg.edges:
        lines.append(f'  c{a} -> c{b} [label="{w}"];')
    lines.append("}")
    return "\n".join(lines)


def _ordered_bell(k):
    f = [1]
    for m in range(1, k + 1):
        f.append(sum(math.comb(m, i) * f[m - i] for i in range(1, m + 1)))
    return f[k]


def count_regions(n, M, N):
    """Number of 1/N-regions of ``n`` clocks bounded by M (closed form of ``len(all_regions(...))``)."""
    MN = M * N
    total = 0
    for c in range(n + 1):
        free = n - c
        shapes = sum(math.comb(free, j) * _ordered_bell(j) for j in range(free + 1))
        total += math.comb(n, c) * MN ** free * shapes
    return total
