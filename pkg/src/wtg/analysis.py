"""Graph analyses on the region game: SCCs, attractors, cycle signs and kernels.

Cycle signs are read off the corner game at granularity 1, where every
corner play weight is an integer.  Signs are decided on closed corner
cycles (a corner play that comes back to the corner it started from),
plus a synchronized product of two corner plays along the same region
cycle to catch cycles that admit both a zero and a nonzero closed play.
"""

import warnings
from dataclasses import dataclass, field

import networkx as nx

from . import _kernels_py, kernels
from .core_model import INF, MAX, MIN, NEG_INF, ValidationError
from .region import CornerGame, build_region_game, corner_moves

POSITIVE = "Positive"
NEGATIVE = "Negative"
NON_NEGATIVE = "NonNegative"
NON_POSITIVE = "NonPositive"
MIXED = "Mixed"


@dataclass
class SccInfo:
    id: int
    states: list
    topo_index: int
    nontrivial: bool
    classification: str = POSITIVE
    kernel: frozenset = frozenset()  # region transition indices
    witness: str = ""

    @property
    def kernel_states(self):
        return self._kernel_states

    def set_kernel(self, rg, trans):
        self.kernel = frozenset(trans)
        self._kernel_states = frozenset(s for t in trans for s in (rg.transitions[t].src, rg.transitions[t].dst))


@dataclass
class SccDag:
    sccs: list  # in reverse topological order: successors first
    of_state: dict = field(default_factory=dict)


def scc_decompose(rg):
    """SCCs of the region game, listed so that every SCC comes after the SCCs it can reach."""
    G = nx.MultiDiGraph()
    G.add_nodes_from(range(len(rg)))
    G.add_edges_from((t.src, t.dst) for t in rg.transitions)
    C = nx.condensation(G)
    order = list(reversed(list(nx.lexicographical_topological_sort(C, key=lambda c: min(C.nodes[c]["members"])))))
    sccs = []
    of_state = {}
    for i, c in enumerate(order):
        members = sorted(C.nodes[c]["members"])
        loop = len(members) > 1 or any(t.dst == members[0] for t in rg.out[members[0]])
        info = SccInfo(i, members, i, loop)
        info.set_kernel(rg, ())
        sccs.append(info)
        for s in members:
            of_state[s] = i
    return SccDag(sccs, of_state)


def attractor(rg, player, target, sub=None):
    """States of ``sub`` from which ``player`` forces a visit to ``target``.

    ``target`` states count as attracted whether or not they lie in ``sub``.
    A state of the opponent is attracted when all its successors are.
    """
    target = set(target)
    sub = set(range(len(rg))) if sub is None else set(sub)
    attr = set(target)
    pending = {s: len(rg.out[s]) for s in sub}
    queue = list(target)
    while queue:
        s = queue.pop()
        for t in rg.inc[s]:
            p = t.src
            if p in attr or p not in sub:
                continue
            if rg.owner(p) == player:
                attr.add(p)
                queue.append(p)
            else:
                pending[p] -= 1
                if pending[p] == 0:
                    attr.add(p)
                    queue.append(p)
    return attr


def _graph_attractor(nodes, succ, owner_of, player, target):
    """Attractor on an explicit graph restricted to ``nodes``."""
    attr = set(target) & nodes
    pred = {v: [] for v in nodes}
    pending = {}
    for v in nodes:
        out = [w for w in succ[v] if w in nodes]
        pending[v] = len(out)
        for w in out:
            pred[w].append(v)
    queue = list(attr)
    while queue:
        w = queue.pop()
        for v in pred[w]:
            if v in attr:
                continue
            if owner_of(v) == player:
                attr.add(v)
                queue.append(v)
            else:
                pending[v] -= 1
                if pending[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr


def _has_negative_cycle(n, edges):
    """Bellman-Ford from a virtual source; exact integers."""
    dist = [0] * n
    for _ in range(n):
        changed = False
        for a, b, w in edges:
            if dist[a] + w < dist[b]:
                dist[b] = dist[a] + w
                changed = True
        if not changed:
            return False
    return True


def _apsp(n, edges, longest=False):
    src = [a for a, _, _ in edges]
    dst = [b for _, b, _ in edges]
    w = [int(c) for _, _, c in edges]
    big = max((abs(x) for x in w), default=0) * (n + 1)
    impl = kernels if big < kernels.SAFE else _kernels_py
    return impl.floyd_warshall(n, src, dst, w, longest)


class _CornerView:
    """Corner graph of one SCC at granularity 1, with integer weights."""

    def __init__(self, rg, states, sign=1):
        self.cg = CornerGame(rg, states)
        self.rg = rg
        self.n = len(self.cg.vertices)
        self.edges = [(a, b, sign * int(w)) for a, b, w, _, _ in self.cg.edges]
        self.by_state = {}
        for i, (s, _) in enumerate(self.cg.vertices):
            self.by_state.setdefault(s, []).append(i)
        self.by_trans = {}
        for (a, b, w), (_, _, _, t, _) in zip(self.edges, self.cg.edges):
            self.by_trans.setdefault(t, []).append((a, b, w))


def classify_scc(rg, scc):
    """Classify an SCC and compute its kernel.  Returns the updated :class:`SccInfo`."""
    if not scc.nontrivial:
        scc.classification = POSITIVE
        return scc
    view = _CornerView(rg, scc.states)
    neg = _has_negative_cycle(view.n, view.edges)
    pos = _has_negative_cycle(view.n, [(a, b, -w) for a, b, w in view.edges])
    if neg and pos:
        scc.classification = MIXED
        scc.witness = "closed corner cycles of both signs"
        return scc
    sign = -1 if neg else 1
    view = _CornerView(rg, scc.states, sign)
    D = _apsp(view.n, view.edges)
    kern = sorted(t for t, es in view.by_trans.items()
                  if any(D[b][a] != kernels.POS and w + D[b][a] == 0 for a, b, w in es))
    bad = _product_witness(rg, view)
    if bad:
        scc.classification = MIXED
        scc.witness = bad
        return scc
    scc.set_kernel(rg, kern)
    if sign == 1:
        scc.classification = NON_NEGATIVE if kern else POSITIVE
    else:
        scc.classification = NON_POSITIVE if kern else NEGATIVE
    return scc


def _potentials(n, edges):
    """Shortest distances from a virtual source (no negative cycles assumed)."""
    dist = [0] * n
    for _ in range(n + 1):
        changed = False
        for a, b, w in edges:
            if dist[a] + w < dist[b]:
                dist[b] = dist[a] + w
                changed = True
        if not changed:
            break
    return dist


def _product_witness(rg, view):
    """Search two corner plays along the same region cycle, the first of weight 0 and the second not.

    Product vertices are pairs of corners of one state; a product edge pairs
    two corner edges of the same region transition.  Zero cycles of the first
    component are exactly the cycles made of zero reduced-cost edges; inside
    each SCC of that subgraph, the second component has a nonzero cycle iff
    its weights are not a potential difference.
    """
    pairs = {}
    for cs in view.by_state.values():
        for v in cs:
            for u in cs:
                pairs[(v, u)] = len(pairs)
    pedges = []
    for es in view.by_trans.values():
        for a1, b1, w1 in es:
            for a2, b2, w2 in es:
                pedges.append((pairs[(a1, a2)], pairs[(b1, b2)], w1, w2))
    pot = _potentials(len(pairs), [(a, b, w1) for a, b, w1, _ in pedges])
    zero = [(a, b, w2) for a, b, w1, w2 in pedges if w1 + pot[a] - pot[b] == 0]
    G = nx.DiGraph()
    G.add_nodes_from(range(len(pairs)))
    G.add_edges_from((a, b) for a, b, _ in zero)
    comp = {}
    for i, c in enumerate(nx.strongly_connected_components(G)):
        for v in c:
            comp[v] = i
    inner = [(a, b, w) for a, b, w in zero if comp[a] == comp[b]]
    adj = {}
    for a, b, w in inner:
        adj.setdefault(a, []).append((b, w))
        adj.setdefault(b, []).append((a, -w))
    phi = {}
    for start in adj:
        if start in phi:
            continue
        phi[start] = 0
        stack = [start]
        while stack:
            v = stack.pop()
            for u, w in adj[v]:
                if u not in phi:
                    phi[u] = phi[v] + w
                    stack.append(u)
    names = {i: p for p, i in pairs.items()}
    for a, b, w in inner:
        if phi[a] + w != phi[b]:
            s = view.cg.vertices[names[a][0]][0]
            return f"a region cycle through {rg.label(s)} has closed corner plays of weight 0 and nonzero weight"
    return ""


@dataclass
class DivergenceReport:
    almost_divergent: bool
    divergent: bool
    dag: SccDag
    rg: object

    def mixed(self):
        return [s for s in self.dag.sccs if s.classification == MIXED]


def analyse(rg):
    dag = scc_decompose(rg)
    for scc in dag.sccs:
        classify_scc(rg, scc)
    ok = all(s.classification != MIXED for s in dag.sccs)
    div = all(s.classification in (POSITIVE, NEGATIVE) for s in dag.sccs)
    return DivergenceReport(ok, div, dag, rg)


def check_almost_divergent(g, rg=None):
    if rg is None:
        rg = build_region_game(g, 1)
    return analyse(rg)


def compute_kernel(rg, scc):
    if scc.classification == MIXED:
        raise ValidationError("mixed-scc", "kernel requested for a component that is not almost-divergent")
    return scc.kernel, scc.kernel_states


def plus_infinity_states(rg):
    """States from which Min cannot force a visit to a target of finite or -inf weight."""
    good = [s for s in range(len(rg)) if rg.is_target(s) and rg.final_fn(s).tag != INF]
    win = attractor(rg, MIN, good)
    return set(range(len(rg))) - win


def minus_infinity_states(rg, dag=None, plus=None):
    """States with value -inf, computed component by component from the bottom of the SCC DAG."""
    dag = dag or analyse(rg).dag
    plus = plus_infinity_states(rg) if plus is None else plus
    minus = {s for s in range(len(rg)) if rg.is_target(s) and rg.final_fn(s).tag == NEG_INF}
    for scc in dag.sccs:
        states = set(scc.states)
        if scc.classification == MIXED:
            raise ValidationError("mixed-scc", "component is neither non-negative nor non-positive")
        if scc.classification in (NON_POSITIVE, NEGATIVE) and scc.nontrivial:
            minus |= _buchi_minus(rg, scc, minus, plus)
        else:
            minus |= attractor(rg, MIN, minus, states) & states
    assert not (minus & plus), "a state cannot have both infinite values"
    return minus


def _buchi_minus(rg, scc, minus, plus=frozenset()):
    """States of a non-positive component from which Min can make the weight diverge to -inf.

    Min wins by reaching a -inf state, or by staying in the component forever
    while taking transitions outside the kernel infinitely often.  States of
    value +inf are losing sinks: cycling only pays off while Min can still
    force a target.
    """
    states = set(scc.states)
    WIN, LOSE = "win", "lose"
    succ = {WIN: [WIN], LOSE: [LOSE]}
    owner = {WIN: MIN, LOSE: MIN}
    acc = {WIN}
    for s in states:
        owner[s] = rg.owner(s)
        succ[s] = []
        if s in plus:
            succ[s].append(LOSE)
            continue
        for t in rg.out[s]:
            if t.dst in plus:
                succ[s].append(LOSE)
            elif t.dst in states:
                if t.index in scc.kernel:
                    succ[s].append(t.dst)
                else:
                    mid = ("acc", t.index)
                    succ[mid] = [t.dst]
                    owner[mid] = MIN
                    acc.add(mid)
                    succ[s].append(mid)
            else:
                succ[s].append(WIN if t.dst in minus else LOSE)
    G = set(succ)
    rounds = 0
    while True:
        rounds += 1
        R = _graph_attractor(G, succ, owner.get, MIN, acc & G)
        trap = G - R
        if not trap:
            break
        G -= _graph_attractor(G, succ, owner.get, MAX, trap)
    if rounds > 4:
        warnings.warn(f"Büchi fixpoint took {rounds} rounds")
    return {s for s in G if s in states}


def infinity_report(rg, dag=None):
    dag = dag or analyse(rg).dag
    plus = plus_infinity_states(rg)
    minus = minus_infinity_states(rg, dag, plus)
    return plus, minus


def simple_cycles(rg, states=None):
    """Every simple cycle of the region game as a list of transition indices (parallel edges expanded)."""
    keep = set(range(len(rg))) if states is None else set(states)
    G = nx.DiGraph()
    G.add_nodes_from(keep)
    par = {}
    for t in rg.transitions:
        if t.src in keep and t.dst in keep:
            G.add_edge(t.src, t.dst)
            par.setdefault((t.src, t.dst), []).append(t.index)
    out = []
    for cyc in nx.simple_cycles(G):
        hops = list(zip(cyc, cyc[1:] + cyc[:1]))
        combos = [[]]
        for h in hops:
            combos = [c + [t] for c in combos for t in par[h]]
        out.extend(combos)
    return out


def cycle_corner_range(rg, path):
    """(min, max) corner play weight along a path of region transitions (from any corner to any corner)."""
    first = rg.transitions[path[0]].src
    cur = {k: (0, 0) for k in range(len(rg.region(first).corners))}
    for ti in path:
        t = rg.transitions[ti]
        rate = rg.rate(t.src)
        nxt = {}
        for ks, kd, d in corner_moves(rg.region(t.src), t.mid, rg.region(t.dst), t.resets):
            if ks not in cur:
                continue
            w = d * rate + t.weight
            lo, hi = cur[ks][0] + w, cur[ks][1] + w
            if kd in nxt:
                lo, hi = min(lo, nxt[kd][0]), max(hi, nxt[kd][1])
            nxt[kd] = (lo, hi)
        cur = nxt
    return min(v[0] for v in cur.values()), max(v[1] for v in cur.values())


def cycle_corner_weights(rg, path):
    """All corner play weights along ``path`` (exhaustive; desk scale only)."""
    first = rg.transitions[path[0]].src
    cur = {(k, 0) for k in range(len(rg.region(first).corners))}
    for ti in path:
        t = rg.transitions[ti]
        rate = rg.rate(t.src)
        moves = corner_moves(rg.region(t.src), t.mid, rg.region(t.dst), t.resets)
        cur = {(kd, w + d * rate + t.weight) for k, w in cur for ks, kd, d in moves if ks == k}
    return sorted({w for _, w in cur})
