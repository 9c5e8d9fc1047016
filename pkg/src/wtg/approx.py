"""Epsilon-approximation of values: static (kernels plus semi-unfolding) and symbolic schemas.

Static schema, per SCC of the region game from the bottom up:

* states of value +inf or -inf are set aside and act as exits;
* the kernel (transitions on 0-cycles) splits into components; each
  component is solved on its 1/N-corner game and the corner values are
  interpolated on every 1/N-region;
* the rest of the SCC is unfolded into a tree in which kernel components
  appear as single nodes, and a branch stops (with weight +inf for a
  non-negative SCC, -inf for a non-positive one) once some label occurs
  ``gamma`` times on it; the tree is then solved exactly from the leaves.

The tree is memoised by (label, occurrence counts).  When it grows beyond a
node budget, a layered unfolding is used instead: every branch of the
occurrence tree has at most ``H = labels*(gamma-1)`` nodes before its stop
leaf, so layer ``h`` holds the value of each label with ``h`` steps left.
"""

import math
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .analysis import MIXED, NEGATIVE, NON_POSITIVE, analyse, infinity_report
from .core_model import INF, NEG_INF, ValidationError, is_finite
from .pwl import RegionFn, interpolate
from .region import (build_region_game, coarsen, corner_moves, count_regions, reset_region,
                     subregions, successor)
from .timed_solver import ValueMap, step_state, value_iteration
from .untimed_solver import FiniteWeightedGame, solve_untimed

TREE_NODE_BUDGET = 20000


# --- kernels -----------------------------------------------------------------

@dataclass
class KernelResult:
    values: dict  # region state -> RegionFn
    N: int
    kappa: Fraction
    corner_values: dict = field(default_factory=dict)  # (state, 1/N-region) -> list of corner values


def kernel_kappa(rg, comp, exit_fns):
    """Rate bound times the number of region states of the kernel game, plus the exits' Lipschitz bound."""
    finite = {t: f for t, f in exit_fns.items() if f.tag is None}
    n_states = len(comp) + len({rg.transitions[t].dst for t in finite})
    L = max((f.lipschitz() for f in finite.values()), default=Fraction(0))
    return Fraction(rg.game.w_max_L * n_states) + L


def granularity(kappa, alpha, eps):
    return max(1, math.ceil(Fraction(kappa) * alpha / Fraction(eps)))


def _corner_limit(fn, r2, k):
    """Limit of ``fn`` at corner ``k`` of the finer region ``r2`` approached from inside ``r2``."""
    if fn.tag is not None:
        return fn.tag
    r = fn.region
    return fn.eval_toward(r.local(r2.corners[k]), r.local(r2.representative))


def approximate_kernel(rg, comp, kernel_trans, exit_fns, eps=None, alpha=1, N=None):
    """Approximate values on a kernel component by interpolating its 1/N-corner values.

    ``comp`` lists the region states of the component, ``kernel_trans`` its
    kernel transitions and ``exit_fns`` maps every other transition leaving
    the component to the value function at its destination.  The
    granularity is ``N`` if given, else ``ceil(kappa*alpha/eps)``.
    """
    kappa = kernel_kappa(rg, comp, exit_fns)
    if N is None:
        N = granularity(kappa, alpha, eps)
    comp = sorted(comp)
    kernel_trans = set(kernel_trans)
    vindex, owners, finals, edges = {}, [], {}, []

    def vertex(key, k, owner, final=None):
        v = vindex.get((key, k))
        if v is None:
            v = vindex[(key, k)] = len(owners)
            owners.append(owner)
            if final is not None:
                finals[v] = final
        return v

    subs = {s: subregions(rg.region(s), N) for s in comp}
    for s in comp:
        for r2 in subs[s]:
            for k in range(len(r2.corners)):
                vertex(("k", s, r2), k, rg.owner(s))
    # Delays are split into steps to the immediate time successor through
    # "waiting" vertices of the same owner, which keeps the corner game linear
    # in N per region; waiting vertices that can never fire are left out.
    for s in comp:
        rate, owner = rg.rate(s), rg.owner(s)
        by_mid = {}
        for t in rg.out[s]:
            by_mid.setdefault(t.mid, []).append(t)
        fires, live = {}, {}

        def fire_list(m):
            f = fires.get(m)
            if f is None:
                f = fires[m] = by_mid.get(coarsen(m, rg.N), [])
            return f

        def is_live(m):
            chain = []
            while m is not None and m not in live:
                chain.append(m)
                m = successor(m)
            ok = live.get(m, False)
            for c in reversed(chain):
                ok = ok or bool(fire_list(c))
                live[c] = ok
            return ok

        todo = [("k", s, r2) for r2 in subs[s]]
        seen = set(todo)
        while todo:
            key = todo.pop()
            m = key[2]
            for t in fire_list(m):
                dst2 = reset_region(m, t.resets)
                if t.index in kernel_trans:
                    tkey, fn = ("k", t.dst, dst2), None
                else:
                    tkey, fn = ("x", t.index, dst2), exit_fns[t.index]
                for ks, kd, d in corner_moves(m, m, dst2, t.resets):
                    a = vertex(key, ks, owner)
                    if fn is None:
                        b = vindex[(tkey, kd)]
                    else:
                        b = vertex(tkey, kd, owner, _corner_limit(fn, dst2, kd))
                    edges.append((a, b, d * rate + t.weight))
            nxt = successor(m)
            if nxt is not None and is_live(nxt):
                wkey = ("w", s, nxt)
                for ks, kd, d in corner_moves(m, nxt, nxt, frozenset()):
                    edges.append((vertex(key, ks, owner), vertex(wkey, kd, owner), d * rate))
                if wkey not in seen:
                    seen.add(wkey)
                    todo.append(wkey)
    res = solve_untimed(FiniteWeightedGame(owners, edges, finals))
    vals = res.values
    values, corner_values = {}, {}
    for s in comp:
        table = {}
        for r2 in subs[s]:
            cv = [vals[vindex[(("k", s, r2), k)]] for k in range(len(r2.corners))]
            corner_values[(s, r2)] = cv
            table[r2] = cv
        values[s] = _interpolate_or_tag(rg.region(s), table)
    return KernelResult(values, N, kappa, corner_values)


def _interpolate_or_tag(region, table):
    full = {r2: v for r2, v in table.items() if r2.dim == region.dim}
    inf = [x for v in full.values() for x in v if not is_finite(x)]
    if inf:
        tag = INF if INF in inf else NEG_INF
        if len(inf) != sum(len(v) for v in full.values()) or len(set(inf)) > 1:
            warnings.warn("kernel corners mix finite and infinite values; region taken as infinite")
        return RegionFn(region, tag=tag)
    return interpolate(region, full)


# --- semi-unfolding ------------------------------------------------------------

@dataclass
class SccPlan:
    """Labels of an SCC once infinite states are set aside."""
    states: frozenset
    labels: list  # ("S", state) or ("K", component index)
    label_of: dict  # state -> label index
    components: list  # list of (sorted states, frozenset kernel transitions)
    stop_value: float

    def label_states(self, i):
        kind, x = self.labels[i]
        return [x] if kind == "S" else self.components[x][0]

    def exits(self, rg, i):
        """Transitions leaving label ``i`` (for a kernel: every non-kernel transition of its states)."""
        kind, x = self.labels[i]
        if kind == "S":
            return list(rg.out[x])
        states, kt = self.components[x]
        return [t for s in states for t in rg.out[s] if t.index not in kt]


def plan_scc(rg, scc, removed):
    states = frozenset(s for s in scc.states if s not in removed)
    kt = [t for t in scc.kernel if rg.transitions[t].src in states and rg.transitions[t].dst in states]
    G = nx.DiGraph()
    for t in kt:
        G.add_edge(rg.transitions[t].src, rg.transitions[t].dst)
    components = []
    for c in sorted(nx.strongly_connected_components(G), key=min):
        cs = sorted(c)
        inner = frozenset(t for t in kt if rg.transitions[t].src in c and rg.transitions[t].dst in c)
        if inner:
            components.append((cs, inner))
    labels, label_of = [], {}
    for i, (cs, _) in enumerate(components):
        for s in cs:
            label_of[s] = len(labels)
        labels.append(("K", i))
    for s in sorted(states):
        if s not in label_of:
            label_of[s] = len(labels)
            labels.append(("S", s))
    stop = NEG_INF if scc.classification in (NON_POSITIVE, NEGATIVE) else INF
    return SccPlan(states, labels, label_of, components, stop)


@dataclass(eq=False)
class UNode:
    label: int
    counts: tuple
    stop: bool
    children: dict = field(default_factory=dict)  # transition index -> UNode (exits inside the SCC)


@dataclass
class SemiUnfolding:
    plan: SccPlan
    roots: dict  # label -> UNode
    nodes: int
    depth: int  # longest branch, stop leaf included
    alpha: int  # most kernel nodes on a branch


def build_semi_unfolding(rg, plan, gamma, roots=None, budget=TREE_NODE_BUDGET):
    """Occurrence-bounded unfolding of the SCC; None if it exceeds ``budget`` nodes."""
    memo = {}
    nlab = len(plan.labels)

    def node(label, counts):
        key = (label, counts)
        n = memo.get(key)
        if n is not None:
            return n
        if len(memo) >= budget:
            raise OverflowError
        n = memo[key] = UNode(label, counts, counts[label] >= gamma)
        if not n.stop:
            for t in plan.exits(rg, label):
                if t.dst in plan.states:
                    c = plan.label_of[t.dst]
                    nc = counts[:c] + (counts[c] + 1,) + counts[c + 1:]
                    n.children[t.index] = node(c, nc)
        return n

    roots = range(nlab) if roots is None else roots
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10 * nlab * gamma + 1000))
    try:
        built = {}
        for lab in roots:
            built[lab] = node(lab, tuple(1 if i == lab else 0 for i in range(nlab)))
    except OverflowError:
        return None
    finally:
        sys.setrecursionlimit(limit)
    depth, alpha = {}, {}
    for n in sorted(memo.values(), key=lambda n: -sum(n.counts)):
        kids = list({id(c): c for c in n.children.values()}.values())
        depth[id(n)] = 1 + max((depth[id(c)] for c in kids), default=0)
        own = 1 if plan.labels[n.label][0] == "K" and not n.stop else 0
        alpha[id(n)] = own + max((alpha[id(c)] for c in kids), default=0)
    return SemiUnfolding(plan, built, len(memo),
                         max(depth[id(r)] for r in built.values()),
                         max(alpha[id(r)] for r in built.values()))


def sound_gamma(rg, plan, exit_sup):
    """Occurrence bound ``3|S| w^e + 2 sup|wT| + 2`` with SCC-local size and exit values."""
    return math.ceil(3 * len(plan.states) * rg.game.w_max_e + 2 * exit_sup + 2)


def _label_values(rg, plan, label, child_value, outside, kernel_solver):
    """Value functions of one label given its children's values."""
    kind, x = plan.labels[label]
    if kind == "S":
        succ = {}
        for t in rg.out[x]:
            succ[t.dst] = child_value(t) if t.dst in plan.states else outside[t.dst]
        return {x: step_state(rg, succ, x)}
    states, kt = plan.components[x]
    exit_fns = {}
    for t in plan.exits(rg, label):
        exit_fns[t.index] = child_value(t) if t.dst in plan.states else outside[t.dst]
    return kernel_solver(x, exit_fns)


@dataclass
class SccReport:
    states: list
    classification: str
    gamma: int
    gamma_sound: int
    scheme: str
    alpha: int
    depth: int
    eps: Fraction
    kernels: list = field(default_factory=list)  # dicts with N and kappa

    def to_json(self):
        from .core_model import fmt_rational
        return {"states": self.states, "classification": self.classification, "gamma": self.gamma,
                "gamma_sound": self.gamma_sound, "scheme": self.scheme, "alpha": self.alpha,
                "depth": self.depth, "epsilon": fmt_rational(self.eps), "kernels": self.kernels}


def _exit_sup(rg, plan, outside):
    sup = Fraction(0)
    for s in plan.states:
        for t in rg.out[s]:
            if t.dst not in plan.states:
                f = outside[t.dst]
                if f.tag is None:
                    sup = max(sup, abs(f.min_value()), abs(f.max_value()))
    return sup


def approximate_scc(rg, scc, outside, eps, removed=frozenset(), gamma=None, N=None,
                    scheme="auto", budget=TREE_NODE_BUDGET):
    """Values on the states of one SCC, given the value functions of every state outside it.

    Returns ``(values, report)``.  ``gamma`` overrides the sound occurrence
    bound (with a warning), ``N`` forces the kernel granularity.
    """
    if scc.classification == MIXED:
        raise ValidationError("not-almost-divergent", scc.witness or "mixed component")
    plan = plan_scc(rg, scc, removed)
    g_sound = sound_gamma(rg, plan, _exit_sup(rg, plan, outside))
    if gamma is None:
        gamma = g_sound
    elif gamma < g_sound:
        warnings.warn(f"occurrence bound {gamma} is below the sound bound {g_sound}; "
                      "the result is unsound unless verified")
    report = SccReport([rg.label(s) for s in sorted(plan.states)], scc.classification, gamma, g_sound,
                       "", 0, 0, Fraction(eps))
    cache = {}

    def kernel_solver(alpha):
        def solve(ci, exit_fns):
            key = (ci, tuple(sorted((t, f.key()) for t, f in exit_fns.items())))
            hit = cache.get(key)
            if hit is None:
                states, kt = plan.components[ci]
                hit = cache[key] = approximate_kernel(rg, states, kt, exit_fns, eps, max(alpha, 1), N)
                report.kernels.append({"states": [rg.label(s) for s in states], "N": hit.N,
                                       "kappa": str(hit.kappa)})
            return hit.values
        return solve

    tree = None
    if scheme in ("auto", "tree"):
        tree = build_semi_unfolding(rg, plan, gamma, budget=budget if scheme == "auto" else 10 ** 9)
    if tree is not None:
        report.scheme, report.alpha, report.depth = "tree", tree.alpha, tree.depth
        values = _solve_tree(rg, plan, tree, outside, kernel_solver(tree.alpha))
    else:
        H = len(plan.labels) * (gamma - 1)
        report.scheme, report.alpha, report.depth = "layered", H, H + 1
        values = _solve_layered(rg, plan, H, outside, kernel_solver(H))
    return values, report


def _solve_tree(rg, plan, tree, outside, kernel_solver):
    memo = {}

    def value(n):
        v = memo.get(id(n))
        if v is not None:
            return v
        if n.stop:
            v = {s: RegionFn(rg.region(s), tag=plan.stop_value) for s in plan.label_states(n.label)}
        else:
            v = _label_values(rg, plan, n.label, lambda t: value(n.children[t.index])[t.dst],
                              outside, kernel_solver)
        memo[id(n)] = v
        return v

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20 * tree.depth + 1000))
    try:
        out = {}
        for lab, root in tree.roots.items():
            out.update(value(root))
        return out
    finally:
        sys.setrecursionlimit(limit)


def _solve_layered(rg, plan, H, outside, kernel_solver):
    prev = {}
    for lab in range(len(plan.labels)):
        for s in plan.label_states(lab):
            prev[s] = RegionFn(rg.region(s), tag=plan.stop_value)
    for _ in range(H):
        cur = {}
        for lab in range(len(plan.labels)):
            cur.update(_label_values(rg, plan, lab, lambda t: prev[t.dst], outside, kernel_solver))
        if all(cur[s].equals(prev[s]) for s in cur):
            return cur
        prev = cur
    return prev


# --- whole game ------------------------------------------------------------------

@dataclass
class ApproxResult:
    values: ValueMap
    epsilon: Fraction
    plus_inf: set
    minus_inf: set
    sccs: list  # SccReport per nontrivial SCC
    eps_scc: Fraction = Fraction(0)

    def certificate(self):
        return {"epsilon": str(self.epsilon), "epsilon_per_scc": str(self.eps_scc),
                "sccs": [r.to_json() for r in self.sccs]}


def scc_chain_length(rg, dag, weight):
    """Largest total ``weight`` along a path of the SCC DAG."""
    best = {}
    for scc in dag.sccs:  # successors first
        succ = {dag.of_state[t.dst] for s in scc.states for t in rg.out[s]} - {scc.id}
        best[scc.id] = weight(scc) + max((best[c] for c in succ), default=0)
    return max(best.values(), default=0)


def approximate_game(g, eps, gamma=None, N=None, scheme="auto", rg=None):
    """Static schema over the whole region game (granularity 1)."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    rg = rg or build_region_game(g, 1)
    rep = analyse(rg)
    if not rep.almost_divergent:
        w = rep.mixed()[0]
        raise ValidationError("not-almost-divergent", f"component {[rg.label(s) for s in w.states]}: {w.witness}")
    plus, minus = infinity_report(rg, rep.dag)
    c = max(1, scc_chain_length(rg, rep.dag, lambda s: 1 if s.nontrivial else 0))
    eps_scc = eps / c
    V = ValueMap(rg)
    for s in plus:
        V[s] = RegionFn(rg.region(s), tag=INF)
    for s in minus:
        V[s] = RegionFn(rg.region(s), tag=NEG_INF)
    removed = frozenset(plus | minus)
    reports = []
    for scc in rep.dag.sccs:
        live = [s for s in scc.states if s not in removed]
        if not live:
            continue
        if not scc.nontrivial:
            V[live[0]] = step_state(rg, V, live[0])
            continue
        vals, r = approximate_scc(rg, scc, V, eps_scc, removed, gamma, N, scheme)
        V.update(vals)
        reports.append(r)
    return ApproxResult(V, eps, plus, minus, reports, eps_scc)


# --- symbolic schema -------------------------------------------------------------

@dataclass
class HorizonCertificate:
    epsilon: Fraction
    kernels: list  # per kernel component: {"N", "P_K"}
    sccs: list  # per nontrivial SCC: {"classification", "P"}
    P: int

    def to_json(self):
        return {"epsilon": str(self.epsilon), "kernels": self.kernels, "sccs": self.sccs, "P": self.P}


def kernel_horizon(n_locations, n_regions, n_clocks, w_e):
    size = n_locations * n_regions * (n_clocks + 1)
    return size * (2 * (size - 1) * w_e + 1)


def symbolic_horizon(g, eps, rg=None, rep=None):
    """Number of value-iteration steps after which the iterate is an eps-approximation.

    The Lipschitz constant of the kernels' output weights is only known once
    they are solved; the certificate uses ``max(L_final, |X| w_max_L)``.
    """
    eps = Fraction(eps)
    rg = rg or build_region_game(g, 1)
    rep = rep or analyse(rg)
    if not rep.almost_divergent:
        raise ValidationError("not-almost-divergent", "game is not almost-divergent")
    plus, minus = infinity_report(rg, rep.dag)
    if minus:
        raise ValidationError("minus-infinity", f"{len(minus)} region states have value -inf")
    c = max(1, scc_chain_length(rg, rep.dag, lambda s: 1 if s.nontrivial else 0))
    eps_scc = eps / c
    L_final = max((g.final_weight(l).lipschitz() for l in g.locations if g.locations[l].target),
                  default=Fraction(0))
    L = max(L_final, g.n_clocks * g.w_max_L)
    kernels, per_scc = [], {}
    M = g.clock_bound
    for scc in rep.dag.sccs:
        if not scc.nontrivial:
            continue
        plan = plan_scc(rg, scc, frozenset(plus))
        sup = max((abs(fw.max_value()) for fw in (rg.final_fn(s) for s in range(len(rg)) if rg.is_target(s))
                   if fw.tag is None), default=0)
        gamma = sound_gamma(rg, plan, sup)
        alpha = len(plan.labels) * (gamma - 1)
        pk = 0
        for states, _ in plan.components:
            kappa = g.w_max_L * len(rg) + L
            N = granularity(kappa, 2 * alpha, eps_scc)
            P_K = kernel_horizon(len(g.locations), count_regions(g.n_clocks, M, N), g.n_clocks, g.w_max_e)
            kernels.append({"states": [rg.label(s) for s in states], "N": N, "P_K": P_K})
            pk = max(pk, P_K)
        P = len(plan.states) * gamma + alpha * pk
        if scc.classification in (NON_POSITIVE, NEGATIVE):
            P += len(rg)
        per_scc[scc.id] = {"states": [rg.label(s) for s in scc.states], "classification": scc.classification,
                           "P": P}

    def weight(scc):
        if scc.id in per_scc:
            return per_scc[scc.id]["P"]
        return 0 if all(rg.is_target(s) for s in scc.states) else 1

    P = scc_chain_length(rg, rep.dag, weight)
    return HorizonCertificate(eps, kernels, list(per_scc.values()), P)


@dataclass
class SymbolicResult:
    values: ValueMap
    certificate: HorizonCertificate
    steps: int
    stabilized: bool
    complete: bool  # True when the iterate is covered by the certificate (or exact)


def approximate_symbolic(g, eps, horizon=None, max_steps=200, rg=None, cap=None):
    """Value iteration up to the certified horizon, stopping early at an exact fixpoint.

    ``horizon`` overrides the certificate.  Without it, at most ``max_steps``
    steps are run and a warning is emitted if that is short of the certificate
    and no fixpoint was reached.
    """
    rg = rg or build_region_game(g, 1)
    cert = symbolic_horizon(g, eps, rg)
    k = cert.P if horizon is None else horizon
    run = min(k, max_steps) if horizon is None else k
    kw = {} if cap is None else {"cap": cap}
    res = value_iteration(rg, run, **kw)
    complete = res.stabilized or res.steps >= cert.P or horizon is not None
    if not complete:
        warnings.warn(f"stopped after {res.steps} steps without a fixpoint; the certificate asks for {cert.P}")
    return SymbolicResult(res.values, cert, res.steps, res.stabilized, complete)
