"""Value iteration for finite weighted games with final weights.

Weights are rationals with a common denominator; they are scaled to
integers so that the hot loop (see :mod:`wtg.kernels`) works on machine
integers.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import _kernels_py, kernels
from .core_model import INF, MAX, NEG_INF, is_finite


@dataclass
class FiniteWeightedGame:
    owners: list  # MIN or MAX per vertex
    edges: list  # (src, dst, weight); parallel edges allowed
    finals: dict  # target vertex -> extended rational
    out: list = field(default=None, repr=False)

    def __post_init__(self):
        self.out = [[] for _ in self.owners]
        for i, (a, _, _) in enumerate(self.edges):
            self.out[a].append(i)

    def __len__(self):
        return len(self.owners)


@dataclass
class UntimedResult:
    values: list
    sweeps: int
    stabilized: bool
    horizon: int


def _scale(g):
    den = 1
    for _, _, w in g.edges:
        den = math.lcm(den, Fraction(w).denominator)
    for v in g.finals.values():
        if is_finite(v):
            den = math.lcm(den, Fraction(v).denominator)
    return den


def horizon_bound(V, W):
    """Sweeps after which values have stabilized or drifted to -inf."""
    return V * (2 * (V - 1) * max(W, 1) + 1)


def solve_untimed(g, horizon=None, pure=False):
    """Values of every vertex.  Targets keep their final weight; vertices without edges are +inf."""
    n = len(g)
    if n == 0:
        return UntimedResult([], 0, True, 0)
    den = _scale(g)
    ints = [(a, b, int(Fraction(w) * den)) for a, b, w in g.edges]
    W = max((abs(w) for _, _, w in ints), default=0)
    finite_finals = [int(Fraction(v) * den) for v in g.finals.values() if is_finite(v)]
    H = horizon_bound(n, W) if horizon is None else horizon
    min_final = min(finite_finals, default=0)
    threshold = min_final - (n - 1) * W

    init = []
    for v in range(n):
        f = g.finals.get(v)
        if f is None:
            init.append(kernels.POS)
        elif not is_finite(f):
            init.append(kernels.POS if f > 0 else kernels.NEG)
        else:
            init.append(int(Fraction(f) * den))

    order = sorted(range(len(ints)), key=lambda e: ints[e][0])
    ptr = [0] * (n + 1)
    for a, _, _ in ints:
        ptr[a + 1] += 1
    for v in range(n):
        ptr[v + 1] += ptr[v]
    dst = [ints[e][1] for e in order]
    w = [ints[e][2] for e in order]
    owner_max = [o == MAX for o in g.owners]
    is_target = [v in g.finals for v in range(n)]

    big = max([abs(x) for x in finite_finals] + [0]) + (H + 1) * W
    impl = _kernels_py if pure or big >= kernels.SAFE else kernels
    vals, sweeps, stable = impl.value_iteration(owner_max, is_target, ptr, dst, w, init, H, threshold)

    out = []
    for x in vals:
        if x == kernels.POS:
            out.append(INF)
        elif x == kernels.NEG:
            out.append(NEG_INF)
        else:
            out.append(Fraction(x, den))
    return UntimedResult(out, sweeps, stable, H)


def solve(g, horizon=None):
    return solve_untimed(g, horizon).values
