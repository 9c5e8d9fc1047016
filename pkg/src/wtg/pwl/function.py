"""Piecewise-linear functions over regions.

``RegionFn`` is a function on the closure of one region, written in the
region's local coordinates (see :mod:`wtg.region`).  It is either an
infinite constant (``tag``) or a list of cells, each a full-dimensional
polytope carrying an affine expression.  ``PWLFunction`` glues region
functions together over a set of regions.
"""

from fractions import Fraction
from functools import lru_cache

from ..core_model import INF, MIN, NEG_INF, GameParseError, is_finite, to_rational
from ..region import all_regions, region_of, reset_region, time_successors
from .geometry import Polytope, ZERO, dot, merge_pair


class PieceCapExceeded(Exception):
    pass


class Aff:
    """Affine expression ``c.u + k``."""

    __slots__ = ("c", "k", "_h")

    def __init__(self, c, k):
        self.c = tuple(c)
        self.k = Fraction(k)
        self._h = None

    def __call__(self, u):
        return dot(self.c, u) + self.k

    def __eq__(self, o):
        return isinstance(o, Aff) and self.c == o.c and self.k == o.k

    def __hash__(self):
        if self._h is None:
            self._h = hash((self.c, self.k))
        return self._h

    def __sub__(self, o):
        return Aff((a - b for a, b in zip(self.c, o.c)), self.k - o.k)

    def __add__(self, o):
        return Aff((a + b for a, b in zip(self.c, o.c)), self.k + o.k)

    def scale(self, s):
        return Aff((a * s for a in self.c), self.k * s)

    def shift(self, k):
        return Aff(self.c, self.k + k)

    def is_zero(self):
        return self.k == 0 and not any(self.c)

    def __repr__(self):
        return f"Aff({[str(x) for x in self.c]}, {self.k})"


def pull_aff(coef, const, maps, dim):
    """Coefficients and constant of ``coef . maps(v) + const`` as an affine form in ``v``."""
    c = [ZERO] * dim
    k = Fraction(const)
    for a, mp in zip(coef, maps):
        if not a:
            continue
        for i, x in enumerate(mp.c):
            if x:
                c[i] += a * x
        k += a * mp.k
    return Aff(c, k)


def pull_constraints(hs, maps, dim):
    out = []
    for a, b in hs:
        p = pull_aff(a, -b, maps, dim)
        out.append((p.c, -p.k))
    return out


@lru_cache(maxsize=None)
def domain(dim, N):
    return Polytope.simplex(dim, Fraction(1, N))


def _split(I, f, g, lower):
    """Pieces of the pointwise min (``lower``) or max of ``f`` and ``g`` on cell ``I``."""
    h = f - g
    if h.is_zero():
        return [(I, f)]
    a = I.clip(h.c, -h.k)  # f <= g
    b = I.clip(tuple(-x for x in h.c), h.k)  # f >= g
    out = []
    if a is not None:
        out.append((a, f if lower else g))
    if b is not None:
        out.append((b, g if lower else f))
    return out


def merge_cells(cells, dom):
    groups = {}
    for P, a in cells:
        groups.setdefault(a, []).append(P)
    out = []
    for a, polys in groups.items():
        if len(polys) > 1 and dom.dim > 0:
            changed = True
            while changed:
                changed = False
                for i in range(len(polys)):
                    for j in range(i + 1, len(polys)):
                        m = merge_pair(polys[i], polys[j], dom)
                        if m is not None:
                            polys[i] = m
                            del polys[j]
                            changed = True
                            break
                    if changed:
                        break
        elif len(polys) > 1:
            polys = polys[:1]
        out.extend((P, a) for P in polys)
    return out


def envelope(dom, pieces, lower):
    """Pointwise min/max of partially defined affine pieces that jointly cover ``dom``."""
    result = []
    for R, f in pieces:
        nxt = []
        rem = [R]
        for Q, g in result:
            I = Q.intersect(R)
            if I is None:
                nxt.append((Q, g))
                continue
            nxt.extend((p, g) for p in Q.minus(R))
            nxt.extend(_split(I, f, g, lower))
            rem = [p for r in rem for p in (r.minus(Q) if r.intersect(Q) is not None else [r])]
        nxt.extend((p, f) for p in rem)
        result = merge_cells(nxt, dom)
    return result


class RegionFn:
    """A function on the closure of ``region`` (local coordinates)."""

    __slots__ = ("region", "tag", "cells", "_key")

    def __init__(self, region, cells=(), tag=None):
        self.region = region
        self.tag = tag
        self.cells = tuple(cells) if tag is None else ()
        self._key = None

    @classmethod
    def const(cls, region, value):
        if not is_finite(value):
            return cls(region, tag=value)
        dom = domain(region.dim, region.N)
        return cls(region, [(dom, Aff((ZERO,) * region.dim, value))])

    @classmethod
    def from_clock_affine(cls, region, coeffs, const):
        return cls(region, [(domain(region.dim, region.N), clock_affine_to_local(region, coeffs, const))])

    @property
    def dom(self):
        return domain(self.region.dim, self.region.N)

    @property
    def finite(self):
        return self.tag is None

    def pieces(self):
        return len({a for _, a in self.cells}) if self.tag is None else 1

    def ncells(self):
        return len(self.cells) if self.tag is None else 1

    def eval_local(self, u):
        if self.tag is not None:
            return self.tag
        for P, a in self.cells:
            if P.contains(u):
                return a(u)
        raise ValueError("point outside every cell")

    def eval(self, nu):
        u = self.region.local(nu)
        if u is None:
            raise ValueError("valuation outside the region's closure")
        return self.eval_local(u)

    def eval_toward(self, u, toward):
        """Limit at ``u`` when approaching from the direction of ``toward``."""
        if self.tag is not None:
            return self.tag
        d = tuple(t - x for t, x in zip(toward, u))
        fallback = None
        for P, a in self.cells:
            if not P.contains(u):
                continue
            fallback = a(u)
            if all(dot(ca, d) <= 0 for ca, cb in P.hs if dot(ca, u) == cb):
                return a(u)
        if fallback is None:
            raise ValueError("point outside every cell")
        return fallback

    def affine_at(self, u):
        for P, a in self.cells:
            if P.contains(u):
                return a
        raise ValueError("point outside every cell")

    def clock_affines(self):
        """Each cell's expression over clocks, spreading a block's slope evenly over its clocks."""
        return [local_affine_to_clock(self.region, a) for _, a in self.cells]

    def lipschitz(self):
        if self.tag is not None:
            return ZERO
        best = ZERO
        blocks = self.region.blocks
        for _, a in self.cells:
            for j, blk in enumerate(blocks):
                best = max(best, abs(a.c[j]) / len(blk))
        return best

    def add_const(self, k):
        if self.tag is not None or k == 0:
            return self
        return RegionFn(self.region, [(P, a.shift(k)) for P, a in self.cells])

    def add_local(self, aff):
        if self.tag is not None:
            return self
        return RegionFn(self.region, merge_cells([(P, a + aff) for P, a in self.cells], self.dom))

    def key(self):
        """Hashable canonical description (cells in a fixed order)."""
        if self._key is None:
            if self.tag is not None:
                self._key = (self.region, self.tag)
            else:
                cells = sorted((tuple(sorted(P.verts)), a.c, a.k) for P, a in self.cells)
                self._key = (self.region, tuple(cells))
        return self._key

    def equals(self, other):
        if self.region != other.region or self.tag != other.tag:
            return False
        if self.tag is not None:
            return True
        if self.key() == other.key():
            return True
        for P, a in self.cells:
            for Q, b in other.cells:
                if a != b and P.intersect(Q) is not None:
                    return False
        return True

    def vertex_values(self):
        """(point, value) at every cell vertex."""
        return [(v, a(v)) for P, a in self.cells for v in P.verts]

    def min_value(self):
        if self.tag is not None:
            return self.tag
        return min(a(v) for P, a in self.cells for v in P.verts)

    def max_value(self):
        if self.tag is not None:
            return self.tag
        return max(a(v) for P, a in self.cells for v in P.verts)

    def __repr__(self):
        if self.tag is not None:
            return f"RegionFn({self.tag})"
        return f"RegionFn({len(self.cells)} cells)"


def combine(f, g, lower):
    """Pointwise min (``lower``) or max of two functions on the same region."""
    if f.tag is not None or g.tag is not None:
        absorbing, neutral = (NEG_INF, INF) if lower else (INF, NEG_INF)
        if f.tag == absorbing or g.tag == absorbing:
            return RegionFn(f.region, tag=absorbing)
        if f.tag == neutral:
            return g
        return f
    cells = []
    for P, a in f.cells:
        for Q, b in g.cells:
            I = P.intersect(Q)
            if I is not None:
                cells.extend(_split(I, a, b, lower))
    return RegionFn(f.region, merge_cells(cells, f.dom))


def region_min(f, g):
    return combine(f, g, True)


def region_max(f, g):
    return combine(f, g, False)


def clock_affine_to_local(r, coeffs, const):
    """Affine form over clocks (sequence of coefficients) restricted to region ``r``."""
    c = [ZERO] * r.dim
    k = Fraction(const)
    for x, a in enumerate(coeffs):
        a = Fraction(a)
        if not a:
            continue
        k += a * r.base[x]
        j = r.block_of[x]
        if j:
            c[j - 1] += a
    return Aff(c, k)


def local_affine_to_clock(r, a):
    """Canonical clock-space form: each block's slope is split evenly among its clocks."""
    coeffs = [ZERO] * r.n
    k = a.k
    for j, blk in enumerate(r.blocks):
        share = a.c[j] / len(blk)
        for x in blk:
            coeffs[x] = share
            k -= share * r.base[x]
    return coeffs, k


def clock_constraint_to_local(r, coeffs, op, const):
    """Closed version of ``coeffs . nu op const`` in local coordinates of ``r``."""
    p = clock_affine_to_local(r, coeffs, -Fraction(const))  # coeffs.nu - const
    le = (p.c, -p.k)
    ge = (tuple(-x for x in p.c), p.k)
    if op in ("<", "<="):
        return [le]
    if op in (">", ">="):
        return [ge]
    return [le, ge]


def _offset_map(src, clock, extra=None):
    """Local coordinate of ``clock`` in ``src`` as an affine map (optionally over one extra variable)."""
    dim = src.dim + (1 if extra is not None else 0)
    c = [ZERO] * dim
    j = src.block_of[clock]
    if j:
        c[j - 1] = Fraction(1)
    if extra is not None:
        c[-1] = Fraction(1)
    return Aff(c, src.base[clock])


def _region_maps(src, target, with_delay):
    """Local coordinates of ``target`` as affine maps of the source point (and the delay)."""
    maps = []
    for blk in target.blocks:
        y = blk[0]
        m = _offset_map(src, y, 0 if with_delay else None)
        maps.append(m.shift(-target.base[y]))
    return maps


def _closure_constraints(target, maps, dim, src, with_delay):
    """Closure of ``target`` pulled back through ``maps``, plus block equalities."""
    cons = pull_constraints(domain(target.dim, target.N).hs, maps, dim)
    for blk in target.blocks:
        ref = _offset_map(src, blk[0], 0 if with_delay else None).shift(-target.base[blk[0]])
        for y in blk[1:]:
            other = _offset_map(src, y, 0 if with_delay else None).shift(-target.base[y])
            diff = other - ref
            cons.append((diff.c, -diff.k))
            cons.append((tuple(-x for x in diff.c), diff.k))
    for y in target.zero:
        m = _offset_map(src, y, 0 if with_delay else None).shift(-target.base[y])
        cons.append((m.c, -m.k))
        cons.append((tuple(-x for x in m.c), m.k))
    return cons


def substitute(src, dest_fn):
    """``dest_fn`` read at the reset image of each point of ``src`` (no delay)."""
    if dest_fn.tag is not None:
        return RegionFn(src, tag=dest_fn.tag)
    dom = domain(src.dim, src.N)
    maps = _region_maps(src, dest_fn.region, False)
    cells = []
    for P, f in dest_fn.cells:
        C = dom.clip_all(pull_constraints(P.hs, maps, src.dim))
        if C is not None:
            cells.append((C, pull_aff(f.c, f.k, maps, src.dim)))
    return RegionFn(src, merge_cells(cells, dom))


def pullback(src, mid, dest_fn, rate=0, weight=0, lower=True, cap=None):
    """Best value over delays from ``src`` through ``mid`` followed by ``dest_fn`` after reset.

    Computes, for every point of ``src``, the inf (``lower``) or sup over the
    delays ``d`` leading into the closure of ``mid`` of
    ``rate*d + weight + dest_fn(reset(point + d))``.  The reset is implied by
    the destination region of ``dest_fn``.
    """
    if dest_fn.tag is not None:
        return RegionFn(src, tag=dest_fn.tag)
    dst = dest_fn.region
    dom = domain(src.dim, src.N)
    m = src.dim
    rate = Fraction(rate)
    if mid.zero:
        # the delay is pinned by a clock reaching the grid
        x = mid.zero[0]
        d_aff = _offset_map(src, x).shift(-mid.base[x]).scale(-1)
        maps = [mp + d_aff for mp in _region_maps(src, dst, False)]
        cells = []
        for P, f in dest_fn.cells:
            C = dom.clip_all(pull_constraints(P.hs, maps, m))
            if C is not None:
                g = pull_aff(f.c, f.k, maps, m) + d_aff.scale(rate)
                cells.append((C, g.shift(weight)))
        return RegionFn(src, merge_cells(cells, dom))
    space = dom.lift(0, src.M)
    maps = _region_maps(src, dst, True)
    P0 = space.clip_all(_closure_constraints(mid, _region_maps(src, mid, True), m + 1, src, True))
    if P0 is None:
        raise ValueError("no delay leads into the requested region")
    d_var = Aff([ZERO] * m + [Fraction(1)], 0)
    pieces = []
    for P, f in dest_fn.cells:
        C = P0.clip_all(pull_constraints(P.hs, maps, m + 1))
        if C is None:
            continue
        g = (pull_aff(f.c, f.k, maps, m + 1) + d_var.scale(rate)).shift(weight)
        pieces.extend(_eliminate_delay(C, g, lower, dom))
    cells = envelope(dom, pieces, lower)
    if cap is not None and len(cells) > cap:
        raise PieceCapExceeded(f"{len(cells)} cells exceed the cap {cap}")
    return RegionFn(src, cells)


def _eliminate_delay(C, g, lower, dom):
    """Optimize the last coordinate of cell ``C`` for objective ``g``; pieces over the rest."""
    bd = g.c[-1]
    use_low = bd >= 0 if lower else bd <= 0
    out = []
    for a, b in C.hs:
        beta = a[-1]
        if not beta or (beta < 0) != use_low:
            continue
        alpha = a[:-1]
        dA = Aff((-x / beta for x in alpha), b / beta)
        cons = []
        for a2, b2 in C.hs:
            t = a2[-1]
            cons.append((tuple(x + t * y for x, y in zip(a2[:-1], dA.c)), b2 - t * dA.k))
        R = dom.clip_all(cons)
        if R is not None:
            out.append((R, Aff((x + bd * y for x, y in zip(g.c[:-1], dA.c)), g.k + bd * dA.k)))
    return out


def _solve(rows, rhs):
    """Exact Gaussian elimination for a square nonsingular system."""
    n = len(rows)
    A = [list(r) + [v] for r, v in zip(rows, rhs)]
    for col in range(n):
        piv = next(i for i in range(col, n) if A[i][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for i in range(n):
            if i != col and A[i][col] != 0:
                f = A[i][col]
                A[i] = [x - f * y for x, y in zip(A[i], A[col])]
    return [A[i][n] for i in range(n)]


def interpolate(region, sub_values):
    """Affine interpolation of corner values on the full-dimensional subregions of ``region``.

    ``sub_values`` maps each finer region to the list of values at its corners.
    Infinite values must be uniform over the region.
    """
    tags = {v for vals in sub_values.values() for v in vals if not is_finite(v)}
    if tags:
        if len(tags) > 1 or any(is_finite(v) for vals in sub_values.values() for v in vals):
            raise ValueError("mixed finite and infinite corner values in one region")
        return RegionFn(region, tag=tags.pop())
    dom = domain(region.dim, region.N)
    m = region.dim
    cells = []
    for sub, vals in sub_values.items():
        if sub.dim != m:
            continue
        pts = [region.local(c) for c in sub.corners]
        rows = [list(p) + [Fraction(1)] for p in pts]
        sol = _solve(rows, list(vals))
        maps = []
        for blk in sub.blocks:
            y = blk[0]
            maps.append(_offset_map(region, y).shift(-sub.base[y]))
        P = dom.clip_all(pull_constraints(domain(m, sub.N).hs, maps, m))
        if P is None:
            continue
        cells.append((P, Aff(sol[:m], sol[m])))
    return RegionFn(region, merge_cells(cells, dom))


class FinalWeight:
    """A final-weight function given over clock space (constant, infinite, or affine cells)."""

    def __init__(self, n, value=None, cells=None):
        self.n = n
        self.value = value
        self.cells = cells
        self._cache = {}

    def _ident(self):
        if self.cells is None:
            return (self.n, self.value)
        return (self.n, tuple((tuple(cons), aff) for cons, aff in self.cells))

    def __eq__(self, other):
        return isinstance(other, FinalWeight) and self._ident() == other._ident()

    def __hash__(self):
        return hash(self._ident())

    @classmethod
    def constant(cls, n, value):
        v = to_rational(value) if not isinstance(value, float) else value
        return cls(n, value=v)

    @classmethod
    def affine(cls, n, coeffs, const):
        return cls(n, cells=[([], (tuple(Fraction(c) for c in coeffs), Fraction(const)))])

    @classmethod
    def from_json(cls, clocks, spec):
        n = len(clocks)
        if isinstance(spec, (int, str, float)) and not isinstance(spec, bool):
            return cls(n, value=to_rational(spec))
        if isinstance(spec, dict):
            spec = [{"cell": [], "affine": spec}]
        if not isinstance(spec, list):
            raise ValueError("final weight must be a number, an infinity or a list of cells")
        idx = {c: i for i, c in enumerate(clocks)}
        cells = []
        for piece in spec:
            cons = []
            for c in piece.get("cell", []):
                if "coeffs" in c:
                    coeffs = [Fraction(0)] * n
                    for name, v in c["coeffs"].items():
                        if name not in idx:
                            raise GameParseError("unknown-clock", f"unknown clock {name!r}")
                        coeffs[idx[name]] = to_rational(v)
                else:
                    if c.get("clock") not in idx:
                        raise GameParseError("unknown-clock", f"unknown clock {c.get('clock')!r}")
                    coeffs = [Fraction(0)] * n
                    coeffs[idx[c["clock"]]] = Fraction(1)
                op = {"≤": "<=", "≥": ">=", "==": "="}.get(c["op"], c["op"])
                if op not in ("<", "<=", "=", ">=", ">"):
                    raise ValueError(f"unknown comparator {c['op']!r}")
                cons.append((tuple(coeffs), op, to_rational(c["const"])))
            aff = piece.get("affine", {})
            coeffs = [Fraction(0)] * n
            for name, v in aff.items():
                if name == "const":
                    continue
                if name not in idx:
                    raise GameParseError("unknown-clock", f"unknown clock {name!r}")
                coeffs[idx[name]] = to_rational(v)
            cells.append((cons, (tuple(coeffs), to_rational(aff.get("const", 0)))))
        return cls(n, cells=cells)

    def to_json(self, clocks):
        from ..core_model import fmt_rational
        if self.cells is None:
            v = fmt_rational(self.value)
            return int(v) if v.lstrip("-").isdigit() else v
        out = []
        for cons, (coeffs, const) in self.cells:
            cj = [{"coeffs": {clocks[i]: fmt_rational(a) for i, a in enumerate(co) if a},
                   "op": op, "const": fmt_rational(c)} for co, op, c in cons]
            aj = {clocks[i]: fmt_rational(a) for i, a in enumerate(coeffs) if a}
            aj["const"] = fmt_rational(const)
            out.append({"cell": cj, "affine": aj})
        return out

    def eval(self, nu):
        if self.cells is None:
            return self.value
        for cons, (coeffs, const) in self.cells:
            if all(_holds(dot(co, nu), op, c) for co, op, c in cons):
                return dot(coeffs, nu) + const
        raise ValueError("final weight undefined at this valuation")

    def on_region(self, r):
        fn = self._cache.get(r)
        if fn is None:
            fn = self._cache[r] = self._build(r)
        return fn

    def _build(self, r):
        if self.cells is None:
            return RegionFn.const(r, self.value)
        dom = domain(r.dim, r.N)
        out = []
        for cons, (coeffs, const) in self.cells:
            local = []
            for co, op, c in cons:
                local.extend(clock_constraint_to_local(r, co, op, c))
            P = dom.clip_all(local)
            if P is not None:
                out.append((P, clock_affine_to_local(r, coeffs, const)))
        if not dom.covers([P for P, _ in out]):
            raise ValueError("final weight cells do not cover a region")
        return RegionFn(r, merge_cells(out, dom))

    def lipschitz(self):
        if self.cells is None:
            return ZERO
        return max((abs(a) for _, (co, _) in self.cells for a in co), default=ZERO)


def _holds(v, op, c):
    return {"<": v < c, "<=": v <= c, "=": v == c, ">=": v >= c, ">": v > c}[op]


class PWLFunction:
    """A function on a union of 1/N-regions, one :class:`RegionFn` per region."""

    def __init__(self, n, M, N, parts):
        self.n, self.M, self.N = n, M, N
        self.parts = dict(parts)

    @classmethod
    def from_final(cls, fw, n, M, N=1, regions=None):
        regions = all_regions(n, M, N) if regions is None else regions
        return cls(n, M, N, {r: fw.on_region(r) for r in regions})

    @classmethod
    def affine(cls, n, M, coeffs, const, N=1, regions=None):
        return cls.from_final(FinalWeight.affine(n, coeffs, const), n, M, N, regions)

    @classmethod
    def constant(cls, n, M, value, N=1, regions=None):
        return cls.from_final(FinalWeight.constant(n, value), n, M, N, regions)

    def eval(self, nu):
        r = region_of(nu, self.N, self.M)
        fn = self.parts.get(r)
        if fn is None:
            raise ValueError("valuation outside the function's domain")
        return fn.eval(nu)

    def _zip(self, other, op):
        common = [r for r in self.parts if r in other.parts]
        return PWLFunction(self.n, self.M, self.N, {r: op(self.parts[r], other.parts[r]) for r in common})

    def lipschitz(self):
        """(bound, flagged) where ``flagged`` tells that infinite regions were skipped."""
        vals = [f.lipschitz() for f in self.parts.values()]
        flagged = any(f.tag is not None for f in self.parts.values())
        return max(vals, default=ZERO), flagged

    def piece_count(self):
        return sum(f.pieces() for f in self.parts.values())

    def breakpoints(self):
        """For one-clock functions: points where the active affine piece changes."""
        if self.n != 1:
            raise ValueError("breakpoints are only listed for one-clock functions")
        segs = []
        for r, f in self.parts.items():
            if f.tag is not None:
                continue
            for P, a in f.cells:
                lo, hi = (P.box()[0] if P.dim else (ZERO, ZERO))
                c, k = local_affine_to_clock(r, a)
                segs.append((r.base[0] + lo, r.base[0] + hi, c[0] if r.dim else None, k))
        segs.sort(key=lambda s: (s[0], s[1]))
        out = []
        prev = None
        for lo, hi, slope, k in segs:
            if lo == hi:
                continue
            if prev is not None and prev[1] == lo:
                if (prev[2], prev[3]) != (slope, k):
                    out.append(lo)
            prev = (lo, hi, slope, k)
        return out


def pwl_min(f, g):
    return f._zip(g, region_min)


def pwl_max(f, g):
    return f._zip(g, region_max)


def add_affine(f, coeffs=None, const=0):
    coeffs = coeffs or [0] * f.n
    parts = {}
    for r, fn in f.parts.items():
        parts[r] = fn.add_local(clock_affine_to_local(r, coeffs, const))
    return PWLFunction(f.n, f.M, f.N, parts)


def compose_reset(f, resets):
    """``nu -> f(nu[resets := 0])`` on every region whose reset lands in f's domain."""
    resets = frozenset(resets)
    parts = {}
    for r in all_regions(f.n, f.M, f.N):
        dst = reset_region(r, resets)
        if dst in f.parts:
            parts[r] = substitute(r, f.parts[dst])
    return PWLFunction(f.n, f.M, f.N, parts)


def opt_delay(owner, rate, guard, resets, weight, dest, regions=None):
    """Optimal delay then transition, as a function of the valuation before waiting.

    Regions from which no delay enables the guard are left out of the result.
    """
    lower = owner == MIN
    resets = frozenset(resets)
    parts = {}
    for r in (all_regions(dest.n, dest.M, dest.N) if regions is None else regions):
        best = None
        for mid in [r] + time_successors(r):
            if not guard.holds(mid.representative):
                continue
            dst = reset_region(mid, resets)
            if dst not in dest.parts:
                continue
            cand = pullback(r, mid, dest.parts[dst], rate, weight, lower)
            best = cand if best is None else combine(best, cand, lower)
        if best is not None:
            parts[r] = best
    return PWLFunction(dest.n, dest.M, dest.N, parts)


def lipschitz_bound(f):
    if isinstance(f, RegionFn):
        return f.lipschitz()
    return f.lipschitz()[0]
