"""Exact full-dimensional convex polytopes in low dimension.

A polytope keeps both its inequalities ``a.u <= b`` and its vertex list.
New polytopes are only ever obtained by clipping an existing one with a
half-space, so vertices are maintained incrementally: the kept vertices
plus the crossing points of the edges cut by the hyperplane.  Two vertices
span an edge iff no third vertex is tight on every constraint they share.

Results that are not full-dimensional are dropped (``None``): functions are
continuous inside a region, so lower-dimensional pieces carry no extra
information.
"""

from fractions import Fraction

ZERO = Fraction(0)


def dot(a, v):
    s = ZERO
    for x, y in zip(a, v):
        if x:
            s += x * y
    return s


def normalize(a, b):
    """Scale a constraint so that its first nonzero coefficient is +-1."""
    for x in a:
        if x:
            k = abs(x)
            if k == 1:
                return tuple(a), b
            return tuple(c / k for c in a), b / k
    return tuple(a), b


class Polytope:
    __slots__ = ("dim", "hs", "verts", "_tight", "_box")

    def __init__(self, dim, hs, verts):
        self.dim = dim
        self.hs = hs
        self.verts = verts
        self._tight = None
        self._box = None

    @classmethod
    def simplex(cls, m, h):
        """Closure ``0 <= u_1 <= ... <= u_m <= h`` of a region in local coordinates."""
        z = (ZERO,) * m
        hs = []
        if m:
            hs.append(normalize(tuple(Fraction(-1) if j == 0 else ZERO for j in range(m)), ZERO))
            for j in range(m - 1):
                a = [ZERO] * m
                a[j], a[j + 1] = Fraction(1), Fraction(-1)
                hs.append((tuple(a), ZERO))
            hs.append((tuple(Fraction(1) if j == m - 1 else ZERO for j in range(m)), Fraction(h)))
        verts = tuple(tuple(Fraction(h) if j >= m - k else ZERO for j in range(m)) for k in range(m + 1))
        return cls(m, tuple(hs), verts if m else (z,))

    def lift(self, lo, hi):
        """Product with an interval along a new last coordinate."""
        hs = [(a + (ZERO,), b) for a, b in self.hs]
        e = (ZERO,) * self.dim
        hs.append((e + (Fraction(-1),), -Fraction(lo)))
        hs.append((e + (Fraction(1),), Fraction(hi)))
        verts = tuple(v + (Fraction(t),) for v in self.verts for t in (lo, hi))
        return Polytope(self.dim + 1, tuple(hs), verts)

    def tight(self):
        if self._tight is None:
            hs = self.hs
            self._tight = [frozenset(i for i, (a, b) in enumerate(hs) if dot(a, v) == b)
                           for v in self.verts]
        return self._tight

    def box(self):
        if self._box is None:
            vs = self.verts
            self._box = tuple((min(v[i] for v in vs), max(v[i] for v in vs)) for i in range(self.dim))
        return self._box

    def centroid(self):
        n = len(self.verts)
        return tuple(sum(v[i] for v in self.verts) / n for i in range(self.dim))

    def contains(self, p):
        return all(dot(a, p) <= b for a, b in self.hs)

    def clip(self, a, b):
        """Intersection with ``a.u <= b``; None if it has empty interior."""
        if self.dim == 0:
            return self if b >= 0 else None
        vs = self.verts
        s = [dot(a, v) - b for v in vs]
        if max(s) <= 0:
            return self
        if min(s) >= 0:
            return None
        a, b = normalize(a, b)
        tight = self.tight()
        neg = [i for i, x in enumerate(s) if x < 0]
        pos = [i for i, x in enumerate(s) if x > 0]
        new = {vs[i]: None for i, x in enumerate(s) if x <= 0}
        n = len(vs)
        for i in neg:
            ti = tight[i]
            for j in pos:
                common = ti & tight[j]
                if any(z != i and z != j and common <= tight[z] for z in range(n)):
                    continue
                t = s[i] / (s[i] - s[j])
                vi, vj = vs[i], vs[j]
                new[tuple(p + t * (q - p) for p, q in zip(vi, vj))] = None
        verts = tuple(new)
        hs = self.hs + ((a, b),)
        # drop constraints that are no longer facets (tight at fewer than dim vertices)
        keep = []
        for c in hs:
            ca, cb = c
            if sum(1 for v in verts if dot(ca, v) == cb) >= self.dim:
                keep.append(c)
        return Polytope(self.dim, tuple(dict.fromkeys(keep)), verts)

    def clip_all(self, constraints):
        p = self
        for a, b in constraints:
            p = p.clip(a, b)
            if p is None:
                return None
        return p

    def intersect(self, other):
        if self.dim:
            for (lo1, hi1), (lo2, hi2) in zip(self.box(), other.box()):
                if hi1 <= lo2 or hi2 <= lo1:
                    return None
        return self.clip_all(other.hs)

    def minus(self, other):
        """Closed convex pieces covering ``self`` outside the interior of ``other``."""
        parts = []
        cur = self
        for a, b in other.hs:
            out = cur.clip(tuple(-x for x in a), -b)
            if out is not None:
                parts.append(out)
            cur = cur.clip(a, b)
            if cur is None:
                break
        return parts

    def covers(self, parts):
        """True if the closed pieces ``parts`` cover this polytope."""
        rest = [self]
        for q in parts:
            nxt = []
            for p in rest:
                if p.intersect(q) is None:
                    nxt.append(p)
                else:
                    nxt.extend(p.minus(q))
            rest = nxt
            if not rest:
                return True
        return not rest

    def __repr__(self):
        return f"Polytope(dim={self.dim}, verts={[tuple(str(x) for x in v) for v in self.verts]})"


def merge_pair(p, q, domain):
    """Return the union of ``p`` and ``q`` if it is convex, else None."""
    if p.dim == 0:
        return p
    if p.dim == 1:
        (a0, a1), (b0, b1) = p.box()[0], q.box()[0]
        if a1 == b0 or b1 == a0:
            lo, hi = min(a0, b0), max(a1, b1)
            return domain.clip((Fraction(-1),), -lo).clip((Fraction(1),), hi)
        return None
    qset = {(tuple(-x for x in a), -b) for a, b in q.hs}
    if not any(c in qset for c in p.hs):
        return None
    cand = [c for c in p.hs if all(dot(c[0], v) <= c[1] for v in q.verts)]
    cand += [c for c in q.hs if all(dot(c[0], v) <= c[1] for v in p.verts)]
    r = domain.clip_all(cand)
    if r is None:
        return None
    for piece in r.minus(p):
        if not all(q.contains(v) for v in piece.verts):
            return None
    return r
