# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the hot loops in ``_kernels_py``."""

from array import array

from libc.stdint cimport int64_t

cdef int64_t POS = 1LL << 62
cdef int64_t NEG = -(1LL << 62)


def value_iteration(owner_max, is_target, ptr, dst, w, init, long horizon, long long threshold):
    cdef Py_ssize_t n = len(init), m = len(dst), v, e
    cdef int64_t[:] cur = array_of(init)
    cdef int64_t[:] nxt = array_of(init)
    cdef int64_t[:] cptr = array_of(ptr)
    cdef int64_t[:] cdst = array_of(dst)
    cdef int64_t[:] cw = array_of(w)
    cdef signed char[:] omax = bytes_of(owner_max)
    cdef signed char[:] tgt = bytes_of(is_target)
    cdef int64_t best, t, c
    cdef long sweeps = 0
    cdef bint changed
    while sweeps < horizon:
        changed = False
        for v in range(n):
            nxt[v] = cur[v]
            if tgt[v]:
                continue
            if omax[v]:
                best = NEG
                for e in range(cptr[v], cptr[v + 1]):
                    t = cur[cdst[e]]
                    c = t if (t == POS or t == NEG) else t + cw[e]
                    if c > best:
                        best = c
            else:
                best = POS
                for e in range(cptr[v], cptr[v + 1]):
                    t = cur[cdst[e]]
                    c = t if (t == POS or t == NEG) else t + cw[e]
                    if c < best:
                        best = c
            if best != POS and best != NEG and best < threshold:
                best = NEG
            if best != cur[v]:
                nxt[v] = best
                changed = True
        sweeps += 1
        cur, nxt = nxt, cur
        if not changed:
            return [cur[v] for v in range(n)], sweeps, True
    return [cur[v] for v in range(n)], sweeps, False


def floyd_warshall(Py_ssize_t n, src, dst, w, bint longest):
    cdef int64_t none = NEG if longest else POS
    cdef int64_t[:] D = array_of([none] * (n * n) if n else [none])
    cdef Py_ssize_t i, j, k, e, m = len(src)
    cdef int64_t[:] s = array_of(src)
    cdef int64_t[:] d = array_of(dst)
    cdef int64_t[:] cw = array_of(w)
    cdef int64_t dik, dkj, x
    for e in range(m):
        i = s[e] * n + d[e]
        if (cw[e] > D[i]) if longest else (cw[e] < D[i]):
            D[i] = cw[e]
    for k in range(n):
        for i in range(n):
            dik = D[i * n + k]
            if dik == none:
                continue
            for j in range(n):
                dkj = D[k * n + j]
                if dkj == none:
                    continue
                x = dik + dkj
                if (x > D[i * n + j]) if longest else (x < D[i * n + j]):
                    D[i * n + j] = x
    return [[D[i * n + j] for j in range(n)] for i in range(n)]


cdef int64_t[:] array_of(seq):
    return array("q", seq)


cdef signed char[:] bytes_of(seq):
    return array("b", [1 if x else 0 for x in seq])
