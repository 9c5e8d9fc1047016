"""Pure-Python hot loops (fallback for the compiled module).

Values are integers with the sentinels ``POS``/``NEG`` standing for the
infinities.  Edges come in CSR form: the out-edges of ``v`` are the
indices ``ptr[v] .. ptr[v+1]-1`` of ``dst`` and ``w``.
"""

POS = 1 << 62
NEG = -(1 << 62)


def value_iteration(owner_max, is_target, ptr, dst, w, init, horizon, threshold):
    """Jacobi value iteration.  Returns (values, sweeps, stabilized).

    A finite value that drops below ``threshold`` is replaced by ``NEG``.
    """
    n = len(init)
    cur = list(init)
    sweeps = 0
    while sweeps < horizon:
        nxt = cur[:]
        changed = False
        for v in range(n):
            if is_target[v]:
                continue
            lo, hi = ptr[v], ptr[v + 1]
            if owner_max[v]:
                best = NEG
                for e in range(lo, hi):
                    t = cur[dst[e]]
                    c = t if t == POS or t == NEG else t + w[e]
                    if c > best:
                        best = c
            else:
                best = POS
                for e in range(lo, hi):
                    t = cur[dst[e]]
                    c = t if t == POS or t == NEG else t + w[e]
                    if c < best:
                        best = c
            if best != POS and best != NEG and best < threshold:
                best = NEG
            if best != cur[v]:
                nxt[v] = best
                changed = True
        sweeps += 1
        cur = nxt
        if not changed:
            return cur, sweeps, True
    return cur, sweeps, False


def floyd_warshall(n, src, dst, w, longest):
    """All-pairs shortest (or longest) walk weights; ``POS``/``NEG`` when there is no path."""
    none = NEG if longest else POS
    D = [[none] * n for _ in range(n)]
    for a, b, c in zip(src, dst, w):
        if (c > D[a][b]) if longest else (c < D[a][b]):
            D[a][b] = c
    for k in range(n):
        Dk = D[k]
        for i in range(n):
            dik = D[i][k]
            if dik == none:
                continue
            Di = D[i]
            for j in range(n):
                dkj = Dk[j]
                if dkj == none:
                    continue
                s = dik + dkj
                if (s > Di[j]) if longest else (s < Di[j]):
                    Di[j] = s
    return D
