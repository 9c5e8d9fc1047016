"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 400] [--repeat 3]
"""

import argparse
import random
import timeit

from wtg import _kernels_py, kernels
from wtg._kernels_py import POS


def random_csr(rng, n, out_deg):
    owner = [rng.random() < 0.5 for _ in range(n)]
    target = [v < max(1, n // 20) for v in range(n)]
    ptr, dst, w = [0], [], []
    for v in range(n):
        for _ in range(0 if target[v] else out_deg):
            dst.append(rng.randrange(n))
            w.append(rng.randint(0, 9))
        ptr.append(len(dst))
    init = [rng.randint(0, 9) if target[v] else POS for v in range(n)]
    return owner, target, ptr, dst, w, init


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=400, help="vertices")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    rng = random.Random(0)
    vi_args = random_csr(rng, 20 * args.n, 4) + (200, -(1 << 40))
    m = 4 * args.n
    fw_args = (args.n, [rng.randrange(args.n) for _ in range(m)], [rng.randrange(args.n) for _ in range(m)],
               [rng.randint(0, 9) for _ in range(m)], False)
    print(f"compiled kernels available: {kernels.COMPILED}")
    rows = [("value_iteration", vi_args), ("floyd_warshall", fw_args)]
    for name, a in rows:
        pure = min(timeit.repeat(lambda: getattr(_kernels_py, name)(*a), number=1, repeat=args.repeat))
        fast = min(timeit.repeat(lambda: getattr(kernels, name)(*a), number=1, repeat=args.repeat))
        print(f"{name:16s} pure {pure:8.3f}s  selected {fast:8.3f}s  speedup {pure / fast:6.1f}x")


if __name__ == "__main__":
    main()
