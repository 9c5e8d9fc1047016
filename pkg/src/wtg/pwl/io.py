"""JSON and CSV output for piecewise-linear functions."""

import csv
import io

from ..core_model import fmt_decimal, fmt_rational


def region_fn_to_json(fn, clocks, fmt=fmt_rational):
    """Cells of a region function in clock space: constraints plus affine expression."""
    r = fn.region
    out = {"region": r.describe(clocks)}
    if fn.tag is not None:
        out["value"] = fmt(fn.tag)
        return out
    from .function import local_affine_to_clock
    cells = []
    for P, a in sorted(fn.cells, key=lambda c: sorted(c[0].verts)):
        cons = []
        for ca, cb in P.hs:
            coeffs = {}
            const = cb
            for j, x in enumerate(ca):
                if x:
                    y = r.blocks[j][0]
                    coeffs[clocks[y]] = fmt(x)
                    const += x * r.base[y]
            cons.append({"coeffs": coeffs, "op": "<=", "const": fmt(const)})
        coeffs, k = local_affine_to_clock(r, a)
        aff = {clocks[i]: fmt(c) for i, c in enumerate(coeffs) if c}
        aff["const"] = fmt(k)
        cells.append({"cell": cons, "affine": aff})
    out["cells"] = cells
    return out


def pwl_to_json(f, clocks, fmt=fmt_rational):
    regions = sorted(f.parts, key=lambda r: (r.iota, r.zero, r.blocks))
    return [region_fn_to_json(f.parts[r], clocks, fmt) for r in regions]


def slice_csv(points, decimals=None):
    """CSV text with columns ``param,value`` for (param, value) pairs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["param", "value"])
    fmt = fmt_rational if decimals is None else (lambda v: fmt_decimal(v, decimals))
    for p, v in points:
        w.writerow([fmt(p), fmt(v)])
    return buf.getvalue()
