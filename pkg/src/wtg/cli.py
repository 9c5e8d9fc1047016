"""Command-line front end: ``wtg <verb> <game.json> [options]``.

Every verb prints one JSON report on standard output.  Exit codes:
1 parse or I/O error, 2 validation error, 3 game not almost-divergent,
4 -inf configurations block the symbolic method, 5 piece-count cap exceeded.
"""

import argparse
import json
import sys
import time
import warnings
from fractions import Fraction

from . import __version__
from .analysis import analyse, infinity_report
from .approx import approximate_game, approximate_symbolic
from .core_model import GameParseError, ValidationError, fmt_decimal, fmt_rational, load_game
from .pwl import PieceCapExceeded, slice_csv
from .region import build_corner_game, build_region_game, corner_game_dot, region_game_dot
from .timed_solver import DEFAULT_CAP, solve_acyclic, value_iteration

EXIT_IO, EXIT_VALIDATION, EXIT_NOT_AD, EXIT_MINUS_INF, EXIT_CAP = 1, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def parse_rational(text):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise CliError(EXIT_IO, f"not a rational: {text!r}")


def parse_at(text, g):
    """``loc[,clock=p/q...]``; omitted clocks are 0."""
    loc, *pairs = [p.strip() for p in text.split(",")]
    if loc not in g.locations:
        raise CliError(EXIT_VALIDATION, f"unknown location {loc!r}")
    return loc, _valuation(pairs, g)


def _valuation(pairs, g):
    nu = [Fraction(0)] * g.n_clocks
    for p in pairs:
        if "=" not in p:
            raise CliError(EXIT_IO, f"expected clock=value, got {p!r}")
        name, v = p.split("=", 1)
        if name.strip() not in g.clocks:
            raise CliError(EXIT_VALIDATION, f"unknown clock {name.strip()!r}")
        nu[g.clock_index(name.strip())] = parse_rational(v)
        if nu[g.clock_index(name.strip())] < 0:
            raise CliError(EXIT_VALIDATION, "clock values must be non-negative")
    return tuple(nu)


def parse_slice(text, g):
    """``loc=<id>[,fix <clock>=<p/q>...]``: the one clock left free is the parameter."""
    parts = [p.strip() for p in text.split(",")]
    if not parts[0].startswith("loc="):
        raise CliError(EXIT_IO, f"slice must start with loc=<id>: {text!r}")
    loc = parts[0][4:].strip()
    if loc not in g.locations:
        raise CliError(EXIT_VALIDATION, f"unknown location {loc!r}")
    fixed = {}
    for p in parts[1:]:
        p = p[4:] if p.startswith("fix ") else p
        name, v = p.split("=", 1)
        if name.strip() not in g.clocks:
            raise CliError(EXIT_VALIDATION, f"unknown clock {name.strip()!r}")
        fixed[g.clock_index(name.strip())] = parse_rational(v)
    free = [i for i in range(g.n_clocks) if i not in fixed]
    if len(free) != 1:
        raise CliError(EXIT_VALIDATION, "a slice needs exactly one free clock")
    return loc, free[0], fixed


def slice_points(values, g, spec, step):
    loc, free, fixed = spec
    pts = []
    k = 0
    while k * step <= g.clock_bound + 1:
        nu = [fixed.get(i, Fraction(0)) for i in range(g.n_clocks)]
        nu[free] = k * step
        try:
            pts.append((k * step, values.value(loc, tuple(nu), closure=True)))
        except ValueError:
            pass
        k += 1
    return pts


def _fmt(args):
    if args.decimals is None:
        return fmt_rational
    return lambda v: fmt_decimal(v, args.decimals)


def _emit_values(args, g, values, report):
    fmt = _fmt(args)
    if args.at:
        loc, nu = parse_at(args.at, g)
        try:
            report["value"] = fmt(values.value(loc, nu, closure=True))
        except ValueError as e:
            raise CliError(EXIT_VALIDATION, str(e))
        report["at"] = {"location": loc, "valuation": {c: fmt_rational(v) for c, v in zip(g.clocks, nu)}}
    else:
        report["value_function"] = values.to_json(fmt)
    if args.slice:
        spec = parse_slice(args.slice, g)
        csv = slice_csv(slice_points(values, g, spec, parse_rational(args.slice_step)), args.decimals)
        if args.slice_out:
            with open(args.slice_out, "w") as fh:
                fh.write(csv)
        else:
            report["slice_csv"] = csv


def _scc_json(rg, scc):
    return {"states": [rg.label(s) for s in scc.states], "nontrivial": scc.nontrivial,
            "classification": scc.classification,
            "kernel": [_transition_json(rg, rg.transitions[t]) for t in sorted(scc.kernel)],
            **({"witness": scc.witness} if scc.witness else {})}


def _transition_json(rg, t):
    return {"index": t.index, "edge": t.edge, "from": rg.label(t.src), "to": rg.label(t.dst),
            "weight": t.weight}


def _maybe_dot(args, rg):
    if getattr(args, "emit_dot", None):
        with open(args.emit_dot, "w") as fh:
            fh.write(region_game_dot(rg) + "\n")


def cmd_check(args, g, timing):
    rg = build_region_game(g, args.granularity)
    _maybe_dot(args, rg)
    t0 = time.perf_counter()
    rep = analyse(rg)
    timing["analysis"] = time.perf_counter() - t0
    out = {"almost_divergent": rep.almost_divergent, "divergent": rep.divergent,
           "sccs": [_scc_json(rg, s) for s in rep.dag.sccs if s.nontrivial]}
    if rep.almost_divergent:
        plus, minus = infinity_report(rg, rep.dag)
        out["plus_inf"] = sorted(rg.label(s) for s in plus)
        out["minus_inf"] = sorted(rg.label(s) for s in minus)
    return out, 0 if rep.almost_divergent else EXIT_NOT_AD


def cmd_infinite(args, g, timing):
    rg = build_region_game(g, args.granularity)
    _maybe_dot(args, rg)
    rep = analyse(rg)
    if not rep.almost_divergent:
        return {"almost_divergent": False, "sccs": [_scc_json(rg, s) for s in rep.mixed()]}, EXIT_NOT_AD
    plus, minus = infinity_report(rg, rep.dag)
    return {"plus_inf": sorted(rg.label(s) for s in plus),
            "minus_inf": sorted(rg.label(s) for s in minus)}, 0


def cmd_kernel(args, g, timing):
    rg = build_region_game(g, args.granularity)
    _maybe_dot(args, rg)
    rep = analyse(rg)
    if not rep.almost_divergent:
        return {"almost_divergent": False, "sccs": [_scc_json(rg, s) for s in rep.mixed()]}, EXIT_NOT_AD
    return {"sccs": [_scc_json(rg, s) for s in rep.dag.sccs if s.nontrivial]}, 0


def cmd_solve_acyclic(args, g, timing):
    rg = build_region_game(g, args.granularity)
    _maybe_dot(args, rg)
    out = {}
    _emit_values(args, g, solve_acyclic(rg, args.cap), out)
    return out, 0


def cmd_iterate(args, g, timing):
    rg = build_region_game(g, args.granularity)
    _maybe_dot(args, rg)
    res = value_iteration(rg, args.horizon, args.cap)
    out = {"steps": res.steps, "stabilized": res.stabilized}
    _emit_values(args, g, res.values, out)
    return out, 0


def cmd_approx(args, g, timing):
    if args.epsilon is None:
        raise CliError(EXIT_IO, "--epsilon is required")
    eps = parse_rational(args.epsilon)
    if eps <= 0:
        raise CliError(EXIT_VALIDATION, "epsilon must be positive")
    rg = build_region_game(g, 1)
    _maybe_dot(args, rg)
    if args.method == "symbolic":
        res = approximate_symbolic(g, eps, args.horizon, args.max_steps, rg, args.cap)
        out = {"method": "symbolic", "steps": res.steps, "stabilized": res.stabilized,
               "certificate_complete": res.complete, "certificate": res.certificate.to_json()}
    else:
        res = approximate_game(g, eps, args.gamma, args.kernel_granularity, rg=rg)
        out = {"method": "static", "certificate": res.certificate(),
               "plus_inf": sorted(rg.label(s) for s in res.plus_inf),
               "minus_inf": sorted(rg.label(s) for s in res.minus_inf)}
    _emit_values(args, g, res.values, out)
    return out, 0


def cmd_export_dot(args, g, timing):
    rg = build_region_game(g, args.granularity)
    text = corner_game_dot(build_corner_game(rg)) if args.corners else region_game_dot(rg)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
        return {"written": args.output}, 0
    return {"dot": text}, 0


VERBS = {"check": cmd_check, "infinite": cmd_infinite, "kernel": cmd_kernel,
         "solve-acyclic": cmd_solve_acyclic, "iterate": cmd_iterate, "approx": cmd_approx,
         "export-dot": cmd_export_dot}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="wtg", description="Analyse and solve weighted timed games.")
    p.add_argument("--version", action="version", version=f"wtg {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        s = sub.add_parser(verb)
        s.add_argument("file")
        s.add_argument("--decimals", type=int)
        s.add_argument("--granularity", type=int, default=1, help="region granularity N")
        s.add_argument("--emit-dot", help="write the region game in DOT format to this file")
        s.add_argument("--cap", type=int, default=DEFAULT_CAP, help="piece-count cap per region")
        if verb in ("solve-acyclic", "iterate", "approx"):
            s.add_argument("--at", help="location[,clock=p/q...]; omitted clocks are 0")
            s.add_argument("--slice", help="loc=<id>[,fix <clock>=<p/q>...]")
            s.add_argument("--slice-step", default="1/16")
            s.add_argument("--slice-out", help="write the slice CSV here instead of the report")
        if verb == "iterate":
            s.add_argument("--horizon", type=int, required=True)
        if verb == "approx":
            s.add_argument("--epsilon")
            s.add_argument("--method", choices=["static", "symbolic"], default="static")
            s.add_argument("--gamma", type=int, help="occurrence bound; unsound below the computed one")
            s.add_argument("--kernel-granularity", type=int, help="force the kernels' corner granularity")
            s.add_argument("--horizon", type=int, help="symbolic method: steps to run")
            s.add_argument("--max-steps", type=int, default=200,
                           help="symbolic method without --horizon: step budget")
        if verb == "export-dot":
            s.add_argument("--corners", action="store_true", help="export the corner game instead")
            s.add_argument("-o", "--output")
    return p


def run(argv):
    """Run one command; returns ``(exit code, report dict)``."""
    args = build_parser().parse_args(argv)
    report = {"command": ["wtg", *argv]}
    timing = {}
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            g = load_game(args.file)
            timing["parse"] = time.perf_counter() - t0
            result, code = VERBS[args.verb](args, g, timing)
            report["result"] = result
        except (GameParseError, OSError, json.JSONDecodeError) as e:
            code, report["error"] = EXIT_IO, str(e)
        except CliError as e:
            code, report["error"] = e.code, str(e)
        except PieceCapExceeded as e:
            code, report["error"] = EXIT_CAP, str(e)
        except ValidationError as e:
            code = {"not-almost-divergent": EXIT_NOT_AD, "minus-infinity": EXIT_MINUS_INF}.get(
                e.code, EXIT_VALIDATION)
            report["error"] = f"{e.code}: {e}"
    report["warnings"] = sorted({str(w.message) for w in caught})
    timing["total"] = time.perf_counter() - t0
    report["timing"] = {k: round(v, 6) for k, v in timing.items()}
    report["exit_code"] = code
    return code, report


def main(argv=None):
    code, report = run(sys.argv[1:] if argv is None else argv)
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
