"""Exact data model of weighted timed games.

Values are ``fractions.Fraction``; the two infinities are the float
infinities, which compare correctly against fractions.  Only the helpers
in this module should combine them so that ``+inf + -inf`` is caught.
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

INF = math.inf
NEG_INF = -math.inf

MIN = "min"
MAX = "max"

OPS = ("<", "<=", "=", ">=", ">")
_OP_ALIASES = {"≤": "<=", "≥": ">=", "==": "="}


def is_finite(v):
    return not (isinstance(v, float) and math.isinf(v))


def ext_add(a, b):
    if is_finite(a) and is_finite(b):
        return a + b
    assert not (a == INF and b == NEG_INF) and not (a == NEG_INF and b == INF), \
        "+inf + -inf is undefined"
    return a if not is_finite(a) else b


def to_rational(x):
    """Parse an int, a decimal/fraction string or an infinity keyword."""
    if isinstance(x, bool):
        raise ValueError("boolean is not a number")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        if math.isinf(x):
            return x
        return Fraction(x).limit_denominator(10 ** 12)
    if isinstance(x, str):
        s = x.strip()
        if s in ("+inf", "inf", "+∞", "∞"):
            return INF
        if s in ("-inf", "-∞"):
            return NEG_INF
        return Fraction(s)
    raise ValueError(f"not a number: {x!r}")


def fmt_rational(v):
    """Render an extended rational as ``"p/q"``, an integer string or ``"+inf"``."""
    if not is_finite(v):
        return "+inf" if v > 0 else "-inf"
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def fmt_decimal(v, decimals):
    if not is_finite(v):
        return "+inf" if v > 0 else "-inf"
    v = Fraction(v)
    sign = "-" if v < 0 else ""
    q = math.floor(abs(v) * 10 ** decimals + Fraction(1, 2))  # half away from zero
    if q == 0:
        sign = ""
    if decimals == 0:
        return f"{sign}{q}"
    s = str(q).rjust(decimals + 1, "0")
    return f"{sign}{s[:-decimals]}.{s[-decimals:]}"


class GameParseError(Exception):
    """Malformed game document.  ``code`` identifies the failure kind."""

    def __init__(self, code, message, position=None):
        super().__init__(message if position is None else f"{message} (at {position})")
        self.code = code
        self.position = position


class ValidationError(Exception):
    """Well-formed game that breaks a semantic requirement (e.g. a deadlock)."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class EdgeNotEnabled(Exception):
    pass


@dataclass(frozen=True)
class AtomicConstraint:
    clock: int
    op: str
    const: Fraction

    def holds(self, value):
        c = self.const
        op = self.op
        if op == "<":
            return value < c
        if op == "<=":
            return value <= c
        if op == "=":
            return value == c
        if op == ">=":
            return value >= c
        return value > c

    def closed(self):
        return AtomicConstraint(self.clock, {"<": "<=", ">": ">="}.get(self.op, self.op), self.const)


@dataclass(frozen=True)
class Guard:
    constraints: tuple = ()

    def holds(self, valuation):
        return all(c.holds(valuation[c.clock]) for c in self.constraints)

    def closed(self):
        return Guard(tuple(c.closed() for c in self.constraints))

    def interval(self, clock):
        """Per-clock satisfying interval as (lo, lo_strict, hi, hi_strict)."""
        lo, lo_s, hi, hi_s = Fraction(0), False, INF, False
        for c in self.constraints:
            if c.clock != clock:
                continue
            if c.op in (">", ">=", "=") and (c.const > lo or (c.const == lo and c.op == ">")):
                lo, lo_s = c.const, c.op == ">"
            if c.op in ("<", "<=", "=") and (c.const < hi or (c.const == hi and c.op == "<")):
                hi, hi_s = c.const, c.op == "<"
        return lo, lo_s, hi, hi_s

    def satisfiable(self, n_clocks):
        for x in range(n_clocks):
            lo, lo_s, hi, hi_s = self.interval(x)
            if lo > hi or (lo == hi and (lo_s or hi_s)):
                return False
        return True


@dataclass(frozen=True)
class Location:
    id: str
    owner: str
    rate: int
    target: bool = False


@dataclass(frozen=True)
class Transition:
    index: int
    source: str
    target: str
    guard: Guard
    resets: frozenset
    weight: int


@dataclass
class WTG:
    clocks: tuple
    locations: dict
    transitions: tuple
    clock_bound: int
    final_weights: dict
    initial: str
    out: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.out = {lid: [] for lid in self.locations}
        for t in self.transitions:
            self.out[t.source].append(t)

    @property
    def n_clocks(self):
        return len(self.clocks)

    @property
    def w_max_L(self):
        return max((abs(l.rate) for l in self.locations.values()), default=0)

    @property
    def w_max_T(self):
        return max((abs(t.weight) for t in self.transitions), default=0)

    @property
    def w_max_e(self):
        return self.clock_bound * self.w_max_L + self.w_max_T

    def clock_index(self, name):
        return self.clocks.index(name)

    def valuation(self, **values):
        """Build a valuation tuple; omitted clocks are 0."""
        unknown = set(values) - set(self.clocks)
        if unknown:
            raise KeyError(f"unknown clocks {sorted(unknown)}")
        return tuple(Fraction(values.get(x, 0)) for x in self.clocks)

    def final_weight(self, loc):
        from .pwl import FinalWeight
        fw = self.final_weights.get(loc)
        return fw if fw is not None else FinalWeight.constant(self.n_clocks, 0)


def _err(code, msg, pos=None):
    raise GameParseError(code, msg, pos)


def _integer_const(raw, where):
    try:
        v = to_rational(raw)
    except (ValueError, ZeroDivisionError):
        _err("syntax", f"bad constant {raw!r}", where)
    if not is_finite(v) or v.denominator != 1:
        _err("non-integer-constant", f"constant {raw!r} is not an integer", where)
    return v


def _parse_op(raw, where):
    op = _OP_ALIASES.get(raw, raw)
    if op not in OPS:
        _err("syntax", f"unknown comparator {raw!r}", where)
    return op


def parse_game(text):
    """Parse a JSON game document into a validated :class:`WTG`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise GameParseError("syntax", f"invalid JSON: {e.msg}", f"line {e.lineno} column {e.colno}")
    return game_from_dict(doc)


def load_game(path):
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read())


def game_from_dict(doc):
    from .pwl import FinalWeight

    if not isinstance(doc, dict):
        _err("syntax", "top level must be an object")
    clocks = doc.get("clocks", [])
    if not isinstance(clocks, list) or not all(isinstance(c, str) for c in clocks):
        _err("syntax", "clocks must be a list of names", "clocks")
    if len(set(clocks)) != len(clocks):
        _err("syntax", "duplicate clock name", "clocks")
    locs = doc.get("locations")
    if not locs:
        _err("no-locations", "no locations")
    M = doc.get("clock_bound")
    if M is None:
        _err("clock-bound-required", "clock bound required")
    if isinstance(M, bool) or not isinstance(M, int) or M <= 0:
        _err("clock-bound-required", "clock bound must be a positive integer", "clock_bound")
    cidx = {c: i for i, c in enumerate(clocks)}

    locations = {}
    for i, raw in enumerate(locs):
        where = f"locations[{i}]"
        if not isinstance(raw, dict) or "id" not in raw:
            _err("syntax", "location needs an id", where)
        lid = str(raw["id"])
        if lid in locations:
            _err("syntax", f"duplicate location {lid!r}", where)
        target = bool(raw.get("target", False))
        owner = raw.get("owner", MIN)
        if owner not in (MIN, MAX):
            _err("syntax", f"owner must be 'min' or 'max', got {owner!r}", where)
        if target and owner != MIN:
            _err("target-owner", f"target {lid!r} must belong to min", where)
        rate = raw.get("rate", 0)
        if isinstance(rate, bool) or not isinstance(rate, int):
            _err("non-integer-constant", f"rate of {lid!r} is not an integer", where)
        locations[lid] = Location(lid, owner, rate, target)

    transitions = []
    for i, raw in enumerate(doc.get("transitions", [])):
        where = f"transitions[{i}]"
        if not isinstance(raw, dict):
            _err("syntax", "transition must be an object", where)
        src, dst = str(raw.get("from")), str(raw.get("to"))
        for l in (src, dst):
            if l not in locations:
                _err("unknown-location", f"unknown location {l!r}", where)
        if locations[src].target:
            _err("target-has-outgoing", f"target {src!r} has an outgoing transition", where)
        atoms = []
        for j, c in enumerate(raw.get("guard", [])):
            cw = f"{where}.guard[{j}]"
            if not isinstance(c, dict):
                _err("syntax", "constraint must be an object", cw)
            if c.get("clock") not in cidx:
                _err("unknown-clock", f"unknown clock {c.get('clock')!r}", cw)
            atoms.append(AtomicConstraint(cidx[c["clock"]], _parse_op(c.get("op"), cw),
                                          _integer_const(c.get("const"), cw)))
        # every guard bounds every clock by M
        for x in range(len(clocks)):
            atoms.append(AtomicConstraint(x, "<=", Fraction(M)))
        resets = raw.get("resets", [])
        for r in resets:
            if r not in cidx:
                _err("unknown-clock", f"unknown clock {r!r}", f"{where}.resets")
        w = raw.get("weight", 0)
        if isinstance(w, bool) or not isinstance(w, int):
            _err("non-integer-constant", "transition weight is not an integer", where)
        transitions.append(Transition(len(transitions), src, dst, Guard(tuple(atoms)),
                                      frozenset(cidx[r] for r in resets), w))

    finals = {}
    raw_finals = doc.get("final_weights", {}) or {}
    if not isinstance(raw_finals, dict):
        _err("syntax", "final_weights must be an object", "final_weights")
    for lid, spec in raw_finals.items():
        if lid not in locations or not locations[lid].target:
            _err("unknown-location", f"final weight for non-target {lid!r}", "final_weights")
        try:
            finals[lid] = FinalWeight.from_json(clocks, spec)
        except GameParseError:
            raise
        except (ValueError, KeyError, TypeError, ZeroDivisionError) as e:
            _err("syntax", f"bad final weight for {lid!r}: {e}", f"final_weights.{lid}")
    for lid, loc in locations.items():
        if loc.target and lid not in finals:
            finals[lid] = FinalWeight.constant(len(clocks), 0)

    initial = doc.get("initial", next(iter(locations)))
    if initial not in locations:
        _err("unknown-location", f"unknown initial location {initial!r}", "initial")
    return WTG(tuple(clocks), locations, tuple(transitions), M, finals, initial)


def game_to_dict(g):
    """Serialize back to the JSON document shape (implicit ``x <= M`` bounds dropped)."""
    M = g.clock_bound
    out = {
        "clocks": list(g.clocks),
        "clock_bound": M,
        "initial": g.initial,
        "locations": [{"id": l.id, "owner": l.owner, "rate": l.rate, "target": l.target}
                      for l in g.locations.values()],
        "transitions": [],
        "final_weights": {lid: fw.to_json(g.clocks) for lid, fw in g.final_weights.items()},
    }
    n = g.n_clocks
    for t in g.transitions:
        atoms = list(t.guard.constraints[:-n] if n else t.guard.constraints)
        out["transitions"].append({
            "from": t.source, "to": t.target,
            "guard": [{"clock": g.clocks[a.clock], "op": a.op, "const": int(a.const)} for a in atoms],
            "resets": [g.clocks[x] for x in sorted(t.resets)],
            "weight": t.weight,
        })
    return out


def game_to_json(g):
    return json.dumps(game_to_dict(g), indent=2)


def edge_successor(g, config, delay, transition):
    """One concrete move: wait ``delay`` in the current location, then fire ``transition``."""
    loc, nu = config
    delay = Fraction(delay)
    if transition.source != loc:
        raise EdgeNotEnabled(f"transition leaves {transition.source!r}, not {loc!r}")
    if delay < 0:
        raise EdgeNotEnabled("negative delay")
    moved = tuple(v + delay for v in nu)
    if not transition.guard.holds(moved):
        raise EdgeNotEnabled("edge not enabled")
    nxt = tuple(Fraction(0) if i in transition.resets else v for i, v in enumerate(moved))
    weight = delay * g.locations[loc].rate + transition.weight
    return (transition.target, nxt), weight


@dataclass
class Play:
    start: tuple
    moves: list = field(default_factory=list)
    infinite: bool = False

    def configurations(self, g):
        cfg = self.start
        out = [cfg]
        for d, t in self.moves:
            cfg, _ = edge_successor(g, cfg, d, g.transitions[t])
            out.append(cfg)
        return out


def cumulated_weight(g, play):
    cfg = play.start
    total = Fraction(0)
    for d, t in play.moves:
        cfg, w = edge_successor(g, cfg, d, g.transitions[t])
        total += w
    return total, cfg


def play_weight(g, play):
    """Weight of a play: cumulated weight plus the final weight at a target, +inf if none is reached.

    A finite play that stops at a non-target location is treated as a prefix
    and its cumulated weight is returned.
    """
    total, (loc, nu) = cumulated_weight(g, play)
    if g.locations[loc].target:
        return ext_add(total, g.final_weight(loc).eval(nu))
    if play.infinite:
        return INF
    return total
