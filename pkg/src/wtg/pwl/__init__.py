"""Exact piecewise-linear functions over clock space."""

from .function import (
    Aff,
    FinalWeight,
    PieceCapExceeded,
    PWLFunction,
    RegionFn,
    add_affine,
    combine,
    compose_reset,
    domain,
    interpolate,
    lipschitz_bound,
    opt_delay,
    pullback,
    pwl_max,
    pwl_min,
    region_max,
    region_min,
    substitute,
)
from .geometry import Polytope
from .io import pwl_to_json, region_fn_to_json, slice_csv

__all__ = [
    "Aff", "FinalWeight", "PieceCapExceeded", "PWLFunction", "Polytope", "RegionFn",
    "add_affine", "combine", "compose_reset", "domain", "interpolate", "lipschitz_bound",
    "opt_delay", "pullback", "pwl_max", "pwl_min", "pwl_to_json", "region_fn_to_json",
    "region_max", "region_min", "slice_csv", "substitute",
]
