from .family import DerivativeFamily
from .multiindex import RULE_ID, MultiIndexEnum, count_eq, count_leq, index_of, multi_index
from .poly import (
    Poly,
    as_points,
    cauchy_bound,
    derivative,
    embed,
    evaluate,
    partial_sum,
    poly_from_json,
    poly_to_json,
    recenter,
    seminorm,
    truncate,
)

__all__ = [
    "DerivativeFamily",
    "MultiIndexEnum",
    "Poly",
    "RULE_ID",
    "as_points",
    "cauchy_bound",
    "count_eq",
    "count_leq",
    "derivative",
    "embed",
    "evaluate",
    "index_of",
    "multi_index",
    "partial_sum",
    "poly_from_json",
    "poly_to_json",
    "recenter",
    "seminorm",
    "truncate",
]
