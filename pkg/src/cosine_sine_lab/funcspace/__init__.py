"""Complex-valued functions on groups and bounded-function verdicts."""

from .core import (
    DEFAULT_SCHEDULE,
    DEFAULT_TAU,
    BoundVerdict,
    DependenceFit,
    GFunction,
    boundedness,
    check_schedule,
    combine,
    dependence_mod_bounded,
    eval_fn,
    gf,
    least_squares,
    sup_norm,
    sup_trace,
    triple_dependence,
    verdict_from_trace,
)
from .descriptors import (
    Additive,
    Character,
    Const,
    Desc,
    ExpChar,
    FiniteChar,
    Noise,
    Pow,
    Prod,
    Scale,
    Sum,
    Table,
    Zero,
    desc_from_json,
    desc_to_json,
)
from .evaluation import noise_values

__all__ = [
    "DEFAULT_SCHEDULE", "DEFAULT_TAU", "BoundVerdict", "DependenceFit", "GFunction", "boundedness",
    "check_schedule", "combine", "dependence_mod_bounded", "eval_fn", "gf", "least_squares", "sup_norm",
    "sup_trace", "triple_dependence", "verdict_from_trace", "Additive", "Character", "Const", "Desc",
    "ExpChar", "FiniteChar", "Noise", "Pow", "Prod", "Scale", "Sum", "Table", "Zero", "desc_from_json",
    "desc_to_json", "noise_values",
]
