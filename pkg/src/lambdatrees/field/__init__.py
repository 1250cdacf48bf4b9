"""Exact arithmetic in the real closed field of real Puiseux series."""

from .coefficient import Coefficient, coefficient_sqrt, sign, to_mpf, to_rational
from .parser import parse_element, power
from .series import (
    BETA,
    ONE,
    T,
    ZERO,
    FieldConfig,
    PuiseuxElement,
    arith,
    evaluate_real,
    field_config,
    log_beta,
    residue,
    series_sqrt,
    substitute_exponent,
    using_config,
    valuation,
)

__all__ = [
    "BETA",
    "ONE",
    "T",
    "ZERO",
    "Coefficient",
    "FieldConfig",
    "PuiseuxElement",
    "arith",
    "coefficient_sqrt",
    "evaluate_real",
    "field_config",
    "log_beta",
    "parse_element",
    "power",
    "residue",
    "series_sqrt",
    "sign",
    "substitute_exponent",
    "to_mpf",
    "to_rational",
    "using_config",
    "valuation",
]
