"""Canonical-form generation and equivalence checking for rank-1 constraint
systems over prime fields."""

from .canonical import NormalizeResult, merge_linear, normalize
from .field import BN254_MODULUS, FieldElement, Prime, fe_add, fe_inv, fe_mul, fe_signed
from .system import (
    Constraint,
    R1cs,
    VariableMap,
    Witness,
    check_witness,
    parse_r1cs,
    parse_witness,
    serialize_r1cs,
    serialize_witness,
    validate_paradigm,
)

__version__ = "0.1.0"

__all__ = [
    "BN254_MODULUS",
    "Constraint",
    "FieldElement",
    "NormalizeResult",
    "Prime",
    "R1cs",
    "VariableMap",
    "Witness",
    "check_witness",
    "fe_add",
    "fe_inv",
    "fe_mul",
    "fe_signed",
    "merge_linear",
    "normalize",
    "parse_r1cs",
    "parse_witness",
    "serialize_r1cs",
    "serialize_witness",
    "validate_paradigm",
]
