"""Constraint-system data model, JSON interchange, and shape validation.

A system is a conjunction of rows (a.x) * (b.x) = (c.x) over the prime
field, where x[0] is the pseudo-variable fixed to 1 so dot products can
carry constant addends. Linear combinations are stored sparsely: absent
index means coefficient zero, and stored coefficients are never zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

from .errors import (
    IndexOutOfRange,
    InvalidPrime,
    ParseError,
    PseudoVariableError,
    WitnessShapeError,
)
from .field import FieldElement, Prime

# A linear combination is a dict {var_index: FieldElement}, zero coeffs dropped.
LinearCombination = dict


def lc_from_ints(prime: Prime, terms: dict) -> LinearCombination:
    """Build a combination from integer coefficients, reducing mod p."""
    out = {}
    for idx, coeff in terms.items():
        fe = prime.element(coeff)
        if not fe.is_zero():
            out[int(idx)] = fe
    return out


def lc_eval(lc: LinearCombination, values) -> FieldElement:
    prime = values[0].prime
    acc = prime.element(0)
    for idx, coeff in lc.items():
        acc = acc + coeff * values[idx]
    return acc


def lc_has_variable(lc: LinearCombination) -> bool:
    """True when any term touches a real variable (index >= 1)."""
    return any(idx >= 1 for idx in lc)


@dataclass(frozen=True)
class Constraint:
    a: LinearCombination
    b: LinearCombination
    c: LinearCombination


@dataclass(frozen=True)
class R1cs:
    prime: Prime
    num_vars: int
    constraints: tuple

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be >= 1 (index 0 is the constant 1)")
        for i, con in enumerate(self.constraints):
            for side in (con.a, con.b, con.c):
                for idx in side:
                    if not 0 <= idx < self.num_vars:
                        raise IndexOutOfRange(f"constraint {i} references index {idx}, num_vars={self.num_vars}")


@dataclass(frozen=True)
class Witness:
    values: tuple

    @staticmethod
    def from_ints(prime: Prime, ints) -> "Witness":
        return Witness(tuple(prime.element(v) for v in ints))


ELIMINATED = "eliminated"


@dataclass
class VariableMap:
    """Relates original variable indices to canonical ones.

    entries[orig_index] is either a canonical index or the string
    "eliminated"; introduced lists (canonical_index, provenance) pairs for
    variables that exist only in the canonical system.
    """

    entries: dict = dc_field(default_factory=dict)
    introduced: list = dc_field(default_factory=list)

    def to_json_obj(self):
        return {
            "map": {str(k): self.entries[k] for k in sorted(self.entries)},
            "introduced": [
                {"canon": canon, "provenance": prov} for canon, prov in sorted(self.introduced)
            ],
        }


# ---------------------------------------------------------------------------
# JSON interchange
#
# {"prime": "<decimal>", "num_vars": N,
#  "constraints": [{"a": {"<idx>": "<coeff>"}, "b": {...}, "c": {...}}, ...]}
#
# Coefficients are decimal strings (possibly negative on input; reduced mod p).
# ---------------------------------------------------------------------------


def _parse_side(prime: Prime, obj, where: str) -> LinearCombination:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object of index->coefficient")
    out = {}
    for key, val in obj.items():
        try:
            idx = int(key)
        except ValueError:
            raise ParseError(f"{where}: bad variable index key '{key}'") from None
        if idx < 0:
            raise ParseError(f"{where}: negative variable index key '{key}'")
        if not isinstance(val, str):
            raise ParseError(f"{where}: coefficient for '{key}' must be a decimal string")
        try:
            coeff = int(val)
        except ValueError:
            raise ParseError(f"{where}: bad coefficient '{val}' for key '{key}'") from None
        fe = prime.element(coeff)
        if not fe.is_zero():
            out[idx] = fe
    return out


def parse_r1cs(data: bytes) -> R1cs:
    """Parse and validate the JSON wire format."""
    try:
        obj = json.loads(data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    for key in ("prime", "num_vars", "constraints"):
        if key not in obj:
            raise ParseError(f"missing required key '{key}'")
    try:
        p = int(obj["prime"])
    except (TypeError, ValueError):
        raise ParseError(f"bad 'prime' value {obj['prime']!r}") from None
    try:
        prime = Prime(p)
    except InvalidPrime:
        raise
    num_vars = obj["num_vars"]
    if not isinstance(num_vars, int) or num_vars < 1:
        raise ParseError(f"bad 'num_vars' value {num_vars!r}")
    if not isinstance(obj["constraints"], list):
        raise ParseError("'constraints' must be a list")
    constraints = []
    for i, con in enumerate(obj["constraints"]):
        if not isinstance(con, dict) or set(con) != {"a", "b", "c"}:
            raise ParseError(f"constraint {i}: expected keys a, b, c")
        constraints.append(
            Constraint(
                _parse_side(prime, con["a"], f"constraint {i} side a"),
                _parse_side(prime, con["b"], f"constraint {i} side b"),
                _parse_side(prime, con["c"], f"constraint {i} side c"),
            )
        )
    return R1cs(prime, num_vars, tuple(constraints))


def _side_obj(lc: LinearCombination):
    return {str(idx): str(lc[idx].residue) for idx in sorted(lc)}


def serialize_r1cs(sys: R1cs) -> bytes:
    """Deterministic re-encoding: fixed key order, indices ascending."""
    obj = {
        "prime": str(sys.prime.value),
        "num_vars": sys.num_vars,
        "constraints": [
            {"a": _side_obj(c.a), "b": _side_obj(c.b), "c": _side_obj(c.c)}
            for c in sys.constraints
        ],
    }
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")


def parse_witness(prime: Prime, data: bytes) -> Witness:
    try:
        obj = json.loads(data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed witness JSON: {exc}") from None
    if not isinstance(obj, dict) or "values" not in obj or not isinstance(obj["values"], list):
        raise ParseError("witness must be an object with a 'values' list")
    vals = []
    for i, v in enumerate(obj["values"]):
        try:
            vals.append(prime.element(int(v)))
        except (TypeError, ValueError):
            raise ParseError(f"witness value {i}: bad integer {v!r}") from None
    return Witness(tuple(vals))


def serialize_witness(w: Witness) -> bytes:
    obj = {"values": [str(v.residue) for v in w.values]}
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Satisfaction and canonical-shape checks
# ---------------------------------------------------------------------------


@dataclass
class SatisfactionReport:
    satisfied: bool
    failing: list


def check_witness(sys: R1cs, w: Witness) -> SatisfactionReport:
    """Evaluate every row (a.w)(b.w) = (c.w) and collect failures."""
    if len(w.values) != sys.num_vars:
        raise WitnessShapeError(f"witness length {len(w.values)} != num_vars {sys.num_vars}")
    if not w.values or w.values[0].residue != 1:
        raise PseudoVariableError("witness slot 0 must be 1")
    failing = []
    for i, con in enumerate(sys.constraints):
        lhs = lc_eval(con.a, w.values) * lc_eval(con.b, w.values)
        rhs = lc_eval(con.c, w.values)
        if lhs.residue != rhs.residue:
            failing.append(i)
    return SatisfactionReport(not failing, failing)


def is_quadratic_row(con: Constraint) -> bool:
    return lc_has_variable(con.a) and lc_has_variable(con.b)


@dataclass
class ParadigmReport:
    valid: bool
    violations: list


def validate_paradigm(sys: R1cs) -> ParadigmReport:
    """Check the three canonical-shape requirements.

    1. Rows multiplying variables are pure: a, b, c each exactly one term,
       index >= 1, coefficient 1.
    2. Every other row is homogenized (b = {0:1}, c empty) and no variable
       that occurs only in linear rows occurs in more than one of them.
    3. All quadratic rows precede all linear rows.
    """
    violations = []
    one = sys.prime.element(1)
    seen_linear = False
    linear_rows = []
    quad_var_indices = set()
    for i, con in enumerate(sys.constraints):
        if is_quadratic_row(con):
            if seen_linear:
                violations.append(f"row {i}: quadratic row after a linear row (requirement 3)")
            pure = True
            for name, side in (("a", con.a), ("b", con.b), ("c", con.c)):
                if len(side) != 1:
                    pure = False
                    violations.append(f"row {i}: side {name} of a quadratic row must have exactly one term (requirement 1)")
                    continue
                idx, coeff = next(iter(side.items()))
                if idx < 1 or coeff != one:
                    pure = False
                    violations.append(f"row {i}: side {name} must be a bare variable with coefficient 1 (requirement 1)")
            if pure:
                quad_var_indices.update(next(iter(s)) for s in (con.a, con.b, con.c))
        else:
            seen_linear = True
            if con.b != {0: one}:
                violations.append(f"row {i}: linear row must have b = {{0: 1}} (requirement 2)")
            if con.c:
                violations.append(f"row {i}: linear row must have empty c (requirement 2)")
            linear_rows.append((i, con.a))
    # Requirement 2, cross-row part: a variable confined to linear rows may
    # appear in only one of them (otherwise it was generated by another
    # linear constraint and should have been merged away).
    linear_occurrences = {}
    for i, a in linear_rows:
        for idx in a:
            if idx >= 1:
                linear_occurrences.setdefault(idx, []).append(i)
    for idx, rows in sorted(linear_occurrences.items()):
        if idx not in quad_var_indices and len(rows) > 1:
            violations.append(
                f"variable {idx} occurs only in linear rows but in {len(rows)} of them {rows} (requirement 2)"
            )
    return ParadigmReport(not violations, violations)
