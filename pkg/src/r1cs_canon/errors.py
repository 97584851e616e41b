"""Exception types shared across the package."""


class R1csError(Exception):
    """Base class for all errors raised by this package."""


class ModulusMismatch(R1csError):
    """Field operation between elements of different prime fields."""


class DivisionByZero(R1csError):
    """Multiplicative inverse of zero requested."""


class InvalidPrime(R1csError):
    """Modulus is not a prime > 2."""


class ParseError(R1csError):
    """Malformed constraint-system or witness JSON."""


class IndexOutOfRange(R1csError):
    """A term references a variable index >= num_vars."""


class WitnessShapeError(R1csError):
    """Witness length does not match the system's variable count."""


class PseudoVariableError(R1csError):
    """Witness slot 0 is not the constant 1."""


class DegenerateConstraint(R1csError):
    """A constraint reduces to an unsatisfiable constant equation."""

    def __init__(self, indices, message=None):
        self.indices = list(indices)
        super().__init__(message or f"unsatisfiable constant constraint(s) at {self.indices}")


class CyclicLinearDefinition(R1csError):
    """Substitution cycle among hand-crafted linear definitions."""


class RankDivergence(R1csError):
    """Score iteration exceeded the overflow guard."""


class TransformInapplicable(R1csError):
    """The requested equivalence transform cannot apply to this system."""


class OracleBudgetExceeded(R1csError):
    """Brute-force enumeration would exceed the configured budget."""
