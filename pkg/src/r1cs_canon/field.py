"""Arbitrary-precision prime-field arithmetic.

Every coefficient in a constraint system lives in Z_p for a configurable
prime p > 2. The default is the BN254 scalar-field modulus used by circom
toolchains; tests prefer small primes so properties stay enumerable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DivisionByZero, InvalidPrime, ModulusMismatch

# Scalar field modulus of BN254, the curve circom/snarkjs target by default.
BN254_MODULUS = 21888242871839275222246405745257275088548364400416034343698204186575808495617

# Witnesses sufficient for a deterministic Miller-Rabin verdict below 2^64.
_SMALL_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_LARGE_ROUNDS = 48


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin: deterministic below 2^64, 48 fixed-base rounds above."""
    if n < 2:
        return False
    small = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
    for q in small:
        if n == q:
            return True
        if n % q == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    if n < 2**64:
        bases = _SMALL_WITNESSES
    else:
        # Fixed pseudo-random bases derived from n keep the check deterministic.
        bases = tuple(2 + (n >> k) % (n - 3) for k in range(1, _LARGE_ROUNDS + 1))
    for a in bases:
        a %= n
        if a in (0, 1, n - 1):
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Prime:
    """A verified prime modulus > 2."""

    value: int

    def __post_init__(self):
        if self.value <= 2 or not is_probable_prime(self.value):
            raise InvalidPrime(f"{self.value} is not a prime > 2")

    def element(self, value: int) -> "FieldElement":
        return FieldElement(value % self.value, self)

    def __repr__(self):
        return f"Prime({self.value})"


@dataclass(frozen=True)
class FieldElement:
    """A residue in [0, p). Immutable; all operations are pure."""

    residue: int
    prime: Prime

    def __post_init__(self):
        if not 0 <= self.residue < self.prime.value:
            raise ValueError(f"residue {self.residue} out of range for p={self.prime.value}")

    def _check(self, other: "FieldElement"):
        if self.prime != other.prime:
            raise ModulusMismatch(f"p={self.prime.value} vs p={other.prime.value}")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement((self.residue + other.residue) % self.prime.value, self.prime)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement((self.residue - other.residue) % self.prime.value, self.prime)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.residue * other.residue % self.prime.value, self.prime)

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.residue % self.prime.value, self.prime)

    def inverse(self) -> "FieldElement":
        if self.residue == 0:
            raise DivisionByZero("zero has no multiplicative inverse")
        return FieldElement(pow(self.residue, -1, self.prime.value), self.prime)

    def signed(self) -> int:
        """Unique s with s = residue (mod p) and -p/2 < s <= p/2."""
        p = self.prime.value
        return self.residue if 2 * self.residue <= p else self.residue - p

    def is_zero(self) -> bool:
        return self.residue == 0

    def __repr__(self):
        return f"{self.residue} (mod {self.prime.value})"


def fe_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def fe_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def fe_inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def fe_signed(a: FieldElement) -> int:
    return a.signed()
