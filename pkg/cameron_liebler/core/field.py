"""Finite field arithmetic for GF(q), q = p^e odd.

Elements are integer codes in [0, q): the code of c_0 + c_1 x + ... + c_{e-1} x^{e-1}
is sum(c_i * p**i). Multiplication goes through log/antilog tables built from a
primitive element, so every operation is a table lookup and vectorises over numpy
arrays of codes.

The field representation is deterministic: the modulus is the lexicographically
smallest monic irreducible polynomial (coefficients listed from the leading one down)
and the generator is the smallest primitive code.

Usage:
    from cameron_liebler.core.field import build_field, quadratic_character

    gf9 = build_field(3, 2)
    x = gf9.element(3)
    assert (x * x).code == gf9.from_int(-1)
"""

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from itertools import product
from typing import Any

import numpy as np

# Table-driven arithmetic is only supported up to this order
MAX_FIELD_ORDER = 2**16


class NotOddPrime(ValueError):
    """Raised when the characteristic is even or not prime."""

    def __init__(self, p: int):
        self.p = p
        super().__init__(f"Characteristic must be an odd prime, got {p}")


class InvalidDegree(ValueError):
    """Raised when the extension degree is not a positive integer."""

    def __init__(self, e: int):
        self.e = e
        super().__init__(f"Extension degree must be >= 1, got {e}")


class FieldTooLarge(ValueError):
    """Raised when p^e exceeds the table-driven arithmetic bound."""

    def __init__(self, q: int):
        self.q = q
        super().__init__(f"Field order {q:,} exceeds maximum {MAX_FIELD_ORDER:,}")


class DivisionByZero(ZeroDivisionError):
    """Raised on inversion of (or division by) the zero element."""

    def __init__(self, message: str = "Division by zero in finite field"):
        super().__init__(message)


class QuadraticCharacter(IntEnum):
    """Square class of a field element. Values double as numpy array entries."""

    ZERO = 0
    SQUARE = 1
    NONSQUARE = -1


class ArithOp(str, Enum):
    """Operations accepted by :func:`arith`."""

    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    NEG = "neg"
    INV = "inv"
    POW = "pow"


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality test."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of n in increasing order."""
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        factors.append(n)
    return factors


def prime_power(q: int) -> tuple[int, int] | None:
    """Split q as p^e, or return None when q is not a prime power."""
    if q < 2:
        return None
    factors = prime_factors(q)
    if len(factors) != 1:
        return None
    p = factors[0]
    e = 0
    while q > 1:
        q //= p
        e += 1
    return p, e


# Polynomials over GF(p) below are coefficient lists, lowest degree first.


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m."""
    a = _poly_trim(list(a))
    dm = len(m) - 1
    while len(a) - 1 >= dm:
        c = a[-1]
        shift = len(a) - 1 - dm
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        _poly_trim(a)
    return a


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    return _poly_mod(_poly_mul(a, b, p), m, p)


def _poly_powmod(a: list[int], n: int, m: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(a, m, p)
    while n:
        if n & 1:
            result = _poly_mulmod(result, base, m, p)
        base = _poly_mulmod(base, base, m, p)
        n >>= 1
    return result


def _poly_sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _poly_trim(out)


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _poly_trim(list(a)), _poly_trim(list(b))
    while b:
        inv_lead = pow(b[-1], p - 2, p)
        monic_b = [(c * inv_lead) % p for c in b]
        a, b = b, _poly_mod(a, monic_b, p)
    return a


def is_irreducible(modulus: tuple[int, ...], p: int) -> bool:
    """Test irreducibility of a monic polynomial over GF(p).

    Args:
        modulus: Coefficients from the leading (1) down to the constant term.
        p: The prime characteristic.

    Returns:
        True if the polynomial is irreducible.
    """
    e = len(modulus) - 1
    if e <= 1:
        return True
    m = list(reversed(modulus))
    if e <= 3:
        # A reducible polynomial of degree <= 3 has a linear factor
        for x in range(p):
            if sum(c * pow(x, i, p) for i, c in enumerate(m)) % p == 0:
                return False
        return True

    # Rabin: x^(p^e) = x mod m, and gcd(x^(p^(e/r)) - x, m) = 1 for every prime r | e
    x = [0, 1]
    if _poly_sub(_poly_powmod(x, p**e, m, p), x, p):
        return False
    for r in prime_factors(e):
        h = _poly_sub(_poly_powmod(x, p ** (e // r), m, p), x, p)
        if len(_poly_gcd(m, h, p)) > 1:
            return False
    return True


def _smallest_irreducible(p: int, e: int) -> tuple[int, ...]:
    for tail in product(range(p), repeat=e):
        modulus = (1, *tail)
        if is_irreducible(modulus, p):
            return modulus
    raise AssertionError(f"No irreducible polynomial of degree {e} over GF({p})")


def _digits_of(code: int, p: int, e: int) -> list[int]:
    out = []
    for _ in range(e):
        out.append(code % p)
        code //= p
    return _poly_trim(out)


def _code_of(digits: list[int], p: int) -> int:
    return sum(c * p**i for i, c in enumerate(digits))


@dataclass(frozen=True)
class FieldSpec:
    """An odd-characteristic finite field GF(p^e) with lookup tables.

    Equality and hashing use (p, e, modulus, generator); the tables are derived data.
    All arithmetic methods accept ints or numpy integer arrays of codes.
    """

    p: int
    e: int
    q: int
    modulus: tuple[int, ...]
    generator: int
    exp_table: np.ndarray = field(repr=False, compare=False)
    log_table: np.ndarray = field(repr=False, compare=False)
    digit_table: np.ndarray = field(repr=False, compare=False)
    neg_table: np.ndarray = field(repr=False, compare=False)

    # Element helpers

    def element(self, code: int) -> "FieldElement":
        """Wrap a code as a FieldElement."""
        code = int(code)
        if not 0 <= code < self.q:
            raise ValueError(f"Code {code} is not an element of GF({self.q})")
        return FieldElement(self, code)

    def from_int(self, n: int) -> int:
        """Code of the prime-subfield element n mod p."""
        return n % self.p

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def elements(self) -> range:
        """All codes in increasing order."""
        return range(self.q)

    # Vectorised arithmetic on codes

    def add(self, a: Any, b: Any) -> Any:
        if self.e == 1:
            return _unwrap((np.asarray(a) + np.asarray(b)) % self.p)
        digits = (self.digit_table[a] + self.digit_table[b]) % self.p
        return _unwrap(digits @ self._powers)

    def neg(self, a: Any) -> Any:
        return _unwrap(self.neg_table[a])

    def sub(self, a: Any, b: Any) -> Any:
        return self.add(a, self.neg_table[b])

    def mul(self, a: Any, b: Any) -> Any:
        a = np.asarray(a)
        b = np.asarray(b)
        out = self.exp_table[(self.log_table[a] + self.log_table[b]) % (self.q - 1)]
        return _unwrap(np.where((a == 0) | (b == 0), 0, out))

    def inv(self, a: Any) -> Any:
        a = np.asarray(a)
        if np.any(a == 0):
            raise DivisionByZero()
        return _unwrap(self.exp_table[(-self.log_table[a]) % (self.q - 1)])

    def div(self, a: Any, b: Any) -> Any:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        a = int(a)
        if a == 0:
            if n < 0:
                raise DivisionByZero()
            # 0^0 = 1 by convention
            return 1 if n == 0 else 0
        return int(self.exp_table[(int(self.log_table[a]) * n) % (self.q - 1)])

    def square(self, a: Any) -> Any:
        return self.mul(a, a)

    def character(self, a: Any) -> Any:
        """Quadratic character codes: 0 for zero, 1 for squares, -1 otherwise."""
        a = np.asarray(a)
        chars = np.where(self.log_table[a] % 2 == 0, 1, -1)
        return _unwrap(np.where(a == 0, 0, chars).astype(np.int8))

    def multiplication_matrix(self, a: int) -> np.ndarray:
        """Matrix of b -> a*b as a GF(p)-linear map on digit vectors."""
        basis = self._powers
        return self.digit_table[self.mul(int(a), basis)].T.copy()

    @property
    def _powers(self) -> np.ndarray:
        return self.p ** np.arange(self.e, dtype=np.int64)

    def to_dict(self) -> dict[str, Any]:
        return {"p": self.p, "e": self.e, "q": self.q, "modulus": list(self.modulus)}


def _unwrap(value: Any) -> Any:
    """Return Python ints for 0-d results, arrays otherwise."""
    arr = np.asarray(value)
    if arr.ndim == 0:
        return int(arr)
    return arr.astype(np.int64, copy=False)


@dataclass(frozen=True)
class FieldElement:
    """A field element: a code together with its field."""

    spec: FieldSpec = field(repr=False)
    code: int

    def _other(self, other: "FieldElement | int") -> int:
        if isinstance(other, FieldElement):
            if other.spec != self.spec:
                raise ValueError("Operands belong to different fields")
            return other.code
        return self.spec.from_int(int(other))

    def __add__(self, other: "FieldElement | int") -> "FieldElement":
        return FieldElement(self.spec, self.spec.add(self.code, self._other(other)))

    def __sub__(self, other: "FieldElement | int") -> "FieldElement":
        return FieldElement(self.spec, self.spec.sub(self.code, self._other(other)))

    def __mul__(self, other: "FieldElement | int") -> "FieldElement":
        return FieldElement(self.spec, self.spec.mul(self.code, self._other(other)))

    def __truediv__(self, other: "FieldElement | int") -> "FieldElement":
        return FieldElement(self.spec, self.spec.div(self.code, self._other(other)))

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.spec, self.spec.neg(self.code))

    def __pow__(self, n: int) -> "FieldElement":
        return FieldElement(self.spec, self.spec.pow(self.code, n))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.spec, self.spec.inv(self.code))

    def __int__(self) -> int:
        return self.code

    def __index__(self) -> int:
        return self.code

    def __bool__(self) -> bool:
        return self.code != 0


def code_of(value: "FieldElement | int") -> int:
    """Accept either a FieldElement or a raw code."""
    return value.code if isinstance(value, FieldElement) else int(value)


def build_field(p: int, e: int = 1) -> FieldSpec:
    """Build GF(p^e) with deterministic modulus and generator.

    Args:
        p: Odd prime characteristic.
        e: Extension degree.

    Returns:
        The field with its lookup tables.

    Raises:
        NotOddPrime: If p is even or composite.
        InvalidDegree: If e < 1.
        FieldTooLarge: If p^e exceeds MAX_FIELD_ORDER.
    """
    if p == 2 or not is_prime(p):
        raise NotOddPrime(p)
    if e < 1:
        raise InvalidDegree(e)
    q = p**e
    if q > MAX_FIELD_ORDER:
        raise FieldTooLarge(q)

    modulus = _smallest_irreducible(p, e)
    m = list(reversed(modulus))

    # Smallest primitive element: g^((q-1)/r) != 1 for every prime r | q-1
    order_factors = prime_factors(q - 1)
    generator = None
    for code in range(1, q):
        g = _digits_of(code, p, e)
        if all(_poly_powmod(g, (q - 1) // r, m, p) != [1] for r in order_factors):
            generator = code
            break
    if generator is None:
        raise AssertionError(f"No primitive element found in GF({q})")

    exp_table = np.zeros(q - 1, dtype=np.int64)
    log_table = np.zeros(q, dtype=np.int64)
    g = _digits_of(generator, p, e)
    current = [1]
    for k in range(q - 1):
        c = _code_of(current, p)
        exp_table[k] = c
        log_table[c] = k
        current = _poly_mulmod(current, g, m, p)

    codes = np.arange(q, dtype=np.int64)
    digit_table = np.stack([(codes // p**i) % p for i in range(e)], axis=-1)
    powers = p ** np.arange(e, dtype=np.int64)
    neg_table = ((-digit_table) % p) @ powers

    return FieldSpec(
        p=p,
        e=e,
        q=q,
        modulus=modulus,
        generator=generator,
        exp_table=exp_table,
        log_table=log_table,
        digit_table=digit_table,
        neg_table=neg_table,
    )


def build_field_of_order(q: int) -> FieldSpec:
    """Build GF(q) from its order.

    Raises:
        NotOddPrime: If q is not a power of an odd prime.
    """
    split = prime_power(q)
    if split is None:
        raise NotOddPrime(q)
    return build_field(*split)


def arith(
    op: ArithOp | str,
    a: FieldElement,
    b: "FieldElement | int | None" = None,
) -> FieldElement:
    """Apply one field operation.

    Args:
        op: One of add, sub, mul, div, neg, inv, pow.
        a: First operand.
        b: Second operand (an integer exponent for pow; unused for neg/inv).

    Raises:
        DivisionByZero: For div/inv by zero.
        TypeError: If a pow exponent is not an integer.
    """
    op = ArithOp(op)
    if op is ArithOp.NEG:
        return -a
    if op is ArithOp.INV:
        return a.inverse()
    if b is None:
        raise ValueError(f"Operation {op.value} needs a second operand")
    if op is ArithOp.POW:
        if not isinstance(b, (int, np.integer)):
            raise TypeError(f"Exponent must be an integer, got {type(b).__name__}")
        return a ** int(b)
    return {
        ArithOp.ADD: a.__add__,
        ArithOp.SUB: a.__sub__,
        ArithOp.MUL: a.__mul__,
        ArithOp.DIV: a.__truediv__,
    }[op](b)


def quadratic_character(a: FieldElement) -> QuadraticCharacter:
    """Classify a as Zero, Square or NonSquare."""
    return QuadraticCharacter(a.spec.character(a.code))


def nonzero_squares(spec: FieldSpec) -> list[int]:
    """Codes of the (q-1)/2 non-zero squares, ascending."""
    chars = spec.character(np.arange(spec.q))
    return [int(c) for c in np.flatnonzero(chars == QuadraticCharacter.SQUARE)]


def nonsquares(spec: FieldSpec) -> list[int]:
    """Codes of the (q-1)/2 non-squares, ascending."""
    chars = spec.character(np.arange(spec.q))
    return [int(c) for c in np.flatnonzero(chars == QuadraticCharacter.NONSQUARE)]


def canonical_nonsquare(spec: FieldSpec) -> FieldElement:
    """The smallest-code non-square; the default pencil parameter omega."""
    return spec.element(nonsquares(spec)[0])
