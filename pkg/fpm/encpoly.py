"""
Plain and encrypted polynomials over the plaintext ring.

Coefficients are stored lowest degree first. An encrypted polynomial is the
list of encryptions of its coefficients; it is evaluated at a public point as
the homomorphic sum of scalar multiples by plaintext powers of that point.
"""

import logging
import struct
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from fpm.errors import DecodeError, ParameterError, UndefinedInterpolationError
from fpm.homcrypt import Ciphertext, PublicKey
from fpm.ring import Ring
from fpm.rng import SessionRng
from fpm.wire import unpack_int

logger = logging.getLogger("encpoly")

Point = Tuple[int, int]


@dataclass(frozen=True)
class Polynomial:
    coefficients: Tuple[int, ...]
    ring: Ring

    def __post_init__(self) -> None:
        if not self.coefficients:
            raise ParameterError("A polynomial needs at least one coefficient")
        object.__setattr__(self, "coefficients", tuple(self.ring.element(c) for c in self.coefficients))

    @property
    def degree(self) -> int:
        """Structural degree; trailing zero coefficients count."""
        return len(self.coefficients) - 1

    def __call__(self, x: int) -> int:
        return eval_plain(self, x)


@dataclass(frozen=True)
class EncryptedPolynomial:
    coefficients: Tuple[Ciphertext, ...]

    def __post_init__(self) -> None:
        if not self.coefficients:
            raise ParameterError("An encrypted polynomial needs at least one coefficient")
        if len({c.key_id for c in self.coefficients}) != 1:
            raise ParameterError("Encrypted coefficients are under different keys")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def to_bytes(self) -> bytes:
        """2-byte big-endian coefficient count followed by the ciphertexts."""
        if len(self.coefficients) > 0xFFFF:
            raise ParameterError(f"Cannot serialize {len(self.coefficients)} coefficients")
        return struct.pack(">H", len(self.coefficients)) + b"".join(c.to_bytes() for c in self.coefficients)

    @classmethod
    def from_bytes(cls, pk: PublicKey, data: bytes) -> "EncryptedPolynomial":
        if len(data) < 2:
            raise DecodeError("Truncated encrypted polynomial")
        (count,) = struct.unpack(">H", data[:2])
        offset = 2
        coefficients = []
        for _ in range(count):
            start = offset
            _, offset = unpack_int(data, offset)
            coefficients.append(pk.ciphertext_from_bytes(data[start:offset]))
        if offset != len(data):
            raise DecodeError(f"{len(data) - offset} trailing bytes after encrypted polynomial")
        return cls(tuple(coefficients))


def eval_plain(p: Polynomial, x: int) -> int:
    """Horner evaluation modulo the ring order."""
    ring = p.ring
    acc = 0
    for c in reversed(p.coefficients):
        acc = (acc * x + c) % ring.order
    return acc


def _mul_linear(coefficients: List[int], root: int, ring: Ring) -> List[int]:
    """Multiply a polynomial by (x - root)."""
    out = [0] * (len(coefficients) + 1)
    for i, c in enumerate(coefficients):
        out[i + 1] = (out[i + 1] + c) % ring.order
        out[i] = (out[i] - root * c) % ring.order
    return out


def _div_linear(coefficients: Sequence[int], root: int, ring: Ring) -> List[int]:
    """Exact synthetic division by (x - root)."""
    n = len(coefficients) - 1
    out = [0] * n
    carry = 0
    for i in range(n, 0, -1):
        carry = (coefficients[i] + carry * root) % ring.order
        out[i - 1] = carry
    return out


def roots_poly(roots: Sequence[int], ring: Ring) -> Polynomial:
    """Monic polynomial vanishing on the multiset of roots."""
    if not roots:
        raise ParameterError("roots_poly needs at least one root")
    coefficients = [1]
    for root in roots:
        coefficients = _mul_linear(coefficients, ring.element(root), ring)
    return Polynomial(tuple(coefficients), ring)


def _distinct_points(points: Iterable[Point], ring: Ring) -> List[Point]:
    seen: Dict[int, int] = {}
    for x, y in points:
        x, y = ring.element(x), ring.element(y)
        if x in seen:
            if seen[x] != y:
                raise UndefinedInterpolationError(
                    f"Conflicting values {seen[x]} and {y} at x={x}: interpolation is undefined"
                )
            continue
        seen[x] = y
    return list(seen.items())


def interpolate(points: Iterable[Point], ring: Ring) -> Polynomial:
    """
    Lagrange interpolation through the given points.

    Repeated points with equal values collapse; repeated x with different
    values raise UndefinedInterpolationError.

    Args:
        points: (x, y) pairs
        ring: Plaintext ring

    Returns:
        The unique polynomial of degree <= len(points) - 1 through the points
    """
    pts = _distinct_points(points, ring)
    if not pts:
        raise ParameterError("interpolate needs at least one point")
    master = [1]
    for x, _ in pts:
        master = _mul_linear(master, x, ring)
    result = [0] * len(pts)
    for i, (xi, yi) in enumerate(pts):
        denominator = 1
        for j, (xj, _) in enumerate(pts):
            if i != j:
                denominator = (denominator * (xi - xj)) % ring.order
        scale = ring.mul(yi, ring.inv(denominator))
        basis = _div_linear(master, xi, ring)
        for h, b in enumerate(basis):
            result[h] = (result[h] + scale * b) % ring.order
    return Polynomial(tuple(result), ring)


def lagrange_at(points: Sequence[Point], x: int, ring: Ring) -> int:
    """Value at x of the polynomial through `points`, without building coefficients."""
    pts = _distinct_points(points, ring)
    if len(pts) != len(points):
        raise ParameterError("Duplicate x-coordinates in Lagrange evaluation")
    total = 0
    for i, (xi, yi) in enumerate(pts):
        numerator = 1
        denominator = 1
        for j, (xj, _) in enumerate(pts):
            if i != j:
                numerator = (numerator * (x - xj)) % ring.order
                denominator = (denominator * (xi - xj)) % ring.order
        total = (total + yi * numerator * ring.inv(denominator)) % ring.order
    return total


def enc_poly(pk: PublicKey, p: Polynomial, rng: SessionRng) -> EncryptedPolynomial:
    if p.ring != pk.ring:
        raise ParameterError("Polynomial ring does not match the public key ring")
    return EncryptedPolynomial(tuple(pk.encrypt(c, rng) for c in p.coefficients))


def eval_encrypted(pk: PublicKey, ep: EncryptedPolynomial, x: int) -> Ciphertext:
    """Encryption of p(x) as the sum of E(alpha_i) * x^i."""
    ring = pk.ring
    x = ring.element(x)
    acc = pk.scalar_mul(ep.coefficients[0], 1)
    power = 1
    for c in ep.coefficients[1:]:
        power = ring.mul(power, x)
        acc = pk.add(acc, pk.scalar_mul(c, power))
    return acc
