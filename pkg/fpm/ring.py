"""Plaintext ring Z_N shared by the homomorphic backends, sharing and polynomials"""

from dataclasses import dataclass

import gmpy2

from fpm.errors import ParameterError, RingError
from fpm.rng import SessionRng


@dataclass(frozen=True)
class Ring:
    """
    The ring Z_order. Elements are plain ints in [0, order).

    The mock backend uses a prime order (a field); Paillier uses N = p*q, where
    inversion fails only for multiples of p or q.
    """

    order: int

    def __post_init__(self) -> None:
        if self.order < 2:
            raise ParameterError(f"Ring order must be at least 2, got {self.order}")

    @property
    def bits(self) -> int:
        return self.order.bit_length()

    def element(self, value: int) -> int:
        return value % self.order

    def contains(self, value: int) -> bool:
        return 0 <= value < self.order

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.order

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.order

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.order

    def neg(self, a: int) -> int:
        return (-a) % self.order

    def pow(self, a: int, e: int) -> int:
        return int(gmpy2.powmod(a, e, self.order))

    def inv(self, a: int) -> int:
        try:
            return int(gmpy2.invert(a % self.order, self.order))
        except ZeroDivisionError as e:
            raise RingError(f"{a} has no inverse modulo the ring order") from e

    def random(self, rng: SessionRng) -> int:
        return rng.randbelow(self.order)

    def random_nonzero(self, rng: SessionRng) -> int:
        return 1 + rng.randbelow(self.order - 1)
