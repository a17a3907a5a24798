"""
Per-session random generator.

Seeded generators expand SHA-256(seed | label) through an AES-CTR keystream so
that a session replays bit-identically; unseeded generators take their key
from the operating system. Each party of each session owns its own instance.
"""

import hashlib
import os
from typing import List, MutableSequence, Optional, Sequence, TypeVar, Union

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from fpm.errors import ParameterError

Seed = Union[int, str, bytes]
T = TypeVar("T")


def _seed_bytes(seed: Seed) -> bytes:
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, int):
        return seed.to_bytes(max(1, (seed.bit_length() + 8) // 8), "big", signed=True)
    return seed.encode("utf-8")


class SessionRng:
    """Deterministic (seeded) or OS-keyed CSPRNG."""

    def __init__(self, seed: Optional[Seed] = None, label: str = ""):
        self.seed = seed
        self.label = label
        if seed is None:
            key = os.urandom(32)
        else:
            key = hashlib.sha256(_seed_bytes(seed) + b"|" + label.encode("utf-8")).digest()
        self._stream = Cipher(algorithms.AES(key), modes.CTR(b"\x00" * 16)).encryptor()

    @property
    def seeded(self) -> bool:
        return self.seed is not None

    def fork(self, label: str) -> "SessionRng":
        """Independent child generator, reproducible when this one is seeded."""
        if self.seed is None:
            return SessionRng(None, label)
        return SessionRng(self.seed, f"{self.label}/{label}")

    def token_bytes(self, n: int) -> bytes:
        if n < 0:
            raise ParameterError(f"Cannot draw {n} bytes")
        return self._stream.update(b"\x00" * n)

    def randbits(self, k: int) -> int:
        if k <= 0:
            return 0
        nbytes = (k + 7) // 8
        value = int.from_bytes(self.token_bytes(nbytes), "big")
        return value >> (nbytes * 8 - k)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ParameterError(f"randbelow needs a positive bound, got {n}")
        k = n.bit_length()
        while True:
            value = self.randbits(k)
            if value < n:
                return value

    def randrange(self, start: int, stop: int) -> int:
        if stop <= start:
            raise ParameterError(f"Empty range [{start}, {stop})")
        return start + self.randbelow(stop - start)

    def randbit(self) -> int:
        return self.randbits(1)

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise ParameterError("Cannot choose from an empty sequence")
        return seq[self.randbelow(len(seq))]

    def shuffle(self, seq: MutableSequence[T]) -> None:
        # Fisher-Yates
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def sample(self, population: Sequence[T], k: int) -> List[T]:
        if k > len(population):
            raise ParameterError(f"Sample of {k} from {len(population)} items")
        pool = list(population)
        self.shuffle(pool)
        return pool[:k]
