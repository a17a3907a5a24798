"""
Additively homomorphic public-key encryption behind a backend-neutral contract.

Two backends are provided:

- ``paillier``: python-paillier raw encryption; plaintext ring Z_N. Key
  generation is delegated to phe and draws from the operating system, so it is
  not reproducible from a session seed; encryption randomness is.
- ``mock``: a linear two-component scheme over a prime field Z_q. A ciphertext
  of m is (rho, a*m + s*rho) for secret (a, s); the public key is one
  encryption of 1 and one of 0, and encryption is m*E(1) + u*E(0) for random u.
  It is randomised and homomorphic but trivially breakable. Test use only.

Ciphertexts travel as a 4-byte big-endian length followed by the magnitude.
Public keys travel as a backend tag byte followed by length-prefixed integers.
"""

import hashlib
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Tuple

import gmpy2
from phe import paillier

from fpm.core import FuzzyParams
from fpm.errors import DecodeError, ParameterError, UsageError
from fpm.ring import Ring
from fpm.rng import SessionRng
from fpm.wire import pack_int, unpack_int

logger = logging.getLogger("homcrypt")

MOCK_TAG = 0x4D
PAILLIER_TAG = 0x50

MOCK_DEFAULT_PRIME = (1 << 127) - 1
DEFAULT_PAILLIER_BITS = 2048
TEST_PAILLIER_BITS = 1024


@dataclass(frozen=True)
class Ciphertext:
    """Opaque ciphertext bound to the fingerprint of the key that produced it."""

    value: int
    key_id: bytes

    def to_bytes(self) -> bytes:
        return pack_int(self.value)


def _fingerprint(body: bytes) -> bytes:
    return hashlib.sha256(body).digest()[:8]


class PublicKey(ABC):
    """Encryption key plus the plaintext ring descriptor."""

    backend: str
    tag: int

    def __init__(self, ring: Ring, ciphertext_modulus: int):
        self.ring = ring
        self.ciphertext_modulus = ciphertext_modulus
        self.key_id = _fingerprint(self.body())

    @abstractmethod
    def body(self) -> bytes:
        """Serialized parameters without the backend tag."""

    @abstractmethod
    def _encrypt(self, m: int, rng: SessionRng) -> int:
        ...

    @abstractmethod
    def _encrypt_constant(self, m: int) -> int:
        ...

    @abstractmethod
    def _add(self, a: int, b: int) -> int:
        ...

    @abstractmethod
    def _neg(self, a: int) -> int:
        ...

    @abstractmethod
    def _scalar_mul(self, a: int, s: int) -> int:
        ...

    def to_bytes(self) -> bytes:
        return bytes([self.tag]) + self.body()

    def _wrap(self, value: int) -> Ciphertext:
        return Ciphertext(value, self.key_id)

    def _own(self, c: Ciphertext) -> int:
        if c.key_id != self.key_id:
            raise UsageError("Ciphertext was produced under a different public key")
        return c.value

    def _plain(self, m: int) -> int:
        if not self.ring.contains(m):
            raise ParameterError(f"Plaintext {m} is outside the ring Z_{self.ring.order}")
        return m

    def encrypt(self, m: int, rng: SessionRng) -> Ciphertext:
        return self._wrap(self._encrypt(self._plain(m), rng))

    def encrypt_constant(self, m: int) -> Ciphertext:
        """Deterministic encryption of a public constant."""
        return self._wrap(self._encrypt_constant(self._plain(m)))

    def add(self, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
        return self._wrap(self._add(self._own(c1), self._own(c2)))

    def sub(self, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
        return self._wrap(self._add(self._own(c1), self._neg(self._own(c2))))

    def scalar_mul(self, c: Ciphertext, s: int) -> Ciphertext:
        return self._wrap(self._scalar_mul(self._own(c), self.ring.element(s)))

    def rerandomize(self, c: Ciphertext, rng: SessionRng) -> Ciphertext:
        return self.add(c, self.encrypt(0, rng))

    def ciphertext_from_bytes(self, data: bytes) -> Ciphertext:
        """Parse a packed ciphertext and check it lies in this key's ciphertext space."""
        value, end = unpack_int(data)
        if end != len(data):
            raise DecodeError(f"{len(data) - end} trailing bytes after ciphertext")
        if not 0 <= value < self.ciphertext_modulus:
            raise DecodeError("Ciphertext outside the ciphertext space")
        return self._wrap(value)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PublicKey) and other.to_bytes() == self.to_bytes()

    def __hash__(self) -> int:
        return hash(self.key_id)


class PrivateKey(ABC):
    def __init__(self, public_key: PublicKey):
        self.public_key = public_key

    @abstractmethod
    def _decrypt(self, value: int) -> int:
        ...

    def decrypt(self, c: Ciphertext) -> int:
        return self._decrypt(self.public_key._own(c))


@dataclass(frozen=True)
class HomKeyPair:
    public: PublicKey
    private: PrivateKey

    @property
    def backend(self) -> str:
        return self.public.backend

    @property
    def ring(self) -> Ring:
        return self.public.ring


class HomomorphicBackend(ABC):
    name: str
    tag: int

    def keygen(self, params: FuzzyParams, strength: int, rng: SessionRng) -> HomKeyPair:
        """
        Create a key pair whose ring can carry a prefixed payload for `params`.

        Args:
            params: Session parameters fixing the required ring capacity
            strength: Modulus bits (ignored by the mock backend)
            rng: Session random generator

        Returns:
            A fresh key pair
        """
        return self.keygen_bits(params.ring_bits_required, strength, rng)

    @abstractmethod
    def keygen_bits(self, required_bits: int, strength: int, rng: SessionRng) -> HomKeyPair:
        """Key pair whose plaintext ring has order >= 2^required_bits."""

    @abstractmethod
    def load_public(self, body: bytes) -> PublicKey:
        ...


# ---------------------------------------------------------------------------
# mock backend


@lru_cache(maxsize=None)
def mock_prime(required_bits: int) -> int:
    """Smallest prime field with order >= 2^required_bits; the 127-bit Mersenne prime when it fits."""
    if required_bits <= MOCK_DEFAULT_PRIME.bit_length() - 1:
        return MOCK_DEFAULT_PRIME
    return int(gmpy2.next_prime(1 << required_bits))


def _split_pair(value: int, q: int) -> Tuple[int, int]:
    return divmod(value, q)


class MockPublicKey(PublicKey):
    backend = "mock"
    tag = MOCK_TAG

    def __init__(self, q: int, enc_one: int, enc_zero: int):
        self.q = q
        self.enc_one = enc_one
        self.enc_zero = enc_zero
        super().__init__(Ring(q), q * q)

    def body(self) -> bytes:
        return pack_int(self.q) + pack_int(self.enc_one) + pack_int(self.enc_zero)

    def _combine(self, a: int, x: int, b: int, y: int) -> int:
        """a*X + b*Y componentwise for packed pairs X, Y."""
        q = self.q
        r1, v1 = _split_pair(x, q)
        r2, v2 = _split_pair(y, q)
        return ((a * r1 + b * r2) % q) * q + (a * v1 + b * v2) % q

    def _encrypt(self, m: int, rng: SessionRng) -> int:
        u = 1 + rng.randbelow(self.q - 1)
        return self._combine(m, self.enc_one, u, self.enc_zero)

    def _encrypt_constant(self, m: int) -> int:
        return self._combine(m, self.enc_one, 0, self.enc_zero)

    def _add(self, a: int, b: int) -> int:
        return self._combine(1, a, 1, b)

    def _neg(self, a: int) -> int:
        return self._combine(self.q - 1, a, 0, 0)

    def _scalar_mul(self, a: int, s: int) -> int:
        return self._combine(s, a, 0, 0)


class MockPrivateKey(PrivateKey):
    public_key: MockPublicKey

    def __init__(self, public_key: MockPublicKey, a: int, s: int):
        super().__init__(public_key)
        self.a = a
        self.s = s
        self._a_inv = public_key.ring.inv(a)

    def _decrypt(self, value: int) -> int:
        ring = self.public_key.ring
        rho, v = _split_pair(value, self.public_key.q)
        return ring.mul(ring.sub(v, ring.mul(self.s, rho)), self._a_inv)


class MockBackend(HomomorphicBackend):
    name = "mock"
    tag = MOCK_TAG

    def keygen_bits(self, required_bits: int, strength: int, rng: SessionRng) -> HomKeyPair:
        q = mock_prime(required_bits)
        ring = Ring(q)
        a = ring.random_nonzero(rng)
        s = ring.random_nonzero(rng)
        rho_one = ring.random_nonzero(rng)
        rho_zero = ring.random_nonzero(rng)
        enc_one = rho_one * q + ring.add(a, ring.mul(s, rho_one))
        enc_zero = rho_zero * q + ring.mul(s, rho_zero)
        public = MockPublicKey(q, enc_one, enc_zero)
        logger.debug(f"Mock key pair over a {ring.bits}-bit prime field")
        return HomKeyPair(public, MockPrivateKey(public, a, s))

    def load_public(self, body: bytes) -> PublicKey:
        q, offset = unpack_int(body)
        enc_one, offset = unpack_int(body, offset)
        enc_zero, offset = unpack_int(body, offset)
        if offset != len(body) or q < 3:
            raise DecodeError("Malformed mock public key")
        return MockPublicKey(q, enc_one, enc_zero)


# ---------------------------------------------------------------------------
# Paillier backend


class PaillierPublicKey(PublicKey):
    backend = "paillier"
    tag = PAILLIER_TAG

    def __init__(self, inner: paillier.PaillierPublicKey):
        self.inner = inner
        self.n = int(inner.n)
        self.nsquare = self.n * self.n
        super().__init__(Ring(self.n), self.nsquare)

    def body(self) -> bytes:
        return pack_int(self.n)

    def _encrypt(self, m: int, rng: SessionRng) -> int:
        r = 1 + rng.randbelow(self.n - 1)
        return int(self.inner.raw_encrypt(int(m), r_value=r))

    def _encrypt_constant(self, m: int) -> int:
        return int(self.inner.raw_encrypt(int(m), r_value=1))

    def _add(self, a: int, b: int) -> int:
        return (a * b) % self.nsquare

    def _neg(self, a: int) -> int:
        try:
            return int(gmpy2.invert(a, self.nsquare))
        except ZeroDivisionError as e:
            raise DecodeError("Ciphertext is not invertible modulo N^2") from e

    def _scalar_mul(self, a: int, s: int) -> int:
        return int(gmpy2.powmod(a, s, self.nsquare))


class PaillierPrivateKey(PrivateKey):
    def __init__(self, public_key: PaillierPublicKey, inner: paillier.PaillierPrivateKey):
        super().__init__(public_key)
        self.inner = inner

    def _decrypt(self, value: int) -> int:
        return int(self.inner.raw_decrypt(int(value)))


class PaillierBackend(HomomorphicBackend):
    name = "paillier"
    tag = PAILLIER_TAG

    def keygen_bits(self, required_bits: int, strength: int, rng: SessionRng) -> HomKeyPair:
        # phe guarantees an N of exactly `strength` bits, hence N >= 2^(strength-1)
        if strength - 1 < required_bits:
            raise ParameterError(
                f"Paillier modulus of {strength} bits cannot hold {required_bits}-bit prefixed payloads"
            )
        logger.info(f"Generating {strength}-bit Paillier key pair")
        inner_pub, inner_priv = paillier.generate_paillier_keypair(n_length=strength)
        public = PaillierPublicKey(inner_pub)
        return HomKeyPair(public, PaillierPrivateKey(public, inner_priv))

    def load_public(self, body: bytes) -> PublicKey:
        n, offset = unpack_int(body)
        if offset != len(body) or n < 3:
            raise DecodeError("Malformed Paillier public key")
        return PaillierPublicKey(paillier.PaillierPublicKey(n))


BACKENDS: Dict[str, HomomorphicBackend] = {
    MockBackend.name: MockBackend(),
    PaillierBackend.name: PaillierBackend(),
}


def get_backend(name: str) -> HomomorphicBackend:
    try:
        return BACKENDS[name]
    except KeyError:
        raise ParameterError(f"Unknown backend '{name}', expected one of {sorted(BACKENDS)}") from None


def public_key_to_bytes(pk: PublicKey) -> bytes:
    return pk.to_bytes()


def public_key_from_bytes(data: bytes) -> PublicKey:
    if not data:
        raise DecodeError("Empty public key")
    for backend in BACKENDS.values():
        if backend.tag == data[0]:
            return backend.load_public(data[1:])
    raise DecodeError(f"Unknown public key tag 0x{data[0]:02x}")


# ---------------------------------------------------------------------------
# backend-neutral operations


def keygen(
    params: FuzzyParams, strength: int = DEFAULT_PAILLIER_BITS, backend: str = "mock", rng: SessionRng | None = None
) -> HomKeyPair:
    return get_backend(backend).keygen(params, strength, rng or SessionRng())


def enc(pk: PublicKey, m: int, rng: SessionRng) -> Ciphertext:
    return pk.encrypt(m, rng)


def dec(sk: PrivateKey, c: Ciphertext) -> int:
    return sk.decrypt(c)


def add_h(pk: PublicKey, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    return pk.add(c1, c2)


def sub_h(pk: PublicKey, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    return pk.sub(c1, c2)


def scalar_mul_h(pk: PublicKey, c: Ciphertext, s: int) -> Ciphertext:
    return pk.scalar_mul(c, s)


def encrypt_constant(pk: PublicKey, m: int) -> Ciphertext:
    return pk.encrypt_constant(m)


def rand_ring(ring: Ring, rng: SessionRng) -> int:
    """Uniform element of the full plaintext ring."""
    return ring.random(rng)
