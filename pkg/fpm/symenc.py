"""
Symmetric sealing of server words under per-word keys.

AES-128-CTR with a fresh 16-byte nonce; the AES key is derived from the k-bit
word key with HKDF-SHA256. The plaintext is the payload as a fixed-width
big-endian integer, optionally widened by a zero prefix of `prefix_bits`.
A wrong key yields a uniformly random integer of the sealed width, which
fails the payload-width check with probability 1 - 2^-prefix_bits.
"""

from dataclasses import dataclass
from typing import Optional

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from fpm.core import PayloadEncoding, prefix_valid
from fpm.errors import DecodeError, ParameterError
from fpm.rng import SessionRng
from fpm.wire import pack_bytes, unpack_bytes

NONCE_BYTES = 16
AES_KEY_BYTES = 16
HKDF_INFO = b"fpm word sealing"


def _key_bytes(bits: int) -> int:
    return (bits + 7) // 8


@dataclass(frozen=True)
class SymKey:
    key: bytes
    bits: int

    def __post_init__(self) -> None:
        if self.bits <= 0 or len(self.key) != _key_bytes(self.bits):
            raise ParameterError(f"A {self.bits}-bit key needs {_key_bytes(self.bits)} bytes, got {len(self.key)}")
        if int.from_bytes(self.key, "big") >> self.bits:
            raise ParameterError(f"Key has bits set above bit {self.bits}")

    def to_ring_value(self) -> int:
        return int.from_bytes(self.key, "big")

    @classmethod
    def from_ring_value(cls, value: int, bits: int) -> "SymKey":
        if not prefix_valid(value, bits):
            raise ParameterError(f"Ring value does not fit a {bits}-bit key")
        return cls(value.to_bytes(_key_bytes(bits), "big"), bits)

    def aes_key(self) -> bytes:
        return HKDF(algorithm=hashes.SHA256(), length=AES_KEY_BYTES, salt=None, info=HKDF_INFO).derive(self.key)


@dataclass(frozen=True)
class SealedWord:
    nonce: bytes
    ciphertext: bytes

    def to_bytes(self) -> bytes:
        """1-byte nonce length + nonce + 4-byte big-endian ciphertext length + ciphertext."""
        return bytes([len(self.nonce)]) + self.nonce + pack_bytes(self.ciphertext)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SealedWord":
        if not data:
            raise DecodeError("Empty sealed word")
        nonce_len = data[0]
        if len(data) < 1 + nonce_len:
            raise DecodeError("Truncated sealed word nonce")
        nonce = bytes(data[1:1 + nonce_len])
        ciphertext, end = unpack_bytes(data, 1 + nonce_len)
        if end != len(data):
            raise DecodeError(f"{len(data) - end} trailing bytes after sealed word")
        return cls(nonce, ciphertext)


def sym_keygen(k: int, rng: SessionRng) -> SymKey:
    return SymKey(rng.randbits(k).to_bytes(_key_bytes(k), "big"), k)


def _apply(key: SymKey, nonce: bytes, data: bytes) -> bytes:
    if len(nonce) != NONCE_BYTES:
        raise DecodeError(f"Nonce must be {NONCE_BYTES} bytes, got {len(nonce)}")
    cipher = Cipher(algorithms.AES(key.aes_key()), modes.CTR(nonce)).encryptor()
    return cipher.update(data) + cipher.finalize()


def sealed_length(width: int, prefix_bits: int = 0) -> int:
    return _key_bytes(width + prefix_bits)


def sym_enc(key: SymKey, payload: PayloadEncoding, rng: SessionRng, prefix_bits: int = 0) -> SealedWord:
    """Seal `payload`, written on width + prefix_bits bits, under `key`."""
    if payload.width <= 0:
        raise ParameterError("Cannot seal an empty payload")
    nonce = rng.token_bytes(NONCE_BYTES)
    plaintext = payload.value.to_bytes(sealed_length(payload.width, prefix_bits), "big")
    return SealedWord(nonce, _apply(key, nonce, plaintext))


def sym_dec(key: SymKey, sealed: SealedWord, width: int, prefix_bits: int = 0) -> Optional[PayloadEncoding]:
    """Open a sealed word; None ("garbage") when the result is not a `width`-bit payload."""
    if width <= 0:
        raise ParameterError("Cannot open an empty payload")
    if len(sealed.ciphertext) != sealed_length(width, prefix_bits):
        raise DecodeError(
            f"Sealed word has {len(sealed.ciphertext)} bytes, expected {sealed_length(width, prefix_bits)}"
        )
    value = int.from_bytes(_apply(key, sealed.nonce, sealed.ciphertext), "big")
    if not prefix_valid(value, width):
        return None
    return PayloadEncoding(value, width)
