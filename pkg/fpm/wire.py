"""
Wire vocabulary: big-endian integer packing, message types and typed payloads.

Every frame payload is a sequence of items, each introduced by a one-byte kind.
Because the kinds are visible in the bytes, both endpoints account ciphertexts,
clear ring values and sealed words from the payload alone.

Item bodies:
    CIPHERTEXT  4-byte length + magnitude
    CLEAR       4-byte length + magnitude (a ring element sent in the clear)
    SHARE       2-byte index + 4-byte length + magnitude (counts as clear)
    SEALED      1-byte nonce length + nonce + 4-byte length + bytes
    POLY        2-byte coefficient count + that many ciphertext bodies
    BLOB        4-byte length + bytes (keys, metadata)
    INT         4-byte length + magnitude (metadata)
"""

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Tuple

from fpm.errors import DecodeError, ParameterError


class MsgType(IntEnum):
    HELLO = 0x01
    HELLO_ACK = 0x02
    PUBLIC_KEY = 0x03

    ORIG_POLYS = 0x10
    ORIG_RESPONSES = 0x11

    POLY_COMBINATION = 0x20
    POLY_EVALUATIONS = 0x21

    SS_LETTERS = 0x30
    SS_MATCH = 0x31

    ISS_SEALED = 0x40
    ISS_FREE_SHARES = 0x41
    ISS_POLYS = 0x42
    ISS_BLINDED = 0x43
    ISS_TICKETS = 0x44
    ISS_REVEALED = 0x45

    HAM_UNARY = 0x50
    HAM_BIT = 0x51
    HAM_RESULTS = 0x52

    OT_SETUP = 0x60
    OT_REQ = 0x61
    OT_RESP = 0x62


OT_MESSAGE_TYPES = frozenset({MsgType.OT_SETUP, MsgType.OT_REQ, MsgType.OT_RESP})


class ItemKind(IntEnum):
    CIPHERTEXT = 0x01
    CLEAR = 0x02
    SHARE = 0x03
    SEALED = 0x04
    POLY = 0x05
    BLOB = 0x06
    INT = 0x07


def pack_int(value: int) -> bytes:
    """4-byte big-endian length followed by the big-endian magnitude."""
    if value < 0:
        raise ParameterError(f"Cannot pack negative integer {value}")
    body = value.to_bytes((value.bit_length() + 7) // 8, "big")
    return struct.pack(">I", len(body)) + body


def unpack_int(buf: bytes, offset: int = 0) -> Tuple[int, int]:
    """Read one packed integer; returns (value, next offset)."""
    body = _take(buf, offset, 4)
    (length,) = struct.unpack(">I", body)
    offset += 4
    return int.from_bytes(_take(buf, offset, length), "big"), offset + length


def pack_bytes(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def unpack_bytes(buf: bytes, offset: int = 0) -> Tuple[bytes, int]:
    (length,) = struct.unpack(">I", _take(buf, offset, 4))
    offset += 4
    return _take(buf, offset, length), offset + length


def _take(buf: bytes, offset: int, n: int) -> bytes:
    if offset + n > len(buf):
        raise DecodeError(f"Truncated data: need {n} bytes at offset {offset}, have {len(buf) - offset}")
    return bytes(buf[offset:offset + n])


@dataclass
class ItemTally:
    ciphertexts: int = 0
    clear_values: int = 0
    sealed_words: int = 0


def _skip_item(kind: int, buf: bytes, offset: int) -> Tuple[int, ItemTally]:
    tally = ItemTally()
    if kind in (ItemKind.CIPHERTEXT, ItemKind.CLEAR, ItemKind.INT):
        _, offset = unpack_int(buf, offset)
        if kind == ItemKind.CIPHERTEXT:
            tally.ciphertexts = 1
        elif kind == ItemKind.CLEAR:
            tally.clear_values = 1
    elif kind == ItemKind.SHARE:
        _take(buf, offset, 2)
        _, offset = unpack_int(buf, offset + 2)
        tally.clear_values = 1
    elif kind == ItemKind.SEALED:
        nonce_len = _take(buf, offset, 1)[0]
        _take(buf, offset + 1, nonce_len)
        _, offset = unpack_bytes(buf, offset + 1 + nonce_len)
        tally.sealed_words = 1
    elif kind == ItemKind.POLY:
        (count,) = struct.unpack(">H", _take(buf, offset, 2))
        offset += 2
        for _ in range(count):
            _, offset = unpack_int(buf, offset)
        tally.ciphertexts = count
    elif kind == ItemKind.BLOB:
        _, offset = unpack_bytes(buf, offset)
    else:
        raise DecodeError(f"Unknown item kind 0x{kind:02x}")
    return offset, tally


def tally_payload(payload: bytes) -> ItemTally:
    """Count ciphertexts, clear values and sealed words in a payload."""
    total = ItemTally()
    offset = 0
    while offset < len(payload):
        kind = payload[offset]
        offset, tally = _skip_item(kind, payload, offset + 1)
        total.ciphertexts += tally.ciphertexts
        total.clear_values += tally.clear_values
        total.sealed_words += tally.sealed_words
    return total


class PayloadWriter:
    """Builds a typed payload item by item."""

    def __init__(self) -> None:
        self._parts: List[bytes] = []

    def _add(self, kind: ItemKind, body: bytes) -> "PayloadWriter":
        self._parts.append(bytes([kind]) + body)
        return self

    def ciphertext(self, body: bytes) -> "PayloadWriter":
        return self._add(ItemKind.CIPHERTEXT, body)

    def clear(self, value: int) -> "PayloadWriter":
        return self._add(ItemKind.CLEAR, pack_int(value))

    def share(self, body: bytes) -> "PayloadWriter":
        return self._add(ItemKind.SHARE, body)

    def sealed(self, body: bytes) -> "PayloadWriter":
        return self._add(ItemKind.SEALED, body)

    def poly(self, body: bytes) -> "PayloadWriter":
        return self._add(ItemKind.POLY, body)

    def blob(self, data: bytes) -> "PayloadWriter":
        return self._add(ItemKind.BLOB, pack_bytes(data))

    def integer(self, value: int) -> "PayloadWriter":
        return self._add(ItemKind.INT, pack_int(value))

    def to_bytes(self) -> bytes:
        return b"".join(self._parts)


class PayloadReader:
    """Reads a typed payload; every accessor checks the item kind."""

    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def _expect(self, kind: ItemKind) -> None:
        if self.offset >= len(self.payload):
            raise DecodeError(f"Payload exhausted while expecting {kind.name}")
        found = self.payload[self.offset]
        if found != kind:
            raise DecodeError(f"Expected item {kind.name}, found kind 0x{found:02x}")
        self.offset += 1

    def _raw(self, kind: ItemKind) -> bytes:
        self._expect(kind)
        start = self.offset
        self.offset, _ = _skip_item(kind, self.payload, start)
        return self.payload[start:self.offset]

    def ciphertext(self) -> bytes:
        return self._raw(ItemKind.CIPHERTEXT)

    def clear(self) -> int:
        self._expect(ItemKind.CLEAR)
        value, self.offset = unpack_int(self.payload, self.offset)
        return value

    def share(self) -> bytes:
        return self._raw(ItemKind.SHARE)

    def sealed(self) -> bytes:
        return self._raw(ItemKind.SEALED)

    def poly(self) -> bytes:
        return self._raw(ItemKind.POLY)

    def blob(self) -> bytes:
        self._expect(ItemKind.BLOB)
        data, self.offset = unpack_bytes(self.payload, self.offset)
        return data

    def integer(self) -> int:
        self._expect(ItemKind.INT)
        value, self.offset = unpack_int(self.payload, self.offset)
        return value

    @property
    def exhausted(self) -> bool:
        return self.offset >= len(self.payload)

    def finish(self) -> None:
        if not self.exhausted:
            raise DecodeError(f"{len(self.payload) - self.offset} trailing bytes in payload")
