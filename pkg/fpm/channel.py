"""
Framed, transcript-recording duplex channel between the two parties.

This module provides:
- The frame format: 4-byte big-endian length, protocol id byte, message type byte, payload
- An in-process transport over asyncio queues for tests and single-process runs
- A TCP transport over asyncio streams with connect retries and a magic handshake
- Per-endpoint accounting of bytes, ciphertexts, clear ring values and rounds

Each endpoint accounts both what it sends and what it receives, so on either
side the statistics describe the whole session.
"""

import asyncio
import logging
import struct
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, computed_field

from fpm.errors import DecodeError, ProtocolError, TransportError
from fpm.wire import OT_MESSAGE_TYPES, MsgType, PayloadReader, tally_payload

logger = logging.getLogger("channel")

FRAME_HEADER = struct.Struct(">IBB")
LENGTH_PREFIX = struct.Struct(">I")
DEFAULT_MAX_FRAME_SIZE = 16 * 1024 * 1024

HANDSHAKE_REQUEST = b"FPM_HANDSHAKE_REQUEST"
HANDSHAKE_RESPONSE = b"FPM_HANDSHAKE_RESPONSE"
HANDSHAKE_TIMEOUT = 5.0
RECONNECT_DELAY = 0.5  # seconds


class Direction(str, Enum):
    C2S = "c2s"
    S2C = "s2c"


class Role(str, Enum):
    CLIENT = "client"
    SERVER = "server"

    @property
    def outgoing(self) -> Direction:
        return Direction.C2S if self is Role.CLIENT else Direction.S2C

    @property
    def incoming(self) -> Direction:
        return Direction.S2C if self is Role.CLIENT else Direction.C2S


@dataclass(frozen=True)
class Frame:
    protocol_id: int
    msg_type: int
    payload: bytes

    def to_bytes(self) -> bytes:
        return FRAME_HEADER.pack(2 + len(self.payload), self.protocol_id, self.msg_type) + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "Frame":
        if len(data) < FRAME_HEADER.size:
            raise DecodeError(f"Frame of {len(data)} bytes is shorter than its header")
        length, protocol_id, msg_type = FRAME_HEADER.unpack_from(data)
        if length != len(data) - LENGTH_PREFIX.size:
            raise DecodeError(f"Frame length field {length} does not match {len(data) - LENGTH_PREFIX.size} bytes")
        return cls(protocol_id, msg_type, bytes(data[FRAME_HEADER.size:]))

    @property
    def type_name(self) -> str:
        try:
            return MsgType(self.msg_type).name
        except ValueError:
            return f"0x{self.msg_type:02x}"


class ChannelStats(BaseModel):
    """Session counters; every field only ever grows."""

    bytes_c2s: int = 0
    bytes_s2c: int = 0
    ciphertexts_c2s: int = 0
    ciphertexts_s2c: int = 0
    clear_values_c2s: int = 0
    clear_values_s2c: int = 0
    sealed_words: int = 0
    rounds: int = 0
    ot_invocations: int = 0
    ot_ciphertexts: int = 0
    frames: int = 0

    @computed_field  # type: ignore[misc]
    @property
    def clear_ring_values(self) -> int:
        return self.clear_values_c2s + self.clear_values_s2c

    @property
    def ciphertexts_total(self) -> int:
        return self.ciphertexts_c2s + self.ciphertexts_s2c


class Transcript:
    """Ordered record of every frame seen by one endpoint."""

    def __init__(self) -> None:
        self.entries: List[Tuple[Direction, bytes]] = []

    def append(self, direction: Direction, frame: bytes) -> None:
        self.entries.append((direction, frame))

    def frames(self, direction: Optional[Direction] = None) -> List[Frame]:
        return [Frame.from_bytes(raw) for d, raw in self.entries if direction is None or d == direction]

    def byte_count(self, direction: Direction) -> int:
        return sum(len(raw) for d, raw in self.entries if d == direction)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Transcript) and other.entries == self.entries


class Channel(ABC):
    """
    One endpoint of a session channel.

    Subclasses move whole frames; this base class validates sizes, checks the
    protocol id and keeps the transcript and statistics.
    """

    def __init__(self, role: Role, max_frame_size: int = DEFAULT_MAX_FRAME_SIZE):
        self.role = role
        self.max_frame_size = max_frame_size
        self.protocol_id = 0
        self.stats = ChannelStats()
        self.transcript = Transcript()
        self.closed = False
        self._last_direction: Optional[Direction] = None

    @abstractmethod
    async def _write(self, frame: bytes) -> None:
        ...

    @abstractmethod
    async def _read(self) -> bytes:
        """Return one complete frame or raise TransportError."""

    @abstractmethod
    async def _shutdown(self) -> None:
        ...

    def _check_size(self, length: int) -> None:
        if length > self.max_frame_size:
            raise ProtocolError(f"Frame of {length} bytes exceeds the {self.max_frame_size}-byte limit")

    def _record(self, direction: Direction, frame: Frame, raw: bytes) -> None:
        stats = self.stats
        tally = tally_payload(frame.payload)
        if direction is Direction.C2S:
            stats.bytes_c2s += len(raw)
        else:
            stats.bytes_s2c += len(raw)
        if frame.msg_type in OT_MESSAGE_TYPES:
            stats.ot_ciphertexts += tally.ciphertexts
            if frame.msg_type == MsgType.OT_RESP:
                stats.ot_invocations += 1
        elif direction is Direction.C2S:
            stats.ciphertexts_c2s += tally.ciphertexts
            stats.clear_values_c2s += tally.clear_values
        else:
            stats.ciphertexts_s2c += tally.ciphertexts
            stats.clear_values_s2c += tally.clear_values
        stats.sealed_words += tally.sealed_words
        if direction != self._last_direction:
            stats.rounds += 1
            self._last_direction = direction
        stats.frames += 1
        self.transcript.append(direction, raw)

    async def send(self, msg_type: int, payload: bytes = b"") -> None:
        """
        Send one frame to the peer.

        Args:
            msg_type: Message type byte
            payload: Typed item payload
        """
        if self.closed:
            raise TransportError("Channel is closed")
        frame = Frame(self.protocol_id, msg_type, payload)
        raw = frame.to_bytes()
        self._check_size(len(raw) - LENGTH_PREFIX.size)
        self._record(self.role.outgoing, frame, raw)
        logger.debug(f"{self.role.value} -> {frame.type_name} ({len(raw)} bytes)")
        await self._write(raw)

    async def recv(self) -> Frame:
        """Receive the next frame; blocks until one arrives or the peer closes."""
        if self.closed:
            raise TransportError("Channel is closed")
        raw = await self._read()
        frame = Frame.from_bytes(raw)
        if self.protocol_id and frame.protocol_id != self.protocol_id:
            raise ProtocolError(f"Frame for protocol 0x{frame.protocol_id:02x} on a 0x{self.protocol_id:02x} session")
        self._record(self.role.incoming, frame, raw)
        logger.debug(f"{self.role.value} <- {frame.type_name} ({len(raw)} bytes)")
        return frame

    async def expect(self, msg_type: MsgType) -> PayloadReader:
        """Receive the next frame and insist on its message type."""
        frame = await self.recv()
        if frame.msg_type != msg_type:
            raise ProtocolError(f"Expected {msg_type.name}, received {frame.type_name}")
        return PayloadReader(frame.payload)

    def snapshot_stats(self) -> ChannelStats:
        return self.stats.model_copy()

    def audit(self) -> bool:
        """True when the byte counters equal the transcript's frame lengths."""
        return (
            self.stats.bytes_c2s == self.transcript.byte_count(Direction.C2S)
            and self.stats.bytes_s2c == self.transcript.byte_count(Direction.S2C)
            and self.stats.frames == len(self.transcript)
        )

    async def close(self) -> None:
        if self.closed:
            return
        self.closed = True
        if not self.audit():
            logger.error(f"{self.role.value} channel byte counters disagree with the transcript")
        try:
            await self._shutdown()
        except Exception as e:
            logger.debug(f"Error while closing {self.role.value} channel: {str(e)}")

    async def __aenter__(self) -> "Channel":
        return self

    async def __aexit__(self, *exc: object) -> None:
        await self.close()


class LocalChannel(Channel):
    """In-process endpoint backed by a pair of asyncio queues."""

    _CLOSED = b""

    def __init__(
        self,
        role: Role,
        inbox: "asyncio.Queue[bytes]",
        outbox: "asyncio.Queue[bytes]",
        max_frame_size: int = DEFAULT_MAX_FRAME_SIZE,
    ):
        super().__init__(role, max_frame_size)
        self._inbox = inbox
        self._outbox = outbox
        self._peer_closed = False

    @classmethod
    def pair(cls, max_frame_size: int = DEFAULT_MAX_FRAME_SIZE) -> Tuple["LocalChannel", "LocalChannel"]:
        """Connected (client, server) endpoints."""
        c2s: "asyncio.Queue[bytes]" = asyncio.Queue()
        s2c: "asyncio.Queue[bytes]" = asyncio.Queue()
        return (
            cls(Role.CLIENT, s2c, c2s, max_frame_size),
            cls(Role.SERVER, c2s, s2c, max_frame_size),
        )

    async def _write(self, frame: bytes) -> None:
        await self._outbox.put(frame)

    async def _read(self) -> bytes:
        if self._peer_closed:
            raise TransportError("Peer closed the channel")
        raw = await self._inbox.get()
        if raw == self._CLOSED:
            self._peer_closed = True
            raise TransportError("Peer closed the channel")
        (length,) = LENGTH_PREFIX.unpack_from(raw)
        self._check_size(length)
        return raw

    async def _shutdown(self) -> None:
        await self._outbox.put(self._CLOSED)


class TcpChannel(Channel):
    """Endpoint over an asyncio stream pair."""

    def __init__(
        self,
        role: Role,
        reader: asyncio.StreamReader,
        writer: asyncio.StreamWriter,
        max_frame_size: int = DEFAULT_MAX_FRAME_SIZE,
    ):
        super().__init__(role, max_frame_size)
        self.reader = reader
        self.writer = writer

    @classmethod
    async def connect(
        cls,
        host: str,
        port: int,
        max_attempts: int = 5,
        reconnect_delay: float = RECONNECT_DELAY,
        max_frame_size: int = DEFAULT_MAX_FRAME_SIZE,
    ) -> "TcpChannel":
        """
        Connect to a listening server with retries and progressive backoff.

        Args:
            host: Server host
            port: Server port
            max_attempts: Maximum number of connection attempts
            reconnect_delay: Base delay, multiplied by the attempt number
            max_frame_size: Largest accepted frame body

        Returns:
            A client endpoint that has completed the transport handshake
        """
        last_error = None
        for attempt in range(1, max_attempts + 1):
            writer = None
            try:
                logger.info(f"Connecting to {host}:{port} (attempt {attempt}/{max_attempts})")
                reader, writer = await asyncio.open_connection(host, port)
                writer.write(HANDSHAKE_REQUEST)
                await writer.drain()
                response = await asyncio.wait_for(reader.readexactly(len(HANDSHAKE_RESPONSE)), HANDSHAKE_TIMEOUT)
                if response != HANDSHAKE_RESPONSE:
                    raise ProtocolError(f"Invalid handshake response: {response!r}")
                logger.info(f"Connected to {host}:{port}")
                return cls(Role.CLIENT, reader, writer, max_frame_size)
            except (OSError, asyncio.TimeoutError, asyncio.IncompleteReadError, ProtocolError) as e:
                last_error = str(e) or type(e).__name__
                logger.error(f"Error connecting to {host}:{port}: {last_error}")
                if writer is not None:
                    writer.close()
                if attempt < max_attempts:
                    wait_time = reconnect_delay * attempt
                    logger.info(f"Retrying in {wait_time} seconds...")
                    await asyncio.sleep(wait_time)
        raise TransportError(f"Could not connect to {host}:{port} after {max_attempts} attempts: {last_error}")

    async def _write(self, frame: bytes) -> None:
        try:
            self.writer.write(frame)
            await self.writer.drain()
        except (ConnectionError, OSError) as e:
            logger.error(f"Error sending frame: {str(e)}")
            raise TransportError(f"Send failed: {str(e)}") from e

    async def _read(self) -> bytes:
        try:
            header = await self.reader.readexactly(LENGTH_PREFIX.size)
            (length,) = LENGTH_PREFIX.unpack(header)
            self._check_size(length)
            body = await self.reader.readexactly(length)
        except asyncio.IncompleteReadError as e:
            raise TransportError("Connection closed while reading a frame") from e
        except (ConnectionError, OSError) as e:
            raise TransportError(f"Receive failed: {str(e)}") from e
        return header + body

    async def _shutdown(self) -> None:
        self.writer.close()
        await self.writer.wait_closed()


class TcpListener:
    """
    Accepts session connections on a TCP port.

    Usage:
        async with TcpListener("127.0.0.1", 0) as listener:
            channel = await listener.accept()
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 0, max_frame_size: int = DEFAULT_MAX_FRAME_SIZE):
        self.host = host
        self.port = port
        self.max_frame_size = max_frame_size
        self._server: Optional[asyncio.AbstractServer] = None
        self._pending: "asyncio.Queue[TcpChannel]" = asyncio.Queue()

    async def _on_connection(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = writer.get_extra_info("peername")
        try:
            request = await asyncio.wait_for(reader.readexactly(len(HANDSHAKE_REQUEST)), HANDSHAKE_TIMEOUT)
        except (asyncio.TimeoutError, asyncio.IncompleteReadError):
            logger.error(f"Handshake timeout from {peer}")
            writer.close()
            return
        if request != HANDSHAKE_REQUEST:
            logger.error(f"Invalid handshake request from {peer}: {request!r}")
            writer.close()
            return
        writer.write(HANDSHAKE_RESPONSE)
        await writer.drain()
        logger.info(f"Accepted session connection from {peer}")
        await self._pending.put(TcpChannel(Role.SERVER, reader, writer, self.max_frame_size))

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._on_connection, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        logger.info(f"Listening on {self.host}:{self.port}")

    async def accept(self) -> TcpChannel:
        return await self._pending.get()

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    async def __aenter__(self) -> "TcpListener":
        await self.start()
        return self

    async def __aexit__(self, *exc: object) -> None:
        await self.close()
