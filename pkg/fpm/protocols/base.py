"""
Shared machinery of the two-party protocol state machines.

A session runs in three steps on both endpoints:
1. HELLO / HELLO_ACK: the client announces protocol, parameters, backend and
   switches; the server checks them against its own configuration and answers
   with its set size.
2. PUBLIC_KEY: the key owner (the client, except for improved-ss) generates a
   key pair and publishes the public part.
3. The protocol body, implemented by subclasses in `execute`.
"""

import asyncio
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, FrozenSet, List, Optional, Sequence, Tuple, Type

from fpm.channel import Channel, ChannelStats, LocalChannel, Role, TcpChannel, TcpListener
from fpm.config import Polarity, ProtocolId, SessionConfig
from fpm.core import FuzzyParams, Word, as_words, match_t
from fpm.errors import ProtocolError, TransportError
from fpm.homcrypt import HomKeyPair, PublicKey, keygen, public_key_from_bytes
from fpm.ring import Ring
from fpm.rng import SessionRng
from fpm.wire import MsgType, PayloadReader, PayloadWriter

logger = logging.getLogger("protocols")

BACKEND_CODES = {"mock": 0, "paillier": 1}
POLARITY_CODES = {Polarity.AGREEMENT: 0, Polarity.DISTANCE: 1}


@dataclass
class ClientOutcome:
    matched: FrozenSet[Word]
    stats: ChannelStats
    diagnostics: Dict[str, int] = field(default_factory=dict)
    blinders: List[int] = field(default_factory=list)
    busy_seconds: float = 0.0


@dataclass
class ServerSummary:
    stats: ChannelStats
    diagnostics: Dict[str, int] = field(default_factory=dict)
    blinders: List[int] = field(default_factory=list)
    busy_seconds: float = 0.0
    artifacts: Dict[str, Any] = field(default_factory=dict)


def _hello_fields(config: SessionConfig) -> List[Tuple[str, int]]:
    p = config.params
    return [
        ("protocol", int(config.protocol)),
        ("T", p.T),
        ("t", p.t),
        ("domain_size", p.domain_size),
        ("k", p.k),
        ("backend", BACKEND_CODES[config.backend]),
        ("key_bits", config.key_bits),
        ("eqm", config.eqm),
        ("polarity", POLARITY_CODES[config.polarity]),
        ("original_remedy", int(config.original_remedy)),
        ("improved_early_exit", int(config.improved_early_exit)),
    ]


class Party:
    """
    One endpoint of a protocol session.

    Subclasses set `role` and implement `execute`; `key_owner` names the side
    that generates the homomorphic key pair.
    """

    role: ClassVar[Role]
    protocol: ClassVar[ProtocolId]
    key_owner: ClassVar[Role] = Role.CLIENT

    def __init__(
        self,
        config: SessionConfig,
        words: Sequence["Word | Sequence[int]"],
        channel: Channel,
        rng: Optional[SessionRng] = None,
        keypair: Optional[HomKeyPair] = None,
    ):
        if config.protocol != self.protocol:
            raise ProtocolError(f"{type(self).__name__} cannot run a {config.protocol.cli_name} session")
        self.config = config
        self.params: FuzzyParams = config.params
        self.words = [self.params.check_word(w) for w in as_words(words)]
        self.channel = channel
        self.channel.protocol_id = int(self.protocol)
        self.rng = rng or SessionRng(config.seed, self.role.value)
        self.keypair = keypair
        self.pk: Optional[PublicKey] = keypair.public if keypair else None
        self.diagnostics: Counter = Counter()
        self.blinders: List[int] = []
        self._waiting = 0.0
        self.busy_seconds = 0.0
        self.check_preconditions()

    def check_preconditions(self) -> None:
        """Raise ParameterError before any message when the session cannot run."""

    @property
    def ring(self) -> Ring:
        assert self.pk is not None
        return self.pk.ring

    @property
    def public_key(self) -> PublicKey:
        if self.pk is None:
            raise ProtocolError("No public key has been exchanged yet")
        return self.pk

    def fresh_blinder(self) -> int:
        """Fresh non-zero ring element; recorded for the randomness audit."""
        r = self.ring.random_nonzero(self.rng)
        self.blinders.append(r)
        return r

    async def send(self, msg_type: MsgType, writer: PayloadWriter) -> None:
        await self.channel.send(msg_type, writer.to_bytes())

    async def expect(self, msg_type: MsgType) -> PayloadReader:
        started = time.perf_counter()
        try:
            return await self.channel.expect(msg_type)
        finally:
            self._waiting += time.perf_counter() - started

    # -- handshake ---------------------------------------------------------

    async def _hello_client(self) -> None:
        writer = PayloadWriter()
        for _, value in _hello_fields(self.config):
            writer.integer(value)
        writer.integer(len(self.words))
        await self.send(MsgType.HELLO, writer)
        reader = await self.expect(MsgType.HELLO_ACK)
        n_S = reader.integer()
        reader.finish()
        self.params = self.params.model_copy(update={"n_C": len(self.words), "n_S": n_S})

    async def _hello_server(self) -> None:
        reader = await self.expect(MsgType.HELLO)
        for name, expected in _hello_fields(self.config):
            value = reader.integer()
            if value != expected:
                raise ProtocolError(f"Handshake mismatch on {name}: client {value}, server {expected}")
        n_C = reader.integer()
        reader.finish()
        if n_C < 1:
            raise ProtocolError("Client announced an empty set")
        self.params = self.params.model_copy(update={"n_C": n_C, "n_S": len(self.words)})
        await self.send(MsgType.HELLO_ACK, PayloadWriter().integer(len(self.words)))

    async def _exchange_key(self) -> None:
        if self.role == self.key_owner:
            if self.keypair is None:
                self.keypair = keygen(self.params, self.config.key_bits, self.config.backend, self.rng.fork("keygen"))
            self.pk = self.keypair.public
            await self.send(MsgType.PUBLIC_KEY, PayloadWriter().blob(self.pk.to_bytes()))
            return
        reader = await self.expect(MsgType.PUBLIC_KEY)
        pk = public_key_from_bytes(reader.blob())
        reader.finish()
        if pk.backend != self.config.backend:
            raise ProtocolError(f"Peer sent a {pk.backend} key for a {self.config.backend} session")
        if pk.ring.order < (1 << self.params.ring_bits_required):
            raise ProtocolError(
                f"Peer ring of {pk.ring.bits} bits cannot hold {self.params.ring_bits_required}-bit prefixed values"
            )
        self.pk = pk

    async def handshake(self) -> None:
        if self.role is Role.CLIENT:
            await self._hello_client()
        else:
            await self._hello_server()
        await self._exchange_key()
        logger.info(
            f"{self.role.value}: {self.protocol.cli_name} session n_C={self.params.n_C} n_S={self.params.n_S} "
            f"T={self.params.T} t={self.params.t} |D|={self.params.domain_size} backend={self.config.backend}"
        )

    # -- run ---------------------------------------------------------------

    async def execute(self) -> Any:
        raise NotImplementedError

    async def run(self) -> Any:
        started = time.perf_counter()
        try:
            await self.handshake()
            result = await self.execute()
        except BaseException:
            await self.channel.close()
            raise
        self.busy_seconds = time.perf_counter() - started - self._waiting
        return result


class ClientParty(Party):
    role = Role.CLIENT

    def is_similar(self, word: Word) -> bool:
        """True when `word` t-matches one of the client's words."""
        return any(match_t(x, word, self.params.t) for x in self.words)

    def outcome(self, matched: FrozenSet[Word]) -> ClientOutcome:
        logger.info(f"client: {self.protocol.cli_name} finished with {len(matched)} matched words")
        return ClientOutcome(
            matched=matched,
            stats=self.channel.snapshot_stats(),
            diagnostics=dict(self.diagnostics),
            blinders=list(self.blinders),
            busy_seconds=self.busy_seconds,
        )

    async def run(self) -> ClientOutcome:
        matched = await super().run()
        await self.channel.close()
        return self.outcome(matched)


class ServerParty(Party):
    role = Role.SERVER

    def __init__(self, *args: Any, **kwargs: Any):
        super().__init__(*args, **kwargs)
        self.artifacts: Dict[str, Any] = {}

    def summary(self) -> ServerSummary:
        return ServerSummary(
            stats=self.channel.snapshot_stats(),
            diagnostics=dict(self.diagnostics),
            blinders=list(self.blinders),
            busy_seconds=self.busy_seconds,
            artifacts=self.artifacts,
        )

    async def run(self) -> ServerSummary:
        await super().run()
        await self.channel.close()
        return self.summary()


PartyPair = Tuple[Type[ClientParty], Type[ServerParty]]
_REGISTRY: Dict[ProtocolId, PartyPair] = {}


def register(client_cls: Type[ClientParty], server_cls: Type[ServerParty]) -> None:
    _REGISTRY[client_cls.protocol] = (client_cls, server_cls)


def parties_for(protocol: ProtocolId) -> PartyPair:
    return _REGISTRY[protocol]


def _pick_error(results: Sequence[Any]) -> Optional[BaseException]:
    errors = [r for r in results if isinstance(r, BaseException)]
    if not errors:
        return None
    for e in errors:
        if not isinstance(e, TransportError):
            return e
    return errors[0]


async def run_session(
    config: SessionConfig,
    client_words: Sequence["Word | Sequence[int]"],
    server_words: Sequence["Word | Sequence[int]"],
    client_keypair: Optional[HomKeyPair] = None,
    server_keypair: Optional[HomKeyPair] = None,
) -> Tuple[ClientOutcome, ServerSummary]:
    """
    Run both parties of a session over an in-process channel pair.

    Args:
        config: Session configuration shared by both parties
        client_words: The client's set X
        server_words: The server's set Y
        client_keypair: Pre-generated key pair for the client side, if it owns the key
        server_keypair: Pre-generated key pair for the server side

    Returns:
        (client outcome, server summary)
    """
    client_cls, server_cls = parties_for(config.protocol)
    client_channel, server_channel = LocalChannel.pair(config.max_frame_size)
    client = client_cls(config, client_words, client_channel, keypair=client_keypair)
    server = server_cls(config, server_words, server_channel, keypair=server_keypair)
    results = await asyncio.gather(client.run(), server.run(), return_exceptions=True)
    error = _pick_error(results)
    if error is not None:
        raise error
    return results[0], results[1]


async def connect_session(
    config: SessionConfig,
    client_words: Sequence["Word | Sequence[int]"],
    host: str,
    port: int,
    keypair: Optional[HomKeyPair] = None,
) -> ClientOutcome:
    channel = await TcpChannel.connect(
        host, port, config.connect_attempts, config.connect_backoff, config.max_frame_size
    )
    client_cls, _ = parties_for(config.protocol)
    return await client_cls(config, client_words, channel, keypair=keypair).run()


async def serve_session(
    config: SessionConfig,
    server_words: Sequence["Word | Sequence[int]"],
    listener: TcpListener,
    keypair: Optional[HomKeyPair] = None,
) -> ServerSummary:
    """Accept one connection on a started listener and run the server party on it."""
    channel = await listener.accept()
    channel.max_frame_size = config.max_frame_size
    _, server_cls = parties_for(config.protocol)
    return await server_cls(config, server_words, channel, keypair=keypair).run()
