"""
Hamming-distance protocol.

The server obtains an encrypted equality indicator eq(w, i, j), E(1) when
x_i^w == y_j^w and E(0) otherwise, through one of two subroutines:

v1  the client sends the unary encoding of each of its letters (|D|
    ciphertexts per letter); the server picks entry y_j^w.
v2  per (i, j, w) the client draws a bit b and offers the vector
    h[v] = [v == x_i^w] xor b by 1-out-of-|D| oblivious transfer; the server
    receives h[y_j^w] and the client sends E(b). The server keeps E(b) when
    the received bit is 0 and E(1) - E(b) otherwise.

The server sums the indicators into the agreement count A_ij and sends, for
each level l that would make the pair a match, E((A_ij - l) * r + Y_j) with a
fresh r. With the distance polarity the same is done on T - A_ij for levels
0..T-t.
"""

import asyncio
import logging
from typing import FrozenSet, List, Optional, Sequence, Set, Tuple

from fpm.channel import Channel, LocalChannel
from fpm.config import Polarity, ProtocolId
from fpm.core import Word, as_words
from fpm.errors import ParameterError, ProtocolError
from fpm.homcrypt import Ciphertext, HomKeyPair, PublicKey, get_backend
from fpm.ot import OtReceiver, OtSender, SelectorOtReceiver, SelectorOtSender
from fpm.protocols.base import ClientParty, ServerParty, register
from fpm.rng import SessionRng
from fpm.wire import MsgType, PayloadWriter

logger = logging.getLogger("protocols")

# indicator bits only; the OT ring just has to hold 0 and 1
OT_REQUIRED_BITS = 16

EqMatrix = List[List[List[Ciphertext]]]


def _empty_matrix(T: int, n_C: int, n_S: int) -> List[List[List[Optional[Ciphertext]]]]:
    return [[[None] * n_S for _ in range(n_C)] for _ in range(T)]


async def offer_equality_v1(
    channel: Channel, pk: PublicKey, words: Sequence[Word], domain_size: int, rng: SessionRng
) -> None:
    """Client half of v1: one unary vector of |D| ciphertexts per letter."""
    writer = PayloadWriter()
    for x in words:
        for letter in x:
            for v in range(domain_size):
                writer.ciphertext(pk.encrypt(1 if v == letter else 0, rng).to_bytes())
    await channel.send(MsgType.HAM_UNARY, writer.to_bytes())


async def equality_matrix_v1(
    channel: Channel, pk: PublicKey, n_C: int, words: Sequence[Word], domain_size: int
) -> EqMatrix:
    """
    Server half of v1.

    Args:
        channel: Server endpoint
        pk: The client's public key
        n_C: Number of client words
        words: The server words
        domain_size: Alphabet size |D|

    Returns:
        eq[w][i][j] for every position, client word and server word
    """
    T = len(words[0])
    reader = await channel.expect(MsgType.HAM_UNARY)
    unary = [
        [[pk.ciphertext_from_bytes(reader.ciphertext()) for _ in range(domain_size)] for _ in range(T)]
        for _ in range(n_C)
    ]
    reader.finish()
    matrix = _empty_matrix(T, n_C, len(words))
    for i in range(n_C):
        for j, y in enumerate(words):
            for w in range(T):
                matrix[w][i][j] = unary[i][w][y[w]]
    return matrix  # type: ignore[return-value]


async def offer_equality_v2(
    channel: Channel,
    pk: PublicKey,
    words: Sequence[Word],
    n_S: int,
    domain_size: int,
    rng: SessionRng,
    sender: OtSender,
) -> None:
    """Client half of v2: one transfer and one encrypted mask bit per (i, j, w)."""
    await sender.setup(channel)
    for x in words:
        for _ in range(n_S):
            for letter in x:
                b = rng.randbit()
                await sender.send(channel, [int(v == letter) ^ b for v in range(domain_size)])
                bit = PayloadWriter().ciphertext(pk.encrypt(b, rng).to_bytes())
                await channel.send(MsgType.HAM_BIT, bit.to_bytes())


async def equality_matrix_v2(
    channel: Channel, pk: PublicKey, n_C: int, words: Sequence[Word], domain_size: int, receiver: OtReceiver
) -> EqMatrix:
    """Server half of v2; `receiver` owns its own key pair for the transfers."""
    T = len(words[0])
    await receiver.setup(channel)
    one = pk.encrypt_constant(1)
    matrix = _empty_matrix(T, n_C, len(words))
    for i in range(n_C):
        for j, y in enumerate(words):
            for w in range(T):
                h = await receiver.receive(channel, y[w], domain_size)
                reader = await channel.expect(MsgType.HAM_BIT)
                masked = pk.ciphertext_from_bytes(reader.ciphertext())
                reader.finish()
                if h not in (0, 1):
                    raise ProtocolError(f"Transfer returned {h}, expected a bit")
                matrix[w][i][j] = masked if h == 0 else pk.sub(one, masked)
    return matrix  # type: ignore[return-value]


def ot_keypair(backend: str, strength: int, rng: SessionRng) -> HomKeyPair:
    return get_backend(backend).keygen_bits(OT_REQUIRED_BITS, strength, rng)


async def compute_equality_matrix(
    version: int,
    client_words: Sequence["Word | Sequence[int]"],
    server_words: Sequence["Word | Sequence[int]"],
    domain_size: int,
    keypair: HomKeyPair,
    seed: Optional[int] = None,
) -> Tuple[EqMatrix, LocalChannel, LocalChannel]:
    """
    Run one equality-matrix subroutine between two in-process parties.

    Args:
        version: 1 (unary vectors) or 2 (oblivious transfer)
        client_words: The client's words
        server_words: The server's words
        domain_size: Alphabet size |D|
        keypair: The client's key pair
        seed: Seed for both parties' generators

    Returns:
        (encrypted matrix, client endpoint, server endpoint)
    """
    xs, ys = as_words(client_words), as_words(server_words)
    client_rng, server_rng = SessionRng(seed, "client"), SessionRng(seed, "server")
    client_channel, server_channel = LocalChannel.pair()
    pk = keypair.public

    if version == 1:
        offer = offer_equality_v1(client_channel, pk, xs, domain_size, client_rng)
        build = equality_matrix_v1(server_channel, pk, len(xs), ys, domain_size)
    elif version == 2:
        receiver = SelectorOtReceiver(ot_keypair(keypair.backend, 1024, server_rng.fork("ot")), server_rng)
        offer = offer_equality_v2(
            client_channel, pk, xs, len(ys), domain_size, client_rng, SelectorOtSender(client_rng)
        )
        build = equality_matrix_v2(server_channel, pk, len(xs), ys, domain_size, receiver)
    else:
        raise ParameterError(f"Unknown equality-matrix version {version}")

    _, matrix = await asyncio.gather(offer, build)
    return matrix, client_channel, server_channel


class HammingClient(ClientParty):
    protocol = ProtocolId.HAMMING

    def check_preconditions(self) -> None:
        if self.config.eqm not in (1, 2):
            raise ParameterError(f"Equality-matrix version must be 1 or 2, got {self.config.eqm}")

    async def execute(self) -> FrozenSet[Word]:
        pk = self.public_key
        params = self.params
        if self.config.eqm == 1:
            await offer_equality_v1(self.channel, pk, self.words, params.domain_size, self.rng)
        else:
            sender = SelectorOtSender(self.rng.fork("ot"))
            await offer_equality_v2(self.channel, pk, self.words, params.n_S, params.domain_size, self.rng, sender)

        reader = await self.expect(MsgType.HAM_RESULTS)
        assert self.keypair is not None
        matched: Set[Word] = set()
        while not reader.exhausted:
            value = self.keypair.private.decrypt(pk.ciphertext_from_bytes(reader.ciphertext()))
            self.diagnostics["decrypted"] += 1
            word = params.decode(value)
            if word is None:
                continue
            if self.is_similar(word):
                matched.add(word)
            else:
                self.diagnostics["false_candidates"] += 1
        return frozenset(matched)


class HammingServer(ServerParty):
    """
    Server side. A key pair passed to the constructor is used as the server's
    oblivious-transfer key; the session key itself always comes from the client.
    """

    protocol = ProtocolId.HAMMING

    def check_preconditions(self) -> None:
        if self.config.eqm not in (1, 2):
            raise ParameterError(f"Equality-matrix version must be 1 or 2, got {self.config.eqm}")

    async def _matrix(self) -> EqMatrix:
        pk = self.public_key
        params = self.params
        if self.config.eqm == 1:
            return await equality_matrix_v1(self.channel, pk, params.n_C, self.words, params.domain_size)
        keypair = self.keypair or ot_keypair(self.config.backend, self.config.key_bits, self.rng.fork("ot-keygen"))
        receiver = SelectorOtReceiver(keypair, self.rng.fork("ot"))
        return await equality_matrix_v2(self.channel, pk, params.n_C, self.words, params.domain_size, receiver)

    def _levels(self, agreement: Ciphertext) -> Tuple[Ciphertext, range]:
        params = self.params
        if self.config.polarity is Polarity.AGREEMENT:
            return agreement, range(params.t, params.T + 1)
        distance = self.public_key.sub(self.public_key.encrypt_constant(params.T), agreement)
        return distance, range(0, params.T - params.t + 1)

    async def execute(self) -> None:
        pk = self.public_key
        params = self.params
        matrix = await self._matrix()
        self.artifacts["equality_matrix"] = matrix

        writer = PayloadWriter()
        for i in range(params.n_C):
            for j, y in enumerate(self.words):
                agreement = matrix[0][i][j]
                for w in range(1, params.T):
                    agreement = pk.add(agreement, matrix[w][i][j])
                base, levels = self._levels(agreement)
                payload = params.encode(y).value
                for level in levels:
                    shifted = pk.sub(base, pk.encrypt_constant(level))
                    blinded = pk.scalar_mul(shifted, self.fresh_blinder())
                    writer.ciphertext(pk.add(blinded, pk.encrypt(payload, self.rng)).to_bytes())
        await self.send(MsgType.HAM_RESULTS, writer)


register(HammingClient, HammingServer)
