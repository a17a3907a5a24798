"""
1-out-of-q oblivious transfer over a session channel.

The reference construction is the homomorphic selector: the receiver owns its
own additively homomorphic key pair, sends encryptions of the unary vector
selecting its index, and the sender answers with the single ciphertext
sum_x items[x] * E(e_x), rerandomised. One transfer costs q + 1 ciphertexts;
a constant-size OT can replace it behind the same sender/receiver contract.
"""

import asyncio
import logging
from abc import ABC, abstractmethod
from typing import Optional, Sequence, Tuple

from fpm.channel import Channel, LocalChannel
from fpm.errors import ParameterError, ProtocolError
from fpm.homcrypt import HomKeyPair, PublicKey, get_backend, public_key_from_bytes
from fpm.rng import SessionRng
from fpm.wire import MsgType, PayloadWriter

logger = logging.getLogger("ot")


def check_index(index: int, q: int) -> None:
    if q < 2:
        raise ParameterError(f"Oblivious transfer needs at least 2 items, got {q}")
    if not 0 <= index < q:
        raise ParameterError(f"Selection index {index} outside [0, {q})")


class OtSender(ABC):
    @abstractmethod
    async def setup(self, channel: Channel) -> None:
        """Receive whatever per-session material the receiver publishes."""

    @abstractmethod
    async def send(self, channel: Channel, items: Sequence[int]) -> None:
        """Answer one transfer request for `items`."""


class OtReceiver(ABC):
    @abstractmethod
    async def setup(self, channel: Channel) -> None:
        """Publish per-session material to the sender."""

    @abstractmethod
    async def receive(self, channel: Channel, index: int, q: int) -> int:
        """Obtain item `index` of the sender's q items."""


class SelectorOtReceiver(OtReceiver):
    def __init__(self, keypair: HomKeyPair, rng: SessionRng):
        self.keypair = keypair
        self.rng = rng

    async def setup(self, channel: Channel) -> None:
        await channel.send(MsgType.OT_SETUP, PayloadWriter().blob(self.keypair.public.to_bytes()).to_bytes())

    async def receive(self, channel: Channel, index: int, q: int) -> int:
        check_index(index, q)
        pk = self.keypair.public
        request = PayloadWriter()
        for x in range(q):
            request.ciphertext(pk.encrypt(1 if x == index else 0, self.rng).to_bytes())
        await channel.send(MsgType.OT_REQ, request.to_bytes())
        reader = await channel.expect(MsgType.OT_RESP)
        answer = pk.ciphertext_from_bytes(reader.ciphertext())
        reader.finish()
        return self.keypair.private.decrypt(answer)


class SelectorOtSender(OtSender):
    def __init__(self, rng: SessionRng):
        self.rng = rng
        self.receiver_key: Optional[PublicKey] = None

    async def setup(self, channel: Channel) -> None:
        reader = await channel.expect(MsgType.OT_SETUP)
        self.receiver_key = public_key_from_bytes(reader.blob())
        reader.finish()

    async def send(self, channel: Channel, items: Sequence[int]) -> None:
        pk = self.receiver_key
        if pk is None:
            raise ProtocolError("Oblivious transfer used before setup")
        reader = await channel.expect(MsgType.OT_REQ)
        selector = []
        while not reader.exhausted:
            selector.append(pk.ciphertext_from_bytes(reader.ciphertext()))
        if len(selector) != len(items):
            raise ProtocolError(f"Selector of {len(selector)} entries for {len(items)} items")
        answer = pk.encrypt(0, self.rng)
        for c, item in zip(selector, items):
            answer = pk.add(answer, pk.scalar_mul(c, item))
        await channel.send(MsgType.OT_RESP, PayloadWriter().ciphertext(answer.to_bytes()).to_bytes())


async def ot_transfer(
    sender_items: Sequence[int],
    receiver_index: int,
    backend: str = "mock",
    strength: int = 1024,
    seed: Optional[int] = None,
) -> Tuple[int, LocalChannel, LocalChannel]:
    """
    Run one transfer between two in-process parties.

    Args:
        sender_items: The sender's q items
        receiver_index: The receiver's selection
        backend: Homomorphic backend for the receiver's key pair
        strength: Modulus bits for real backends
        seed: Seed for both parties' generators

    Returns:
        (received item, sender endpoint, receiver endpoint)
    """
    check_index(receiver_index, len(sender_items))
    required = max(max(sender_items).bit_length(), 1) + 16
    receiver_rng = SessionRng(seed, "ot-receiver")
    keypair = get_backend(backend).keygen_bits(required, strength, receiver_rng)
    sender_channel, receiver_channel = LocalChannel.pair()
    receiver = SelectorOtReceiver(keypair, receiver_rng)
    sender = SelectorOtSender(SessionRng(seed, "ot-sender"))

    async def run_receiver() -> int:
        await receiver.setup(receiver_channel)
        return await receiver.receive(receiver_channel, receiver_index, len(sender_items))

    async def run_sender() -> None:
        await sender.setup(sender_channel)
        await sender.send(sender_channel, sender_items)

    value, _ = await asyncio.gather(run_receiver(), run_sender())
    logger.debug(f"Transferred item {receiver_index} of {len(sender_items)}")
    return value, sender_channel, receiver_channel
