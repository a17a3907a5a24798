"""Tests for the framed session channel over both transports"""

import asyncio

import pytest

from fpm.channel import Direction, Frame, LocalChannel, Role, TcpChannel, TcpListener
from fpm.config import ProtocolId
from fpm.errors import DecodeError, ProtocolError, TransportError
from fpm.protocols import connect_session, run_session, serve_session
from fpm.wire import MsgType, PayloadWriter
from tests.helpers import config_for


async def test_frames_arrive_in_order(channel_pair):
    client, server = channel_pair
    for value in range(5):
        await client.send(MsgType.HELLO, PayloadWriter().integer(value).to_bytes())
    received = []
    for _ in range(5):
        reader = await server.expect(MsgType.HELLO)
        received.append(reader.integer())
    assert received == list(range(5))


async def test_rounds_count_direction_changes(channel_pair):
    client, server = channel_pair
    for _ in range(3):
        await client.send(MsgType.HELLO)
        await server.recv()
        await server.send(MsgType.HELLO_ACK)
        await client.recv()
    assert client.stats.rounds == 6
    assert server.stats.rounds == 6
    assert client.stats.frames == server.stats.frames == 6


async def test_item_accounting(channel_pair):
    client, server = channel_pair
    payload = PayloadWriter().clear(5).clear(6).integer(7).blob(b"key").to_bytes()
    await client.send(MsgType.SS_LETTERS, payload)
    await server.recv()
    for stats in (client.stats, server.stats):
        assert stats.clear_values_c2s == 2
        assert stats.ciphertexts_c2s == 0
        assert stats.clear_ring_values == 2
        assert stats.bytes_c2s == client.transcript.byte_count(Direction.C2S)
    assert client.audit() and server.audit()
    assert client.transcript == server.transcript


async def test_expect_wrong_type(channel_pair):
    client, server = channel_pair
    await client.send(MsgType.HELLO)
    with pytest.raises(ProtocolError, match="Expected HELLO_ACK"):
        await server.expect(MsgType.HELLO_ACK)


async def test_protocol_id_mismatch(channel_pair):
    client, server = channel_pair
    client.protocol_id = int(ProtocolId.POLYNOMIAL)
    server.protocol_id = int(ProtocolId.HAMMING)
    await client.send(MsgType.HELLO)
    with pytest.raises(ProtocolError, match="protocol"):
        await server.recv()


async def test_oversize_frame_rejected():
    client, server = LocalChannel.pair(max_frame_size=64)
    with pytest.raises(ProtocolError, match="exceeds"):
        await client.send(MsgType.HELLO, b"\x06" + b"\x00" * 100)
    assert client.stats.frames == 0


async def test_oversize_frame_rejected_on_receive():
    client, server = LocalChannel.pair(max_frame_size=64)
    client.max_frame_size = 1024
    await client.send(MsgType.HELLO, PayloadWriter().blob(b"\x00" * 100).to_bytes())
    with pytest.raises(ProtocolError, match="exceeds"):
        await server.recv()


async def test_closed_peer_raises_transport_error(channel_pair):
    client, server = channel_pair
    await client.close()
    with pytest.raises(TransportError):
        await server.recv()
    # the error sticks
    with pytest.raises(TransportError):
        await server.recv()


async def test_send_after_close(channel_pair):
    client, _ = channel_pair
    await client.close()
    with pytest.raises(TransportError):
        await client.send(MsgType.HELLO)


def test_frame_bytes():
    frame = Frame(2, MsgType.POLY_COMBINATION, b"abc")
    raw = frame.to_bytes()
    assert raw[:4] == (5).to_bytes(4, "big")
    assert Frame.from_bytes(raw) == frame
    assert frame.type_name == "POLY_COMBINATION"
    assert Frame(2, 0xEE, b"").type_name == "0xee"
    with pytest.raises(DecodeError):
        Frame.from_bytes(raw[:-1])


def test_role_directions():
    assert Role.CLIENT.outgoing is Direction.C2S
    assert Role.SERVER.outgoing is Direction.S2C
    assert Role.SERVER.incoming is Direction.C2S


@pytest.mark.tcp
async def test_tcp_ping_pong():
    async with TcpListener("127.0.0.1", 0) as listener:
        client = await TcpChannel.connect("127.0.0.1", listener.port, max_attempts=3, reconnect_delay=0.05)
        server = await listener.accept()
        await client.send(MsgType.HELLO, PayloadWriter().integer(9).to_bytes())
        reader = await server.expect(MsgType.HELLO)
        assert reader.integer() == 9
        await server.send(MsgType.HELLO_ACK)
        await client.expect(MsgType.HELLO_ACK)
        assert client.transcript == server.transcript
        await client.close()
        with pytest.raises(TransportError):
            await server.recv()
        await server.close()


@pytest.mark.tcp
async def test_tcp_connect_refused():
    listener = TcpListener("127.0.0.1", 0)
    await listener.start()
    port = listener.port
    await listener.close()
    with pytest.raises(TransportError, match="after 2 attempts"):
        await TcpChannel.connect("127.0.0.1", port, max_attempts=2, reconnect_delay=0.01)


@pytest.mark.tcp
async def test_tcp_bad_handshake_is_dropped():
    async with TcpListener("127.0.0.1", 0) as listener:
        reader, writer = await asyncio.open_connection("127.0.0.1", listener.port)
        writer.write(b"X" * 21)
        await writer.drain()
        assert await reader.read() == b""
        writer.close()


@pytest.mark.tcp
async def test_transcript_identical_across_transports():
    """Test that a seeded session produces the same frames in-process and over TCP"""
    client_words = [[1, 2, 3], [1, 4, 5]]
    server_words = [[1, 2, 9], [7, 7, 7]]
    config = config_for(ProtocolId.POLYNOMIAL, client_words, server_words, 2, connect_backoff=0.05)

    local_outcome, _ = await run_session(config, client_words, server_words)

    async with TcpListener("127.0.0.1", 0) as listener:
        tcp_outcome, tcp_summary = await asyncio.gather(
            connect_session(config, client_words, "127.0.0.1", listener.port),
            serve_session(config, server_words, listener),
        )

    assert tcp_outcome.matched == local_outcome.matched
    assert tcp_outcome.stats == local_outcome.stats
    assert tcp_summary.stats == local_outcome.stats
