"""Shared pytest fixtures for the fpm tests"""

import logging

import pytest

from fpm.channel import LocalChannel
from fpm.homcrypt import TEST_PAILLIER_BITS, HomKeyPair, keygen
from fpm.rng import SessionRng
from tests.helpers import make_params

# Configure logging
logging.basicConfig(level=logging.DEBUG)
logger = logging.getLogger("fpm_tests")


@pytest.fixture
def params():
    """Two words per side, T=3, t=2, |D|=10"""
    return make_params()


@pytest.fixture
def rng():
    """Seeded generator so failures replay"""
    return SessionRng(1234, "test")


@pytest.fixture
def mock_keypair(params, rng) -> HomKeyPair:
    return keygen(params, backend="mock", rng=rng.fork("keygen"))


@pytest.fixture(scope="session")
def paillier_keypair() -> HomKeyPair:
    """One 1024-bit Paillier key pair for the whole run; generation is the slow part"""
    return keygen(make_params(k=64), strength=TEST_PAILLIER_BITS, backend="paillier")


@pytest.fixture
async def channel_pair():
    """In-process (client, server) endpoints, closed after the test"""
    client, server = LocalChannel.pair()
    yield client, server
    await client.close()
    await server.close()
