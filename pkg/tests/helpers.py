"""Builders shared by the test modules"""

from typing import Any, Optional, Sequence

from fpm.config import ProtocolId, SessionConfig
from fpm.core import FuzzyParams, as_words
from fpm.homcrypt import TEST_PAILLIER_BITS

# keeps every mock ring on the 127-bit Mersenne prime
TEST_K = 32

ATTACK_CLIENT = [[1, 2, 3], [1, 4, 5]]
ATTACK_SERVER = [[5, 4, 3]]

FIXED_PROTOCOLS = [ProtocolId.POLYNOMIAL, ProtocolId.SIMPLE_SS, ProtocolId.IMPROVED_SS, ProtocolId.HAMMING]


def make_params(
    n_C: int = 2, n_S: int = 2, T: int = 3, t: int = 2, domain_size: int = 10, k: int = TEST_K
) -> FuzzyParams:
    return FuzzyParams(n_C=n_C, n_S=n_S, T=T, t=t, domain_size=domain_size, k=k)


def make_config(protocol: ProtocolId, params: Optional[FuzzyParams] = None, **overrides: Any) -> SessionConfig:
    fields = {"seed": 7, "key_bits": TEST_PAILLIER_BITS}
    fields.update(overrides)
    return SessionConfig(protocol=protocol, params=params or make_params(), **fields)


def config_for(
    protocol: ProtocolId,
    client: Sequence[Sequence[int]],
    server: Sequence[Sequence[int]],
    t: int,
    domain_size: int = 10,
    **overrides: Any,
) -> SessionConfig:
    """Config whose parameters are read off the two word lists."""
    params = make_params(len(client), len(server), len(client[0]), t, domain_size)
    return make_config(protocol, params, **overrides)


def words(*rows: Sequence[int]) -> frozenset:
    return frozenset(as_words(rows))



COUNTERS = [
    "ciphertexts_c2s",
    "ciphertexts_s2c",
    "clear_values_c2s",
    "clear_values_s2c",
    "sealed_words",
    "ot_invocations",
    "ot_ciphertexts",
]


def measured(stats: Any) -> dict:
    """The channel counters that have a closed form."""
    return {name: getattr(stats, name) for name in COUNTERS}
