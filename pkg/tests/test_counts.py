"""Channel counters against the closed-form message counts"""

import pytest

from fpm.bench import expected_counts
from fpm.config import ProtocolId
from fpm.datasets import generate_instance
from fpm.protocols import run_session
from fpm.rng import SessionRng
from tests.helpers import make_config, make_params, measured


@pytest.mark.parametrize(
    "protocol,eqm",
    [
        (ProtocolId.POLYNOMIAL, 1),
        (ProtocolId.SIMPLE_SS, 1),
        (ProtocolId.IMPROVED_SS, 1),
        (ProtocolId.HAMMING, 1),
        (ProtocolId.HAMMING, 2),
    ],
)
@pytest.mark.parametrize("n_C,n_S,T,t,domain_size", [(2, 2, 3, 2, 10), (3, 2, 4, 2, 6), (2, 4, 4, 3, 8)])
async def test_counters_match_closed_form(protocol, eqm, n_C, n_S, T, t, domain_size):
    instance = generate_instance(n_C, n_S, T, t, domain_size, 1, SessionRng(n_C * n_S, "counts"))
    params = instance.params(32)
    config = make_config(protocol, params, eqm=eqm)
    outcome, summary = await run_session(config, instance.client, instance.server)
    expected = expected_counts(protocol, params, eqm)
    assert measured(outcome.stats) == expected
    # both endpoints account the whole session
    assert measured(summary.stats) == expected


@pytest.mark.parametrize(
    "protocol,eqm,c2s,s2c",
    [
        (ProtocolId.POLYNOMIAL, 1, 9, 6),
        (ProtocolId.SIMPLE_SS, 1, 6, 12),
        (ProtocolId.IMPROVED_SS, 1, 6, 9),
        (ProtocolId.HAMMING, 1, 60, 8),
        (ProtocolId.HAMMING, 2, 12, 8),
    ],
)
def test_closed_forms_for_two_by_two(protocol, eqm, c2s, s2c):
    counts = expected_counts(protocol, make_params(n_C=2, n_S=2, T=3, t=2, domain_size=10), eqm)
    assert (counts["ciphertexts_c2s"], counts["ciphertexts_s2c"]) == (c2s, s2c)


def test_original_has_no_closed_form():
    assert expected_counts(ProtocolId.ORIGINAL, make_params()) is None


def test_unary_vector_count():
    counts = expected_counts(ProtocolId.HAMMING, make_params(n_C=2, n_S=1, T=3, domain_size=4), 1)
    assert counts["ciphertexts_c2s"] == 24


async def test_hamming_v2_transfer_count():
    """Test n^2 * T transfers for the oblivious-transfer equality matrix"""
    instance = generate_instance(3, 3, 3, 2, 10, 1, SessionRng(2, "counts"))
    config = make_config(ProtocolId.HAMMING, instance.params(32), eqm=2)
    outcome, _ = await run_session(config, instance.client, instance.server)
    assert outcome.stats.ot_invocations == 3 * 3 * 3
    assert outcome.stats.ot_ciphertexts == 27 * 11


async def test_improved_ss_clear_values():
    instance = generate_instance(2, 3, 3, 2, 10, 1, SessionRng(3, "counts"))
    config = make_config(ProtocolId.IMPROVED_SS, instance.params(32))
    outcome, _ = await run_session(config, instance.client, instance.server)
    # free shares, ticket tails, revealed evaluations
    assert outcome.stats.clear_values_s2c == 3 * 2 + 2 * 2 + 2 * 3
    assert outcome.stats.clear_values_c2s == 0
    assert outcome.stats.sealed_words == 3


async def test_byte_counters_match_transcript():
    instance = generate_instance(2, 2, 3, 2, 10, 1, SessionRng(4, "counts"))
    config = make_config(ProtocolId.SIMPLE_SS, instance.params(32))
    outcome, summary = await run_session(config, instance.client, instance.server)
    assert outcome.stats.bytes_c2s == summary.stats.bytes_c2s > 0
    assert outcome.stats.bytes_s2c == summary.stats.bytes_s2c > 0
    assert outcome.stats.frames == summary.stats.frames
    assert outcome.stats.rounds == summary.stats.rounds
