"""Tests for the encrypted equality matrix"""

import numpy as np
import pytest

from fpm.core import Word, equality_matrix_plain
from fpm.datasets import random_instance
from fpm.errors import ParameterError
from fpm.protocols import compute_equality_matrix
from fpm.rng import SessionRng


def decrypt_matrix(matrix, keypair):
    return np.array(
        [[[keypair.private.decrypt(c) for c in row] for row in plane] for plane in matrix],
        dtype=np.int64,
    )


@pytest.mark.parametrize("version", [1, 2])
@pytest.mark.parametrize("seed", [1, 2, 3])
async def test_matrix_matches_plaintext(version, seed, mock_keypair):
    instance = random_instance(3, 4, 3, 2, 4, SessionRng(seed, "eq"))
    matrix, _, _ = await compute_equality_matrix(version, instance.client, instance.server, 4, mock_keypair, seed)
    expected = equality_matrix_plain(instance.client, instance.server).astype(np.int64)
    assert np.array_equal(decrypt_matrix(matrix, mock_keypair), expected)


@pytest.mark.parametrize("x,y,eq", [(0, 0, 1), (0, 1, 0), (1, 1, 1), (1, 0, 0)])
@pytest.mark.parametrize("version", [1, 2])
async def test_binary_domain_truth_table(version, x, y, eq, mock_keypair):
    """Test single-letter words over |D|=2 for both subroutines"""
    for seed in range(4):
        matrix, _, _ = await compute_equality_matrix(version, [Word((x,))], [Word((y,))], 2, mock_keypair, seed)
        assert mock_keypair.private.decrypt(matrix[0][0][0]) == eq


async def test_v1_unary_vector_count(mock_keypair):
    client = [Word((0, 1, 2)), Word((3, 3, 3))]
    _, client_channel, _ = await compute_equality_matrix(1, client, [Word((0, 0, 0))], 4, mock_keypair, 1)
    assert client_channel.stats.ciphertexts_c2s == 24
    assert client_channel.stats.ot_invocations == 0


async def test_v2_transfer_count(mock_keypair):
    client = [Word((0, 1)), Word((1, 1))]
    server = [Word((0, 0)), Word((1, 0)), Word((1, 1))]
    _, client_channel, server_channel = await compute_equality_matrix(2, client, server, 3, mock_keypair, 1)
    for stats in (client_channel.stats, server_channel.stats):
        assert stats.ot_invocations == 2 * 3 * 2
        assert stats.ot_ciphertexts == 12 * 4
        assert stats.ciphertexts_c2s == 12


async def test_unknown_version(mock_keypair):
    with pytest.raises(ParameterError):
        await compute_equality_matrix(3, [Word((0,))], [Word((0,))], 2, mock_keypair)
