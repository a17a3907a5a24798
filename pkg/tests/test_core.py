"""Tests for words, encodings, combinations and the plaintext oracle"""

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from fpm.core import (
    Combination,
    FuzzyParams,
    Word,
    agreement_counts,
    combinations,
    decode_word,
    encode_word,
    equality_matrix_plain,
    letter_bits,
    match_t,
    oracle_intersection,
    prefix_valid,
    select,
)
from fpm.errors import ParameterError
from tests.helpers import ATTACK_CLIENT, ATTACK_SERVER, make_params, words


@pytest.mark.parametrize("domain_size,bits", [(2, 1), (3, 2), (4, 2), (10, 4), (16, 4), (17, 5)])
def test_letter_bits(domain_size, bits):
    assert letter_bits(domain_size) == bits


def test_letter_bits_rejects_tiny_domain():
    with pytest.raises(ParameterError):
        letter_bits(1)


def test_params_reject_threshold_above_length():
    with pytest.raises(ValidationError):
        FuzzyParams(n_C=1, n_S=1, T=3, t=4, domain_size=10)


def test_params_capacity():
    params = make_params(T=3, domain_size=10, k=32)
    assert params.payload_bits == 12
    assert params.key_bits == 32
    assert params.ring_bits_required == 64
    assert params.n_combinations == 3


def test_word_validation():
    with pytest.raises(ParameterError):
        Word(())
    with pytest.raises(ParameterError):
        Word((1, -2))
    assert str(Word((5, 4, 3))) == "[5,4,3]"


def test_check_word_rejects_out_of_domain_letter():
    params = make_params(domain_size=10)
    with pytest.raises(ParameterError):
        params.check_word(Word((1, 2, 10)))
    with pytest.raises(ParameterError):
        params.check_word(Word((1, 2)))


def test_encode_is_positional():
    assert encode_word(Word((1, 2, 3)), 10).value == 123
    assert encode_word(Word((1, 2, 3)), 10).width == 12


@given(st.lists(st.integers(min_value=0, max_value=6), min_size=1, max_size=6))
def test_decode_inverts_encode(letters):
    word = Word(tuple(letters))
    assert decode_word(encode_word(word, 7).value, len(letters), 7) == word


def test_decode_rejects_non_words():
    # 12 fits in 4 bits but is not a single base-10 letter
    assert decode_word(12, 1, 10) is None
    assert decode_word(1 << 12, 3, 10) is None
    assert decode_word(2**100, 3, 10) is None


def test_prefix_valid():
    assert prefix_valid(0, 8)
    assert prefix_valid(255, 8)
    assert not prefix_valid(256, 8)
    assert not prefix_valid(-1, 8)


@pytest.mark.parametrize(
    "x,y,t,expected",
    [
        ([1, 2, 3], [1, 2, 9], 2, True),
        ([1, 2, 3], [9, 9, 3], 2, False),
        ([1, 2, 3], [5, 4, 3], 1, True),
        ([1, 2, 3], [1, 2, 3], 3, True),
    ],
)
def test_match_t(x, y, t, expected):
    assert match_t(Word(tuple(x)), Word(tuple(y)), t) is expected


def test_match_t_rejects_bad_threshold():
    with pytest.raises(ParameterError):
        match_t(Word((1, 2)), Word((1, 2)), 3)
    with pytest.raises(ParameterError):
        match_t(Word((1, 2)), Word((1, 2, 3)), 1)


def test_combinations_lexicographic():
    assert [c.indices for c in combinations(3, 2)] == [(1, 2), (1, 3), (2, 3)]
    assert len(combinations(5, 3)) == 10
    with pytest.raises(ParameterError):
        combinations(3, 4)


def test_combination_validation():
    with pytest.raises(ParameterError):
        Combination((2, 1))
    with pytest.raises(ParameterError):
        Combination((0, 1))
    with pytest.raises(ParameterError):
        select(Combination((1, 4)), Word((1, 2, 3)), 10)


def test_select_picks_positions():
    encoding = select(Combination((1, 3)), Word((1, 2, 3)), 10)
    assert encoding.value == 13
    assert encoding.width == 8


def test_attack_instance_oracle():
    assert oracle_intersection(ATTACK_CLIENT, ATTACK_SERVER, 2) == frozenset()
    assert oracle_intersection(ATTACK_CLIENT, ATTACK_SERVER, 1) == words([5, 4, 3])


def test_equality_matrix_plain_shape():
    xs = [Word((1, 2, 3)), Word((1, 4, 5))]
    ys = [Word((5, 4, 3))]
    matrix = equality_matrix_plain(xs, ys)
    assert matrix.shape == (3, 2, 1)
    assert matrix[:, 0, 0].tolist() == [False, False, True]
    assert matrix[:, 1, 0].tolist() == [False, True, False]
    assert agreement_counts(xs, ys).tolist() == [[1], [1]]


@given(
    st.lists(st.lists(st.integers(0, 3), min_size=3, max_size=3), min_size=1, max_size=5),
    st.lists(st.lists(st.integers(0, 3), min_size=3, max_size=3), min_size=1, max_size=5),
    st.integers(1, 3),
)
def test_oracle_matches_brute_force(client, server, t):
    expected = frozenset(
        Word(tuple(y)) for y, x in itertools.product(server, client) if sum(a == b for a, b in zip(x, y)) >= t
    )
    assert oracle_intersection(client, server, t) == expected


def test_oracle_empty_sets():
    assert oracle_intersection([], [[1, 2]], 1) == frozenset()
    assert equality_matrix_plain([], [Word((1, 2))]).shape == (2, 0, 1)
    assert np.all(agreement_counts([Word((1, 2))], [Word((1, 2))]) == 2)
