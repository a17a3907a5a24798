"""Tests for the homomorphic backends"""

import pytest

from fpm.errors import DecodeError, ParameterError, UsageError
from fpm.homcrypt import (
    MOCK_DEFAULT_PRIME,
    add_h,
    dec,
    enc,
    encrypt_constant,
    get_backend,
    keygen,
    mock_prime,
    public_key_from_bytes,
    public_key_to_bytes,
    rand_ring,
    scalar_mul_h,
    sub_h,
)
from fpm.rng import SessionRng
from tests.helpers import make_params


def test_mock_ring_is_mersenne_prime(mock_keypair):
    assert mock_keypair.ring.order == MOCK_DEFAULT_PRIME
    assert mock_keypair.backend == "mock"


def test_mock_prime_grows_with_capacity():
    assert mock_prime(126) == MOCK_DEFAULT_PRIME
    assert mock_prime(200) > 1 << 200


def test_mock_homomorphic_identities(mock_keypair, rng):
    """Test add, sub, scalar and constant encryption on 1000 random triples"""
    pk, sk = mock_keypair.public, mock_keypair.private
    ring = pk.ring
    for _ in range(1000):
        a, b, s = rand_ring(ring, rng), rand_ring(ring, rng), rand_ring(ring, rng)
        ca, cb = enc(pk, a, rng), enc(pk, b, rng)
        assert dec(sk, ca) == a
        assert dec(sk, add_h(pk, ca, cb)) == ring.add(a, b)
        assert dec(sk, sub_h(pk, ca, cb)) == ring.sub(a, b)
        assert dec(sk, scalar_mul_h(pk, ca, s)) == ring.mul(a, s)
        assert dec(sk, add_h(pk, ca, encrypt_constant(pk, b))) == ring.add(a, b)


def test_encryption_is_randomised(mock_keypair, rng):
    pk = mock_keypair.public
    c1, c2 = pk.encrypt(5, rng), pk.encrypt(5, rng)
    assert c1 != c2
    fresh = pk.rerandomize(c1, rng)
    assert fresh != c1
    assert mock_keypair.private.decrypt(fresh) == 5


def test_mock_keygen_is_reproducible():
    params = make_params()
    a = keygen(params, backend="mock", rng=SessionRng(3, "k"))
    b = keygen(params, backend="mock", rng=SessionRng(3, "k"))
    assert a.public == b.public


def test_ciphertexts_from_another_key_are_rejected(params, mock_keypair):
    other = keygen(params, backend="mock", rng=SessionRng(99, "other"))
    rng = SessionRng(1, "enc")
    foreign = other.public.encrypt(1, rng)
    with pytest.raises(UsageError):
        mock_keypair.public.add(mock_keypair.public.encrypt(1, rng), foreign)
    with pytest.raises(UsageError):
        mock_keypair.private.decrypt(foreign)


def test_plaintext_outside_ring(mock_keypair, rng):
    with pytest.raises(ParameterError):
        mock_keypair.public.encrypt(mock_keypair.ring.order, rng)
    with pytest.raises(ParameterError):
        mock_keypair.public.encrypt(-1, rng)


def test_public_key_bytes(mock_keypair, rng):
    data = public_key_to_bytes(mock_keypair.public)
    loaded = public_key_from_bytes(data)
    assert loaded == mock_keypair.public
    # ciphertexts made with the reloaded key decrypt under the original private key
    assert mock_keypair.private.decrypt(loaded.encrypt(42, rng)) == 42


@pytest.mark.parametrize("data", [b"", b"\x99abc", b"\x4d\x00\x00\x00\x01"])
def test_public_key_decode_errors(data):
    with pytest.raises(DecodeError):
        public_key_from_bytes(data)


def test_ciphertext_outside_space(mock_keypair):
    pk = mock_keypair.public
    too_big = (pk.ciphertext_modulus).to_bytes(32, "big").lstrip(b"\x00")
    with pytest.raises(DecodeError):
        pk.ciphertext_from_bytes(len(too_big).to_bytes(4, "big") + too_big)


def test_unknown_backend():
    with pytest.raises(ParameterError, match="Unknown backend"):
        get_backend("rsa")


def test_paillier_capacity_check():
    """Test that a modulus too small for the prefixed payload is refused"""
    with pytest.raises(ParameterError, match="cannot hold"):
        get_backend("paillier").keygen_bits(600, 512, SessionRng(1, "k"))


@pytest.mark.slow
def test_paillier_homomorphic_identities(paillier_keypair):
    """Test add, sub and scalar on 1000 random triples under a 1024-bit modulus"""
    pk, sk = paillier_keypair.public, paillier_keypair.private
    ring = pk.ring
    rng = SessionRng(8, "paillier")
    assert pk.ring.bits >= 1023
    for _ in range(1000):
        a, b, s = ring.random(rng), ring.random(rng), rng.randbits(64)
        ca, cb = pk.encrypt(a, rng), pk.encrypt(b, rng)
        assert sk.decrypt(pk.add(ca, cb)) == ring.add(a, b)
        assert sk.decrypt(pk.sub(ca, cb)) == ring.sub(a, b)
        assert sk.decrypt(pk.scalar_mul(ca, s)) == ring.mul(a, s)
    assert public_key_from_bytes(pk.to_bytes()) == pk


def test_spec_sized_mock_ring():
    """Test that a 30-bit payload with k=64 gets a ring of at least 94 bits"""
    params = make_params(T=6, domain_size=32, k=64)
    assert params.payload_bits == 30
    keypair = keygen(params, backend="mock", rng=SessionRng(1, "k"))
    assert keypair.ring.order >= 1 << 94


def test_small_paillier_modulus_refused():
    with pytest.raises(ParameterError):
        keygen(make_params(T=6, domain_size=32, k=64), strength=64, backend="paillier")


@pytest.mark.parametrize("a,b,s", [(5, 7, 3), (0, 0, 0), (3, 3, 1)])
def test_small_identities(mock_keypair, rng, a, b, s):
    pk, sk = mock_keypair.public, mock_keypair.private
    assert dec(sk, enc(pk, a, rng)) == a
    assert dec(sk, add_h(pk, enc(pk, a, rng), enc(pk, b, rng))) == a + b
    assert dec(sk, scalar_mul_h(pk, enc(pk, a, rng), s)) == a * s
    assert dec(sk, sub_h(pk, enc(pk, a, rng), enc(pk, a, rng))) == 0


def test_rand_ring_statistics(mock_keypair):
    """Test 10^4 draws for small values, parity balance and seeded replay"""
    ring = mock_keypair.ring
    rng = SessionRng(11, "draws")
    draws = [rand_ring(ring, rng) for _ in range(10_000)]
    assert not any(d < 1 << 30 for d in draws)
    odd = sum(d % 2 for d in draws)
    assert abs(odd - 5000) <= 5 * 50
    replay = SessionRng(11, "draws")
    assert [rand_ring(ring, replay) for _ in range(100)] == draws[:100]
