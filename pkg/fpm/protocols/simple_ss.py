"""
Simple secret-sharing protocol.

The client encrypts every letter of every word. For each pair (X_i, Y_j) the
server draws a fresh key sk_j, seals Y_j under it, splits sk_j into t-of-T
shares and returns v_w = (E(x_i^w) - E(y_j^w)) * r_w + E(share_w). Positions
where the letters agree carry a clean share; the client tries every t-subset.
"""

import itertools
import logging
from typing import FrozenSet, Iterator, List, Optional, Sequence, Set

from fpm.config import ProtocolId
from fpm.core import FuzzyParams, Word, match_t, prefix_valid
from fpm.homcrypt import Ciphertext
from fpm.lss import Share, SharingParams, reconstruct, share
from fpm.protocols.base import ClientParty, ServerParty, register
from fpm.symenc import SealedWord, SymKey, sym_dec, sym_enc, sym_keygen
from fpm.wire import MsgType, PayloadWriter

logger = logging.getLogger("protocols")


def open_candidate(z: int, sealed: SealedWord, params: FuzzyParams, prefix_bits: int = 0) -> Optional[Word]:
    """Treat a reconstructed value as a word key and try to open `sealed` with it."""
    if not prefix_valid(z, params.key_bits):
        return None
    payload = sym_dec(SymKey.from_ring_value(z, params.key_bits), sealed, params.payload_bits, prefix_bits)
    if payload is None:
        return None
    return params.decode(payload.value)


def search_subsets(shares: Sequence[Share], extra: Sequence[Share], sharing: SharingParams, t: int) -> Iterator[int]:
    """Reconstructions from every t-subset of `shares`, each completed with `extra`."""
    for subset in itertools.combinations(shares, t):
        yield reconstruct([*subset, *extra], sharing)


class SimpleSsClient(ClientParty):
    protocol = ProtocolId.SIMPLE_SS

    async def execute(self) -> FrozenSet[Word]:
        pk = self.public_key
        writer = PayloadWriter()
        for x in self.words:
            for letter in x:
                writer.ciphertext(pk.encrypt(letter, self.rng).to_bytes())
        await self.send(MsgType.SS_LETTERS, writer)

        assert self.keypair is not None
        params = self.params
        sharing = SharingParams(params.t, params.T, self.ring)
        matched: Set[Word] = set()
        for x in self.words:
            for _ in range(params.n_S):
                reader = await self.expect(MsgType.SS_MATCH)
                sealed = SealedWord.from_bytes(reader.sealed())
                values = [self.keypair.private.decrypt(pk.ciphertext_from_bytes(reader.ciphertext())) for _ in x]
                reader.finish()
                shares = [Share(w, v) for w, v in enumerate(values, start=1)]
                for z in search_subsets(shares, [], sharing, params.t):
                    self.diagnostics["reconstructions"] += 1
                    word = open_candidate(z, sealed, params)
                    if word is None:
                        continue
                    if match_t(word, x, params.t):
                        matched.add(word)
                        break
                    self.diagnostics["false_candidates"] += 1
        return frozenset(matched)


class SimpleSsServer(ServerParty):
    protocol = ProtocolId.SIMPLE_SS

    async def execute(self) -> None:
        pk = self.public_key
        params = self.params
        reader = await self.expect(MsgType.SS_LETTERS)
        letters: List[List[Ciphertext]] = []
        for _ in range(params.n_C):
            letters.append([pk.ciphertext_from_bytes(reader.ciphertext()) for _ in range(params.T)])
        reader.finish()

        sharing = SharingParams(params.t, params.T, self.ring)
        for encrypted_x in letters:
            for y in self.words:
                # fresh key and shares for every pair
                key = sym_keygen(params.key_bits, self.rng)
                sealed = sym_enc(key, params.encode(y), self.rng)
                shares = share(key.to_ring_value(), sharing, self.rng)
                self.diagnostics["sharings"] += 1
                writer = PayloadWriter().sealed(sealed.to_bytes())
                for c, letter, s in zip(encrypted_x, y, shares):
                    difference = pk.sub(c, pk.encrypt_constant(letter))
                    v = pk.add(pk.scalar_mul(difference, self.fresh_blinder()), pk.encrypt(s.value, self.rng))
                    writer.ciphertext(v.to_bytes())
                await self.send(MsgType.SS_MATCH, writer)


register(SimpleSsClient, SimpleSsServer)
