"""
Polynomial protocol.

For every combination sigma of t positions the client sends the encrypted
polynomial whose roots are sigma(X_1)..sigma(X_nC). The server evaluates it at
sigma(Y_j), blinds the result with a fresh r and adds the encoded Y_j; the
value decrypts to Y_j exactly when sigma(Y_j) equals some sigma(X_i).
"""

import logging
from typing import FrozenSet, List, Set

from fpm.config import ProtocolId
from fpm.core import Word, combinations, select
from fpm.encpoly import EncryptedPolynomial, enc_poly, eval_encrypted, roots_poly
from fpm.errors import ProtocolError
from fpm.protocols.base import ClientParty, ServerParty, register
from fpm.wire import MsgType, PayloadWriter

logger = logging.getLogger("protocols")


class PolynomialClient(ClientParty):
    protocol = ProtocolId.POLYNOMIAL

    async def execute(self) -> FrozenSet[Word]:
        pk = self.public_key
        D = self.params.domain_size
        for sigma in combinations(self.params.T, self.params.t):
            roots = [select(sigma, x, D).value for x in self.words]
            encrypted = enc_poly(pk, roots_poly(roots, self.ring), self.rng)
            await self.send(MsgType.POLY_COMBINATION, PayloadWriter().poly(encrypted.to_bytes()))

        reader = await self.expect(MsgType.POLY_EVALUATIONS)
        assert self.keypair is not None
        matched: Set[Word] = set()
        while not reader.exhausted:
            value = self.keypair.private.decrypt(pk.ciphertext_from_bytes(reader.ciphertext()))
            self.diagnostics["decrypted"] += 1
            word = self.params.decode(value)
            if word is None:
                continue
            if self.is_similar(word):
                matched.add(word)
            else:
                self.diagnostics["false_candidates"] += 1
        return frozenset(matched)


class PolynomialServer(ServerParty):
    protocol = ProtocolId.POLYNOMIAL

    async def execute(self) -> None:
        pk = self.public_key
        D = self.params.domain_size
        sigmas = combinations(self.params.T, self.params.t)
        polys: List[EncryptedPolynomial] = []
        for _ in sigmas:
            reader = await self.expect(MsgType.POLY_COMBINATION)
            poly = EncryptedPolynomial.from_bytes(pk, reader.poly())
            reader.finish()
            if poly.degree != self.params.n_C:
                raise ProtocolError(f"Combination polynomial of degree {poly.degree}, expected {self.params.n_C}")
            polys.append(poly)

        writer = PayloadWriter()
        for sigma, poly in zip(sigmas, polys):
            for y in self.words:
                at_y = eval_encrypted(pk, poly, select(sigma, y, D).value)
                blinded = pk.scalar_mul(at_y, self.fresh_blinder())
                response = pk.add(blinded, pk.encrypt(self.params.encode(y).value, self.rng))
                writer.ciphertext(response.to_bytes())
        await self.send(MsgType.POLY_EVALUATIONS, writer)


register(PolynomialClient, PolynomialServer)
