"""
The original three-letter protocol, kept to demonstrate that it leaks.

Only T = 3, t = 2. The client draws a random r_i per word and sends encrypted
polynomials P_1, P_2, P_3 with P_w(x_i^w) = r_i. For every Y_j the server
returns E(r * (P_a(y_j^a) - P_b(y_j^b)) + Y_j) for the position pairs
(1, 2), (2, 3) and (1, 3). When two client words share a letter at some
position the constraints contradict each other; the remedy merges their r
values, which lets words built from letters of different client words decrypt.
"""

import logging
from typing import Dict, FrozenSet, List, Set, Tuple

from fpm.config import ProtocolId
from fpm.core import Word
from fpm.encpoly import EncryptedPolynomial, enc_poly, eval_encrypted, interpolate
from fpm.errors import ParameterError, ProtocolError, UndefinedInterpolationError
from fpm.protocols.base import ClientParty, ServerParty, register
from fpm.protocols.improved_ss import pad_points
from fpm.wire import MsgType, PayloadWriter

logger = logging.getLogger("protocols")

POSITION_PAIRS: Tuple[Tuple[int, int], ...] = ((0, 1), (1, 2), (0, 2))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def _require_three_two(T: int, t: int) -> None:
    if (T, t) != (3, 2):
        raise ParameterError(f"The original protocol is defined for T=3, t=2 only, got T={T}, t={t}")


def word_groups(words: List[Word], remedy: bool) -> List[int]:
    """
    Group representative of every client word.

    Words sharing a letter at any position must share their random value.
    Without the remedy such a collision is reported instead of merged.
    """
    groups = _UnionFind(len(words))
    for w in range(len(words[0])):
        first_at: Dict[int, int] = {}
        for i, x in enumerate(words):
            letter = x[w]
            if letter not in first_at:
                first_at[letter] = i
                continue
            if not remedy:
                raise UndefinedInterpolationError(
                    f"Words {words[first_at[letter]]} and {x} share letter {letter} at position {w + 1}: "
                    f"P_{w + 1} is undefined"
                )
            groups.union(first_at[letter], i)
    return [groups.find(i) for i in range(len(words))]


class OriginalClient(ClientParty):
    protocol = ProtocolId.ORIGINAL

    def check_preconditions(self) -> None:
        _require_three_two(self.params.T, self.params.t)

    async def execute(self) -> FrozenSet[Word]:
        pk = self.public_key
        ring = self.ring
        params = self.params
        groups = word_groups(self.words, self.config.original_remedy)
        merged = len(groups) - len(set(groups))
        if merged:
            self.diagnostics["merged_words"] += merged
            logger.warning(f"client: merged the random values of {merged} word(s) to keep the polynomials defined")
        r_of: Dict[int, int] = {g: ring.random(self.rng) for g in sorted(set(groups))}

        writer = PayloadWriter()
        for w in range(params.T):
            points: Dict[int, int] = {}
            for x, g in zip(self.words, groups):
                points.setdefault(x[w], r_of[g])
            padded = list(points.items())
            pad_points(padded, len(padded) + 1, params.domain_size, ring, self.rng)
            writer.poly(enc_poly(pk, interpolate(padded, ring), self.rng).to_bytes())
        await self.send(MsgType.ORIG_POLYS, writer)

        reader = await self.expect(MsgType.ORIG_RESPONSES)
        assert self.keypair is not None
        learned: Set[Word] = set()
        while not reader.exhausted:
            value = self.keypair.private.decrypt(pk.ciphertext_from_bytes(reader.ciphertext()))
            self.diagnostics["decrypted"] += 1
            word = params.decode(value)
            if word is None:
                continue
            learned.add(word)
        dissimilar = [w for w in learned if not self.is_similar(w)]
        self.diagnostics["similar"] = len(learned) - len(dissimilar)
        self.diagnostics["dissimilar"] = len(dissimilar)
        if dissimilar:
            logger.warning(f"client: learned {len(dissimilar)} server word(s) that match none of its words")
        return frozenset(learned)


class OriginalServer(ServerParty):
    protocol = ProtocolId.ORIGINAL

    def check_preconditions(self) -> None:
        _require_three_two(self.params.T, self.params.t)

    async def execute(self) -> None:
        pk = self.public_key
        reader = await self.expect(MsgType.ORIG_POLYS)
        polys: List[EncryptedPolynomial] = [EncryptedPolynomial.from_bytes(pk, reader.poly()) for _ in range(3)]
        reader.finish()
        for poly in polys:
            if poly.degree > self.params.n_C:
                raise ProtocolError(f"Position polynomial of degree {poly.degree} for {self.params.n_C} words")

        writer = PayloadWriter()
        for y in self.words:
            at_y = [eval_encrypted(pk, poly, letter) for poly, letter in zip(polys, y)]
            payload = self.params.encode(y).value
            for a, b in POSITION_PAIRS:
                difference = pk.sub(at_y[a], at_y[b])
                blinded = pk.scalar_mul(difference, self.fresh_blinder())
                writer.ciphertext(pk.add(blinded, pk.encrypt(payload, self.rng)).to_bytes())
        await self.send(MsgType.ORIG_RESPONSES, writer)


register(OriginalClient, OriginalServer)
