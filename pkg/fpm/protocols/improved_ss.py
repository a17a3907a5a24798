"""
Improved secret-sharing protocol.

The server owns the homomorphic key. It seals every Y_j under a fresh sk_j and
splits sk_j into a (T+1)-of-(2T+1-t) sharing whose position shares agree
whenever two server words agree on a letter. Position w's shares are hidden
in a polynomial P^w through the points (y_j^w, [s_j]_w), padded with random
points; the client evaluates P^w at its own letters under encryption. Ticket
sharings of zero, one per client word, are added before the server reveals the
blinded evaluations, so shares recovered for different client words never
combine into a valid secret.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Set, Tuple

from fpm.channel import Role
from fpm.config import ProtocolId
from fpm.core import Word, match_t
from fpm.encpoly import EncryptedPolynomial, enc_poly, eval_encrypted, interpolate
from fpm.errors import ProtocolError
from fpm.lss import Share, SharingParams, add_sharewise, share
from fpm.protocols.base import ClientParty, ServerParty, register
from fpm.protocols.simple_ss import open_candidate, search_subsets
from fpm.ring import Ring
from fpm.rng import SessionRng
from fpm.symenc import SealedWord, sym_enc, sym_keygen
from fpm.wire import MsgType, PayloadWriter

logger = logging.getLogger("protocols")


def sharing_params(T: int, t: int, ring: Ring) -> SharingParams:
    """(T+1)-of-(2T+1-t): T position shares plus T+1-t free shares."""
    return SharingParams(T + 1, 2 * T + 1 - t, ring)


@dataclass
class TicketShares:
    """A sharing of zero bound to one client word."""

    shares: List[Share]
    T: int

    @property
    def tail(self) -> List[Share]:
        return self.shares[self.T:]


def constrained_sharings(
    secrets: List[int], words: List[Word], sharing: SharingParams, rng: SessionRng
) -> List[List[Share]]:
    """
    Share every secret so that equal letters at a position get equal shares.

    Args:
        secrets: One secret per server word
        words: The server words, in the same order
        sharing: (T+1)-of-(2T+1-t) parameters
        rng: Session random generator

    Returns:
        One full share vector per word
    """
    share_at: List[Dict[int, int]] = [{} for _ in range(len(words[0]))]
    vectors = []
    for secret, y in zip(secrets, words):
        fixed = {w + 1: share_at[w][letter] for w, letter in enumerate(y) if letter in share_at[w]}
        assert len(fixed) < sharing.d, "position shares can never reach the threshold"
        shares = share(secret, sharing, rng, fixed)
        for w, letter in enumerate(y):
            share_at[w].setdefault(letter, shares[w].value)
        vectors.append(shares)
    return vectors


def position_points(words: List[Word], vectors: List[List[Share]], w: int) -> List[Tuple[int, int]]:
    """Deduplicated (letter, share) points of position w (0-based)."""
    points: Dict[int, int] = {}
    for y, shares in zip(words, vectors):
        points.setdefault(y[w], shares[w].value)
    return list(points.items())


def pad_points(points: List[Tuple[int, int]], target: int, domain_size: int, ring: Ring, rng: SessionRng) -> None:
    """Add random points outside the letter range until there are `target`."""
    used = {x for x, _ in points}
    while len(points) < target:
        x = ring.random(rng)
        if x < domain_size or x in used:
            continue
        used.add(x)
        points.append((x, ring.random(rng)))


class ImprovedSsServer(ServerParty):
    protocol = ProtocolId.IMPROVED_SS
    key_owner = Role.SERVER

    async def execute(self) -> None:
        pk = self.public_key
        assert self.keypair is not None
        params = self.params
        ring = self.ring
        T, t = params.T, params.t
        sharing = sharing_params(T, t, ring)

        sealed = PayloadWriter()
        keys = []
        for y in self.words:
            key = sym_keygen(params.key_bits, self.rng)
            keys.append(key.to_ring_value())
            sealed.sealed(sym_enc(key, params.encode(y), self.rng, prefix_bits=params.k).to_bytes())
        await self.send(MsgType.ISS_SEALED, sealed)

        vectors = constrained_sharings(keys, self.words, sharing, self.rng)
        self.diagnostics["sharings"] += len(vectors)
        self.artifacts["word_sharings"] = vectors
        free = PayloadWriter()
        for shares in vectors:
            for s in shares[T:]:
                free.share(s.to_bytes())
        await self.send(MsgType.ISS_FREE_SHARES, free)

        polys = PayloadWriter()
        for w in range(T):
            points = position_points(self.words, vectors, w)
            pad_points(points, params.n_S + 1, params.domain_size, ring, self.rng)
            poly = interpolate(points, ring)
            polys.poly(enc_poly(pk, poly, self.rng).to_bytes())
        await self.send(MsgType.ISS_POLYS, polys)

        reader = await self.expect(MsgType.ISS_BLINDED)
        private = self.keypair.private
        blinded = [
            [private.decrypt(pk.ciphertext_from_bytes(reader.ciphertext())) for _ in range(T)] for _ in range(params.n_C)
        ]
        reader.finish()

        tickets = [TicketShares(share(0, sharing, self.rng), T) for _ in range(params.n_C)]
        self.artifacts["tickets"] = tickets
        tails = PayloadWriter()
        for ticket in tickets:
            for s in ticket.tail:
                tails.share(s.to_bytes())
        await self.send(MsgType.ISS_TICKETS, tails)

        revealed = PayloadWriter()
        for values, ticket in zip(blinded, tickets):
            for w, value in enumerate(values):
                revealed.clear(ring.add(value, ticket.shares[w].value))
        await self.send(MsgType.ISS_REVEALED, revealed)


class ImprovedSsClient(ClientParty):
    protocol = ProtocolId.IMPROVED_SS
    key_owner = Role.SERVER

    def _read_tails(self, bodies: List[bytes], groups: int, sharing: SharingParams) -> List[List[Share]]:
        per_group = sharing.m - self.params.T
        shares = [Share.from_bytes(body) for body in bodies]
        if len(shares) != groups * per_group:
            raise ProtocolError(f"Received {len(shares)} free shares, expected {groups * per_group}")
        tails = [shares[g * per_group:(g + 1) * per_group] for g in range(groups)]
        expected = list(range(self.params.T + 1, sharing.m + 1))
        for tail in tails:
            if [s.index for s in tail] != expected:
                raise ProtocolError(f"Free share indices {[s.index for s in tail]}, expected {expected}")
        return tails

    async def execute(self) -> FrozenSet[Word]:
        pk = self.public_key
        params = self.params
        ring = self.ring
        T, t = params.T, params.t
        sharing = sharing_params(T, t, ring)

        reader = await self.expect(MsgType.ISS_SEALED)
        sealed = [SealedWord.from_bytes(reader.sealed()) for _ in range(params.n_S)]
        reader.finish()

        reader = await self.expect(MsgType.ISS_FREE_SHARES)
        bodies = []
        while not reader.exhausted:
            bodies.append(reader.share())
        word_tails = self._read_tails(bodies, params.n_S, sharing)

        reader = await self.expect(MsgType.ISS_POLYS)
        polys = [EncryptedPolynomial.from_bytes(pk, reader.poly()) for _ in range(T)]
        reader.finish()
        for poly in polys:
            if poly.degree != params.n_S:
                raise ProtocolError(f"Position polynomial of degree {poly.degree}, expected {params.n_S}")

        blinders: List[List[int]] = []
        writer = PayloadWriter()
        for x in self.words:
            row = []
            for poly, letter in zip(polys, x):
                r = self.fresh_blinder()
                row.append(r)
                writer.ciphertext(pk.add(eval_encrypted(pk, poly, letter), pk.encrypt(r, self.rng)).to_bytes())
            blinders.append(row)
        await self.send(MsgType.ISS_BLINDED, writer)

        reader = await self.expect(MsgType.ISS_TICKETS)
        bodies = []
        while not reader.exhausted:
            bodies.append(reader.share())
        ticket_tails = self._read_tails(bodies, params.n_C, sharing)

        reader = await self.expect(MsgType.ISS_REVEALED)
        recovered = [[Share(w, ring.sub(reader.clear(), r)) for w, r in enumerate(row, start=1)] for row in blinders]
        reader.finish()

        matched: Set[Word] = set()
        for x, shares, ticket_tail in zip(self.words, recovered, ticket_tails):
            for y_sealed, word_tail in zip(sealed, word_tails):
                extra = add_sharewise(word_tail, ticket_tail, ring)
                for z in search_subsets(shares, extra, sharing, t):
                    self.diagnostics["reconstructions"] += 1
                    word = open_candidate(z, y_sealed, params, prefix_bits=params.k)
                    if word is None:
                        continue
                    if not match_t(word, x, t):
                        self.diagnostics["false_candidates"] += 1
                        continue
                    matched.add(word)
                    if self.config.improved_early_exit:
                        break
        return frozenset(matched)


register(ImprovedSsClient, ImprovedSsServer)
