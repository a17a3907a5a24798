"""
Leak demonstration on the original protocol.

Client {[1,2,3],[1,4,5]} and server {[5,4,3]} with t = 2: no server word
matches, yet the original protocol hands [5,4,3] to the client because the two
client words share their first letter. The fixed protocols run on the same
input and must return exactly the plaintext answer.
"""

import logging
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel

from fpm.config import DEFAULT_K, Backend, ProtocolId, SessionConfig
from fpm.core import FuzzyParams, Word, as_words, oracle_intersection
from fpm.homcrypt import TEST_PAILLIER_BITS
from fpm.protocols.base import run_session

logger = logging.getLogger("attack")

ATTACK_CLIENT: Tuple[Tuple[int, ...], ...] = ((1, 2, 3), (1, 4, 5))
ATTACK_SERVER: Tuple[Tuple[int, ...], ...] = ((5, 4, 3),)
ATTACK_DOMAIN = 10

# (label, protocol, equality-matrix version)
DEMO_RUNS: Tuple[Tuple[str, ProtocolId, int], ...] = (
    ("original", ProtocolId.ORIGINAL, 1),
    ("polynomial", ProtocolId.POLYNOMIAL, 1),
    ("simple-ss", ProtocolId.SIMPLE_SS, 1),
    ("improved-ss", ProtocolId.IMPROVED_SS, 1),
    ("hamming-v1", ProtocolId.HAMMING, 1),
    ("hamming-v2", ProtocolId.HAMMING, 2),
)


class AttackRow(BaseModel):
    protocol: str
    applicable: bool = True
    output: List[str] = []
    leaked: List[str] = []
    missing: List[str] = []

    @property
    def leaks(self) -> bool:
        return bool(self.leaked)

    @property
    def status(self) -> str:
        if not self.applicable:
            return "n/a"
        if self.leaked:
            return "LEAK"
        return "ok" if not self.missing else "INCOMPLETE"


class AttackReport(BaseModel):
    client: List[str]
    server: List[str]
    t: int
    swap_roles: bool
    oracle: List[str]
    rows: List[AttackRow]

    def row(self, protocol: str) -> AttackRow:
        return next(r for r in self.rows if r.protocol == protocol)

    @property
    def original_leaks(self) -> Optional[bool]:
        original = self.row("original")
        return original.leaks if original.applicable else None

    @property
    def fixed_protocols_leak(self) -> bool:
        return any(r.leaks for r in self.rows if r.protocol != "original")

    @property
    def fixed_protocols_exact(self) -> bool:
        return all(r.status == "ok" for r in self.rows if r.protocol != "original")

    def summary(self) -> str:
        original = {True: "yes", False: "no", None: "n/a"}[self.original_leaks]
        fixed = "yes" if self.fixed_protocols_leak else "no"
        return f"ORIGINAL LEAKS: {original}; fixed protocols leak: {fixed}"

    def render(self) -> str:
        lines = [
            f"client: {' '.join(self.client)}",
            f"server: {' '.join(self.server)}",
            f"t={self.t}  oracle: {{{', '.join(self.oracle)}}}",
            "",
        ]
        for r in self.rows:
            output = "-" if not r.applicable else "{" + ", ".join(r.output) + "}"
            lines.append(f"  {r.protocol:<12} {r.status:<10} output {output}")
        lines.extend(["", self.summary()])
        return "\n".join(lines)


def _names(words: Sequence[Word]) -> List[str]:
    return [str(w) for w in sorted(words)]


async def attack_demo(
    t: int = 2,
    swap_roles: bool = False,
    backend: Backend = "mock",
    key_bits: int = TEST_PAILLIER_BITS,
    k: int = DEFAULT_K,
    seed: Optional[int] = None,
) -> AttackReport:
    """
    Run every protocol on the leak instance.

    Args:
        t: Match threshold; the original protocol only runs for t = 2
        swap_roles: Exchange the client and server sets
        backend: Homomorphic backend
        key_bits: Modulus size for the Paillier backend
        k: Statistical security parameter
        seed: Seed for every session

    Returns:
        Per-protocol outputs compared with the plaintext answer
    """
    client, server = as_words(ATTACK_CLIENT), as_words(ATTACK_SERVER)
    if swap_roles:
        client, server = server, client
    oracle = oracle_intersection(client, server, t)
    params = FuzzyParams(n_C=len(client), n_S=len(server), T=3, t=t, domain_size=ATTACK_DOMAIN, k=k)

    rows = []
    for label, protocol, eqm in DEMO_RUNS:
        if protocol is ProtocolId.ORIGINAL and t != 2:
            rows.append(AttackRow(protocol=label, applicable=False))
            continue
        config = SessionConfig(
            protocol=protocol, params=params, backend=backend, key_bits=key_bits, seed=seed, eqm=eqm
        )
        outcome, _ = await run_session(config, client, server)
        rows.append(
            AttackRow(
                protocol=label,
                output=_names(outcome.matched),
                leaked=_names(outcome.matched - oracle),
                missing=_names(oracle - outcome.matched),
            )
        )
        logger.info(f"{label}: output {_names(outcome.matched)} against oracle {_names(oracle)}")

    report = AttackReport(
        client=_names(client), server=_names(server), t=t, swap_roles=swap_roles, oracle=_names(oracle), rows=rows
    )
    if report.original_leaks:
        logger.warning(f"original protocol leaked {report.row('original').leaked}")
    return report
