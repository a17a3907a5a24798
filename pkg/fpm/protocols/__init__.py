"""
Two-party protocol state machines.

Importing this package registers every protocol with the session runner.
"""

from fpm.protocols import hamming, improved_ss, original, polynomial, simple_ss  # noqa: F401
from fpm.protocols.attack import AttackReport, attack_demo
from fpm.protocols.base import (
    ClientOutcome,
    ServerSummary,
    connect_session,
    parties_for,
    run_session,
    serve_session,
)
from fpm.protocols.hamming import compute_equality_matrix, equality_matrix_v1, equality_matrix_v2

__all__ = [
    "AttackReport",
    "ClientOutcome",
    "ServerSummary",
    "attack_demo",
    "compute_equality_matrix",
    "connect_session",
    "equality_matrix_v1",
    "equality_matrix_v2",
    "parties_for",
    "run_session",
    "serve_session",
]
