"""Session configuration and named parameter profiles"""

from enum import Enum, IntEnum
from typing import Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from fpm.channel import DEFAULT_MAX_FRAME_SIZE, RECONNECT_DELAY
from fpm.core import FuzzyParams
from fpm.errors import ParameterError
from fpm.homcrypt import DEFAULT_PAILLIER_BITS, TEST_PAILLIER_BITS


class ProtocolId(IntEnum):
    ORIGINAL = 0x01
    POLYNOMIAL = 0x02
    SIMPLE_SS = 0x03
    IMPROVED_SS = 0x04
    HAMMING = 0x05

    @property
    def cli_name(self) -> str:
        return self.name.lower().replace("_", "-")

    @classmethod
    def from_name(cls, name: str) -> "ProtocolId":
        for member in cls:
            if member.cli_name == name:
                return member
        raise ParameterError(f"Unknown protocol '{name}', expected one of {[m.cli_name for m in cls]}")


class Polarity(str, Enum):
    """Reading of the per-letter equality indicator in the Hamming protocol."""

    AGREEMENT = "agreement"
    DISTANCE = "distance"


Backend = Literal["mock", "paillier"]

DEFAULT_K = 64

PROFILES: Dict[str, Dict[str, int]] = {
    "default": {"k": DEFAULT_K, "key_bits": DEFAULT_PAILLIER_BITS},
    "test": {"k": DEFAULT_K, "key_bits": TEST_PAILLIER_BITS},
}


class SessionConfig(BaseModel):
    """Everything both endpoints must agree on, plus local transport settings."""

    model_config = ConfigDict(frozen=True)

    protocol: ProtocolId
    params: FuzzyParams
    backend: Backend = "mock"
    key_bits: int = Field(default=DEFAULT_PAILLIER_BITS, ge=64)
    seed: Optional[int] = None
    eqm: int = Field(default=1, ge=1, le=2, description="equality-matrix subroutine for hamming")
    polarity: Polarity = Polarity.AGREEMENT
    original_remedy: bool = True
    improved_early_exit: bool = True
    max_frame_size: int = Field(default=DEFAULT_MAX_FRAME_SIZE, ge=64)
    connect_attempts: int = Field(default=5, ge=1)
    connect_backoff: float = Field(default=RECONNECT_DELAY, ge=0)

    def with_params(self, params: FuzzyParams) -> "SessionConfig":
        return self.model_copy(update={"params": params})


def profile(name: str) -> Dict[str, int]:
    try:
        return dict(PROFILES[name])
    except KeyError:
        raise ParameterError(f"Unknown profile '{name}', expected one of {sorted(PROFILES)}") from None
