"""
Linear d-out-of-m secret sharing over the plaintext ring.

The secret sits at x = 0 and shares at x = 1..m. Sharing may pin some share
values in advance; the polynomial is then interpolated through the secret, the
pinned points and fresh uniform points at unused indices until d points are
fixed, and evaluated at every index.
"""

import struct
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from fpm.encpoly import eval_plain, interpolate, lagrange_at
from fpm.errors import DecodeError, OverConstrainedError, ParameterError
from fpm.ring import Ring
from fpm.rng import SessionRng
from fpm.wire import pack_int, unpack_int

Fixed = Union[Mapping[int, int], Iterable[Tuple[int, int]]]


@dataclass(frozen=True)
class SharingParams:
    d: int
    m: int
    ring: Ring

    def __post_init__(self) -> None:
        if not 1 <= self.d <= self.m:
            raise ParameterError(f"Need 1 <= d <= m, got d={self.d}, m={self.m}")
        if self.m >= self.ring.order:
            raise ParameterError(f"{self.m} shares do not fit in a ring of order {self.ring.order}")

    def check_index(self, index: int) -> int:
        if not 1 <= index <= self.m:
            raise ParameterError(f"Share index {index} outside [1, {self.m}]")
        return index


@dataclass(frozen=True)
class Share:
    index: int
    value: int

    def to_bytes(self) -> bytes:
        """2-byte big-endian index followed by the packed ring element."""
        return struct.pack(">H", self.index) + pack_int(self.value)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Share":
        if len(data) < 2:
            raise DecodeError("Truncated share")
        (index,) = struct.unpack(">H", data[:2])
        value, end = unpack_int(data, 2)
        if end != len(data):
            raise DecodeError(f"{len(data) - end} trailing bytes after share")
        return cls(index, value)


def _fixed_points(fixed: Optional[Fixed], params: SharingParams) -> Dict[int, int]:
    if fixed is None:
        return {}
    items = fixed.items() if isinstance(fixed, Mapping) else fixed
    points: Dict[int, int] = {}
    for index, value in items:
        params.check_index(index)
        if index in points:
            raise ParameterError(f"Share index {index} fixed twice")
        points[index] = params.ring.element(value)
    return points


def share(secret: int, params: SharingParams, rng: SessionRng, fixed: Optional[Fixed] = None) -> List[Share]:
    """
    Split `secret` into m shares, any d of which reconstruct it.

    Args:
        secret: Ring element to share
        params: Threshold, share count and ring
        rng: Session random generator
        fixed: Share values that must appear at the given indices

    Returns:
        Shares at indices 1..m
    """
    ring = params.ring
    points = _fixed_points(fixed, params)
    if len(points) >= params.d:
        raise OverConstrainedError(f"{len(points)} fixed shares leave no freedom for a {params.d}-of-{params.m} sharing")
    free_indices = (x for x in range(1, params.m + 1) if x not in points)
    while len(points) < params.d - 1:
        points[next(free_indices)] = ring.random(rng)
    poly = interpolate([(0, ring.element(secret)), *points.items()], ring)
    return [Share(x, eval_plain(poly, x)) for x in range(1, params.m + 1)]


def reconstruct(shares: Sequence[Share], params: SharingParams) -> int:
    """Lagrange interpolation at 0 through the first d shares given."""
    if len(shares) < params.d:
        raise ParameterError(f"Need {params.d} shares to reconstruct, got {len(shares)}")
    chosen = shares[: params.d]
    indices = [params.check_index(s.index) for s in chosen]
    if len(set(indices)) != len(indices):
        raise ParameterError(f"Duplicate share indices {indices}")
    return lagrange_at([(s.index, s.value) for s in chosen], 0, params.ring)


def add_sharewise(a: Sequence[Share], b: Sequence[Share], ring: Ring) -> List[Share]:
    if [s.index for s in a] != [s.index for s in b]:
        raise ParameterError("Share vectors have different indices")
    return [Share(x.index, ring.add(x.value, y.value)) for x, y in zip(a, b)]
