"""
Domain vocabulary for fuzzy private matching.

Letters are integers in [0, domain_size); a word is a fixed-length tuple of
letters. Two words match on t letters when they agree on at least t positions.
Words and letter combinations are embedded into the plaintext ring with a
base-|D| positional encoding; a valid payload is any value below 2^width, the
remaining k high bits of the ring acting as the zero prefix that random ring
elements fail with probability 2^-k.
"""

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from fpm.errors import ParameterError

logger = logging.getLogger("core")


def letter_bits(domain_size: int) -> int:
    """ceil(log2 |D|) for |D| >= 2."""
    if domain_size < 2:
        raise ParameterError(f"Domain size must be at least 2, got {domain_size}")
    return (domain_size - 1).bit_length()


class FuzzyParams(BaseModel):
    """Public parameters of one matching session."""

    model_config = ConfigDict(frozen=True)

    n_C: int = Field(ge=1, description="client set size")
    n_S: int = Field(ge=1, description="server set size")
    T: int = Field(ge=1, description="word length in letters")
    t: int = Field(ge=1, description="match threshold in letters")
    domain_size: int = Field(ge=2, description="alphabet size |D|")
    k: int = Field(default=64, ge=16, description="statistical security parameter")

    @model_validator(mode="after")
    def _check_threshold(self) -> "FuzzyParams":
        if self.t > self.T:
            raise ValueError(f"threshold t={self.t} exceeds word length T={self.T}")
        return self

    @property
    def letter_bits(self) -> int:
        return letter_bits(self.domain_size)

    @property
    def payload_bits(self) -> int:
        return self.T * self.letter_bits

    @property
    def key_bits(self) -> int:
        # symmetric keys are k bits long
        return self.k

    @property
    def ring_bits_required(self) -> int:
        """Ring capacity for a prefixed payload or a prefixed symmetric key."""
        return max(self.payload_bits, self.key_bits) + self.k

    @property
    def n_combinations(self) -> int:
        return comb(self.T, self.t)

    def check_word(self, word: "Word") -> "Word":
        if len(word) != self.T:
            raise ParameterError(f"Word {word} has {len(word)} letters, expected {self.T}")
        for letter in word:
            if letter >= self.domain_size:
                raise ParameterError(
                    f"Letter {letter} of {word} is outside the domain [0, {self.domain_size})"
                )
        return word

    def encode(self, word: "Word") -> "PayloadEncoding":
        return encode_word(self.check_word(word), self.domain_size)

    def decode(self, value: int) -> Optional["Word"]:
        return decode_word(value, self.T, self.domain_size)


@dataclass(frozen=True, order=True)
class Word:
    """A vector of letters; ordered and hashable so sets of words print sorted."""

    letters: Tuple[int, ...]

    def __post_init__(self) -> None:
        letters = tuple(int(x) for x in self.letters)
        if not letters:
            raise ParameterError("A word needs at least one letter")
        if any(x < 0 for x in letters):
            raise ParameterError(f"Letters must be non-negative, got {letters}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def of(cls, letters: Iterable[int]) -> "Word":
        return cls(tuple(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, index: int) -> int:
        return self.letters[index]

    def __str__(self) -> str:
        return "[" + ",".join(str(x) for x in self.letters) + "]"


def as_word(value: "Word | Sequence[int]") -> Word:
    return value if isinstance(value, Word) else Word.of(value)


def as_words(values: Iterable["Word | Sequence[int]"]) -> List[Word]:
    return [as_word(v) for v in values]


@dataclass(frozen=True)
class Combination:
    """t distinct 1-based positions in increasing order."""

    indices: Tuple[int, ...]

    def __post_init__(self) -> None:
        indices = tuple(int(i) for i in self.indices)
        if not indices:
            raise ParameterError("A combination needs at least one index")
        if indices[0] < 1 or any(b <= a for a, b in zip(indices, indices[1:])):
            raise ParameterError(f"Combination indices must be strictly increasing and >= 1: {indices}")
        object.__setattr__(self, "indices", indices)

    def check(self, T: int) -> "Combination":
        if self.indices[-1] > T:
            raise ParameterError(f"Combination {self.indices} does not fit words of length {T}")
        return self

    def __len__(self) -> int:
        return len(self.indices)


def combinations(T: int, t: int) -> List[Combination]:
    """All C(T, t) combinations in lexicographic order."""
    if not 1 <= t <= T:
        raise ParameterError(f"Need 1 <= t <= T, got t={t}, T={T}")
    return [Combination(c) for c in itertools.combinations(range(1, T + 1), t)]


@dataclass(frozen=True)
class PayloadEncoding:
    value: int
    width: int

    def __post_init__(self) -> None:
        if self.width < 0 or not 0 <= self.value < (1 << self.width):
            raise ParameterError(f"Payload {self.value} does not fit in {self.width} bits")


def prefix_valid(value: int, width: int) -> bool:
    """True when a ring value carries the zero prefix above `width` bits."""
    return 0 <= value < (1 << width)


def _positional(letters: Sequence[int], domain_size: int) -> int:
    value = 0
    for letter in letters:
        value = value * domain_size + letter
    return value


def match_t(x: Word, y: Word, t: int) -> bool:
    """True when x and y agree on at least t positions."""
    if len(x) != len(y):
        raise ParameterError(f"Cannot compare words of lengths {len(x)} and {len(y)}")
    if not 1 <= t <= len(x):
        raise ParameterError(f"Threshold {t} outside [1, {len(x)}]")
    return sum(1 for a, b in zip(x, y) if a == b) >= t


def select(sigma: Combination, x: Word, domain_size: int) -> PayloadEncoding:
    """Encode the letters of x at the positions of sigma."""
    sigma.check(len(x))
    letters = [x[i - 1] for i in sigma.indices]
    return PayloadEncoding(_positional(letters, domain_size), len(sigma) * letter_bits(domain_size))


def encode_word(x: Word, domain_size: int) -> PayloadEncoding:
    return PayloadEncoding(_positional(x.letters, domain_size), len(x) * letter_bits(domain_size))


def decode_word(value: int, T: int, domain_size: int) -> Optional[Word]:
    """Inverse of encode_word; None ("not-a-word") for anything else."""
    if not prefix_valid(value, T * letter_bits(domain_size)):
        return None
    letters = []
    for _ in range(T):
        value, letter = divmod(value, domain_size)
        letters.append(letter)
    if value != 0:
        return None
    return Word(tuple(reversed(letters)))


def agreement_counts(xs: Sequence[Word], ys: Sequence[Word]) -> np.ndarray:
    """Matrix A[i, j] = number of positions where X_i and Y_j agree."""
    return equality_matrix_plain(xs, ys).sum(axis=0)


def equality_matrix_plain(xs: Sequence[Word], ys: Sequence[Word]) -> np.ndarray:
    """Boolean array E[w, i, j] = (x_i^w == y_j^w), shape (T, n_C, n_S)."""
    if not xs or not ys:
        T = len(xs[0]) if xs else (len(ys[0]) if ys else 0)
        return np.zeros((T, len(xs), len(ys)), dtype=bool)
    x = np.array([w.letters for w in xs], dtype=np.int64)
    y = np.array([w.letters for w in ys], dtype=np.int64)
    if x.shape[1] != y.shape[1]:
        raise ParameterError("Client and server words have different lengths")
    return (x[:, None, :] == y[None, :, :]).transpose(2, 0, 1)


def oracle_intersection(
    xs: Iterable["Word | Sequence[int]"], ys: Iterable["Word | Sequence[int]"], t: int
) -> FrozenSet[Word]:
    """Plaintext ground truth: every Y_j that t-matches some X_i."""
    client = as_words(xs)
    server = as_words(ys)
    if not client or not server:
        return frozenset()
    counts = agreement_counts(client, server)
    hits = (counts >= t).any(axis=0)
    result = frozenset(server[j] for j in np.flatnonzero(hits))
    logger.debug(f"Oracle: {len(result)} of {len(server)} server words match at t={t}")
    return result
