"""
Dataset files and instance generators.

File format (UTF-8 text): the first line is "T t DOMAIN"; every following
non-empty line holds T space-separated decimal letters.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, FrozenSet, List, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from fpm.core import FuzzyParams, Word, match_t, oracle_intersection
from fpm.errors import GeneratorError, ParameterError
from fpm.rng import SessionRng

logger = logging.getLogger("datasets")

MAX_GENERATOR_ATTEMPTS = 10_000


class DatasetHeader(BaseModel):
    model_config = ConfigDict(frozen=True)

    T: int = Field(ge=1)
    t: int = Field(ge=1)
    domain_size: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_threshold(self) -> "DatasetHeader":
        if self.t > self.T:
            raise ValueError(f"threshold t={self.t} exceeds word length T={self.T}")
        return self

    def params(self, n_C: int, n_S: int, k: int = 64) -> FuzzyParams:
        return FuzzyParams(n_C=n_C, n_S=n_S, T=self.T, t=self.t, domain_size=self.domain_size, k=k)

    def line(self) -> str:
        return f"{self.T} {self.t} {self.domain_size}"


def _ints(line: str, lineno: int) -> List[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise ParameterError(f"Line {lineno}: expected decimal integers, got '{line.strip()}'") from None


def parse_dataset(text: str) -> Tuple[DatasetHeader, List[Word]]:
    lines = [(n, line) for n, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not lines:
        raise ParameterError("Empty dataset")
    lineno, first = lines[0]
    values = _ints(first, lineno)
    if len(values) != 3:
        raise ParameterError(f"Line {lineno}: header must be 'T t DOMAIN'")
    try:
        header = DatasetHeader(T=values[0], t=values[1], domain_size=values[2])
    except ValidationError as e:
        raise ParameterError(f"Line {lineno}: invalid header: {e.errors()[0]['msg']}") from None
    words = []
    for lineno, line in lines[1:]:
        letters = _ints(line, lineno)
        if len(letters) != header.T:
            raise ParameterError(f"Line {lineno}: expected {header.T} letters, got {len(letters)}")
        bad = [x for x in letters if not 0 <= x < header.domain_size]
        if bad:
            raise ParameterError(f"Line {lineno}: letters {bad} outside [0, {header.domain_size})")
        words.append(Word(tuple(letters)))
    return header, words


def format_dataset(header: DatasetHeader, words: Sequence[Word]) -> str:
    body = "".join(" ".join(str(x) for x in w) + "\n" for w in words)
    return header.line() + "\n" + body


def read_dataset(path: Union[str, Path]) -> Tuple[DatasetHeader, List[Word]]:
    return parse_dataset(Path(path).read_text(encoding="utf-8"))


def write_dataset(path: Union[str, Path], header: DatasetHeader, words: Sequence[Word]) -> None:
    Path(path).write_text(format_dataset(header, words), encoding="utf-8")


@dataclass
class Instance:
    header: DatasetHeader
    client: List[Word]
    server: List[Word]
    planted: List[Word] = field(default_factory=list)

    @property
    def expected(self) -> FrozenSet[Word]:
        return oracle_intersection(self.client, self.server, self.header.t)

    def params(self, k: int = 64) -> FuzzyParams:
        return self.header.params(len(self.client), len(self.server), k)


def _random_word(T: int, domain_size: int, rng: SessionRng) -> Word:
    return Word(tuple(rng.randbelow(domain_size) for _ in range(T)))


def _near_word(x: Word, t: int, domain_size: int, rng: SessionRng) -> Word:
    """A word agreeing with x on at least t positions."""
    letters = list(x)
    for w in rng.sample(range(len(x)), len(x) - t):
        letters[w] = rng.randbelow(domain_size)
    return Word(tuple(letters))


def generate_instance(
    n_C: int, n_S: int, T: int, t: int, domain_size: int, planted: int, rng: SessionRng
) -> Instance:
    """
    Distinct client and server words with exactly `planted` server matches.

    Args:
        n_C: Client set size
        n_S: Server set size
        T: Word length
        t: Match threshold
        domain_size: Alphabet size
        planted: Number of server words placed within distance T - t of a client word
        rng: Generator

    Returns:
        The instance; its oracle answer equals the planted words
    """
    header = DatasetHeader(T=T, t=t, domain_size=domain_size)
    if not 0 <= planted <= min(n_C, n_S):
        raise GeneratorError(f"Cannot plant {planted} matches with n_C={n_C}, n_S={n_S}")
    if n_C > domain_size**T or n_S > domain_size**T:
        raise GeneratorError(f"Only {domain_size ** T} distinct words exist for T={T}, |D|={domain_size}")

    def draw(make: Callable[[], Word], accept: Callable[[Word], bool], what: str) -> Word:
        for _ in range(MAX_GENERATOR_ATTEMPTS):
            candidate = make()
            if accept(candidate):
                return candidate
        raise GeneratorError(
            f"Could not draw {what} after {MAX_GENERATOR_ATTEMPTS} attempts; "
            f"the domain ({domain_size} letters, T={T}, t={t}) is too small to avoid accidental matches"
        )

    client: List[Word] = []
    for _ in range(n_C):
        client.append(draw(lambda: _random_word(T, domain_size, rng), lambda w: w not in client, "a client word"))

    server: List[Word] = []
    anchors = rng.sample(client, planted)
    for x in anchors:
        server.append(draw(lambda: _near_word(x, t, domain_size, rng), lambda w: w not in server, "a planted word"))
    planted_words = list(server)

    def unmatched(w: Word) -> bool:
        return w not in server and not any(match_t(x, w, t) for x in client)

    for _ in range(n_S - planted):
        server.append(draw(lambda: _random_word(T, domain_size, rng), unmatched, "an unmatched server word"))
    rng.shuffle(server)

    instance = Instance(header, client, server, planted_words)
    logger.debug(f"Generated instance n_C={n_C} n_S={n_S} T={T} t={t} |D|={domain_size} with {planted} planted")
    return instance


def random_instance(n_C: int, n_S: int, T: int, t: int, domain_size: int, rng: SessionRng) -> Instance:
    """Uniform words with repetitions allowed; matches occur by chance."""
    header = DatasetHeader(T=T, t=t, domain_size=domain_size)
    client = [_random_word(T, domain_size, rng) for _ in range(n_C)]
    server = [_random_word(T, domain_size, rng) for _ in range(n_S)]
    return Instance(header, client, server)
