"""Tests for dataset files and instance generation"""

import pytest

from fpm.core import Word, match_t
from fpm.datasets import (
    DatasetHeader,
    format_dataset,
    generate_instance,
    parse_dataset,
    random_instance,
    read_dataset,
    write_dataset,
)
from fpm.errors import GeneratorError, ParameterError
from fpm.rng import SessionRng


def test_parse_dataset():
    header, words = parse_dataset("3 2 10\n1 2 3\n\n1 4 5\n")
    assert header == DatasetHeader(T=3, t=2, domain_size=10)
    assert words == [Word((1, 2, 3)), Word((1, 4, 5))]


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("", "Empty"),
        ("3 2\n", "header"),
        ("3 4 10\n", "invalid header"),
        ("3 2 10\n1 2\n", "Line 2"),
        ("3 2 10\n1 2 x\n", "decimal"),
        ("3 2 10\n1 2 10\n", "outside"),
    ],
)
def test_parse_dataset_errors(text, fragment):
    with pytest.raises(ParameterError, match=fragment):
        parse_dataset(text)


def test_write_then_read(tmp_path):
    header = DatasetHeader(T=2, t=1, domain_size=4)
    words = [Word((0, 3)), Word((2, 2))]
    path = tmp_path / "set.txt"
    write_dataset(path, header, words)
    assert path.read_text().splitlines() == ["2 1 4", "0 3", "2 2"]
    assert read_dataset(path) == (header, words)
    assert format_dataset(header, []) == "2 1 4\n"


@pytest.mark.parametrize("planted", [0, 2, 4])
def test_generate_instance_plants_exactly(planted):
    instance = generate_instance(4, 4, 3, 2, 16, planted, SessionRng(5, "gen"))
    assert len(set(instance.client)) == 4
    assert len(set(instance.server)) == 4
    assert instance.expected == frozenset(instance.planted)
    assert len(instance.expected) == planted
    for y in instance.planted:
        assert any(match_t(x, y, 2) for x in instance.client)


def test_generate_instance_is_reproducible():
    a = generate_instance(3, 3, 4, 2, 16, 1, SessionRng(9, "gen"))
    b = generate_instance(3, 3, 4, 2, 16, 1, SessionRng(9, "gen"))
    assert a.client == b.client and a.server == b.server


def test_generate_instance_unsatisfiable():
    # no binary word of length 2 disagrees everywhere with two distinct words
    with pytest.raises(GeneratorError, match="too small"):
        generate_instance(2, 2, 2, 1, 2, 0, SessionRng(1, "gen"))
    with pytest.raises(GeneratorError):
        generate_instance(2, 2, 3, 2, 10, 3, SessionRng(1, "gen"))
    with pytest.raises(GeneratorError):
        generate_instance(5, 1, 2, 1, 2, 0, SessionRng(1, "gen"))


def test_random_instance_shapes():
    instance = random_instance(3, 5, 4, 2, 4, SessionRng(2, "gen"))
    assert len(instance.client) == 3 and len(instance.server) == 5
    assert instance.params().n_S == 5
