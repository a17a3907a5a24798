"""Tests for the fpm command line"""

import json

import pytest

from fpm.cli import EXIT_MISMATCH, EXIT_PASS, EXIT_TRANSPORT, EXIT_USAGE, main, parse_transport
from fpm.errors import ParameterError


@pytest.fixture
def dataset_pair(tmp_path):
    """Generated 4-word files with two planted matches"""
    client, server = tmp_path / "client.txt", tmp_path / "server.txt"
    argv = ["gen", "--n", "4", "--T", "3", "--t", "2", "--domain", "16", "--planted", "2", "--seed", "5"]
    assert main(argv + ["--client", str(client), "--server", str(server)]) == EXIT_PASS
    return client, server


def write(path, text):
    path.write_text(text)
    return path


def test_gen_writes_oracle(dataset_pair, capsys):
    client, server = dataset_pair
    oracle_file = server.parent / "server.txt.oracle"
    lines = oracle_file.read_text().splitlines()
    assert lines[0] == "3 2 16"
    assert len(lines[1:]) == 2
    assert len(client.read_text().splitlines()) == 5


def test_oracle_command(dataset_pair, capsys):
    client, server = dataset_pair
    capsys.readouterr()
    assert main(["oracle", str(client), str(server), "--json"]) == EXIT_PASS
    assert len(json.loads(capsys.readouterr().out)["oracle"]) == 2


@pytest.mark.parametrize("protocol", ["polynomial", "simple-ss", "improved-ss", "hamming"])
def test_run_passes(dataset_pair, capsys, protocol):
    client, server = dataset_pair
    capsys.readouterr()
    code = main(["run", str(client), str(server), "--protocol", protocol, "--k", "32", "--seed", "1"])
    assert code == EXIT_PASS
    assert capsys.readouterr().out.strip().endswith("PASS")


def test_run_hamming_v2_json(dataset_pair, capsys):
    client, server = dataset_pair
    capsys.readouterr()
    argv = ["run", str(client), str(server), "--protocol", "hamming", "--eqm", "2", "--k", "32", "--json"]
    assert main(argv) == EXIT_PASS
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "PASS"
    assert report["eqm"] == 2
    assert report["stats"]["ot_invocations"] == 4 * 4 * 3
    assert report["matched"] == report["oracle"]
    assert set(report["stats"]) >= {"ciphertexts_c2s", "ciphertexts_s2c", "clear_ring_values", "rounds"}


def test_run_original_on_leak_instance(tmp_path, capsys):
    client = write(tmp_path / "c.txt", "3 2 10\n1 2 3\n1 4 5\n")
    server = write(tmp_path / "s.txt", "3 2 10\n5 4 3\n")
    assert main(["run", str(client), str(server), "--protocol", "original", "--k", "32"]) == EXIT_MISMATCH
    out = capsys.readouterr().out
    assert "WARNING" in out
    assert "[5,4,3]" in out
    assert out.strip().endswith("FAIL")


def test_run_strict_original_is_usage_error(tmp_path):
    client = write(tmp_path / "c.txt", "3 2 10\n1 2 3\n1 4 5\n")
    server = write(tmp_path / "s.txt", "3 2 10\n5 4 3\n")
    argv = ["run", str(client), str(server), "--protocol", "original", "--strict-original"]
    assert main(argv) == EXIT_USAGE


def test_run_header_mismatch(tmp_path, capsys):
    client = write(tmp_path / "c.txt", "3 2 10\n1 2 3\n")
    server = write(tmp_path / "s.txt", "3 1 10\n1 2 3\n")
    assert main(["run", str(client), str(server), "--protocol", "polynomial"]) == EXIT_USAGE
    assert "headers differ" in capsys.readouterr().err


def test_run_missing_file(tmp_path):
    assert main(["run", str(tmp_path / "nope.txt"), str(tmp_path / "nope.txt"), "--protocol", "polynomial"]) == EXIT_USAGE


def test_run_local_needs_server(dataset_pair):
    client, _ = dataset_pair
    assert main(["run", str(client), "--protocol", "polynomial"]) == EXIT_USAGE


@pytest.mark.tcp
def test_run_over_loopback_tcp(dataset_pair, capsys):
    client, server = dataset_pair
    capsys.readouterr()
    argv = ["run", str(client), str(server), "--protocol", "improved-ss", "--k", "32"]
    assert main(argv + ["--transport", "tcp:127.0.0.1:0", "--role", "both", "--stats"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "rounds" in out
    assert out.strip().endswith("PASS")


@pytest.mark.tcp
def test_run_connection_refused(dataset_pair):
    client, _ = dataset_pair
    # port 1 is privileged and never listening in the test environment
    assert main(["run", str(client), "--protocol", "polynomial", "--transport", "tcp:127.0.0.1:1"]) == EXIT_TRANSPORT


def test_attack_demo_command(capsys):
    assert main(["attack-demo", "--seed", "1"]) == EXIT_PASS
    assert "ORIGINAL LEAKS: yes; fixed protocols leak: no" in capsys.readouterr().out


def test_attack_demo_json(capsys):
    assert main(["attack-demo", "--t", "3", "--json"]) == EXIT_PASS
    report = json.loads(capsys.readouterr().out)
    assert report["t"] == 3
    assert all(row["output"] == [] for row in report["rows"])


def test_bench_command(capsys):
    argv = ["bench", "--protocols", "polynomial,improved-ss", "--sizes", "2,4", "--T", "3", "--domains", "8"]
    assert main(argv + ["--json"]) == EXIT_PASS
    report = json.loads(capsys.readouterr().out)
    assert len(report["rows"]) == 4
    assert all(row["counts_ok"] for row in report["rows"])


def test_bench_binary_domain(capsys):
    argv = ["bench", "--protocols", "hamming", "--eqm", "1", "--sizes", "8", "--T", "4", "--domains", "2,8"]
    assert main(argv + ["--json"]) == EXIT_PASS
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert [(r["domain_size"], r["uniform"]) for r in rows] == [(2, True), (8, False)]
    assert all(r["oracle_ok"] and r["counts_ok"] for r in rows)


def test_gen_unsatisfiable(tmp_path, capsys):
    argv = ["gen", "--n", "2", "--T", "2", "--t", "1", "--domain", "2", "--client", str(tmp_path / "c")]
    assert main(argv + ["--server", str(tmp_path / "s")]) == EXIT_USAGE
    assert "too small" in capsys.readouterr().err


def test_argparse_rejects_unknown_protocol():
    with pytest.raises(SystemExit) as exc:
        main(["run", "a", "b", "--protocol", "psi"])
    assert exc.value.code == 2


@pytest.mark.parametrize(
    "value,expected",
    [("local", ("local", None, None)), ("tcp:example.org:7000", ("tcp", "example.org", 7000))],
)
def test_parse_transport(value, expected):
    assert parse_transport(value) == expected


@pytest.mark.parametrize("value", ["tcp:host", "udp:h:1", "tcp:h:port"])
def test_parse_transport_rejects(value):
    with pytest.raises(ParameterError):
        parse_transport(value)
