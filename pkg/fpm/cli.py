"""
Command-line entry point.

    fpm gen          write a client/server dataset pair and its oracle answer
    fpm oracle       print the plaintext answer for two dataset files
    fpm run          run a protocol in-process or over TCP and check it against the oracle
    fpm serve        run the server endpoint on a TCP port
    fpm bench        count messages and time sessions over a parameter grid
    fpm attack-demo  show the original protocol leaking where the fixed ones do not

Exit codes: 0 pass, 1 oracle mismatch, 2 usage or parameter error,
3 transport or crypto error.
"""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ValidationError

from fpm.bench import render_table, run_grid
from fpm.channel import ChannelStats, TcpListener
from fpm.config import Polarity, ProtocolId, SessionConfig, profile
from fpm.core import FuzzyParams, Word, oracle_intersection
from fpm.datasets import DatasetHeader, generate_instance, read_dataset, write_dataset
from fpm.errors import (
    DecodeError,
    GeneratorError,
    ParameterError,
    ProtocolError,
    RingError,
    TransportError,
    UsageError,
)
from fpm.protocols import attack_demo, connect_session, run_session, serve_session
from fpm.rng import SessionRng

logger = logging.getLogger("cli")

EXIT_PASS = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_TRANSPORT = 3


class RunReport(BaseModel):
    protocol: str
    eqm: int
    backend: str
    transport: str
    T: int
    t: int
    domain_size: int
    matched: List[str]
    oracle: Optional[List[str]] = None
    verdict: str
    stats: Dict[str, Any]
    diagnostics: Dict[str, int] = {}
    client_seconds: float = 0.0
    server_seconds: Optional[float] = None


def _words(words: Sequence[Word]) -> List[str]:
    return [str(w) for w in sorted(words)]


def parse_transport(value: str) -> Tuple[str, Optional[str], Optional[int]]:
    """'local' or 'tcp:HOST:PORT'."""
    if value == "local":
        return "local", None, None
    parts = value.split(":")
    if len(parts) == 3 and parts[0] == "tcp":
        try:
            return "tcp", parts[1], int(parts[2])
        except ValueError:
            pass
    raise ParameterError(f"Transport must be 'local' or 'tcp:HOST:PORT', got '{value}'")


def _session_config(args: argparse.Namespace, header: DatasetHeader, n_C: int, n_S: int) -> SessionConfig:
    defaults = profile(args.profile)
    params = FuzzyParams(
        n_C=max(n_C, 1),
        n_S=max(n_S, 1),
        T=header.T,
        t=header.t,
        domain_size=header.domain_size,
        k=args.k if args.k is not None else defaults["k"],
    )
    return SessionConfig(
        protocol=ProtocolId.from_name(args.protocol),
        params=params,
        backend=args.backend,
        key_bits=args.keybits if args.keybits is not None else defaults["key_bits"],
        seed=args.seed,
        eqm=args.eqm,
        polarity=Polarity(args.polarity),
        original_remedy=not args.strict_original,
        improved_early_exit=not args.no_early_exit,
    )


def _check_headers(client: DatasetHeader, server: DatasetHeader) -> None:
    if client != server:
        raise ParameterError(f"Dataset headers differ: client '{client.line()}', server '{server.line()}'")


def _print_stats(stats: ChannelStats) -> None:
    for name, value in stats.model_dump().items():
        print(f"  {name:<18} {value}")


def _emit_run(args: argparse.Namespace, report: RunReport, stats: ChannelStats) -> None:
    if args.json:
        print(report.model_dump_json(indent=2))
        return
    print(f"matched ({len(report.matched)}):")
    for word in report.matched:
        print(f"  {word}")
    if args.stats:
        print("stats:")
        _print_stats(stats)
    if report.oracle is not None:
        leaked = sorted(set(report.matched) - set(report.oracle))
        if leaked:
            print(f"WARNING: the client learned {len(leaked)} word(s) outside the oracle: {' '.join(leaked)}")
    print(report.verdict)


async def cmd_run(args: argparse.Namespace) -> int:
    transport, host, port = parse_transport(args.transport)
    client_header, client_words = read_dataset(args.client)
    server_words: Optional[List[Word]] = None
    if args.server is not None:
        server_header, server_words = read_dataset(args.server)
        _check_headers(client_header, server_header)
    elif transport == "local" or args.role == "both":
        raise ParameterError("A server dataset is required unless running as a TCP client only")

    config = _session_config(args, client_header, len(client_words), len(server_words or []))
    server_seconds: Optional[float] = None
    if transport == "local":
        assert server_words is not None
        outcome, summary = await run_session(config, client_words, server_words)
        server_seconds = summary.busy_seconds
    elif args.role == "both":
        assert host is not None and port is not None and server_words is not None
        async with TcpListener(host, port, config.max_frame_size) as listener:
            serving = asyncio.create_task(serve_session(config, server_words, listener))
            outcome = await connect_session(config, client_words, host, listener.port)
            summary = await serving
        server_seconds = summary.busy_seconds
    else:
        assert host is not None and port is not None
        outcome = await connect_session(config, client_words, host, port)

    oracle = None if server_words is None else oracle_intersection(client_words, server_words, client_header.t)
    if oracle is None:
        verdict = "DONE (no server dataset, oracle not checked)"
    else:
        verdict = "PASS" if outcome.matched == oracle else "FAIL"
    report = RunReport(
        protocol=config.protocol.cli_name,
        eqm=config.eqm,
        backend=config.backend,
        transport=args.transport,
        T=client_header.T,
        t=client_header.t,
        domain_size=client_header.domain_size,
        matched=_words(outcome.matched),
        oracle=None if oracle is None else _words(oracle),
        verdict=verdict,
        stats=outcome.stats.model_dump(),
        diagnostics=outcome.diagnostics,
        client_seconds=outcome.busy_seconds,
        server_seconds=server_seconds,
    )
    _emit_run(args, report, outcome.stats)
    return EXIT_MISMATCH if verdict == "FAIL" else EXIT_PASS


async def cmd_serve(args: argparse.Namespace) -> int:
    header, server_words = read_dataset(args.server)
    config = _session_config(args, header, 1, len(server_words))
    async with TcpListener(args.host, args.port, config.max_frame_size) as listener:
        print(f"listening on {args.host}:{listener.port}", flush=True)
        for session in range(args.sessions):
            summary = await serve_session(config, server_words, listener)
            logger.info(f"Session {session + 1}/{args.sessions} finished")
            if args.json:
                print(json.dumps({"stats": summary.stats.model_dump(), "diagnostics": summary.diagnostics}))
            elif args.stats:
                _print_stats(summary.stats)
    return EXIT_PASS


def cmd_gen(args: argparse.Namespace) -> int:
    n_C = args.n_client if args.n_client is not None else args.n
    n_S = args.n_server if args.n_server is not None else args.n
    if n_C is None or n_S is None:
        raise ParameterError("Give --n or both --n-client and --n-server")
    rng = SessionRng(args.seed, "gen")
    instance = generate_instance(n_C, n_S, args.T, args.t, args.domain, args.planted, rng)
    oracle_path = Path(args.oracle) if args.oracle else Path(f"{args.server}.oracle")
    write_dataset(args.client, instance.header, instance.client)
    write_dataset(args.server, instance.header, instance.server)
    write_dataset(oracle_path, instance.header, sorted(instance.expected))
    print(f"wrote {args.client}, {args.server} and {oracle_path} ({len(instance.expected)} expected matches)")
    return EXIT_PASS


def cmd_oracle(args: argparse.Namespace) -> int:
    client_header, client_words = read_dataset(args.client)
    server_header, server_words = read_dataset(args.server)
    _check_headers(client_header, server_header)
    oracle = oracle_intersection(client_words, server_words, client_header.t)
    if args.json:
        print(json.dumps({"oracle": _words(oracle)}))
    else:
        for word in _words(oracle):
            print(word)
    return EXIT_PASS


async def cmd_bench(args: argparse.Namespace) -> int:
    protocols = [ProtocolId.from_name(name) for name in args.protocols.split(",")]
    report = await run_grid(
        protocols,
        [int(n) for n in args.sizes.split(",")],
        args.T,
        args.t,
        [int(d) for d in args.domains.split(",")],
        backend=args.backend,
        key_bits=args.keybits if args.keybits is not None else profile("test")["key_bits"],
        k=args.k if args.k is not None else profile("default")["k"],
        eqms=[int(v) for v in args.eqm.split(",")],
        seed=args.seed if args.seed is not None else 0,
    )
    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        print(render_table(report))
    return EXIT_PASS if report.ok else EXIT_MISMATCH


async def cmd_attack_demo(args: argparse.Namespace) -> int:
    report = await attack_demo(
        t=args.t,
        swap_roles=args.swap_roles,
        backend=args.backend,
        key_bits=args.keybits if args.keybits is not None else profile("test")["key_bits"],
        seed=args.seed,
    )
    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        print(report.render())
    return EXIT_PASS if report.fixed_protocols_exact else EXIT_MISMATCH


def _session_flags() -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--protocol", required=True, choices=[p.cli_name for p in ProtocolId])
    flags.add_argument("--eqm", type=int, choices=[1, 2], default=1, help="Equality-matrix version for hamming")
    flags.add_argument("--polarity", choices=[p.value for p in Polarity], default=Polarity.AGREEMENT.value)
    flags.add_argument("--backend", choices=["mock", "paillier"], default="mock")
    flags.add_argument("--keybits", type=int, help="Paillier modulus size")
    flags.add_argument("--k", type=int, help="Statistical security parameter")
    flags.add_argument("--profile", choices=["default", "test"], default="default")
    flags.add_argument("--seed", type=int, help="Seed for deterministic sessions")
    flags.add_argument("--strict-original", action="store_true", help="Fail instead of merging random values")
    flags.add_argument("--no-early-exit", action="store_true", help="Try every subset in improved-ss")
    flags.add_argument("--stats", action="store_true", help="Print channel statistics")
    flags.add_argument("--json", action="store_true", help="Machine-readable output")
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpm", description="Fuzzy private matching protocols")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    commands = parser.add_subparsers(dest="command", required=True)
    session = _session_flags()

    gen = commands.add_parser("gen", help="Generate a dataset pair")
    gen.add_argument("--n", type=int, help="Words per side")
    gen.add_argument("--n-client", type=int)
    gen.add_argument("--n-server", type=int)
    gen.add_argument("--T", type=int, required=True)
    gen.add_argument("--t", type=int, required=True)
    gen.add_argument("--domain", type=int, required=True)
    gen.add_argument("--planted", type=int, default=0)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--client", required=True, help="Client dataset path")
    gen.add_argument("--server", required=True, help="Server dataset path")
    gen.add_argument("--oracle", help="Oracle answer path (default: <server>.oracle)")

    oracle = commands.add_parser("oracle", help="Plaintext answer for a dataset pair")
    oracle.add_argument("client")
    oracle.add_argument("server")
    oracle.add_argument("--json", action="store_true")

    run = commands.add_parser("run", parents=[session], help="Run a protocol and compare with the oracle")
    run.add_argument("client")
    run.add_argument("server", nargs="?")
    run.add_argument("--transport", default="local", help="'local' or 'tcp:HOST:PORT'")
    run.add_argument("--role", choices=["client", "both"], default="client", help="TCP role")

    serve = commands.add_parser("serve", parents=[session], help="Serve sessions over TCP")
    serve.add_argument("server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0)
    serve.add_argument("--sessions", type=int, default=1)

    bench = commands.add_parser("bench", help="Message counts and timings over a grid")
    bench.add_argument("--protocols", default="polynomial,simple-ss,improved-ss,hamming")
    bench.add_argument("--sizes", default="2,4,8")
    bench.add_argument("--T", type=int, default=4)
    bench.add_argument("--t", type=int, default=2)
    bench.add_argument("--domains", default="16")
    bench.add_argument("--eqm", default="1,2")
    bench.add_argument("--backend", choices=["mock", "paillier"], default="mock")
    bench.add_argument("--keybits", type=int)
    bench.add_argument("--k", type=int)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--json", action="store_true")

    attack = commands.add_parser("attack-demo", help="Leak of the original protocol")
    attack.add_argument("--t", type=int, default=2)
    attack.add_argument("--swap-roles", action="store_true")
    attack.add_argument("--backend", choices=["mock", "paillier"], default="mock")
    attack.add_argument("--keybits", type=int)
    attack.add_argument("--seed", type=int)
    attack.add_argument("--json", action="store_true")
    return parser


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "gen":
        return cmd_gen(args)
    if args.command == "oracle":
        return cmd_oracle(args)
    runners = {"run": cmd_run, "serve": cmd_serve, "bench": cmd_bench, "attack-demo": cmd_attack_demo}
    return asyncio.run(runners[args.command](args))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        return dispatch(args)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_TRANSPORT
    except (TransportError, ProtocolError, DecodeError, RingError, UsageError) as e:
        logger.error(f"Transport or crypto error: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (ValidationError, ParameterError, GeneratorError, OSError) as e:
        logger.error(f"Usage error: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
