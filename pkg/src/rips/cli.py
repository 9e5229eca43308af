"""Command-line interface.

Subcommands: run (interpret a rules file against a socket), check (static
analysis only), compile (emit the generated Python program on stdout),
simulate (replay a scenario in-process and print the report) and bench
(replay a corpus through interpreter and generated code, report timings).
Invoking with a rules-file path as the first argument runs it with default
paths, which is what a hash-bang line in an executable rules file does.

Exit status: 0 success, 1 static/compile errors (and failed simulations),
2 usage errors, 3 engine crash.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .bench import make_corpus, run_benchmark
from .bus import SocketServer, serve
from .checker import check_file
from .errors import EngineCrash, LexError, ParseError, StaticError
from .runtime import EngineConfig, InterpretedEngine
from .scenario import load_scenario, run_scenario
from .transpiler import transpile

USAGE_ERROR = 2
STATIC_ERROR = 1
CRASH = 3

_SUBCOMMANDS = ("run", "check", "compile", "simulate", "bench")


def _print_static_error(exc: Exception, path: str) -> None:
    name = os.path.basename(path)
    if isinstance(exc, StaticError):
        for diag in exc.diagnostics:
            print(diag.render(name), file=sys.stderr)
    elif isinstance(exc, (LexError, ParseError)):
        print(exc.diagnostic.render(name), file=sys.stderr)
    else:
        print(f"{name}: {exc}", file=sys.stderr)


def _check(path: str, scripts_dir: str | None):
    try:
        return check_file(path, scripts_dir=scripts_dir)
    except (StaticError, LexError, ParseError) as exc:
        _print_static_error(exc, path)
        return None
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rips", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"rips {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="interpret a rules file, serving the engine socket")
    p_run.add_argument("scriptsdir", nargs="?", default=EngineConfig.scripts_dir,
                       help="transition-scripts directory (default %(default)s)")
    p_run.add_argument("rules", help="rules file (.rul)")
    p_run.add_argument("-s", "--socket", default=EngineConfig.socket_path,
                       help="unix socket path (default %(default)s)")
    p_run.add_argument("--tick", type=float, default=EngineConfig.tick_interval,
                       help="External-rule tick interval in seconds (default %(default)s)")
    p_run.add_argument("--exec-timeout", type=float, default=EngineConfig.exec_timeout)
    p_run.add_argument("--ids-dir", default=EngineConfig.ids_dir)
    p_run.add_argument("--ids-pattern", default=EngineConfig.ids_pattern)
    p_run.add_argument("--dump-vars", action="store_true",
                       help="print the final variable store to stderr at exit")

    p_check = sub.add_parser("check", help="static analysis only")
    p_check.add_argument("rules")
    p_check.add_argument("scriptsdir", nargs="?", default=None,
                         help="also validate transition scripts in this directory")

    p_compile = sub.add_parser("compile", help="emit the generated program on stdout")
    p_compile.add_argument("rules")
    p_compile.add_argument("-c", "--scripts", required=True, dest="scriptsdir",
                           help="transition-scripts directory embedded in the program")

    p_sim = sub.add_parser("simulate", help="replay a scenario in-process and report")
    p_sim.add_argument("rules")
    p_sim.add_argument("scenario", help="scenario YAML file")
    p_sim.add_argument("--scripts", dest="scriptsdir", default=None,
                       help="transition-scripts directory (omit to skip scripts)")
    p_sim.add_argument("--polling", type=float, default=None,
                       help="graph polling interval in seconds (overrides RIPSPOLLING)")
    p_sim.add_argument("--tick", type=float, default=EngineConfig.tick_interval)
    p_sim.add_argument("--ids-dir", default=EngineConfig.ids_dir)
    p_sim.add_argument("--ids-pattern", default=EngineConfig.ids_pattern)

    p_bench = sub.add_parser("bench", help="compare interpreter and generated program")
    p_bench.add_argument("rules")
    p_bench.add_argument("corpus", nargs="?", default=None,
                         help="recorded event-document file (omit with --synthetic)")
    p_bench.add_argument("--synthetic", type=int, default=None, metavar="N",
                         help="generate an N-event synthetic corpus instead")
    p_bench.add_argument("--seed", type=int, default=7)
    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    # Hash-bang form: `rips <file.rul>` runs the file with default paths.
    if argv and argv[0] not in _SUBCOMMANDS and not argv[0].startswith("-") and os.path.isfile(argv[0]):
        argv = ["run", *argv[1:], argv[0]]

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else USAGE_ERROR

    if args.command == "check":
        checked = _check(args.rules, args.scriptsdir)
        if checked is None:
            return STATIC_ERROR
        print(f"{os.path.basename(args.rules)}: OK "
              f"({len(checked.levels)} levels, "
              f"{len(checked.graph_rules)} Graph / {len(checked.msg_rules)} Msg / "
              f"{len(checked.external_rules)} External rules)")
        return 0

    if args.command == "compile":
        checked = _check(args.rules, args.scriptsdir)
        if checked is None:
            return STATIC_ERROR
        sys.stdout.write(transpile(checked))
        return 0

    if args.command == "run":
        checked = _check(args.rules, args.scriptsdir)
        if checked is None:
            return STATIC_ERROR
        config = EngineConfig(
            socket_path=args.socket,
            scripts_dir=args.scriptsdir,
            tick_interval=args.tick,
            exec_timeout=args.exec_timeout,
            ids_dir=args.ids_dir,
            ids_pattern=args.ids_pattern,
        )
        engine = InterpretedEngine(checked, config=config)
        server = SocketServer(config.socket_path, config.queue_max)
        status = serve(engine, server)
        if args.dump_vars:
            print(json.dumps(engine.dump_variables(), sort_keys=True, default=repr), file=sys.stderr)
        return status

    if args.command == "simulate":
        checked = _check(args.rules, args.scriptsdir)
        if checked is None:
            return STATIC_ERROR
        try:
            scenario = load_scenario(args.scenario)
        except Exception as exc:  # noqa: BLE001 - report and exit
            print(f"error: cannot load scenario: {exc}", file=sys.stderr)
            return STATIC_ERROR
        config = EngineConfig(
            tick_interval=args.tick,
            ids_dir=args.ids_dir,
            ids_pattern=args.ids_pattern,
        )

        def build_engine(clock, counters):
            return InterpretedEngine(checked, clock=clock, counters=counters, config=config)

        try:
            report = run_scenario(scenario, build_engine, polling_s=args.polling)
        except EngineCrash:
            return CRASH
        print(report.format())
        return 0 if report.passed else 1

    if args.command == "bench":
        checked = _check(args.rules, None)
        if checked is None:
            return STATIC_ERROR
        if args.synthetic is not None:
            docs = make_corpus(args.synthetic, args.seed)
        elif args.corpus is not None:
            from .wire import DocumentStream

            framer = DocumentStream()
            with open(args.corpus, "rb") as fh:
                docs = framer.feed(fh.read())
        else:
            print("error: bench needs a corpus file or --synthetic N", file=sys.stderr)
            return USAGE_ERROR
        report = run_benchmark(checked, docs)
        print(report.format())
        return 0

    return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
