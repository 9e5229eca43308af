"""Runtime support layer for generated rule programs.

Generated source imports only this module, so every bit of observable
behavior (value semantics, predicates, actions, the wire layer) is the same
code the interpreter runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bus import SocketServer, serve
from .errors import EngineCrash
from .patterns import load_pattern_file
from .predicates import (
    msgsubtype,
    msgtypein,
    nodecount,
    nodes,
    nodesinclude,
    publishercount,
    publishers,
    publishersinclude,
    service,
    servicecount,
    services,
    servicesinclude,
    subscribercount,
    subscribers,
    subscribersinclude,
    topiccount,
    topicin,
    topicpublishercount,
    topicpublishers,
    topicpublishersinclude,
    topics,
    topicsinclude,
    topicsubscribercount,
    topicsubscribers,
    topicsubscribersinclude,
)
from .regexlite import compile_pattern as compile_regex
from .runtime import CompiledEngine, EngineConfig, FakeClock, SubprocessRunner, SystemClock
from .values import concat, fdiv, iadd, idiv, imod, imul, ineg, isub, to_string

__all__ = [
    "CompiledEngine", "EngineConfig", "FakeClock", "SystemClock", "SubprocessRunner",
    "compile_regex", "load_pattern_file", "compiled_main",
    "iadd", "isub", "imul", "ineg", "idiv", "imod", "fdiv", "concat", "to_string",
    "msgsubtype", "msgtypein", "topicin", "publishers", "publishersinclude",
    "publishercount", "subscribers", "subscribersinclude", "subscribercount",
    "nodes", "nodesinclude", "nodecount", "topics", "topicsinclude", "topiccount",
    "service", "services", "servicesinclude", "servicecount",
    "topicpublishers", "topicpublishersinclude", "topicpublishercount",
    "topicsubscribers", "topicsubscribersinclude", "topicsubscribercount",
]


def validate_startup(level_names, scripts_dir: str | None, plugins) -> list[str]:
    """Re-validate embedded script and plugin paths on the run host."""
    problems: list[str] = []
    if scripts_dir is not None:
        for name in level_names:
            for ext in (".to", ".from"):
                path = os.path.join(scripts_dir, name + ext)
                if not os.path.isfile(path):
                    problems.append(f"missing transition script {name}{ext}")
                elif not os.access(path, os.X_OK):
                    problems.append(f"transition script {name}{ext} is not executable")
    for path in plugins:
        if not (os.path.isfile(path) and os.access(path, os.X_OK)):
            problems.append(f"plugin {path} is missing or not executable")
    return problems


def compiled_main(build_engine, argv=None, *, levels=(), scripts_dir=None, plugins=()) -> int:
    """Entry point shared by all generated programs."""
    parser = argparse.ArgumentParser(description="generated rule program")
    parser.add_argument("-s", "--socket", default=EngineConfig.socket_path, help="unix socket path")
    parser.add_argument("--tick", type=float, default=EngineConfig.tick_interval,
                        help="External-rule tick interval in seconds")
    parser.add_argument("--exec-timeout", type=float, default=EngineConfig.exec_timeout)
    parser.add_argument("--ids-dir", default=EngineConfig.ids_dir)
    parser.add_argument("--ids-pattern", default=EngineConfig.ids_pattern)
    parser.add_argument("--dump-vars", action="store_true",
                        help="print the final variable store to stderr at exit")
    args = parser.parse_args(argv)

    problems = validate_startup([name for name, _ in levels], scripts_dir, plugins)
    if problems:
        for problem in problems:
            print(f"error: {problem}", file=sys.stderr)
        return 1

    config = EngineConfig(
        socket_path=args.socket,
        tick_interval=args.tick,
        exec_timeout=args.exec_timeout,
        ids_dir=args.ids_dir,
        ids_pattern=args.ids_pattern,
    )
    engine = build_engine(config=config)
    server = SocketServer(config.socket_path, config.queue_max)
    try:
        status = serve(engine, server)
    except EngineCrash:
        status = 3
    if args.dump_vars:
        print(json.dumps(engine.dump_variables(), sort_keys=True, default=repr), file=sys.stderr)
    return status
