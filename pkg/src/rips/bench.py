"""Replay benchmark: interpreter vs generated program over a recorded event
corpus, with decode / rule-execution / encode time broken out."""

from __future__ import annotations

import base64
import random
import time
from dataclasses import dataclass

from .checker import CheckedProgram, check_source
from .runtime import FakeClock, InterpretedEngine, RecordingRunner
from .transpiler import load_generated, transpile
from .wire import decode_event, encode_event, encode_outcome

BENCH_TOPICS = ["/bench/pose", "/bench/cmd", "/bench/image", "/bench/imu", "/bench/log"]
BENCH_NODES = ["driver", "planner", "camera", "logger", "bridge", "watch"]
BENCH_TYPES = ["std_msgs/msg/String", "geometry_msgs/msg/Twist", "sensor_msgs/msg/Imu"]

# Expression-heavy rules so the benchmark exercises evaluation, not child
# processes; alerts are rare so encode time stays a separate axis.
BENCH_RULES = """\
vars:
    nmsg int = 0;
    ngraph int = 0;
    acc int = 0;
    busy bool = false;
    tag string = "";

rules Graph:
    nodecount(1, 100) && (ngraph * 7 + acc) % 11 != 3 ?
        set(ngraph, ngraph + 1),
        set(acc, acc + ngraph * 3 - 1);

    topiccount(0, 50) && (acc % 5 == 0 || busy) ?
        set(busy, !busy) => set(acc, acc + 2);

    ! nodesinclude("driver", "planner", "camera", "logger", "bridge", "watch", "rips") &&
            ngraph % 97 == 0 ?
        alert("unexpected node inventory: " + string(ngraph));

rules Msg:
    topicin("/bench/pose", "/bench/cmd", "/bench/imu") && nmsg % 13 != 7 ?
        set(nmsg, nmsg + 1),
        set(acc, acc + (nmsg % 9) * 2);

    topicmatches("/bench/.*") && (nmsg * 31 + acc) % 101 == 0 ?
        set(tag, "hit:" + string(nmsg)) => alert(tag);

    msgsubtype("geometry_msgs", "Twist") && publishercount(0, 6) ?
        set(acc, acc * 2 % 1000003 + 1);
"""


def make_bench_rules() -> CheckedProgram:
    return check_source(BENCH_RULES, "bench.rul")


def make_corpus(n_events: int, seed: int = 7) -> list[str]:
    """Deterministic synthetic corpus of framed graph/message documents."""
    rng = random.Random(seed)
    docs: list[str] = []
    nodes = [
        {
            "node": name,
            "gids": [f"{i:02x}.{i:02x}.00"],
            "services": [{"service": f"/{name}/get_parameters", "params": ["rcl_interfaces/srv/GetParameters"]}],
        }
        for i, name in enumerate(BENCH_NODES)
    ]
    for i in range(n_events):
        t = rng.random()
        topics = [
            {
                "topic": topic,
                "parameters": [rng.choice(BENCH_TYPES)],
                "publishers": rng.sample(BENCH_NODES, rng.randint(0, 2)) or [None],
                "subscribers": rng.sample(BENCH_NODES, rng.randint(0, 3)) or [None],
            }
            for topic in BENCH_TOPICS
        ]
        base = {
            "currentlevel": "__DEFAULT__",
            "currentgrav": 0.0,
            "lastalert": "",
        }
        if t < 0.5:
            base.update({"event": "graph", "context": {"nodes": nodes, "topics": topics}})
        else:
            payload = bytes(rng.randrange(256) for _ in range(rng.randint(0, 64)))
            base.update(
                {
                    "event": "message",
                    "context": {"nodes": nodes, "topics": topics},
                    "topic": rng.choice(BENCH_TOPICS),
                    "msgtype": rng.choice(BENCH_TYPES),
                    "payload": base64.b64encode(payload).decode("ascii"),
                }
            )
        docs.append(encode_event(base))
    return docs


@dataclass
class ModeTiming:
    mode: str
    events: int = 0
    outcomes: int = 0
    decode_s: float = 0.0
    execute_s: float = 0.0
    encode_s: float = 0.0

    @property
    def total_s(self) -> float:
        return self.decode_s + self.execute_s + self.encode_s

    @property
    def wire_share(self) -> float:
        total = self.total_s
        return (self.decode_s + self.encode_s) / total if total else 0.0

    @property
    def execute_share(self) -> float:
        total = self.total_s
        return self.execute_s / total if total else 0.0


@dataclass
class BenchReport:
    interpreted: ModeTiming
    generated: ModeTiming

    @property
    def exec_speedup(self) -> float | None:
        """Interpreter rule-execution time over generated rule-execution time."""
        if self.generated.execute_s <= 0.0:
            return None
        return self.interpreted.execute_s / self.generated.execute_s

    def format(self) -> str:
        lines = [
            f"{'mode':<12} {'events':>7} {'outcomes':>8} {'decode':>10} {'exec':>10} {'encode':>10} {'total':>10}",
        ]
        for t in (self.interpreted, self.generated):
            lines.append(
                f"{t.mode:<12} {t.events:>7} {t.outcomes:>8}"
                f" {t.decode_s:>9.4f}s {t.execute_s:>9.4f}s {t.encode_s:>9.4f}s {t.total_s:>9.4f}s"
            )
        speedup = self.exec_speedup
        lines.append(
            "rule-execution speedup (interpreted/generated): "
            + (f"{speedup:.2f}x" if speedup is not None else "n/a")
        )
        lines.append(
            f"decode+encode share of total: interpreted {self.interpreted.wire_share:.0%},"
            f" generated {self.generated.wire_share:.0%}"
        )
        return "\n".join(lines)


def _time_replay(mode: str, engine, docs: list[str]) -> ModeTiming:
    timing = ModeTiming(mode)
    perf = time.perf_counter_ns
    engine.start()
    for doc in docs:
        t0 = perf()
        event = decode_event(doc)
        t1 = perf()
        outcomes = engine.handle_event(event)
        t2 = perf()
        for o in outcomes:
            encode_outcome(o)
        t3 = perf()
        timing.decode_s += (t1 - t0) / 1e9
        timing.execute_s += (t2 - t1) / 1e9
        timing.encode_s += (t3 - t2) / 1e9
        timing.events += 1
        timing.outcomes += len(outcomes)
    return timing


def run_benchmark(checked: CheckedProgram, docs: list[str]) -> BenchReport:
    interp = InterpretedEngine(checked, clock=FakeClock(0), runner=RecordingRunner())
    interpreted = _time_replay("interpreted", interp, docs)

    module = load_generated(transpile(checked), "bench_generated")
    gen = module.build_engine(clock=FakeClock(0), runner=RecordingRunner())
    generated = _time_replay("generated", gen, docs)

    return BenchReport(interpreted=interpreted, generated=generated)
