"""Monitor simulator: replays scripted timelines against an engine over the
YAML wire format and checks expected outcomes.

A scenario is a YAML file with a timeline of graph changes, published
messages and Unix signals at relative times, plus ordered expectations
(level names or alert-text substrings). The simulator mimics the monitor:
it emits a graph event every polling interval and immediately on a change
(periodic emission can be disabled), filters message topics through the
white/black lists, and tracks the engine's level and last alert to fill the
event envelope. Time is simulated through an injected clock, so runs are
deterministic and fast.
"""

from __future__ import annotations

import base64
import os
from dataclasses import dataclass, field

import yaml

from .bus import SignalCounters
from .errors import EngineCrash, RipsError
from .runtime import FakeClock
from .signatures import KNOWN_SIGNALS
from .wire import Outcome, encode_event

DEFAULT_POLLING_S = 0.5
DEFAULT_GRACE_S = 1.0

_NS = 1_000_000_000


class ScenarioError(RipsError):
    pass


@dataclass
class TimelineEntry:
    at_s: float
    kind: str  # "graph" | "message" | "signal"
    graph: dict | None = None
    topic: str = ""
    msg_type: str = ""
    payload: bytes = b""
    signal: str = ""


@dataclass
class Expectation:
    level: str | None = None
    alert: str | None = None

    def describe(self) -> str:
        if self.level is not None:
            return f"levelchange {self.level}"
        return f"alert containing {self.alert!r}"

    def matches(self, outcome: Outcome) -> bool:
        if self.level is not None:
            return outcome.kind == "levelchange" and outcome.level == self.level
        return outcome.kind == "alert" and self.alert in outcome.text


@dataclass
class Scenario:
    name: str
    timeline: list[TimelineEntry]
    expect: list[Expectation]
    polling_s: float | None = None
    grace_s: float = DEFAULT_GRACE_S
    on_change_only: bool = False
    expect_none: bool = False


@dataclass
class ObservedOutcome:
    time_s: float
    anchor_s: float  # time of the most recent timeline entry
    outcome: Outcome


@dataclass
class ExpectationResult:
    expectation: Expectation
    matched: bool
    time_s: float | None = None
    latency_s: float | None = None


@dataclass
class RunReport:
    scenario: str
    outcomes: list[ObservedOutcome]
    results: list[ExpectationResult]
    aborted: bool = False
    crash_text: str = ""
    expect_none: bool = False

    @property
    def passed(self) -> bool:
        if self.aborted:
            return False
        if self.expect_none and self.outcomes:
            return False
        return all(r.matched for r in self.results)

    def format(self) -> str:
        lines = [f"scenario: {self.scenario}"]
        lines.append(f"outcomes ({len(self.outcomes)}):")
        for obs in self.outcomes:
            o = obs.outcome
            if o.kind == "levelchange":
                lines.append(f"  [{obs.time_s:8.3f}s] levelchange -> {o.level} (gravity {o.gravity:g})")
            else:
                lines.append(f"  [{obs.time_s:8.3f}s] alert: {o.text}")
        if self.expect_none:
            status = "PASS" if not self.outcomes else "FAIL"
            lines.append(f"  {status} expected no outcomes")
        if self.results:
            lines.append("expectations:")
            for r in self.results:
                if r.matched:
                    lines.append(f"  PASS {r.expectation.describe()} (latency {r.latency_s:.3f}s)")
                else:
                    lines.append(f"  FAIL {r.expectation.describe()} (not observed)")
        if self.aborted:
            lines.append(f"aborted: engine crashed: {self.crash_text}")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _parse_entry(raw: dict, index: int) -> TimelineEntry:
    if not isinstance(raw, dict) or "at" not in raw:
        raise ScenarioError(f"timeline entry {index} needs an 'at' time")
    at = float(raw["at"])
    if "graph" in raw:
        graph = raw["graph"] or {}
        if not isinstance(graph, dict):
            raise ScenarioError(f"timeline entry {index}: 'graph' must be a mapping")
        graph.setdefault("nodes", [])
        graph.setdefault("topics", [])
        return TimelineEntry(at, "graph", graph=graph)
    if "message" in raw:
        msg = raw["message"] or {}
        topic = str(msg.get("topic") or "")
        if not topic:
            raise ScenarioError(f"timeline entry {index}: message needs a topic")
        if "payload_b64" in msg:
            payload = base64.b64decode(str(msg["payload_b64"]))
        else:
            payload = str(msg.get("payload") or "").encode("utf-8")
        return TimelineEntry(
            at,
            "message",
            topic=topic,
            msg_type=str(msg.get("type") or "std_msgs/msg/String"),
            payload=payload,
        )
    if "signal" in raw:
        sig = str(raw["signal"])
        if sig not in KNOWN_SIGNALS:
            raise ScenarioError(f"timeline entry {index}: unknown signal {sig!r}")
        return TimelineEntry(at, "signal", signal=sig)
    raise ScenarioError(f"timeline entry {index} needs one of 'graph', 'message' or 'signal'")


def parse_scenario(doc: dict, name: str = "scenario") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario file must hold a mapping")
    timeline = [_parse_entry(raw, i) for i, raw in enumerate(doc.get("timeline") or [])]
    for prev, cur in zip(timeline, timeline[1:]):
        if cur.at_s < prev.at_s:
            raise ScenarioError("timeline times must be non-decreasing")
    expect: list[Expectation] = []
    for i, raw in enumerate(doc.get("expect") or []):
        if not isinstance(raw, dict) or ("level" not in raw) == ("alert" not in raw):
            raise ScenarioError(f"expectation {i} needs exactly one of 'level' or 'alert'")
        if "level" in raw:
            expect.append(Expectation(level=str(raw["level"])))
        else:
            expect.append(Expectation(alert=str(raw["alert"])))
    polling = doc.get("polling")
    return Scenario(
        name=str(doc.get("name") or name),
        timeline=timeline,
        expect=expect,
        polling_s=float(polling) if polling is not None else None,
        grace_s=float(doc.get("grace", DEFAULT_GRACE_S)),
        on_change_only=bool(doc.get("on_change_only", False)),
        expect_none=bool(doc.get("expect_none", False)),
    )


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh.read())
    return parse_scenario(doc, name=os.path.basename(path))


def _split_topics(value: str | None) -> frozenset[str]:
    if not value:
        return frozenset()
    return frozenset(t for t in value.split(":") if t)


def resolve_polling(scenario: Scenario, override: float | None = None) -> float:
    """Polling interval precedence: explicit override, scenario, RIPSPOLLING
    environment variable, then the 0.5 s default."""
    if override is not None:
        return override
    if scenario.polling_s is not None:
        return scenario.polling_s
    env = os.environ.get("RIPSPOLLING")
    if env:
        try:
            return float(env)
        except ValueError:
            pass
    return DEFAULT_POLLING_S


def run_scenario(
    scenario: Scenario,
    build_engine,
    *,
    polling_s: float | None = None,
    whitelist: str | None = None,
    blacklist: str | None = None,
    start_ns: int = 0,
) -> RunReport:
    """Replay a scenario against a fresh engine built by
    ``build_engine(clock, counters)``; returns the run report.

    The white/black lists default to the RIPSWHITELIST/RIPSBLACKLIST
    environment variables (colon-separated topic names).
    """
    clock = FakeClock(start_ns)
    counters = SignalCounters()
    engine = build_engine(clock, counters)

    poll_s = resolve_polling(scenario, polling_s)
    tick_s = engine.config.tick_interval
    wl = _split_topics(whitelist if whitelist is not None else os.environ.get("RIPSWHITELIST"))
    bl = _split_topics(blacklist if blacklist is not None else os.environ.get("RIPSBLACKLIST"))

    end_s = (scenario.timeline[-1].at_s if scenario.timeline else 0.0) + scenario.grace_s
    end_ns = int(end_s * _NS)
    poll_ns = max(1, int(poll_s * _NS))
    tick_ns = max(1, int(tick_s * _NS))

    # Build the full emission schedule in simulated time. At equal times,
    # timeline entries run first, then the External tick, then the periodic
    # graph poll; insertion order breaks remaining ties.
    schedule: list[tuple[int, int, int, str, TimelineEntry | None]] = []
    seq = 0
    for entry in scenario.timeline:
        schedule.append((int(entry.at_s * _NS), 0, seq, "entry", entry))
        seq += 1
    t = tick_ns
    while t <= end_ns:
        schedule.append((t, 1, seq, "tick", None))
        seq += 1
        t += tick_ns
    if not scenario.on_change_only:
        t = 0
        while t <= end_ns:
            schedule.append((t, 2, seq, "poll", None))
            seq += 1
            t += poll_ns
    schedule.sort(key=lambda item: (item[0], item[1], item[2]))

    graph: dict = {"nodes": [], "topics": []}
    monitor_level = engine.machine.current_name
    monitor_grav = engine.machine.gravity()
    last_alert = ""
    observed: list[ObservedOutcome] = []
    aborted = False
    crash_text = ""
    last_entry_ns = 0

    def envelope(extra: dict) -> dict:
        doc = {
            "currentlevel": monitor_level,
            "currentgrav": monitor_grav,
            "lastalert": last_alert,
        }
        doc.update(extra)
        return doc

    def record(outcomes: list[Outcome], now_ns: int):
        nonlocal monitor_level, monitor_grav, last_alert
        for o in outcomes:
            observed.append(ObservedOutcome((now_ns - start_ns) / _NS, (last_entry_ns - start_ns) / _NS, o))
            if o.kind == "levelchange":
                monitor_level = o.level
                monitor_grav = o.gravity
            else:
                last_alert = o.text

    engine.start()
    try:
        for at_ns, _prio, _seq, kind, entry in schedule:
            now = start_ns + at_ns
            clock.set_ns(now)
            if kind == "tick":
                record(engine.tick(), now)
                continue
            if kind == "poll":
                doc = envelope({"event": "graph", "context": graph})
                record(engine.handle_document(encode_event(doc)), now)
                continue
            last_entry_ns = now
            if entry.kind == "signal":
                counters.deliver(entry.signal)
            elif entry.kind == "graph":
                graph = entry.graph
                doc = envelope({"event": "graph", "context": graph})
                record(engine.handle_document(encode_event(doc)), now)
            else:  # message
                if wl and entry.topic not in wl:
                    continue
                if entry.topic in bl:
                    continue
                doc = envelope(
                    {
                        "event": "message",
                        "context": graph,
                        "topic": entry.topic,
                        "msgtype": entry.msg_type,
                        "payload": base64.b64encode(entry.payload).decode("ascii"),
                    }
                )
                record(engine.handle_document(encode_event(doc)), now)
    except EngineCrash as crash:
        aborted = True
        crash_text = crash.text

    results: list[ExpectationResult] = []
    cursor = 0
    for exp in scenario.expect:
        hit = None
        for i in range(cursor, len(observed)):
            if exp.matches(observed[i].outcome):
                hit = i
                break
        if hit is None:
            results.append(ExpectationResult(exp, False))
        else:
            obs = observed[hit]
            results.append(ExpectationResult(exp, True, obs.time_s, obs.time_s - obs.anchor_s))
            cursor = hit + 1

    return RunReport(
        scenario=scenario.name,
        outcomes=observed,
        results=results,
        aborted=aborted,
        crash_text=crash_text,
        expect_none=scenario.expect_none,
    )
