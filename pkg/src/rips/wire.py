"""YAML wire protocol: inbound event decoding, outbound outcome encoding,
and framing of a byte stream into documents.

Inbound events follow the monitor's schema: a mapping with ``event``
(``graph`` or ``message``), a full ``context`` (nodes and topics), the
monitor's echo of the current level/gravity/last alert, and for message
events the ``topic``, ``msgtype`` and base64 ``payload`` keys. A
publisher/subscriber list consisting of null entries decodes to the empty
set. Outcomes go out as one YAML document each, with a fixed key order so
the byte stream is stable.
"""

from __future__ import annotations

import base64
import logging
from dataclasses import dataclass

import yaml

from .context import GraphContext, MessageContext, NodeInfo, ServiceInfo, TopicInfo
from .errors import RipsError

log = logging.getLogger("rips.wire")

try:
    _Loader = yaml.CSafeLoader
except AttributeError:  # libyaml not built in
    _Loader = yaml.SafeLoader


class DecodeError(RipsError):
    """Inbound document cannot be understood; the event is skipped."""


_KNOWN_EVENT_KEYS = {"currentlevel", "currentgrav", "lastalert", "event", "context", "topic", "msgtype", "payload"}
_KNOWN_NODE_KEYS = {"node", "gids", "services"}
_KNOWN_TOPIC_KEYS = {"topic", "parameters", "publishers", "subscribers"}


@dataclass
class InboundEvent:
    kind: str  # "graph" | "message"
    graph: GraphContext
    current_level: str = ""
    current_grav: float = 0.0
    last_alert: str = ""
    topic: str = ""
    msg_type: str = ""
    payload: bytes = b""

    def message_context(self) -> MessageContext:
        return MessageContext(self.topic, self.msg_type, self.payload, self.graph)


@dataclass(frozen=True)
class Outcome:
    kind: str  # "levelchange" | "alert"
    level: str
    ordinal: int
    gravity: float
    text: str
    timestamp_ns: int


def _names(raw, what: str) -> frozenset[str]:
    if raw is None:
        return frozenset()
    if not isinstance(raw, list):
        log.debug("ignoring non-list %s entry: %r", what, raw)
        return frozenset()
    return frozenset(str(x) for x in raw if x is not None)


def _strings(raw) -> tuple[str, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        return (str(raw),)
    return tuple(str(x) for x in raw if x is not None)


def parse_graph_context(mapping) -> GraphContext:
    if mapping is None:
        mapping = {}
    if not isinstance(mapping, dict):
        raise DecodeError("context must be a mapping")
    nodes = []
    for raw in mapping.get("nodes") or []:
        if not isinstance(raw, dict) or "node" not in raw:
            log.debug("ignoring malformed node entry: %r", raw)
            continue
        for key in raw:
            if key not in _KNOWN_NODE_KEYS:
                log.debug("ignoring unknown node key %r", key)
        services = []
        for sraw in raw.get("services") or []:
            if not isinstance(sraw, dict) or "service" not in sraw:
                log.debug("ignoring malformed service entry: %r", sraw)
                continue
            services.append(ServiceInfo(str(sraw["service"]), _strings(sraw.get("params"))))
        nodes.append(NodeInfo(str(raw["node"]), _strings(raw.get("gids")), tuple(services)))
    topics = []
    for raw in mapping.get("topics") or []:
        if not isinstance(raw, dict) or "topic" not in raw:
            log.debug("ignoring malformed topic entry: %r", raw)
            continue
        for key in raw:
            if key not in _KNOWN_TOPIC_KEYS:
                log.debug("ignoring unknown topic key %r", key)
        topics.append(
            TopicInfo(
                str(raw["topic"]),
                _strings(raw.get("parameters")),
                _names(raw.get("publishers"), "publishers"),
                _names(raw.get("subscribers"), "subscribers"),
            )
        )
    graph = GraphContext(tuple(nodes), tuple(topics))
    for t in graph.topics:
        for name in (t.publishers | t.subscribers) - graph.node_names:
            log.debug("topic %s references unknown node %r", t.name, name)
    return graph


def decode_event(doc) -> InboundEvent:
    """Decode one YAML document (text or pre-parsed mapping) into an event."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = yaml.load(doc, Loader=_Loader)
        except yaml.YAMLError as exc:
            raise DecodeError(f"invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise DecodeError("event document must be a mapping")
    for key in doc:
        if key not in _KNOWN_EVENT_KEYS:
            log.debug("ignoring unknown event key %r", key)
    if "event" not in doc:
        raise DecodeError("event document lacks the 'event' key")
    kind = str(doc["event"])
    if kind not in ("graph", "message"):
        raise DecodeError(f"unknown event kind {kind!r}")
    if "context" not in doc:
        raise DecodeError("event document lacks the 'context' key")
    graph = parse_graph_context(doc["context"])
    ev = InboundEvent(
        kind=kind,
        graph=graph,
        current_level=str(doc.get("currentlevel") or ""),
        current_grav=float(doc.get("currentgrav") or 0.0),
        last_alert=str(doc.get("lastalert") or ""),
    )
    if kind == "message":
        ev.topic = str(doc.get("topic") or "")
        ev.msg_type = str(doc.get("msgtype") or "")
        raw = doc.get("payload")
        if raw:
            try:
                ev.payload = base64.b64decode(str(raw), validate=True)
            except (ValueError, TypeError) as exc:
                raise DecodeError(f"payload is not valid base64: {exc}") from exc
    return ev


def encode_event(doc: dict) -> str:
    """Serialize a monitor-side event mapping as one framed YAML document."""
    body = yaml.safe_dump(doc, sort_keys=False, default_flow_style=False, width=1_000_000)
    return "---\n" + body + "...\n"


def encode_outcome(o: Outcome) -> str:
    body = yaml.safe_dump(
        {
            "event": o.kind,
            "level": o.level,
            "gravity": o.gravity,
            "text": o.text,
            "timestamp": o.timestamp_ns,
        },
        sort_keys=False,
        default_flow_style=False,
        width=1_000_000,
    )
    return "---\n" + body + "...\n"


def decode_outcome(doc) -> Outcome:
    """Monitor-side decoding of an outcome document (used by the simulator)."""
    if isinstance(doc, (str, bytes)):
        doc = yaml.load(doc, Loader=_Loader)
    if not isinstance(doc, dict) or "event" not in doc:
        raise DecodeError("outcome document lacks the 'event' key")
    return Outcome(
        kind=str(doc["event"]),
        level=str(doc.get("level") or ""),
        ordinal=-1,
        gravity=float(doc.get("gravity") or 0.0),
        text=str(doc.get("text") or ""),
        timestamp_ns=int(doc.get("timestamp") or 0),
    )


class DocumentStream:
    """Splits an incoming byte stream into YAML document texts.

    Documents are delimited by ``---`` (start) and ``...`` (end) marker
    lines. Bytes may arrive split at arbitrary boundaries; a partial
    document left at connection close is discarded.
    """

    def __init__(self):
        self._buf = bytearray()
        self._lines: list[str] = []

    def feed(self, data: bytes) -> list[str]:
        self._buf.extend(data)
        docs: list[str] = []
        while True:
            idx = self._buf.find(b"\n")
            if idx < 0:
                break
            line = self._buf[: idx + 1].decode("utf-8", errors="replace")
            del self._buf[: idx + 1]
            stripped = line.strip()
            if stripped == "...":
                self._flush(docs)
            elif stripped == "---":
                if any(l.strip() for l in self._lines):
                    self._flush(docs)
                else:
                    self._lines.clear()
            else:
                self._lines.append(line)
        return docs

    def _flush(self, docs: list[str]):
        if any(l.strip() for l in self._lines):
            docs.append("".join(self._lines))
        self._lines.clear()

    def close(self) -> None:
        """Drop any partial document (mid-document disconnect)."""
        self._buf.clear()
        self._lines.clear()
