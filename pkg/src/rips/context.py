"""Computation-graph and message contexts carried by inbound events."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ServiceInfo:
    name: str
    params: tuple[str, ...] = ()


@dataclass(frozen=True)
class NodeInfo:
    name: str
    gids: tuple[str, ...] = ()
    services: tuple[ServiceInfo, ...] = ()


@dataclass(frozen=True)
class TopicInfo:
    name: str
    parameters: tuple[str, ...] = ()
    publishers: frozenset[str] = frozenset()
    subscribers: frozenset[str] = frozenset()


class GraphContext:
    """Snapshot of the computation graph, with name-indexed lookups."""

    __slots__ = ("nodes", "topics", "_node_by_name", "_topic_by_name", "node_names", "topic_names")

    def __init__(self, nodes: tuple[NodeInfo, ...] = (), topics: tuple[TopicInfo, ...] = ()):
        self.nodes = nodes
        self.topics = topics
        self._node_by_name = {n.name: n for n in nodes}
        self._topic_by_name = {t.name: t for t in topics}
        self.node_names = frozenset(self._node_by_name)
        self.topic_names = frozenset(self._topic_by_name)

    def topic(self, name: str) -> TopicInfo | None:
        return self._topic_by_name.get(name)

    def node(self, name: str) -> NodeInfo | None:
        return self._node_by_name.get(name)

    def publishers_of(self, topic: str) -> frozenset[str]:
        t = self._topic_by_name.get(topic)
        return t.publishers if t else frozenset()

    def subscribers_of(self, topic: str) -> frozenset[str]:
        t = self._topic_by_name.get(topic)
        return t.subscribers if t else frozenset()

    def services_of(self, node: str) -> frozenset[str]:
        n = self._node_by_name.get(node)
        if n is None:
            return frozenset()
        return frozenset(s.name for s in n.services)


EMPTY_GRAPH = GraphContext()


@dataclass
class MessageContext:
    """A published message plus the graph snapshot it arrived with."""

    topic: str
    msg_type: str
    payload: bytes
    graph: GraphContext = field(default_factory=lambda: EMPTY_GRAPH)
