"""Implementations of the expression builtins over event contexts.

Set-shaped predicates come in three flavors per subject: exact equality
against the argument set, an inclusion test, and an inclusive count range.
Inclusion direction differs by family: the graph-inventory builtins
(nodesinclude, topicsinclude) test that the live inventory stays within the
argument allowlist, while the per-entity builtins (services, publishers and
subscribers of one topic or node) test that every argument is present in
the live set, which is what membership rules like "this node must not be a
subscriber" need.

Absent topics and nodes contribute empty sets, so count predicates see 0.
"""

from __future__ import annotations

import fnmatch
import logging
import os

from .context import GraphContext, MessageContext

log = logging.getLogger("rips.predicates")


# --- Msg predicates (over the current message) ---


def topicin(ctx: MessageContext, *topics: str) -> bool:
    return ctx.topic in topics


def msgtypein(ctx: MessageContext, *types: str) -> bool:
    return ctx.msg_type in types


def msgsubtype(ctx: MessageContext, pkg: str, leaf: str) -> bool:
    parts = ctx.msg_type.split("/")
    if len(parts) < 2:
        return False
    return parts[0] == pkg and parts[-1] == leaf


def publishers(ctx: MessageContext, *pubs: str) -> bool:
    return ctx.graph.publishers_of(ctx.topic) == frozenset(pubs)


def publishersinclude(ctx: MessageContext, *pubs: str) -> bool:
    return frozenset(pubs) <= ctx.graph.publishers_of(ctx.topic)


def publishercount(ctx: MessageContext, lo: int, hi: int) -> bool:
    return lo <= len(ctx.graph.publishers_of(ctx.topic)) <= hi


def subscribers(ctx: MessageContext, *subs: str) -> bool:
    return ctx.graph.subscribers_of(ctx.topic) == frozenset(subs)


def subscribersinclude(ctx: MessageContext, *subs: str) -> bool:
    return frozenset(subs) <= ctx.graph.subscribers_of(ctx.topic)


def subscribercount(ctx: MessageContext, lo: int, hi: int) -> bool:
    return lo <= len(ctx.graph.subscribers_of(ctx.topic)) <= hi


# --- Graph predicates ---


def nodes(g: GraphContext, *names: str) -> bool:
    return g.node_names == frozenset(names)


def nodesinclude(g: GraphContext, *names: str) -> bool:
    return g.node_names <= frozenset(names)


def nodecount(g: GraphContext, lo: int, hi: int) -> bool:
    return lo <= len(g.node_names) <= hi


def topics(g: GraphContext, *names: str) -> bool:
    return g.topic_names == frozenset(names)


def topicsinclude(g: GraphContext, *names: str) -> bool:
    return g.topic_names <= frozenset(names)


def topiccount(g: GraphContext, lo: int, hi: int) -> bool:
    return lo <= len(g.topic_names) <= hi


def service(g: GraphContext, node: str, srv: str) -> bool:
    return srv in g.services_of(node)


def services(g: GraphContext, node: str, *srvs: str) -> bool:
    return g.services_of(node) == frozenset(srvs)


def servicesinclude(g: GraphContext, node: str, *srvs: str) -> bool:
    return frozenset(srvs) <= g.services_of(node)


def servicecount(g: GraphContext, node: str, lo: int, hi: int) -> bool:
    return lo <= len(g.services_of(node)) <= hi


def topicpublishers(g: GraphContext, topic: str, *names: str) -> bool:
    return g.publishers_of(topic) == frozenset(names)


def topicpublishersinclude(g: GraphContext, topic: str, *names: str) -> bool:
    return frozenset(names) <= g.publishers_of(topic)


def topicpublishercount(g: GraphContext, topic: str, lo: int, hi: int) -> bool:
    return lo <= len(g.publishers_of(topic)) <= hi


def topicsubscribers(g: GraphContext, topic: str, *names: str) -> bool:
    return g.subscribers_of(topic) == frozenset(names)


def topicsubscribersinclude(g: GraphContext, topic: str, *names: str) -> bool:
    return frozenset(names) <= g.subscribers_of(topic)


def topicsubscribercount(g: GraphContext, topic: str, lo: int, hi: int) -> bool:
    return lo <= len(g.subscribers_of(topic)) <= hi


# --- External predicates ---


class IdsAlertScanner:
    """Recursive substring search over IDS alert files.

    Scans every file under ``directory`` (and subdirectories) whose name
    matches ``name_pattern``. A missing directory yields False and is logged
    once.
    """

    def __init__(self, directory: str, name_pattern: str):
        self.directory = directory
        self.name_pattern = name_pattern
        self._warned_missing = False

    def search(self, needle: str) -> bool:
        if not os.path.isdir(self.directory):
            if not self._warned_missing:
                log.warning("IDS alerts directory %s does not exist", self.directory)
                self._warned_missing = True
            return False
        for root, _dirs, files in os.walk(self.directory):
            for fname in sorted(files):
                if not fnmatch.fnmatch(fname, self.name_pattern):
                    continue
                path = os.path.join(root, fname)
                try:
                    with open(path, "r", encoding="utf-8", errors="replace") as fh:
                        if needle in fh.read():
                            return True
                except OSError as exc:
                    log.warning("cannot read IDS alert file %s: %s", path, exc)
        return False


MSG_IMPLS = {
    "topicin": topicin,
    "msgtypein": msgtypein,
    "msgsubtype": msgsubtype,
    "publishers": publishers,
    "publishersinclude": publishersinclude,
    "publishercount": publishercount,
    "subscribers": subscribers,
    "subscribersinclude": subscribersinclude,
    "subscribercount": subscribercount,
}

GRAPH_IMPLS = {
    "nodes": nodes,
    "nodesinclude": nodesinclude,
    "nodecount": nodecount,
    "topics": topics,
    "topicsinclude": topicsinclude,
    "topiccount": topiccount,
    "service": service,
    "services": services,
    "servicesinclude": servicesinclude,
    "servicecount": servicecount,
    "topicpublishers": topicpublishers,
    "topicpublishersinclude": topicpublishersinclude,
    "topicpublishercount": topicpublishercount,
    "topicsubscribers": topicsubscribers,
    "topicsubscribersinclude": topicsubscribersinclude,
    "topicsubscribercount": topicsubscribercount,
}
