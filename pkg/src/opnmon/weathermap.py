"""Abstract topology and per-link status colors.

The map shows one Tier-0 hub and the Tier-1 sites as abstract nodes, joined
by non-directed abstract links. Each abstract link aggregates one or more
end-to-end links (a second one is the optical 1+1 protection), exactly one
IP interface pair, and the measurement addresses used by the probe mesh.

Status colors per abstract link, recomputed every cycle:

* GREEN    all associated end-to-end links UP
* RED      all DOWN
* BLUE     all UNKNOWN
* MAGENTA  none of the associated ids exists in the monitored topology
* YELLOW   everything else (protection keeps service partly up, or mixed)

Ids that are missing from the monitored topology, while at least one other
id is present, count as UNKNOWN members rather than triggering MAGENTA.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Mapping

from .model import OperationalState


class TopologyError(Exception):
    """Base for topology config rejections; message carries the location."""


class ConfigSyntax(TopologyError):
    pass


class DuplicateId(TopologyError):
    pass


class DanglingReference(TopologyError):
    pass


class MultipleTier0(TopologyError):
    pass


class MissingTier0(TopologyError):
    pass


class DuplicateE2EMapping(TopologyError):
    pass


class UnknownSelection(KeyError):
    pass


class AbstractLinkStatus(enum.Enum):
    UP = "UP"
    WARNING = "WARNING"
    DOWN = "DOWN"
    UNKNOWN = "UNKNOWN"
    TOPOLOGY_UNKNOWN = "TOPOLOGY_UNKNOWN"

    def __str__(self) -> str:
        return self.value


# Color name and hex per status; the UI consumes these verbatim.
STATUS_COLORS: dict[AbstractLinkStatus, tuple[str, str]] = {
    AbstractLinkStatus.UP: ("GREEN", "#1faa00"),
    AbstractLinkStatus.WARNING: ("YELLOW", "#f5c211"),
    AbstractLinkStatus.DOWN: ("RED", "#d7191c"),
    AbstractLinkStatus.UNKNOWN: ("BLUE", "#2166ac"),
    AbstractLinkStatus.TOPOLOGY_UNKNOWN: ("MAGENTA", "#c000c0"),
}


def status_color(status: AbstractLinkStatus) -> str:
    return STATUS_COLORS[status][0]


def status_hex(status: AbstractLinkStatus) -> str:
    return STATUS_COLORS[status][1]


@dataclass(frozen=True, slots=True)
class AbstractNode:
    id: str
    tier: int
    x: float = 0.0
    y: float = 0.0


@dataclass(frozen=True, slots=True)
class AbstractLink:
    """One drawn edge of the map and everything it aggregates."""

    id: str
    endpoints: tuple[str, str]
    e2e_link_ids: tuple[str, ...]
    ip_interfaces: tuple[str, str]
    bwctl_addresses: Mapping[str, str] | None = None

    @property
    def protected(self) -> bool:
        """True when an optical 1+1 protection link is configured."""
        return len(self.e2e_link_ids) > 1


@dataclass(frozen=True)
class AbstractTopology:
    nodes: tuple[AbstractNode, ...]
    links: tuple[AbstractLink, ...]

    def node(self, node_id: str) -> AbstractNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise UnknownSelection(node_id)

    def link(self, link_id: str) -> AbstractLink:
        for link in self.links:
            if link.id == link_id:
                return link
        raise UnknownSelection(link_id)

    @property
    def tier0(self) -> AbstractNode:
        return next(node for node in self.nodes if node.tier == 0)

    def links_at(self, node_id: str) -> tuple[AbstractLink, ...]:
        return tuple(
            sorted(
                (link for link in self.links if node_id in link.endpoints),
                key=lambda link: link.id,
            )
        )

    def e2e_ids(self) -> tuple[str, ...]:
        out: list[str] = []
        for link in self.links:
            out.extend(link.e2e_link_ids)
        return tuple(out)


def load_topology(raw: bytes | str | dict) -> AbstractTopology:
    """Parse and validate the topology config.

    Every invariant violation raises a named error whose message points at
    the offending element.
    """
    if isinstance(raw, (bytes, str)):
        try:
            obj = json.loads(raw)
        except ValueError as exc:
            raise ConfigSyntax("topology config is not valid JSON: %s" % exc) from None
    else:
        obj = raw
    if not isinstance(obj, dict):
        raise ConfigSyntax("topology config must be a JSON object")

    nodes: list[AbstractNode] = []
    seen_nodes: set[str] = set()
    for index, item in enumerate(obj.get("nodes", [])):
        try:
            node = AbstractNode(
                id=item["id"],
                tier=int(item["tier"]),
                x=float(item.get("x", 0.0)),
                y=float(item.get("y", 0.0)),
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise ConfigSyntax("node %d: %s" % (index, exc)) from None
        if not node.id:
            raise ConfigSyntax("node %d: empty id" % index)
        if node.tier not in (0, 1):
            raise ConfigSyntax("node %r: tier must be 0 or 1" % node.id)
        if node.id in seen_nodes:
            raise DuplicateId("node id %r appears twice" % node.id)
        seen_nodes.add(node.id)
        nodes.append(node)

    tier0_ids = [node.id for node in nodes if node.tier == 0]
    if len(tier0_ids) > 1:
        raise MultipleTier0("tier-0 nodes %s; exactly one allowed" % tier0_ids)
    if not tier0_ids:
        raise MissingTier0("topology has no tier-0 node")

    links: list[AbstractLink] = []
    seen_links: set[str] = set()
    seen_e2e: dict[str, str] = {}
    for index, item in enumerate(obj.get("links", [])):
        try:
            link = AbstractLink(
                id=item["id"],
                endpoints=tuple(item["endpoints"]),
                e2e_link_ids=tuple(item["e2e_link_ids"]),
                ip_interfaces=tuple(item["ip_interfaces"]),
                bwctl_addresses=dict(item["bwctl_addresses"])
                if item.get("bwctl_addresses")
                else None,
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise ConfigSyntax("link %d: %s" % (index, exc)) from None
        where = "link %r" % link.id
        if not link.id:
            raise ConfigSyntax("link %d: empty id" % index)
        if link.id in seen_links:
            raise DuplicateId("link id %r appears twice" % link.id)
        seen_links.add(link.id)
        if len(link.endpoints) != 2 or link.endpoints[0] == link.endpoints[1]:
            raise ConfigSyntax("%s: endpoints must be two distinct nodes" % where)
        for endpoint in link.endpoints:
            if endpoint not in seen_nodes:
                raise DanglingReference("%s references unknown node %r" % (where, endpoint))
        if not link.e2e_link_ids:
            raise ConfigSyntax("%s: e2e_link_ids must be non-empty" % where)
        for e2e_id in link.e2e_link_ids:
            if e2e_id in seen_e2e:
                raise DuplicateE2EMapping(
                    "e2e link %r mapped by both %r and %r" % (e2e_id, seen_e2e[e2e_id], link.id)
                )
            seen_e2e[e2e_id] = link.id
        if len(link.ip_interfaces) != 2:
            raise ConfigSyntax("%s: exactly one IP interface pair required" % where)
        if link.bwctl_addresses is not None:
            for endpoint in link.bwctl_addresses:
                if endpoint not in link.endpoints:
                    raise DanglingReference(
                        "%s: bwctl address for non-endpoint %r" % (where, endpoint)
                    )
        links.append(link)

    return AbstractTopology(nodes=tuple(nodes), links=tuple(links))


def compute_abstract_status(
    link: AbstractLink, e2e_states: Mapping[str, OperationalState]
) -> AbstractLinkStatus:
    """Aggregate the abstract link's color from its end-to-end link states.

    ``e2e_states`` maps every id known to the monitored topology to its
    aggregated operational state; associated ids not in the map are absent.
    """
    present = [e2e_states[i] for i in link.e2e_link_ids if i in e2e_states]
    if not present:
        return AbstractLinkStatus.TOPOLOGY_UNKNOWN
    members = present + [
        OperationalState.UNKNOWN for i in link.e2e_link_ids if i not in e2e_states
    ]
    if all(state is OperationalState.DOWN for state in members):
        return AbstractLinkStatus.DOWN
    if all(state is OperationalState.UNKNOWN for state in members):
        return AbstractLinkStatus.UNKNOWN
    if all(state is OperationalState.UP for state in members):
        return AbstractLinkStatus.UP
    return AbstractLinkStatus.WARNING


def selection_scope(selected: str, topology: AbstractTopology) -> tuple[AbstractLink, ...]:
    """The abstract links whose data a selection brings up.

    A link selects itself; a Tier-1 node selects its link to the Tier-0
    hub; the Tier-0 node selects every link it touches.
    """
    for link in topology.links:
        if link.id == selected:
            return (link,)
    for node in topology.nodes:
        if node.id != selected:
            continue
        if node.tier == 0:
            return topology.links_at(node.id)
        hub = topology.tier0.id
        return tuple(
            link
            for link in topology.links_at(node.id)
            if set(link.endpoints) == {hub, node.id}
        )
    raise UnknownSelection(selected)
