"""Edge-network model: nodes, links, static routing, payload transfer delays.

Nodes play one of three roles: clients inject invocations, brokers relay
traffic, workers execute functions. Links are bidirectional delay+rate pipes
with no contention model. Routes are shortest paths on total propagation with
deterministic tie-breaking (fewer hops, then lexicographically smallest id
sequence), so the network layer never introduces nondeterminism into a run.

Transfer cost is store-and-forward: the full payload is serialized on every
hop, so a transfer of ``n`` bytes over a route costs
``sum(prop_h + n / rate_h)`` over its hops.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

ROLE_CLIENT = "client"
ROLE_BROKER = "broker"
ROLE_WORKER = "worker"
ROLES = (ROLE_CLIENT, ROLE_BROKER, ROLE_WORKER)


@dataclass(frozen=True)
class NodeSpec:
    """A network node. Compute fields are meaningful for workers only."""

    id: int
    role: str
    cores: int = 0
    core_speed: float = 0.0  # operations per second

    @property
    def is_worker(self) -> bool:
        return self.role == ROLE_WORKER


@dataclass(frozen=True)
class LinkSpec:
    """Bidirectional, symmetric link between two distinct nodes."""

    endpoint_a: int
    endpoint_b: int
    propagation: float  # seconds
    rate: float  # bytes per second

    @property
    def pair(self) -> tuple[int, int]:
        a, b = self.endpoint_a, self.endpoint_b
        return (a, b) if a <= b else (b, a)


@dataclass
class Topology:
    """A set of nodes plus the links connecting them.

    Immutable by convention after construction; safe to share read-only
    across concurrent replications.
    """

    nodes: tuple[NodeSpec, ...]
    links: tuple[LinkSpec, ...]
    _by_id: dict[int, NodeSpec] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.nodes = tuple(self.nodes)
        self.links = tuple(self.links)
        self._by_id = {n.id: n for n in self.nodes}

    def node(self, node_id: int) -> NodeSpec:
        return self._by_id[node_id]

    def has_node(self, node_id: int) -> bool:
        return node_id in self._by_id

    def workers(self) -> list[NodeSpec]:
        return sorted((n for n in self.nodes if n.role == ROLE_WORKER), key=lambda n: n.id)

    def clients(self) -> list[NodeSpec]:
        return sorted((n for n in self.nodes if n.role == ROLE_CLIENT), key=lambda n: n.id)


@dataclass(frozen=True)
class Route:
    """One directed route: node id sequence plus per-hop (propagation, rate)."""

    path: tuple[int, ...]  # src first, dst last; (src,) when src == dst
    hops: tuple[tuple[float, float], ...]  # (propagation s, rate B/s) per hop
    propagation: float
    bottleneck_rate: float  # +inf for the empty route
    hop_count: int

    def delay(self, nbytes: float) -> float:
        acc = 0.0
        for prop, rate in self.hops:
            acc += prop + nbytes / rate
        return acc


class RouteTable:
    """All-pairs routes for a validated topology."""

    def __init__(self, routes: dict[tuple[int, int], Route]):
        self._routes = routes

    def route(self, src: int, dst: int) -> Route:
        try:
            return self._routes[(src, dst)]
        except KeyError:
            raise KeyError(f"no route for node pair ({src}, {dst})") from None

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self._routes)


def validate_topology(t: Topology) -> list[str]:
    """Return violation descriptions; empty iff every invariant holds.

    Violations are data, not failures: each entry names the offending
    element so config errors are actionable.
    """
    violations: list[str] = []

    seen_ids: set[int] = set()
    for n in t.nodes:
        if n.id in seen_ids:
            violations.append(f"duplicate node id {n.id}")
        seen_ids.add(n.id)
        if n.id < 0:
            violations.append(f"node id {n.id} must be non-negative")
        if n.role not in ROLES:
            violations.append(f"node {n.id} has unknown role {n.role!r}")
        elif n.role == ROLE_WORKER:
            if n.cores < 1:
                violations.append(f"worker {n.id} must have cores >= 1")
            if n.core_speed <= 0:
                violations.append(f"worker {n.id} must have core_speed > 0")
        else:
            if n.cores or n.core_speed:
                violations.append(f"{n.role} {n.id} must not have compute capacity")

    seen_pairs: set[tuple[int, int]] = set()
    for link in t.links:
        a, b = link.endpoint_a, link.endpoint_b
        for end in (a, b):
            if end not in seen_ids:
                violations.append(f"link ({a},{b}) references unknown node {end}")
        if a == b:
            violations.append(f"link ({a},{b}) endpoints must differ")
        elif link.pair in seen_pairs:
            violations.append(f"duplicate link ({link.pair[0]},{link.pair[1]})")
        seen_pairs.add(link.pair)
        if link.propagation < 0:
            violations.append(f"link ({a},{b}) propagation must be >= 0")
        if link.rate <= 0:
            violations.append(f"link ({a},{b}) rate must be > 0")

    if not any(n.role == ROLE_CLIENT for n in t.nodes):
        violations.append("topology has no client")
    if not any(n.role == ROLE_WORKER for n in t.nodes):
        violations.append("topology has no worker")

    if t.nodes and not _connected(t):
        violations.append("topology not connected")

    return violations


def _connected(t: Topology) -> bool:
    adj: dict[int, set[int]] = {n.id: set() for n in t.nodes}
    for link in t.links:
        if link.endpoint_a in adj and link.endpoint_b in adj and link.endpoint_a != link.endpoint_b:
            adj[link.endpoint_a].add(link.endpoint_b)
            adj[link.endpoint_b].add(link.endpoint_a)
    start = t.nodes[0].id
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(adj)


def build_routes(t: Topology) -> RouteTable:
    """Compute the all-pairs route table.

    For each ordered pair the route minimizes total propagation; ties break
    on fewer hops, then on the lexicographically smallest node-id sequence.
    Raises ValueError on an invalid topology.
    """
    violations = validate_topology(t)
    if violations:
        raise ValueError("invalid topology: " + "; ".join(violations))

    adj: dict[int, list[tuple[int, float, float]]] = {n.id: [] for n in t.nodes}
    for link in t.links:
        adj[link.endpoint_a].append((link.endpoint_b, link.propagation, link.rate))
        adj[link.endpoint_b].append((link.endpoint_a, link.propagation, link.rate))
    for lst in adj.values():
        lst.sort()

    link_params = {link.pair: (link.propagation, link.rate) for link in t.links}

    routes: dict[tuple[int, int], Route] = {}
    for src in adj:
        best = _dijkstra(src, adj)
        for dst, (prop, path) in best.items():
            hops = []
            for u, v in zip(path, path[1:]):
                hops.append(link_params[(u, v) if u <= v else (v, u)])
            rate = min((h[1] for h in hops), default=math.inf)
            routes[(src, dst)] = Route(
                path=tuple(path),
                hops=tuple(hops),
                propagation=prop,
                bottleneck_rate=rate,
                hop_count=len(hops),
            )
    return RouteTable(routes)


def _dijkstra(
    src: int, adj: dict[int, list[tuple[int, float, float]]]
) -> dict[int, tuple[float, tuple[int, ...]]]:
    # Priority (propagation, hop count, path) realizes the tie-break order
    # directly; the path component makes the popped label unique per node.
    # The reported propagation is the accumulated comparison key itself.
    best: dict[int, tuple[float, tuple[int, ...]]] = {}
    heap: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (src,))]
    while heap:
        prop, nhops, path = heapq.heappop(heap)
        node = path[-1]
        if node in best:
            continue
        best[node] = (prop, path)
        for nbr, link_prop, _rate in adj[node]:
            if nbr not in best:
                heapq.heappush(heap, (prop + link_prop, nhops + 1, path + (nbr,)))
    return best


def transfer_delay(rt: RouteTable, src: int, dst: int, nbytes: float) -> float:
    """Store-and-forward delay for ``nbytes`` from src to dst; 0 when src == dst."""
    if nbytes < 0:
        raise ValueError(f"nbytes must be >= 0, got {nbytes}")
    return rt.route(src, dst).delay(nbytes)
