"""Shared test fixtures: independent oracles and random instance generators.

The oracles here deliberately avoid the library's algorithms: routing is
checked against exhaustive simple-path enumeration, the critical path
against exhaustive source-to-sink path enumeration. Both accumulate costs
left to right along a path, which is the comparison/accumulation order the
library contracts specify, so equality assertions can be exact.
"""

from __future__ import annotations

import math
import random

from chainsim.state import StateRegistry, state_access_at_dispatch
from chainsim.topology import LinkSpec, NodeSpec, Topology
from chainsim.workflow import DagSpec

PROP_GRID = [0.0001 * k for k in range(0, 101)]  # 0 .. 10 ms
RATE_GRID = [1e5, 5e5, 1e6, 5e6, 1e7, 1e8]


# -- topologies --------------------------------------------------------------


def make_topology(nodes: list[tuple], links: list[tuple]) -> Topology:
    """nodes: (id, role[, cores, core_speed]); links: (a, b, prop, rate)."""
    return Topology(
        tuple(NodeSpec(*n) for n in nodes),
        tuple(LinkSpec(*l) for l in links),
    )


def random_topology(rng: random.Random, max_nodes: int = 7, min_workers: int = 1) -> Topology:
    """Random connected topology with at least one client and worker."""
    n = rng.randint(2, max_nodes)
    roles = ["client", "worker"] + [
        rng.choice(["client", "broker", "worker", "worker"]) for _ in range(n - 2)
    ]
    while sum(r == "worker" for r in roles) < min_workers:
        roles[rng.randrange(1, n)] = "worker"
    rng.shuffle(roles)
    nodes = []
    for i, role in enumerate(roles):
        if role == "worker":
            nodes.append(NodeSpec(i, role, cores=rng.randint(1, 4), core_speed=rng.choice([1e5, 1e6, 5e6])))
        else:
            nodes.append(NodeSpec(i, role))

    links: dict[tuple[int, int], LinkSpec] = {}

    def add_link(a: int, b: int) -> None:
        key = (a, b) if a <= b else (b, a)
        if a != b and key not in links:
            links[key] = LinkSpec(key[0], key[1], rng.choice(PROP_GRID), rng.choice(RATE_GRID))

    for i in range(1, n):
        add_link(i, rng.randrange(0, i))  # spanning tree: connected by construction
    extra = rng.randint(0, n)
    for _ in range(extra):
        add_link(rng.randrange(n), rng.randrange(n))
    return Topology(tuple(nodes), tuple(links.values()))


def brute_force_routes(t: Topology) -> dict[tuple[int, int], tuple[float, tuple[int, ...]]]:
    """All-pairs minimum over every simple path, by (prop, hops, path).

    Propagation accumulates left to right so ties and float effects match
    the library's comparison key exactly.
    """
    adj: dict[int, list[tuple[int, float]]] = {node.id: [] for node in t.nodes}
    for link in t.links:
        adj[link.endpoint_a].append((link.endpoint_b, link.propagation))
        adj[link.endpoint_b].append((link.endpoint_a, link.propagation))

    best: dict[tuple[int, int], tuple[float, int, tuple[int, ...]]] = {}

    def visit(src: int, path: tuple[int, ...], prop: float) -> None:
        dst = path[-1]
        key = (src, dst)
        cand = (prop, len(path) - 1, path)
        if key not in best or cand < best[key]:
            best[key] = cand
        for nbr, link_prop in adj[dst]:
            if nbr not in path:
                visit(src, path + (nbr,), prop + link_prop)

    for node in t.nodes:
        visit(node.id, (node.id,), 0.0)
    return {key: (prop, path) for key, (prop, _hops, path) in best.items()}


# -- DAGs ---------------------------------------------------------------------


def random_dag(rng: random.Random, max_vertices: int = 10, app_id: str = "app") -> DagSpec:
    """Random single-source single-sink DAG; every vertex lies on a path."""
    n = rng.randint(1, max_vertices)
    names = [f"f{i:02d}" for i in range(n)]
    edges: set[tuple[str, str]] = set()
    for j in range(1, n):
        for i in range(j):
            if rng.random() < 0.35:
                edges.add((names[i], names[j]))
    for j in range(1, n):
        if not any(q == names[j] for _p, q in edges):
            edges.add((names[rng.randrange(j)], names[j]))
    for i in range(n - 1):
        if not any(p == names[i] for p, _q in edges):
            edges.add((names[i], names[rng.randrange(i + 1, n)]))
    return DagSpec(app_id, frozenset(names), frozenset(edges), entry_payload=rng.uniform(100, 10000))


def enumerate_critical_path(
    dag, assignment, routes, registry, mode, *, functions, workers, client, entry_payload=None
):
    """Exhaustive source-to-sink path enumeration of the zero-load latency.

    Walks every path, accumulating transfer, state, and compute costs in the
    library's stated order; the result is the max over paths. Per-vertex
    output sizes are fixed by the join-sum rule before enumeration.
    """
    from chainsim.state import stage_transfer_bytes
    from chainsim.topology import transfer_delay
    from chainsim.workflow import (
        dag_sink,
        dag_source,
        predecessor_map,
        stage_io,
        successor_map,
        topo_order,
        vertex_input_bytes,
    )

    entry = dag.entry_payload if entry_payload is None else entry_payload
    preds = predecessor_map(dag)
    succs = successor_map(dag)
    reg = registry if registry is not None else StateRegistry()

    outputs: dict[str, float] = {}
    vertex_cost: dict[str, tuple[float, float]] = {}  # (state delay, compute s)
    for v in topo_order(dag):
        f = functions[v]
        input_bytes = vertex_input_bytes(preds[v], outputs, entry)
        compute_ops, out_bytes = stage_io(f, input_bytes)
        outputs[v] = out_bytes
        access = state_access_at_dispatch(mode, reg, dag.app_id, f, assignment[v], routes)
        vertex_cost[v] = (access.delay, compute_ops / workers[assignment[v]].core_speed)

    source, sink = dag_source(dag), dag_sink(dag)
    best = -math.inf

    def walk(v: str, t: float) -> None:
        nonlocal best
        f = functions[v]
        state_delay, compute_s = vertex_cost[v]
        t = t + state_delay
        t += compute_s
        if v == sink:
            t += transfer_delay(
                routes, assignment[v], client, stage_transfer_bytes(outputs[v], f, None, mode)
            )
            if t > best:
                best = t
            return
        for q in succs[v]:
            walk(
                q,
                t
                + transfer_delay(
                    routes,
                    assignment[v],
                    assignment[q],
                    stage_transfer_bytes(outputs[v], f, functions[q], mode),
                ),
            )

    t0 = transfer_delay(
        routes, client, assignment[source], stage_transfer_bytes(entry, None, functions[source], mode)
    )
    walk(source, t0)
    return best


# -- scenario documents -------------------------------------------------------


def chain_scenario_raw(
    *,
    n_workers: int = 2,
    chain_len: int = 2,
    policy: str = "round_robin",
    state_mode: str = "remote_fixed",
    seed: int = 1,
    rate: float = 5.0,
    horizon: float = 10.0,
    state_size: float = 0.0,
    entry_payload: float = 1000.0,
    replications: int = 1,
) -> dict:
    """A small single-client chain scenario document, ready to customize."""
    nodes = [{"id": 0, "role": "client"}]
    links = []
    for i in range(n_workers):
        nodes.append({"id": i + 1, "role": "worker", "cores": 1, "core_speed": 1e6})
        links.append({"endpoint_a": 0, "endpoint_b": i + 1, "propagation": 0.001, "rate": 1e7})
    functions = [
        {
            "id": f"f{k}",
            "fixed_ops": 1000.0 * (k + 1),
            "ops_per_byte": 0.5,
            "output_ratio": 0.8,
            "state_size": state_size,
        }
        for k in range(chain_len)
    ]
    return {
        "topology": {"nodes": nodes, "links": links},
        "workflows": [
            {
                "app_id": "app",
                "client": 0,
                "entry_payload": entry_payload,
                "functions": functions,
                "chain": [f"f{k}" for k in range(chain_len)],
            }
        ],
        "workload": {
            "rates": {"app": rate},
            "horizon": horizon,
            "payload": {"kind": "constant"},
            "compute_randomization": False,
        },
        "policy": policy,
        "state_mode": state_mode,
        "seed": seed,
        "replications": replications,
    }


def random_chain_scenario_raw(rng: random.Random, *, seed: int, policy: str, state_mode: str) -> dict:
    """Randomized scenario for oracle checks: <= 8 nodes, chain of <= 6 stages."""
    topo = random_topology(rng, max_nodes=8, min_workers=1)
    nodes = []
    for n in topo.nodes:
        nd = {"id": n.id, "role": n.role}
        if n.role == "worker":
            nd["cores"] = n.cores
            nd["core_speed"] = n.core_speed
        nodes.append(nd)
    links = [
        {
            "endpoint_a": l.endpoint_a,
            "endpoint_b": l.endpoint_b,
            "propagation": l.propagation,
            "rate": l.rate,
        }
        for l in topo.links
    ]
    chain_len = rng.randint(1, 6)
    functions = [
        {
            "id": f"f{k}",
            "fixed_ops": rng.choice([0.0, 1e3, 1e4, 1e5]),
            "ops_per_byte": rng.choice([0.5, 1.0, 3.0]),
            "output_ratio": rng.choice([0.0, 0.25, 1.0, 1.5]),
            "state_size": rng.choice([0.0, 1e3, 2e4]),
        }
        for k in range(chain_len)
    ]
    client = topo.clients()[0].id
    return {
        "topology": {"nodes": nodes, "links": links},
        "workflows": [
            {
                "app_id": "app",
                "client": client,
                "entry_payload": rng.uniform(100, 10000),
                "functions": functions,
                "chain": [f"f{k}" for k in range(chain_len)],
            }
        ],
        "workload": {
            "rates": {"app": 1.0},
            "horizon": 10.0,
            "payload": {"kind": "constant"},
            "compute_randomization": False,
        },
        "policy": policy,
        "state_mode": state_mode,
        "seed": seed,
        "replications": 1,
    }
