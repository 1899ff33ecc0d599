"""Functions, chains, and DAG compositions, plus the analytic latency oracle.

A chain is the linear special case of a DAG: vertices are function ids,
edges carry the producer's output to the consumer. Validation is structural
(acyclic, single source and sink, every vertex on a source-to-sink path);
``critical_path_time`` computes the zero-load end-to-end latency by
longest-path dynamic programming and serves as the simulator's oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from . import state as state_mod
from .state import StateMode, StateRegistry
from .topology import NodeSpec, RouteTable, transfer_delay


@dataclass(frozen=True)
class FunctionSpec:
    """Per-function compute and state footprint.

    Compute demand for an input of ``b`` bytes is
    ``fixed_ops + ops_per_byte * b`` operations; the output is
    ``output_ratio * b`` bytes; ``state_size`` is the size of the function's
    persistent state (0 for stateless functions).
    """

    id: str
    fixed_ops: float = 0.0
    ops_per_byte: float = 0.0
    output_ratio: float = 0.0
    state_size: float = 0.0


@dataclass(frozen=True)
class ChainSpec:
    app_id: str
    functions: tuple[str, ...]
    entry_payload: float  # bytes, > 0


@dataclass(frozen=True)
class DagSpec:
    app_id: str
    vertices: frozenset[str]
    edges: frozenset[tuple[str, str]]  # (producer, consumer)
    entry_payload: float  # bytes, > 0


# Assignment: function id -> worker node id. Plain mapping, no wrapper type.
Assignment = Mapping[str, int]


def validate_function(f: FunctionSpec) -> list[str]:
    violations = []
    if f.fixed_ops < 0:
        violations.append(f"function {f.id} fixed_ops must be >= 0")
    if f.ops_per_byte < 0:
        violations.append(f"function {f.id} ops_per_byte must be >= 0")
    if f.fixed_ops + f.ops_per_byte <= 0:
        violations.append(f"function {f.id} must perform work (fixed_ops + ops_per_byte > 0)")
    if f.output_ratio < 0:
        violations.append(f"function {f.id} output_ratio must be >= 0")
    if f.state_size < 0:
        violations.append(f"function {f.id} state_size must be >= 0")
    return violations


def validate_chain(c: ChainSpec, functions: Mapping[str, FunctionSpec]) -> list[str]:
    violations = []
    if not c.functions:
        violations.append("chain has no functions")
    seen: set[str] = set()
    for fid in c.functions:
        if fid not in functions:
            violations.append(f"chain references unknown function {fid}")
        if fid in seen:
            violations.append(f"duplicate function {fid} in chain")
        seen.add(fid)
    if c.entry_payload <= 0:
        violations.append("entry_payload must be > 0")
    return violations


def chain_to_dag(c: ChainSpec) -> DagSpec:
    """Linear DAG: consecutive chain stages become edges."""
    edges = frozenset(zip(c.functions, c.functions[1:]))
    return DagSpec(
        app_id=c.app_id,
        vertices=frozenset(c.functions),
        edges=edges,
        entry_payload=c.entry_payload,
    )


def predecessor_map(d: DagSpec) -> dict[str, tuple[str, ...]]:
    preds: dict[str, list[str]] = {v: [] for v in d.vertices}
    for p, q in sorted(d.edges):
        if q in preds:
            preds[q].append(p)
    return {v: tuple(sorted(ps)) for v, ps in preds.items()}


def successor_map(d: DagSpec) -> dict[str, tuple[str, ...]]:
    succs: dict[str, list[str]] = {v: [] for v in d.vertices}
    for p, q in sorted(d.edges):
        if p in succs:
            succs[p].append(q)
    return {v: tuple(sorted(qs)) for v, qs in succs.items()}


def validate_dag(d: DagSpec) -> list[str]:
    """Structural validation; empty result iff the DAG is well formed."""
    violations = []
    if not d.vertices:
        return ["dag has no vertices"]
    for p, q in sorted(d.edges):
        for end in (p, q):
            if end not in d.vertices:
                violations.append(f"edge ({p},{q}) references unknown vertex {end}")

    edges = {(p, q) for p, q in d.edges if p in d.vertices and q in d.vertices}
    indeg = {v: 0 for v in d.vertices}
    outdeg = {v: 0 for v in d.vertices}
    for p, q in edges:
        indeg[q] += 1
        outdeg[p] += 1

    sources = sorted(v for v in d.vertices if indeg[v] == 0)
    sinks = sorted(v for v in d.vertices if outdeg[v] == 0)
    if not sources:
        violations.append("no source")
    elif len(sources) > 1:
        violations.append("multiple sources")
    if not sinks:
        violations.append("no sink")
    elif len(sinks) > 1:
        violations.append("multiple sinks")

    # Cycle detection by repeated removal of zero-in-degree vertices.
    remaining = dict(indeg)
    ready = sorted(v for v, k in remaining.items() if k == 0)
    succs = successor_map(DagSpec(d.app_id, d.vertices, frozenset(edges), d.entry_payload))
    processed = 0
    while ready:
        v = ready.pop(0)
        processed += 1
        for q in succs[v]:
            remaining[q] -= 1
            if remaining[q] == 0:
                ready.append(q)
        ready.sort()
    acyclic = processed == len(d.vertices)
    if not acyclic:
        violations.append("cycle detected")

    if acyclic and len(sources) == 1 and len(sinks) == 1:
        fwd = _reachable(sources[0], succs)
        preds = predecessor_map(d)
        back = _reachable(sinks[0], preds)
        for v in sorted(d.vertices):
            if v not in fwd or v not in back:
                violations.append(f"vertex {v} not on any source->sink path")

    if d.entry_payload <= 0:
        violations.append("entry_payload must be > 0")
    return violations


def _reachable(start: str, nbrs: Mapping[str, tuple[str, ...]]) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for q in nbrs[v]:
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def dag_source(d: DagSpec) -> str:
    preds = predecessor_map(d)
    (src,) = [v for v in sorted(d.vertices) if not preds[v]]
    return src


def dag_sink(d: DagSpec) -> str:
    succs = successor_map(d)
    (sink,) = [v for v in sorted(d.vertices) if not succs[v]]
    return sink


def topo_order(d: DagSpec) -> list[str]:
    """Kahn's algorithm with lowest-id-first tie-breaking."""
    import heapq

    preds = predecessor_map(d)
    succs = successor_map(d)
    remaining = {v: len(ps) for v, ps in preds.items()}
    ready = [v for v, k in remaining.items() if k == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for q in succs[v]:
            remaining[q] -= 1
            if remaining[q] == 0:
                heapq.heappush(ready, q)
    if len(order) != len(d.vertices):
        raise ValueError("cycle detected")
    return order


def enabled_frontier(d: DagSpec, completed: set[str]) -> set[str]:
    """Vertices whose predecessors are all completed and which may run next.

    ``completed`` must be downward-closed under predecessors (a valid
    partial execution); otherwise ValueError.
    """
    preds = predecessor_map(d)
    for v in sorted(completed):
        if v not in d.vertices:
            raise ValueError(f"completed vertex {v} not in dag")
        missing = [p for p in preds[v] if p not in completed]
        if missing:
            raise ValueError(
                f"completed set is not downward-closed: {v} completed before predecessor {missing[0]}"
            )
    return {v for v in d.vertices if v not in completed and all(p in completed for p in preds[v])}


def stage_io(f: FunctionSpec, input_bytes: float) -> tuple[float, float]:
    """(compute operations, output bytes) for one stage at the given input size."""
    if input_bytes < 0:
        raise ValueError(f"input_bytes must be >= 0, got {input_bytes}")
    compute_ops = f.fixed_ops + f.ops_per_byte * input_bytes
    output_bytes = f.output_ratio * input_bytes
    return compute_ops, output_bytes


def join_payload(incoming_outputs: Iterable[float]) -> float:
    """Input size at a join vertex: the sum of its predecessors' outputs."""
    outputs = list(incoming_outputs)
    if not outputs:
        raise ValueError("join_payload requires at least one incoming output")
    total = 0.0
    for b in outputs:
        total += b
    return total


def vertex_input_bytes(
    preds: tuple[str, ...], outputs: Mapping[str, float], entry_payload: float
) -> float:
    """Input size of a vertex: entry payload for the source, join of outputs otherwise.

    Predecessors are given sorted; summation order is part of the contract
    so the simulator and the analytic oracle accumulate identically.
    """
    if not preds:
        return entry_payload
    return join_payload(outputs[p] for p in preds)


def critical_path_time(
    d: DagSpec,
    a: Assignment,
    rt: RouteTable,
    registry: StateRegistry | None,
    mode: StateMode,
    *,
    functions: Mapping[str, FunctionSpec],
    workers: Mapping[int, NodeSpec],
    client: int,
    entry_payload: float | None = None,
) -> float:
    """Zero-load completion time of the sink, including result delivery.

    Each vertex starts once all predecessor outputs have arrived at its
    assigned worker (per-edge transfer delays, state costs at dispatch) and
    computes without queueing. Longest-path dynamic programming in
    topological order; ties in the max leave the result unchanged.
    """
    violations = validate_dag(d)
    if violations:
        raise ValueError("invalid dag: " + "; ".join(violations))
    for v in sorted(d.vertices):
        if v not in a:
            raise ValueError(f"assignment missing vertex {v}")
        if a[v] not in workers or not workers[a[v]].is_worker:
            raise ValueError(f"assignment maps {v} to non-worker node {a[v]}")

    entry = d.entry_payload if entry_payload is None else entry_payload
    preds = predecessor_map(d)
    reg = registry if registry is not None else StateRegistry()

    done: dict[str, float] = {}
    outputs: dict[str, float] = {}
    for v in topo_order(d):
        f = functions[v]
        w = a[v]
        input_bytes = vertex_input_bytes(preds[v], outputs, entry)
        if not preds[v]:
            arrived = transfer_delay(
                rt, client, w, state_mod.stage_transfer_bytes(entry, None, f, mode)
            )
        else:
            arrived = max(
                done[p]
                + transfer_delay(
                    rt, a[p], w, state_mod.stage_transfer_bytes(outputs[p], functions[p], f, mode)
                )
                for p in preds[v]
            )
        access = state_mod.state_access_at_dispatch(mode, reg, d.app_id, f, w, rt)
        t = arrived + access.delay
        compute_ops, out_bytes = stage_io(f, input_bytes)
        t += compute_ops / workers[w].core_speed
        done[v] = t
        outputs[v] = out_bytes

    sink = dag_sink(d)
    f_sink = functions[sink]
    return done[sink] + transfer_delay(
        rt, a[sink], client, state_mod.stage_transfer_bytes(outputs[sink], f_sink, None, mode)
    )
