"""Deterministic discrete-event simulator for chain/DAG invocations.

Events are processed in (time, seq) order, seq being creation order, which
totally orders simultaneous events. Arrivals are injected in [0, horizon);
in-flight work drains, so a run terminates exactly when the event queue is
empty. Given a scenario (including seed) the produced metrics are a pure
function of the inputs.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from itertools import count
from typing import NamedTuple

from . import state as state_mod
from . import workload as wl
from .config import AppWorkflow, Scenario
from .dispatch import DispatchContext, PolicyKind, RrState, choose_worker
from .state import StateMode, StateRegistry, apply_state_access, remote_state_access
from .topology import NodeSpec
from .workflow import vertex_input_bytes

ARRIVAL = 0
STAGE_READY = 1
EXEC_START = 2
EXEC_DONE = 3
DELIVERED = 4


class Event(NamedTuple):
    time: float
    seq: int
    kind: int
    data: tuple


class EngineError(RuntimeError):
    """Model-level failure (non-finite delay, inconsistent event order)."""


@dataclass
class StageRecord:
    """Measurements for one executed stage of one invocation."""

    function: str
    worker: int
    dispatch_time: float
    transfer_s: float = 0.0
    state_delay_s: float = 0.0
    state_bytes: float = 0.0
    migration: bool = False
    queue_wait_s: float = 0.0
    compute_s: float = 0.0
    link_bytes: float = 0.0  # bytes x link-crossings attributed to this stage


@dataclass
class InvocationRecord:
    inv_id: int
    app: str
    client: int
    arrival: float
    payload: float
    compute_factor: float
    stages: dict[str, StageRecord] = field(default_factory=dict)
    outputs: dict[str, float] = field(default_factory=dict)
    output_worker: dict[str, int] = field(default_factory=dict)
    pending: dict[str, int] = field(default_factory=dict)
    completion: float | None = None

    @property
    def latency(self) -> float | None:
        return None if self.completion is None else self.completion - self.arrival

    @property
    def state_bytes(self) -> float:
        total = 0.0
        for rec in self.stages.values():
            total += rec.state_bytes
        return total

    @property
    def migrations(self) -> int:
        return sum(1 for rec in self.stages.values() if rec.migration)


@dataclass
class MetricsLog:
    """Everything measured by one simulation run."""

    invocations: list[InvocationRecord]
    link_bytes: dict[tuple[int, int], float]
    worker_busy: dict[int, float]
    utilization: dict[int, float]
    total_migrations: int
    injected: int
    completed: int
    in_flight_at_end: int
    end_time: float
    horizon: float


class WorkerRuntime:
    """Per-core busy-until times plus a FIFO queue of pending stages."""

    __slots__ = ("node", "busy_until", "queue", "busy_seconds")

    def __init__(self, node: NodeSpec):
        self.node = node
        self.busy_until = [0.0] * node.cores
        self.queue: deque[tuple[int, str, float, float, float]] = deque()  # inv, fid, input, ops, t_enq
        self.busy_seconds = 0.0

    def free_core(self, now: float) -> int | None:
        for i, until in enumerate(self.busy_until):
            if until <= now:
                return i
        return None

    def backlog_ops(self, now: float) -> float:
        pending = 0.0
        for _inv, _fid, _input_bytes, ops, _t in self.queue:
            pending += ops
        speed = self.node.core_speed
        for until in self.busy_until:
            if until > now:
                pending += (until - now) * speed
        return pending


def run(scenario: Scenario, seed: int | None = None) -> MetricsLog:
    """Execute one replication and return its metrics."""
    return _Run(scenario, scenario.seed if seed is None else seed).execute()


class _Run:
    def __init__(self, scenario: Scenario, seed: int):
        self.sc = scenario
        self.seed = seed
        self.apps = scenario.apps
        self.routes = scenario.routes
        self.mode = scenario.state_mode
        self.policy = scenario.policy
        self.worker_specs = {n.id: n for n in scenario.topology.workers()}
        self.workers = {wid: WorkerRuntime(spec) for wid, spec in sorted(self.worker_specs.items())}
        self.registry = StateRegistry()
        self.rr = RrState()
        self.policy_rng = wl.substream(seed, wl.STREAM_POLICY)
        self.heap: list[Event] = []
        self.seq = count()
        self.invocations: dict[int, InvocationRecord] = {}
        self.link_bytes: dict[tuple[int, int], float] = {
            link.pair: 0.0 for link in scenario.topology.links
        }
        self.completed = 0
        self.migrations = 0
        self.now = 0.0

    # -- event plumbing ----------------------------------------------------

    def schedule(self, time: float, kind: int, data: tuple) -> None:
        if not math.isfinite(time):
            raise EngineError(f"non-finite event time {time} for kind {kind}")
        heapq.heappush(self.heap, Event(time, next(self.seq), kind, data))

    def _inject_arrivals(self) -> None:
        merged: list[tuple[float, int, str, float, float]] = []
        for app_idx, app_id in enumerate(sorted(self.apps)):
            app = self.apps[app_id]
            if self.sc.explicit_arrivals is not None:
                times = list(self.sc.explicit_arrivals.get(app_id, []))
            else:
                times = wl.gen_arrivals(
                    self.sc.rates[app_id],
                    self.sc.horizon,
                    wl.substream(self.seed, wl.STREAM_ARRIVALS, app_idx),
                )
            payloads = wl.draw_payloads(
                self.sc.payload,
                len(times),
                app.entry_payload,
                wl.substream(self.seed, wl.STREAM_PAYLOAD, app_idx),
            )
            factors = wl.draw_compute_factors(
                len(times),
                self.sc.compute_randomization,
                wl.substream(self.seed, wl.STREAM_COMPUTE, app_idx),
            )
            for t, payload, factor in zip(times, payloads, factors):
                merged.append((t, app_idx, app_id, payload, factor))
        merged.sort(key=lambda item: (item[0], item[1]))
        for inv_id, (t, _idx, app_id, payload, factor) in enumerate(merged):
            app = self.apps[app_id]
            inv = InvocationRecord(
                inv_id=inv_id,
                app=app_id,
                client=app.client,
                arrival=t,
                payload=payload,
                compute_factor=factor,
                pending={v: len(ps) for v, ps in app.preds.items()},
            )
            self.invocations[inv_id] = inv
            self.schedule(t, ARRIVAL, (inv_id,))

    # -- transfers ---------------------------------------------------------

    def _transfer(self, src: int, dst: int, nbytes: float, rec: StageRecord) -> float:
        """Delay of one stage transfer, with per-link byte accounting."""
        route = self.routes.route(src, dst)
        if route.hop_count:
            for u, v in zip(route.path, route.path[1:]):
                key = (u, v) if u <= v else (v, u)
                self.link_bytes[key] += nbytes
                rec.link_bytes += nbytes
        delay = route.delay(nbytes)
        if not math.isfinite(delay):
            raise EngineError(f"non-finite transfer delay {src}->{dst} for {nbytes} bytes")
        return delay

    def _account_state_transfer(self, src: int, dst: int, nbytes: float, rec: StageRecord) -> None:
        route = self.routes.route(src, dst)
        for u, v in zip(route.path, route.path[1:]):
            key = (u, v) if u <= v else (v, u)
            self.link_bytes[key] += nbytes
            rec.link_bytes += nbytes

    # -- handlers ------------------------------------------------------------

    def _on_arrival(self, ev: Event) -> None:
        (inv_id,) = ev.data
        inv = self.invocations[inv_id]
        app = self.apps[inv.app]
        self.schedule(ev.time, STAGE_READY, (inv_id, app.source, inv.client))

    def _on_stage_ready(self, ev: Event) -> None:
        inv_id, fid, at_node = ev.data
        inv = self.invocations[inv_id]
        app = self.apps[inv.app]
        f = app.functions[fid]
        preds = app.preds[fid]
        input_bytes = vertex_input_bytes(preds, inv.outputs, inv.payload)

        now = ev.time
        ctx = DispatchContext(
            app_id=inv.app,
            candidate_workers=self.sc.candidates,
            backlog={w: self.workers[w].backlog_ops(now) for w in self.sc.candidates},
            registry=self.registry,
            routes=self.routes,
            payload_location=at_node,
            rng=self.policy_rng,
            workers=self.worker_specs,
        )
        w = choose_worker(self.policy, ctx, self.rr, f, input_bytes, self.mode)
        rec = StageRecord(function=fid, worker=w, dispatch_time=now)
        inv.stages[fid] = rec

        # State is resolved at dispatch time: first touch seeds the host at
        # the chosen worker for free, later touches pay the mode's cost and
        # any migration is applied immediately.
        access = state_mod.ZERO_ACCESS
        if self.mode.is_remote and f.state_size > 0:
            entry = self.registry.get(inv.app, fid)
            if entry is None:
                self.registry.seed(inv.app, fid, host=w, state_size=f.state_size)
            else:
                access = remote_state_access(self.mode, self.registry, inv.app, f, w, self.routes)
                if access.bytes_moved:
                    self._account_state_transfer(entry.host, w, f.state_size, rec)
                    if self.mode is StateMode.REMOTE_FIXED:
                        self._account_state_transfer(w, entry.host, f.state_size, rec)
                if access.migration:
                    apply_state_access(self.registry, access, inv.app, fid)
                    self.migrations += 1
        rec.state_delay_s = access.delay
        rec.state_bytes = access.bytes_moved
        rec.migration = access.migration

        if not preds:
            nbytes = state_mod.stage_transfer_bytes(inv.payload, None, f, self.mode)
            d_in = self._transfer(at_node, w, nbytes, rec)
            self._count_embedded(rec, at_node, w, None, f)
        else:
            # Predecessor outputs are retained at their producers and move in
            # parallel once the join executor is known: the slowest transfer
            # gates the stage.
            d_in = 0.0
            for p in preds:
                nbytes = state_mod.stage_transfer_bytes(
                    inv.outputs[p], app.functions[p], f, self.mode
                )
                d_p = self._transfer(inv.output_worker[p], w, nbytes, rec)
                self._count_embedded(rec, inv.output_worker[p], w, app.functions[p], f)
                if d_p > d_in:
                    d_in = d_p
        rec.transfer_s = d_in

        ops = f.fixed_ops * inv.compute_factor + f.ops_per_byte * input_bytes
        if not math.isfinite(ops):
            raise EngineError(f"non-finite compute demand for {fid}")
        t_enq = now + d_in + access.delay
        self.schedule(t_enq, EXEC_START, (inv_id, fid, w, input_bytes, ops))

    def _count_embedded(
        self,
        rec: StageRecord,
        src: int,
        dst: int,
        producer,
        consumer,
    ) -> None:
        # Embedded state bytes count as state traffic only when the stage
        # transfer actually crossed the network.
        if self.mode is not StateMode.EMBEDDED or src == dst:
            return
        moved = 0.0
        if producer is not None:
            moved += producer.state_size
        if consumer is not None:
            moved += consumer.state_size
        rec.state_bytes += moved

    def _on_exec_start(self, ev: Event) -> None:
        inv_id, fid, w, input_bytes, ops = ev.data
        wr = self.workers[w]
        core = wr.free_core(ev.time)
        if core is None:
            wr.queue.append((inv_id, fid, input_bytes, ops, ev.time))
            return
        self._start_on_core(wr, core, inv_id, fid, w, input_bytes, ops, ev.time, ev.time)

    def _start_on_core(
        self,
        wr: WorkerRuntime,
        core: int,
        inv_id: int,
        fid: str,
        w: int,
        input_bytes: float,
        ops: float,
        t_enq: float,
        now: float,
    ) -> None:
        duration = ops / wr.node.core_speed
        if not math.isfinite(duration):
            raise EngineError(f"non-finite service time on worker {w}")
        rec = self.invocations[inv_id].stages[fid]
        rec.queue_wait_s = now - t_enq
        rec.compute_s = duration
        wr.busy_until[core] = now + duration
        wr.busy_seconds += duration
        self.schedule(now + duration, EXEC_DONE, (inv_id, fid, w, core, input_bytes))

    def _on_exec_done(self, ev: Event) -> None:
        inv_id, fid, w, _core, input_bytes = ev.data
        inv = self.invocations[inv_id]
        app = self.apps[inv.app]
        f = app.functions[fid]
        out_bytes = f.output_ratio * input_bytes
        inv.outputs[fid] = out_bytes
        inv.output_worker[fid] = w

        if fid == app.sink:
            rec = inv.stages[fid]
            nbytes = state_mod.stage_transfer_bytes(out_bytes, f, None, self.mode)
            d_out = self._transfer(w, inv.client, nbytes, rec)
            self._count_embedded(rec, w, inv.client, f, None)
            self.schedule(ev.time + d_out, DELIVERED, (inv_id,))
        else:
            for q in app.succs[fid]:
                inv.pending[q] -= 1
                if inv.pending[q] == 0:
                    self.schedule(ev.time, STAGE_READY, (inv_id, q, w))

        wr = self.workers[w]
        if wr.queue:
            core = wr.free_core(ev.time)
            if core is not None:
                q_inv, q_fid, q_input, q_ops, q_t = wr.queue.popleft()
                self._start_on_core(wr, core, q_inv, q_fid, w, q_input, q_ops, q_t, ev.time)

    def _on_delivered(self, ev: Event) -> None:
        (inv_id,) = ev.data
        self.invocations[inv_id].completion = ev.time
        self.completed += 1

    # -- main loop -----------------------------------------------------------

    def execute(self) -> MetricsLog:
        self._inject_arrivals()
        injected = len(self.invocations)
        handlers = {
            ARRIVAL: self._on_arrival,
            STAGE_READY: self._on_stage_ready,
            EXEC_START: self._on_exec_start,
            EXEC_DONE: self._on_exec_done,
            DELIVERED: self._on_delivered,
        }
        while self.heap:
            ev = heapq.heappop(self.heap)
            if ev.time < self.now:
                raise EngineError(f"event time went backwards: {ev.time} < {self.now}")
            self.now = ev.time
            handlers[ev.kind](ev)

        end_time = self.now
        utilization = {}
        for wid, wr in sorted(self.workers.items()):
            denom = wr.node.cores * end_time
            utilization[wid] = wr.busy_seconds / denom if denom > 0 else 0.0
        return MetricsLog(
            invocations=[self.invocations[i] for i in sorted(self.invocations)],
            link_bytes=self.link_bytes,
            worker_busy={wid: wr.busy_seconds for wid, wr in sorted(self.workers.items())},
            utilization=utilization,
            total_migrations=self.migrations,
            injected=injected,
            completed=self.completed,
            in_flight_at_end=injected - self.completed,
            end_time=end_time,
            horizon=self.sc.horizon,
        )
