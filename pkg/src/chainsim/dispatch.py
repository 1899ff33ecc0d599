"""Per-stage destination selection: completion-time estimator and policies.

All policies are pure given (context, round-robin state, rng stream); the
engine serializes calls within a run. Every tie breaks toward the lowest
worker id so runs replay identically.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import state as state_mod
from .state import StateMode, StateRegistry
from .topology import NodeSpec, RouteTable, transfer_delay
from .workflow import FunctionSpec, stage_io


class PolicyKind(enum.Enum):
    RANDOM = "random"
    ROUND_ROBIN = "round_robin"
    LEAST_LOADED = "least_loaded"
    STATE_LOCAL = "state_local"
    MIN_LATENCY_ESTIMATE = "min_latency_estimate"


@dataclass
class DispatchContext:
    """Dispatcher-local knowledge at one decision instant.

    ``backlog`` maps candidate workers to pending operations (queued plus
    in-service remaining); the registry is read-only here, the rng stream is
    policy-private.
    """

    app_id: str
    candidate_workers: tuple[int, ...]
    backlog: Mapping[int, float]
    registry: StateRegistry
    routes: RouteTable
    payload_location: int
    rng: np.random.Generator
    workers: Mapping[int, NodeSpec]


@dataclass
class RrState:
    """Per-(app, function) cursor into the candidate list."""

    cursors: dict[tuple[str, str], int] = field(default_factory=dict)

    def take(self, app_id: str, function_id: str, n_candidates: int) -> int:
        key = (app_id, function_id)
        cur = self.cursors.get(key, 0) % n_candidates
        self.cursors[key] = (cur + 1) % n_candidates
        return cur


def estimate_completion(
    ctx: DispatchContext,
    f: FunctionSpec,
    w: int,
    input_bytes: float,
    mode: StateMode,
) -> float:
    """Predicted completion time of this stage on worker ``w``.

    Input transfer (with embedded state overhead) + remote state access from
    the current registry snapshot (no migration applied; the estimate is a
    prediction, not a commitment) + backlog drain + stage compute. In-flight
    network transfers toward ``w`` are not visible to the dispatcher and are
    ignored.
    """
    spec = ctx.workers[w]
    est = transfer_delay(
        ctx.routes,
        ctx.payload_location,
        w,
        input_bytes + state_mod.embedded_payload_overhead(f, mode),
    )
    est += state_mod.state_access_at_dispatch(mode, ctx.registry, ctx.app_id, f, w, ctx.routes).delay
    compute_ops, _ = stage_io(f, input_bytes)
    est += ctx.backlog.get(w, 0.0) / (spec.cores * spec.core_speed)
    est += compute_ops / spec.core_speed
    return est


def choose_worker(
    policy: PolicyKind,
    ctx: DispatchContext,
    rr: RrState,
    f: FunctionSpec,
    input_bytes: float,
    mode: StateMode,
) -> int:
    """Select the execution worker for one stage. Ties go to the lowest id."""
    candidates = ctx.candidate_workers
    if not candidates:
        raise ValueError("empty candidate list")

    if policy is PolicyKind.RANDOM:
        return candidates[int(ctx.rng.integers(0, len(candidates)))]

    if policy is PolicyKind.ROUND_ROBIN:
        return candidates[rr.take(ctx.app_id, f.id, len(candidates))]

    if policy is PolicyKind.LEAST_LOADED:
        return _least_loaded(ctx)

    if policy is PolicyKind.STATE_LOCAL:
        entry = ctx.registry.get(ctx.app_id, f.id)
        if entry is not None and entry.host in candidates:
            return entry.host
        return _least_loaded(ctx)

    if policy is PolicyKind.MIN_LATENCY_ESTIMATE:
        return min(candidates, key=lambda w: (estimate_completion(ctx, f, w, input_bytes, mode), w))

    raise ValueError(f"unknown policy {policy}")


def _least_loaded(ctx: DispatchContext) -> int:
    return min(ctx.candidate_workers, key=lambda w: (ctx.backlog.get(w, 0.0), w))
