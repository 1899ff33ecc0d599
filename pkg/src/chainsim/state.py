"""State placement modes and the cost of making state available at a node.

Three scenario-wide modes:

* ``embedded``: state travels inside the invocation payload, adding the
  function's state size to the stage hop into its executor and the hop out.
* ``remote_fixed``: state lives at a fixed host worker; every execution at a
  different node pays a fetch plus a write-back (read-modify-write state).
* ``remote_migrate``: state moves to the executing worker and stays there,
  paying a single transfer and changing the registry host.

The registry starts empty; the first dispatch of a stateful function seeds
its host at the chosen worker at zero cost (cold-start placement).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .topology import RouteTable, transfer_delay

if TYPE_CHECKING:
    from .workflow import FunctionSpec


class StateMode(enum.Enum):
    EMBEDDED = "embedded"
    REMOTE_FIXED = "remote_fixed"
    REMOTE_MIGRATE = "remote_migrate"

    @property
    def is_remote(self) -> bool:
        return self is not StateMode.EMBEDDED


@dataclass(frozen=True)
class StateEntry:
    host: int  # worker node id
    state_size: float  # bytes


@dataclass
class StateRegistry:
    """Where each (app, function) state item currently lives.

    Mutable, owned exclusively by one simulation run; never shared across
    replications.
    """

    _entries: dict[tuple[str, str], StateEntry] = field(default_factory=dict)

    def get(self, app_id: str, function_id: str) -> StateEntry | None:
        return self._entries.get((app_id, function_id))

    def seed(self, app_id: str, function_id: str, host: int, state_size: float) -> None:
        """Create the entry for a first dispatch; no-op cost, errors on re-seed."""
        key = (app_id, function_id)
        if key in self._entries:
            raise ValueError(f"state for {key} already placed")
        self._entries[key] = StateEntry(host=host, state_size=state_size)

    def entry_count(self) -> int:
        return len(self._entries)

    def items(self) -> list[tuple[tuple[str, str], StateEntry]]:
        return sorted(self._entries.items())

    def snapshot(self) -> "StateRegistry":
        return StateRegistry(dict(self._entries))


@dataclass(frozen=True)
class StateAccess:
    """Outcome of making one function's state available at its executor."""

    delay: float  # seconds
    bytes_moved: float  # bytes over the network
    migration: bool = False
    new_host: int | None = None


ZERO_ACCESS = StateAccess(delay=0.0, bytes_moved=0.0)


def embedded_payload_overhead(f: "FunctionSpec", mode: StateMode) -> float:
    """Extra payload bytes on the stage hops into and out of f's executor."""
    return f.state_size if mode is StateMode.EMBEDDED else 0.0


def stage_transfer_bytes(
    data_bytes: float,
    producer: "FunctionSpec | None",
    consumer: "FunctionSpec | None",
    mode: StateMode,
) -> float:
    """Wire size of one stage transfer.

    The producer's embedded state rides the hop out of its executor and the
    consumer's rides the hop in; entry and delivery transfers have only one
    function-side endpoint.
    """
    nbytes = data_bytes
    if producer is not None:
        nbytes += embedded_payload_overhead(producer, mode)
    if consumer is not None:
        nbytes += embedded_payload_overhead(consumer, mode)
    return nbytes


def remote_state_access(
    mode: StateMode,
    reg: StateRegistry,
    app_id: str,
    f: "FunctionSpec",
    exec_node: int,
    rt: RouteTable,
) -> StateAccess:
    """Cost of accessing remote state from ``exec_node``.

    remote_fixed pays fetch plus write-back against the fixed host;
    remote_migrate pays a single transfer and relocates the host. Co-located
    execution is free in both modes.
    """
    if not mode.is_remote:
        raise ValueError(f"remote_state_access requires a remote mode, got {mode}")
    size = f.state_size
    if size == 0:
        return ZERO_ACCESS
    entry = reg.get(app_id, f.id)
    if entry is None:
        raise KeyError(f"no registry entry for ({app_id}, {f.id}) with state_size > 0")
    if entry.host == exec_node:
        return ZERO_ACCESS
    if mode is StateMode.REMOTE_FIXED:
        delay = transfer_delay(rt, entry.host, exec_node, size) + transfer_delay(
            rt, exec_node, entry.host, size
        )
        return StateAccess(delay=delay, bytes_moved=2 * size)
    delay = transfer_delay(rt, entry.host, exec_node, size)
    return StateAccess(delay=delay, bytes_moved=size, migration=True, new_host=exec_node)


def state_access_at_dispatch(
    mode: StateMode,
    reg: StateRegistry,
    app_id: str,
    f: "FunctionSpec",
    exec_node: int,
    rt: RouteTable,
) -> StateAccess:
    """Access cost as seen at dispatch time, without mutating the registry.

    A missing entry costs nothing: state is born at the chosen worker on the
    first dispatch. Embedded mode never touches the registry.
    """
    if not mode.is_remote or f.state_size == 0:
        return ZERO_ACCESS
    if reg.get(app_id, f.id) is None:
        return ZERO_ACCESS
    return remote_state_access(mode, reg, app_id, f, exec_node, rt)


def apply_state_access(
    reg: StateRegistry, access: StateAccess, app_id: str, function_id: str
) -> StateRegistry:
    """Record a migration in the registry; entry count is preserved."""
    if access.migration:
        if access.new_host is None:
            raise ValueError("migration access carries no new_host")
        key = (app_id, function_id)
        entry = reg._entries.get(key)
        if entry is None:
            raise KeyError(f"no registry entry for {key}")
        reg._entries[key] = StateEntry(host=access.new_host, state_size=entry.state_size)
    return reg
