"""Run metrics: percentiles, CSV serialization, summary statistics.

Summary statistics are a pure function of the per-invocation rows; the CSV
round-trips floats exactly (repr formatting), so recomputing a summary from
invocations.csv reproduces the runner's numbers.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Mapping, Sequence

from .engine import MetricsLog

INVOCATIONS_HEADER = [
    "inv_id",
    "app",
    "arrival_s",
    "completion_s",
    "latency_s",
    "stages",
    "state_bytes",
    "migrations",
]
LINKS_HEADER = ["node_a", "node_b", "bytes"]
WORKERS_HEADER = ["worker_id", "busy_s", "utilization"]


def percentile(values: Sequence[float], p: float) -> float:
    """Nearest-rank percentile: the ceil(p*n)-th order statistic."""
    if not values:
        raise ValueError("percentile of empty input")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    ordered = sorted(values)
    rank = math.ceil(p * len(ordered))
    return ordered[rank - 1]


def _fmt(x: float | int | str) -> str:
    return repr(x) if isinstance(x, float) else str(x)


def invocations_rows(m: MetricsLog) -> list[list]:
    rows = []
    for inv in m.invocations:
        rows.append(
            [
                inv.inv_id,
                inv.app,
                inv.arrival,
                inv.completion if inv.completion is not None else "",
                inv.latency if inv.latency is not None else "",
                len(inv.stages),
                inv.state_bytes,
                inv.migrations,
            ]
        )
    return rows


def links_rows(m: MetricsLog) -> list[list]:
    return [[a, b, m.link_bytes[(a, b)]] for a, b in sorted(m.link_bytes)]


def workers_rows(m: MetricsLog) -> list[list]:
    return [[wid, m.worker_busy[wid], m.utilization[wid]] for wid in sorted(m.worker_busy)]


def _csv_text(header: list[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def invocations_csv(m: MetricsLog) -> str:
    return _csv_text(INVOCATIONS_HEADER, invocations_rows(m))


def links_csv(m: MetricsLog) -> str:
    return _csv_text(LINKS_HEADER, links_rows(m))


def workers_csv(m: MetricsLog) -> str:
    return _csv_text(WORKERS_HEADER, workers_rows(m))


def summary_record(m: MetricsLog) -> dict:
    """Per-replication summary; latency stats are None when nothing completed."""
    latencies = [inv.latency for inv in m.invocations if inv.latency is not None]
    state_bytes = 0.0
    for inv in m.invocations:
        state_bytes += inv.state_bytes
    record: dict = {
        "injected": m.injected,
        "completed": m.completed,
        "in_flight_at_end": m.in_flight_at_end,
        "throughput_per_s": m.completed / m.horizon,
        "total_state_bytes": state_bytes,
        "total_migrations": m.total_migrations,
        "utilization": {str(wid): m.utilization[wid] for wid in sorted(m.utilization)},
    }
    record.update(_latency_stats(latencies))
    return record


def _latency_stats(latencies: Sequence[float]) -> dict:
    if not latencies:
        return {
            "mean_latency_s": None,
            "p50_latency_s": None,
            "p95_latency_s": None,
            "p99_latency_s": None,
        }
    total = 0.0
    for x in latencies:
        total += x
    return {
        "mean_latency_s": total / len(latencies),
        "p50_latency_s": percentile(latencies, 0.50),
        "p95_latency_s": percentile(latencies, 0.95),
        "p99_latency_s": percentile(latencies, 0.99),
    }


def summary_from_rows(rows: Iterable[Mapping[str, str]], horizon: float) -> dict:
    """Recompute the summary's CSV-derived part from invocations.csv rows.

    Matches ``summary_record`` for the same run: fields not derivable from
    the rows (utilization) are omitted.
    """
    latencies: list[float] = []
    injected = 0
    completed = 0
    state_bytes = 0.0
    migrations = 0
    for row in rows:
        injected += 1
        if row["latency_s"] != "":
            completed += 1
            latencies.append(float(row["latency_s"]))
        state_bytes += float(row["state_bytes"])
        migrations += int(row["migrations"])
    record: dict = {
        "injected": injected,
        "completed": completed,
        "in_flight_at_end": injected - completed,
        "throughput_per_s": completed / horizon,
        "total_state_bytes": state_bytes,
        "total_migrations": migrations,
    }
    record.update(_latency_stats(latencies))
    return record
