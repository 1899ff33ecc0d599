"""Experiment execution: replications, sweeps, and file emission.

Replication r runs with seed base_seed + r; swept points reuse the same
seeds so compared points share common random numbers. Each (point,
replication) gets its own directory of CSVs; a single summary.json at the
output root holds one record per (point, replication), in a fixed order so
reruns are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import engine, metrics
from .config import Scenario, SweepSpec, apply_sweep_value, scenario_from_raw


@dataclass
class PointResult:
    point: int
    swept_field: str | None
    swept_value: Any
    replication: int
    seed: int
    log: engine.MetricsLog


def run_replications(scenario: Scenario) -> list[tuple[int, engine.MetricsLog]]:
    """All replications of one scenario point, keyed by seed."""
    out = []
    for r in range(scenario.replications):
        seed = scenario.seed + r
        out.append((seed, engine.run(scenario, seed=seed)))
    return out


def _write_run_dir(dirpath: Path, log: engine.MetricsLog) -> None:
    dirpath.mkdir(parents=True, exist_ok=True)
    (dirpath / "invocations.csv").write_text(metrics.invocations_csv(log), encoding="utf-8")
    (dirpath / "links.csv").write_text(metrics.links_csv(log), encoding="utf-8")
    (dirpath / "workers.csv").write_text(metrics.workers_csv(log), encoding="utf-8")


def _summary_json(results: list[PointResult]) -> str:
    records = []
    for res in results:
        record = {
            "point": res.point,
            "swept_field": res.swept_field,
            "swept_value": res.swept_value,
            "replication": res.replication,
            "seed": res.seed,
        }
        record.update(metrics.summary_record(res.log))
        records.append(record)
    return json.dumps({"records": records}, indent=2) + "\n"


def _plotdata_csv(results: list[PointResult]) -> str:
    lines = ["point,swept_value,seed,mean_latency_s,p50_latency_s,p95_latency_s,p99_latency_s"]
    for res in results:
        rec = metrics.summary_record(res.log)
        cells = [
            str(res.point),
            "" if res.swept_value is None else repr(res.swept_value)
            if isinstance(res.swept_value, float)
            else str(res.swept_value),
            str(res.seed),
        ]
        for key in ("mean_latency_s", "p50_latency_s", "p95_latency_s", "p99_latency_s"):
            value = rec[key]
            cells.append("" if value is None else repr(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def run_experiment(scenario: Scenario, out_dir: str | Path, emit_plotdata: bool = False) -> list[PointResult]:
    """Run one config's replications and write rep_### dirs plus summary.json."""
    out = Path(out_dir)
    results = []
    for r, (seed, log) in enumerate(run_replications(scenario)):
        _write_run_dir(out / f"rep_{r:03d}", log)
        results.append(
            PointResult(
                point=0, swept_field=None, swept_value=None, replication=r, seed=seed, log=log
            )
        )
    (out / "summary.json").write_text(_summary_json(results), encoding="utf-8")
    if emit_plotdata:
        (out / "plotdata.csv").write_text(_plotdata_csv(results), encoding="utf-8")
    return results


def run_sweep(sweep: SweepSpec, out_dir: str | Path, emit_plotdata: bool = False) -> list[PointResult]:
    """Run every (point, replication) of a sweep; point_###/rep_### layout."""
    out = Path(out_dir)
    results = []
    for p, value in enumerate(sweep.values):
        scenario, errs = scenario_from_raw(apply_sweep_value(sweep.base, sweep.field, value))
        if scenario is None:
            raise ValueError(f"sweep point {p} invalid: " + "; ".join(errs))
        for r, (seed, log) in enumerate(run_replications(scenario)):
            _write_run_dir(out / f"point_{p:03d}" / f"rep_{r:03d}", log)
            results.append(
                PointResult(
                    point=p,
                    swept_field=sweep.field,
                    swept_value=value,
                    replication=r,
                    seed=seed,
                    log=log,
                )
            )
    (out / "summary.json").write_text(_summary_json(results), encoding="utf-8")
    if emit_plotdata:
        (out / "plotdata.csv").write_text(_plotdata_csv(results), encoding="utf-8")
    return results
