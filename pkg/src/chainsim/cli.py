"""Command-line experiment harness.

Subcommands: ``validate <config>``, ``run <config> --out <dir>``,
``sweep <sweepfile> --out <dir>``, ``describe <config>``. Exit codes:
0 ok, 1 config error, 2 runtime error. The ``CHAINSIM_SEED`` environment
variable overrides the config seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import runner
from .config import load_json, scenario_from_raw, sweep_from_raw
from .engine import EngineError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _apply_seed_env(raw: dict) -> list[str]:
    value = os.environ.get("CHAINSIM_SEED")
    if value is None:
        return []
    try:
        raw["seed"] = int(value)
    except ValueError:
        return [f"CHAINSIM_SEED must be an integer, got {value!r}"]
    return []


def _load_scenario(path: str):
    """Returns (scenario, violations); violations non-empty means config error."""
    try:
        raw = load_json(path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return None, [f"cannot load {path}: {exc}"]
    errs = _apply_seed_env(raw)
    if errs:
        return None, errs
    return scenario_from_raw(raw)


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario, errs = _load_scenario(args.config)
    if scenario is None:
        for e in errs:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    print("OK")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    scenario, errs = _load_scenario(args.config)
    if scenario is None:
        for e in errs:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        results = runner.run_experiment(scenario, args.out, emit_plotdata=args.emit_plotdata)
    except (OSError, EngineError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(results)} replication(s) to {args.out}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        raw = load_json(args.sweepfile)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: cannot load {args.sweepfile}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    base_dir = Path(args.sweepfile).resolve().parent
    base = raw.get("base")
    if isinstance(base, str):
        path = Path(base)
        if not path.is_absolute():
            path = base_dir / path
        try:
            raw["base"] = load_json(path)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            print(f"error: cannot load base config {base!r}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    if isinstance(raw.get("base"), dict):
        errs = _apply_seed_env(raw["base"])
        if errs:
            print(f"error: {errs[0]}", file=sys.stderr)
            return EXIT_CONFIG
    sweep, errs = sweep_from_raw(raw, base_dir=base_dir)
    if sweep is None:
        for e in errs:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        results = runner.run_sweep(sweep, args.out, emit_plotdata=args.emit_plotdata)
    except (OSError, EngineError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(results)} point-replication(s) to {args.out}")
    return EXIT_OK


def _cmd_describe(args: argparse.Namespace) -> int:
    scenario, errs = _load_scenario(args.config)
    if scenario is None:
        for e in errs:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    topo = scenario.topology
    print(f"nodes: {len(topo.nodes)} ({len(topo.clients())} clients, {len(topo.workers())} workers)")
    print(f"links: {len(topo.links)}")
    print("routes:")
    for src, dst in scenario.routes.pairs():
        if src == dst:
            continue
        route = scenario.routes.route(src, dst)
        print(
            f"  {src} -> {dst}: path={list(route.path)} prop={route.propagation!r}"
            f" bottleneck={route.bottleneck_rate!r} hops={route.hop_count}"
        )
    print("workflows:")
    for app_id in sorted(scenario.apps):
        app = scenario.apps[app_id]
        kind = "chain" if len(app.dag.edges) == len(app.dag.vertices) - 1 and all(
            len(ps) <= 1 for ps in app.preds.values()
        ) else "dag"
        print(
            f"  {app_id}: {kind} with {len(app.dag.vertices)} function(s),"
            f" source={app.source} sink={app.sink}"
            f" client={app.client} entry_payload={app.entry_payload!r}"
        )
        for fid in sorted(app.functions):
            f = app.functions[fid]
            print(
                f"    {fid}: fixed_ops={f.fixed_ops!r} ops_per_byte={f.ops_per_byte!r}"
                f" output_ratio={f.output_ratio!r} state_size={f.state_size!r}"
            )
        for p, q in sorted(app.dag.edges):
            print(f"    edge {p} -> {q}")
    print(
        f"policy={scenario.policy.value} state_mode={scenario.state_mode.value}"
        f" seed={scenario.seed} replications={scenario.replications}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainsim",
        description="Deterministic simulator for stateful function chains and DAGs on edge networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario config; exit 0 iff valid")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("run", help="run all replications of one scenario")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--emit-plotdata", action="store_true", help="also write plotdata.csv")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a sweep over one scenario field")
    p.add_argument("sweepfile")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--emit-plotdata", action="store_true", help="also write plotdata.csv")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("describe", help="print route table and workflow summaries")
    p.add_argument("config")
    p.set_defaults(func=_cmd_describe)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
