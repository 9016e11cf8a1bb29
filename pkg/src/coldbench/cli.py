"""Command-line entry point: dataset generation, benchmark runs, cost
analysis, and tier advice.

Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
"""
from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal
from pathlib import Path

from . import __version__
from .backends.base import save_trace
from .config import (
    build_backend,
    build_cost_scenario,
    build_dataset,
    build_workload,
    load_run_config,
)
from .costs import (
    CostScenario,
    advise_tier,
    builtin_catalog,
    load_catalog,
    migration_cost,
    months_for_moveout_overhead,
    tier,
    total_cost,
)
from .datagen import save_manifest
from .driver import SessionConfig, run_benchmark, save_measurements
from .report import emit, summarize
from .sim import Simulator

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _dollars(value: Decimal) -> str:
    return f"${value:,.2f}"


def _catalog_from(args) -> tuple:
    if args.catalog and args.catalog.endswith(".toml"):
        return load_catalog(args.catalog)
    return builtin_catalog(args.catalog or "azure-2019")


def cmd_generate(args) -> int:
    config = load_run_config(args.config) if args.config else {}
    if args.preset or args.files is not None or not config:
        dataset_cfg = dict(config.get("dataset", {}))
        if args.preset:
            dataset_cfg["preset"] = args.preset
        if args.files is not None:
            dataset_cfg["total_files"] = args.files
        if args.static_fraction is not None:
            dataset_cfg["static_fraction"] = args.static_fraction
        if args.missions is not None:
            dataset_cfg["mission_count"] = args.missions
        if args.mission_skew is not None:
            dataset_cfg["mission_skew_s"] = args.mission_skew
        dataset_cfg.setdefault("preset", "dsda-main")
        dataset_cfg.setdefault("total_files", 10_000)
        config = dict(config)
        config["dataset"] = dataset_cfg
    if args.seed is not None:
        config["seed"] = args.seed
    manifest = build_dataset(config, default_seed=args.seed or 0)
    records_path, summary_path = save_manifest(manifest, args.out)
    print(
        f"wrote {manifest.summary.file_count} records "
        f"({manifest.summary.total_bytes} bytes, mean "
        f"{manifest.summary.mean_bytes:.0f} B) to {records_path} and {summary_path}"
    )
    return 0


def cmd_run(args) -> int:
    config = load_run_config(args.config) if args.config else {}
    config = dict(config)
    if args.seed is not None:
        config["seed"] = args.seed
    config.setdefault("seed", 0)
    if args.workload:
        config.setdefault("workload", {})
        config["workload"] = dict(config["workload"])
        config["workload"]["preset"] = args.workload
    if args.backend:
        config.setdefault("backend", {})
        config["backend"] = dict(config["backend"])
        config["backend"]["kind"] = args.backend
    if args.requests is not None:
        config.setdefault("workload", {})
        config["workload"] = dict(config["workload"])
        config["workload"]["request_count"] = args.requests

    seed = int(config["seed"])
    sim = Simulator()
    manifest = build_dataset(config, default_seed=seed)
    workload_spec = build_workload(config, default_seed=seed)
    backend = build_backend(config, sim, default_seed=seed)
    sessions_cfg = config.get("sessions", {})
    sessions = SessionConfig(
        workload=workload_spec,
        session_count=int(sessions_cfg.get("count", 1)),
        warmup_requests=int(sessions_cfg.get("warmup", 0)),
    )

    measurements = run_benchmark(backend, manifest, sessions, sim)
    cost = backend.ledger_report(sim.now)
    report = summarize(
        measurements,
        cost=cost,
        backend_stats=backend.stats(),
        config=config,
        seed=seed,
    )

    out_dir = Path(args.out)
    emit(report, out_dir, measurements=measurements)
    save_measurements(measurements, out_dir / "measurements.csv")
    if backend.trace is not None:
        save_trace(backend.trace, out_dir / "trace.csv")

    p99_ms = report.latency_overall.p99_us / 1_000 if report.latency_overall else 0.0
    bandwidth_mb_s = report.sustained_get_bytes_per_s / 1e6
    total = cost.total if cost else Decimal("0.00")
    print(
        f"requests={report.request_count} errors={report.error_count} "
        f"p99={p99_ms:.1f}ms bandwidth={bandwidth_mb_s:.3f}MB/s cost={_dollars(total)}"
    )
    return 0


def _scenario_from_args(args) -> CostScenario:
    cfg = {}
    if args.config:
        cfg = dict(load_run_config(args.config).get("cost", {}))
    if args.capacity:
        cfg["capacity"] = args.capacity
    if args.months is not None:
        cfg["months"] = args.months
    if args.reads is not None:
        cfg["reads"] = args.reads
    if args.blob:
        cfg["blob"] = args.blob
    return build_cost_scenario(cfg)


def _scenario_echo(scenario: CostScenario) -> dict:
    return {
        "capacity_gb": float(scenario.capacity_gb),
        "months": float(scenario.months),
        "full_reads": float(scenario.full_reads),
        "blob_size_gb": float(scenario.blob_size_gb),
        "egress_per_gb": float(scenario.egress_per_gb),
    }


def cmd_cost(args) -> int:
    catalog = _catalog_from(args)
    pricing = tier(args.tier, catalog)
    scenario = _scenario_from_args(args)

    if args.moveout_curve:
        print("overhead_percent,months")
        for pct in range(10, 100, 10):
            months = months_for_moveout_overhead(pricing, Decimal(pct) / 100)
            print(f"{pct},{months:.5f}")
        return 0

    if args.migrate:
        with_egress = migration_cost(pricing, scenario, include_egress=True)
        without = migration_cost(pricing, scenario, include_egress=False)
        if args.json:
            print(json.dumps({
                "tier": pricing.tier_name,
                "scenario": _scenario_echo(scenario),
                "with_egress": {
                    "cost": str(with_egress.cost),
                    "equivalent_storage_months": with_egress.equivalent_storage_months,
                },
                "without_egress": {
                    "cost": str(without.cost),
                    "equivalent_storage_months": without.equivalent_storage_months,
                },
            }, indent=2, sort_keys=True))
        else:
            print(f"migration out of {pricing.tier_name}:")
            print(f"  without egress: {_dollars(without.cost)} "
                  f"(= {without.equivalent_storage_months:.1f} months of storage)")
            print(f"  with egress:    {_dollars(with_egress.cost)} "
                  f"(= {with_egress.equivalent_storage_months:.1f} months of storage)")
        return 0

    report = total_cost(pricing, scenario, include_egress=args.egress)
    if args.json:
        payload = report.as_dict()
        payload["scenario"] = _scenario_echo(scenario)
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"tier {report.tier_name}: capacity {float(scenario.capacity_gb):,.0f} GB, "
              f"M={float(scenario.months):g}, R={float(scenario.full_reads):g}")
        print(f"  storage:   {_dollars(report.storage_cost)}")
        print(f"  retrieval: {_dollars(report.retrieval_cost)}")
        print(f"  requests:  {_dollars(report.request_cost)}")
        if args.egress:
            print(f"  egress:    {_dollars(report.egress_cost)}")
        print(f"  total:     {_dollars(report.total)} "
              f"(storage {report.storage_fraction * 100:.1f}%, "
              f"access {report.access_fraction * 100:.1f}%)")
    return 0


def cmd_advise(args) -> int:
    catalog = _catalog_from(args)
    scenario = _scenario_from_args(args)
    ranked = advise_tier(catalog, scenario)
    if args.json:
        print(json.dumps({
            "scenario": _scenario_echo(scenario),
            "ranking": [advice.report.as_dict() for advice in ranked],
        }, indent=2, sort_keys=True))
        return 0
    print(f"{'rank':<5}{'tier':<10}{'total':>16}{'storage%':>10}{'access%':>10}")
    for i, advice in enumerate(ranked, start=1):
        r = advice.report
        print(f"{i:<5}{r.tier_name:<10}{_dollars(r.total):>16}"
              f"{r.storage_fraction * 100:>9.1f}%{r.access_fraction * 100:>9.1f}%")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldbench",
        description="Cold-storage archive benchmark: data/workload generation, "
                    "simulated backends, cost analysis.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a dataset manifest")
    g.add_argument("--config", help="run-config TOML with a [dataset] section")
    g.add_argument("--preset", help="built-in size distribution (e.g. dsda-main)")
    g.add_argument("--files", type=int, help="number of files")
    g.add_argument("--static-fraction", type=float)
    g.add_argument("--missions", type=int)
    g.add_argument("--mission-skew", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", default="coldbench-out/dataset", help="output directory")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run a benchmark")
    r.add_argument("--config", help="run-config TOML")
    r.add_argument("--workload", help="choke-point preset override (cp1-skew .. cp4-smallfile)")
    r.add_argument("--backend", help="backend override: tape | cache+tape | cloud:<tier> | hybrid")
    r.add_argument("--requests", type=int, help="request count override")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", default="coldbench-out/run", help="output directory")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("cost", help="itemized cloud cost for a scenario")
    c.add_argument("--config", help="run-config TOML with a [cost] section")
    c.add_argument("--tier", default="archive")
    c.add_argument("--capacity", help="e.g. 1PiB, 500TB, 1048576 (GB)")
    c.add_argument("--months", type=float)
    c.add_argument("--reads", type=float)
    c.add_argument("--blob", help="object size, e.g. 256MiB")
    c.add_argument("--catalog", help="builtin name or a pricing TOML path")
    c.add_argument("--egress", action="store_true", help="include egress in the total")
    c.add_argument("--moveout-curve", action="store_true",
                   help="print months required per moving-out overhead decile")
    c.add_argument("--migrate", action="store_true",
                   help="print one-time migration cost with/without egress")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_cost)

    a = sub.add_parser("advise", help="rank catalog tiers by total cost")
    a.add_argument("--config", help="run-config TOML with a [cost] section")
    a.add_argument("--capacity")
    a.add_argument("--months", type=float)
    a.add_argument("--reads", type=float)
    a.add_argument("--blob")
    a.add_argument("--catalog")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_advise)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


def main() -> None:
    sys.exit(run_cli())
