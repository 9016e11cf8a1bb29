"""coldbench: benchmark toolkit for cold storage archives.

Generates domain-realistic file populations and skewed request workloads,
drives them against simulated tape/cache/cloud/hybrid backends under a
deterministic virtual clock, and reports latency, sustained bandwidth, and
accrued cloud cost.  A closed-form cost model covers tier pricing, access
overheads, migration charges, and tier advice.
"""
__version__ = "0.1.0"

from .costs import (
    AZURE_2019,
    CostReport,
    CostScenario,
    TierPricing,
    access_overhead,
    advise_tier,
    breakdown_percent,
    builtin_catalog,
    migration_cost,
    months_for_moveout_overhead,
    moveout_overhead_for_months,
    tier,
    total_cost,
)
from .datagen import (
    DSDA_MAIN,
    DatasetManifest,
    DatasetSpec,
    FileRecord,
    FileSizeDistribution,
    generate_dataset,
    load_manifest,
    sample_file_size,
    save_manifest,
    scale_distribution,
)
from .driver import Measurement, SessionConfig, preload, run_benchmark
from .report import BenchReport, LatencySummary, emit, summarize
from .sim import RngStream, SimEvent, Simulator, VirtualClock, WallClock
from .workload import (
    Arrival,
    Request,
    WorkloadSpec,
    generate_workload,
    interleave_ingest,
    preset,
)

__all__ = [
    "AZURE_2019",
    "Arrival",
    "BenchReport",
    "CostReport",
    "CostScenario",
    "DSDA_MAIN",
    "DatasetManifest",
    "DatasetSpec",
    "FileRecord",
    "FileSizeDistribution",
    "LatencySummary",
    "Measurement",
    "Request",
    "RngStream",
    "SessionConfig",
    "SimEvent",
    "Simulator",
    "TierPricing",
    "VirtualClock",
    "WallClock",
    "WorkloadSpec",
    "access_overhead",
    "advise_tier",
    "breakdown_percent",
    "builtin_catalog",
    "emit",
    "generate_dataset",
    "generate_workload",
    "interleave_ingest",
    "load_manifest",
    "migration_cost",
    "months_for_moveout_overhead",
    "moveout_overhead_for_months",
    "preload",
    "preset",
    "run_benchmark",
    "sample_file_size",
    "save_manifest",
    "scale_distribution",
    "summarize",
    "tier",
    "total_cost",
]
