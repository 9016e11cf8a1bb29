"""Aggregation of raw measurements into the benchmark's three metric
families: latency, sustained download bandwidth, and accrued cost.

Percentiles use the nearest-rank definition (no interpolation) so reports
are bit-reproducible across platforms and languages; report generation is a
pure function of its inputs and identical inputs yield byte-identical JSON.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .costs import CostReport
from .driver import Measurement
from .sim import US_PER_SECOND

REPORT_FORMAT = "coldbench-report/1"


def nearest_rank_percentile(sorted_values: Sequence[int], p: float) -> int:
    """p-th percentile by nearest rank: the ceil(p/100 * n)-th smallest."""
    if not sorted_values:
        raise ValueError("no values")
    if not (0 < p <= 100):
        raise ValueError("percentile must lie in (0, 100]")
    rank = max(1, math.ceil(p / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


@dataclass(frozen=True)
class LatencySummary:
    count: int
    mean_us: float
    p50_us: int
    p95_us: int
    p99_us: int
    max_us: int

    @staticmethod
    def from_latencies(latencies: Sequence[int]) -> "LatencySummary":
        ordered = sorted(latencies)
        return LatencySummary(
            count=len(ordered),
            mean_us=sum(ordered) / len(ordered),
            p50_us=nearest_rank_percentile(ordered, 50),
            p95_us=nearest_rank_percentile(ordered, 95),
            p99_us=nearest_rank_percentile(ordered, 99),
            max_us=ordered[-1],
        )

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "mean_us": self.mean_us,
            "p50_us": self.p50_us,
            "p95_us": self.p95_us,
            "p99_us": self.p99_us,
            "max_us": self.max_us,
        }


@dataclass
class BenchReport:
    empty: bool
    seed: Optional[int] = None
    config: dict = field(default_factory=dict)
    request_count: int = 0
    error_count: int = 0
    latency_overall: Optional[LatencySummary] = None
    latency_by_op: dict = field(default_factory=dict)
    latency_by_priority: dict = field(default_factory=dict)
    get_bytes: int = 0
    put_bytes: int = 0
    duration_us: int = 0
    sustained_get_bytes_per_s: float = 0.0
    backend_stats: dict = field(default_factory=dict)
    cost: Optional[CostReport] = None

    @property
    def cache_stats(self) -> Optional[dict]:
        if "cache_hits" not in self.backend_stats:
            return None
        return {
            "hits": self.backend_stats["cache_hits"],
            "misses": self.backend_stats["cache_misses"],
            "hit_rate": self.backend_stats["cache_hit_rate"],
        }

    @property
    def mount_count(self) -> Optional[int]:
        return self.backend_stats.get("mounts")

    def as_dict(self) -> dict:
        return {
            "schema": REPORT_FORMAT,
            "empty": self.empty,
            "seed": self.seed,
            "config": self.config,
            "requests": {"count": self.request_count, "errors": self.error_count},
            "latency": {
                "overall": self.latency_overall.as_dict() if self.latency_overall else None,
                "by_op": {k: v.as_dict() for k, v in sorted(self.latency_by_op.items())},
                "by_priority": {
                    k: v.as_dict() for k, v in sorted(self.latency_by_priority.items())
                },
            },
            "bandwidth": {
                "get_bytes": self.get_bytes,
                "put_bytes": self.put_bytes,
                "duration_us": self.duration_us,
                "sustained_get_bytes_per_s": self.sustained_get_bytes_per_s,
            },
            "cache": self.cache_stats,
            "tape_mounts": self.mount_count,
            "backend": self.backend_stats,
            "cost": self.cost.as_dict() if self.cost else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


EMPTY_REPORT = BenchReport(empty=True)


def summarize(
    measurements: Sequence[Measurement],
    *,
    cost: Optional[CostReport] = None,
    backend_stats: Optional[dict] = None,
    config: Optional[dict] = None,
    seed: Optional[int] = None,
) -> BenchReport:
    """Aggregate a measurement log into a BenchReport.

    Sustained bandwidth counts GET bytes only (download direction) over
    first-issue..last-completion; PUT bytes are reported separately.
    """
    if not measurements:
        return EMPTY_REPORT

    latencies = [m.latency_us for m in measurements]
    by_op: dict[str, list[int]] = {}
    by_priority: dict[str, list[int]] = {}
    get_bytes = 0
    put_bytes = 0
    errors = 0
    for m in measurements:
        by_op.setdefault(m.op, []).append(m.latency_us)
        by_priority.setdefault(m.priority, []).append(m.latency_us)
        if m.error is not None:
            errors += 1
        elif m.op == "put":
            put_bytes += m.bytes_moved
        else:
            get_bytes += m.bytes_moved

    first_issue = min(m.issue_time_us for m in measurements)
    last_completion = max(m.completion_time_us for m in measurements)
    duration = last_completion - first_issue
    bandwidth = get_bytes * US_PER_SECOND / duration if duration > 0 else 0.0

    return BenchReport(
        empty=False,
        seed=seed,
        config=config or {},
        request_count=len(measurements),
        error_count=errors,
        latency_overall=LatencySummary.from_latencies(latencies),
        latency_by_op={op: LatencySummary.from_latencies(v) for op, v in by_op.items()},
        latency_by_priority={
            p: LatencySummary.from_latencies(v) for p, v in by_priority.items()
        },
        get_bytes=get_bytes,
        put_bytes=put_bytes,
        duration_us=duration,
        sustained_get_bytes_per_s=bandwidth,
        backend_stats=backend_stats or {},
        cost=cost,
    )


# --- emission ----------------------------------------------------------------

def _flatten(prefix: str, value, rows: list[tuple[str, object]]) -> None:
    if isinstance(value, dict):
        for k, v in sorted(value.items()):
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    else:
        rows.append((prefix, value))


def emit(
    report: BenchReport,
    out_dir,
    *,
    formats: Sequence[str] = ("json", "csv", "plot-data"),
    measurements: Optional[Sequence[Measurement]] = None,
) -> list[Path]:
    """Write the report in the requested formats under out_dir.

    plot-data produces two-column CSV series: a latency CDF, a bandwidth
    timeline, and the storage-vs-retrieval cost breakdown bars.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if "json" in formats:
        path = out_dir / "report.json"
        path.write_text(report.to_json())
        written.append(path)

    if "csv" in formats:
        rows: list[tuple[str, object]] = []
        _flatten("", report.as_dict(), rows)
        path = out_dir / "report.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key", "value"])
            for key, value in rows:
                writer.writerow([key, "" if value is None else value])
        written.append(path)

    if "plot-data" in formats:
        plot_dir = out_dir / "plot-data"
        plot_dir.mkdir(exist_ok=True)
        if measurements:
            latencies = sorted(m.latency_us for m in measurements)
            path = plot_dir / "latency_cdf.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["latency_us", "cumulative_fraction"])
                n = len(latencies)
                for i, v in enumerate(latencies, start=1):
                    writer.writerow([v, f"{i / n:.6f}"])
            written.append(path)

            path = plot_dir / "bandwidth_timeline.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["completion_time_us", "cumulative_get_bytes"])
                total = 0
                for m in sorted(measurements, key=lambda m: (m.completion_time_us, m.request_id)):
                    if m.op != "put" and m.error is None:
                        total += m.bytes_moved
                        writer.writerow([m.completion_time_us, total])
            written.append(path)

        if report.cost is not None:
            path = plot_dir / "cost_breakdown.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["component", "percent"])
                writer.writerow(["storage", f"{report.cost.storage_fraction * 100:.4f}"])
                writer.writerow(["retrieval", f"{report.cost.access_fraction * 100:.4f}"])
            written.append(path)

    return written


def cost_breakdown_rows(cost: CostReport) -> list[tuple[str, float]]:
    """(component, percent) rows for breakdown bars."""
    return [
        ("storage", cost.storage_fraction * 100.0),
        ("retrieval", cost.access_fraction * 100.0),
    ]
