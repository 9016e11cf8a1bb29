"""Deterministic request streams over a dataset manifest.

Streams mix single and batch GETs with interleaved PUTs of the dynamic set,
select targets with mission-level Zipf skew plus a recency bias, honor
priority classes, and reserve a configurable share of static files that are
never read (the dominant behavior of real archives, where 76-80% of files
are written once and never retrieved).
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .datagen import MIB, DatasetManifest
from .dists import ZipfSelector
from .sim import US_PER_SECOND, RngStream

WORKLOAD_STREAM_FORMAT = "coldbench-requests/1"

DEFAULT_PRIORITY_WEIGHTS = {"low": 0.2, "normal": 0.7, "urgent": 0.1}


@dataclass(frozen=True)
class Arrival:
    """closed: issue on completion + think time; open: Poisson at rate/s."""

    kind: str = "closed"  # "closed" | "open"
    think_time_us: int = 0
    rate_per_s: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("closed", "open"):
            raise ValueError(f"unknown arrival kind {self.kind!r}")
        if self.kind == "closed" and self.think_time_us < 0:
            raise ValueError("think_time_us must be >= 0")
        if self.kind == "open" and self.rate_per_s <= 0:
            raise ValueError("open arrivals need rate_per_s > 0")


@dataclass(frozen=True)
class WorkloadSpec:
    request_count: int
    read_fraction: float = 1.0
    batch_fraction: float = 0.0
    batch_size: tuple[int, int] = (10, 100)
    priority_weights: dict = field(default_factory=lambda: dict(DEFAULT_PRIORITY_WEIGHTS))
    access_skew_s: float = 1.1
    temporal_window: float = 0.5  # share of reads biased to the newest decile
    never_read_fraction: float = 0.0
    size_filter_max_bytes: Optional[int] = None  # restrict read pool to small files
    arrival: Arrival = field(default_factory=Arrival)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.request_count < 1:
            raise ValueError("request_count must be >= 1")
        for name in ("read_fraction", "batch_fraction", "temporal_window", "never_read_fraction"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1]")
        bmin, bmax = self.batch_size
        if bmin < 2 or bmax < bmin:
            raise ValueError("batch_size must satisfy 2 <= min <= max")
        if not self.priority_weights or any(w < 0 for w in self.priority_weights.values()):
            raise ValueError("priority weights must be >= 0")
        if sum(self.priority_weights.values()) <= 0:
            raise ValueError("priority weights need a positive sum")
        if self.access_skew_s < 0:
            raise ValueError("access_skew_s must be >= 0")
        if self.never_read_fraction >= 1.0 and self.read_fraction > 0:
            raise ValueError(
                "never_read_fraction = 1.0 leaves no readable files for a read workload"
            )


@dataclass(frozen=True)
class Request:
    request_id: int
    op: str  # "get" | "put"
    file_ids: tuple[str, ...]
    priority: str
    # open arrivals: offset from workload start in us; closed: ordinal rank
    issue_offset: int

    @property
    def is_batch(self) -> bool:
        return len(self.file_ids) > 1


# --- choke-point presets ----------------------------------------------------
#
# Each preset pins the workload knobs that stress one known bottleneck of
# cold archives: access skew, bulk retrieval, priority mixing, small files.

CHOKE_POINT_PRESETS: dict[str, dict] = {
    "cp1-skew": {
        "read_fraction": 1.0,
        "batch_fraction": 0.0,
        "access_skew_s": 2.0,
        "priority_weights": {"normal": 1.0},
    },
    "cp2-batch": {
        "read_fraction": 1.0,
        "batch_fraction": 1.0,
        "batch_size": (100, 1000),
        "priority_weights": {"normal": 1.0},
    },
    "cp3-priority": {
        "read_fraction": 1.0,
        "batch_fraction": 0.0,
        "priority_weights": {"low": 0.25, "normal": 0.70, "urgent": 0.05},
    },
    "cp4-smallfile": {
        "read_fraction": 1.0,
        "batch_fraction": 0.0,
        "size_filter_max_bytes": 8 * MIB,
        "priority_weights": {"normal": 1.0},
    },
}


def preset(name: str, *, request_count: int = 10_000, seed: int = 0, **extra) -> WorkloadSpec:
    """WorkloadSpec for a named choke-point preset, with overrides."""
    try:
        overrides = dict(CHOKE_POINT_PRESETS[name])
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; have {sorted(CHOKE_POINT_PRESETS)}"
        ) from None
    overrides.update(extra)
    return WorkloadSpec(request_count=request_count, seed=seed, **overrides)


class _MissionPools:
    """Per-mission readable-file pools in ingest order.

    Static files enter up-front (minus the reserved never-read pool and any
    size filter); dynamic files enter when their PUT is emitted, keeping
    PUT-before-GET causality by construction.
    """

    def __init__(self, manifest: DatasetManifest, spec: WorkloadSpec) -> None:
        statics = manifest.static_records
        reserved_count = math.ceil(spec.never_read_fraction * len(statics))
        # The reserved pool depends only on the workload seed, never on the
        # per-session stream: concurrent sessions must agree on which files
        # are off limits or their read pools would jointly cover everything.
        reserve_rng = RngStream(spec.seed, "never-read")
        reserved_idx = (
            set(reserve_rng.sample(range(len(statics)), reserved_count))
            if reserved_count else set()
        )
        self.reserved_ids = {statics[i].file_id for i in reserved_idx}

        mission_count = max((r.mission for r in manifest.records), default=0) + 1
        self.pools: list[list[tuple[str, int]]] = [[] for _ in range(mission_count)]
        for i, record in enumerate(statics):
            if i in reserved_idx:
                continue
            if spec.size_filter_max_bytes is not None and record.size_bytes >= spec.size_filter_max_bytes:
                continue
            self.pools[record.mission].append((record.file_id, record.size_bytes))
        self._spec = spec

    def admit(self, record) -> None:
        if (
            self._spec.size_filter_max_bytes is None
            or record.size_bytes < self._spec.size_filter_max_bytes
        ):
            self.pools[record.mission].append((record.file_id, record.size_bytes))

    def nonempty(self) -> bool:
        return any(self.pools)

    def pick_mission(self, zipf: ZipfSelector, rng: RngStream) -> int:
        # Fall forward deterministically when the drawn mission has no
        # readable files yet (possible early on with size filters).
        start = zipf.pick(rng)
        for offset in range(len(self.pools)):
            mission = (start + offset) % len(self.pools)
            if self.pools[mission]:
                return mission
        raise ValueError("no readable files in any mission pool")

    def pick_file(self, mission: int, rng: RngStream) -> str:
        pool = self.pools[mission]
        n = len(pool)
        decile = max(1, n // 10)
        if n > 1 and rng.random() < self._spec.temporal_window:
            idx = n - decile + rng.randrange(decile)  # newest decile
        else:
            idx = rng.randrange(max(1, n - decile)) if n > decile else rng.randrange(n)
        return pool[idx][0]

    def pick_batch(self, mission: int, size: int, rng: RngStream) -> tuple[str, ...]:
        pool = self.pools[mission]
        k = min(size, len(pool))
        return tuple(fid for fid, _ in rng.sample(pool, k))


def _priority_chooser(spec: WorkloadSpec):
    labels = sorted(spec.priority_weights)
    cumulative = []
    total = 0.0
    for label in labels:
        total += spec.priority_weights[label]
        cumulative.append(total)

    def choose(rng: RngStream) -> str:
        u = rng.random() * total
        for label, bound in zip(labels, cumulative):
            if u < bound:
                return label
        return labels[-1]

    return choose


def _put_positions(count: int, put_count: int, rng: RngStream) -> set[int]:
    if put_count == 0:
        return set()
    return set(rng.sample(range(count), put_count))


def generate_workload(
    manifest: DatasetManifest,
    spec: WorkloadSpec,
    *,
    ensure_full_ingest: bool = False,
    stream_id: str = "workload",
) -> list[Request]:
    """Produce the ordered request stream for `spec` over `manifest`.

    With ensure_full_ingest, every dynamic-set file is PUT exactly once,
    spread across the stream (the interleaved-ingest mode); otherwise the
    PUT count follows the write share, truncated to the dynamic set size.
    Distinct stream_ids (one per driver session) yield independent draws
    from the same seed.
    """
    if not manifest.records:
        raise ValueError("manifest is empty")
    rng = RngStream(spec.seed, stream_id)
    dynamics = manifest.dynamic_records
    write_share = 1.0 - spec.read_fraction

    if ensure_full_ingest:
        if not dynamics:
            raise ValueError("manifest has no dynamic set to ingest")
        if write_share == 0:
            warnings.warn("write share is 0; dynamic files stay unused", stacklevel=2)
            put_count = 0
        else:
            put_count = len(dynamics)
            if put_count > spec.request_count:
                raise ValueError(
                    f"request_count {spec.request_count} cannot place "
                    f"{put_count} dynamic PUTs"
                )
    else:
        put_count = min(len(dynamics), round(write_share * spec.request_count))
        if dynamics and put_count == 0 and write_share == 0:
            warnings.warn("write share is 0; dynamic files stay unused", stacklevel=2)

    put_at = _put_positions(spec.request_count, put_count, rng)

    pools = _MissionPools(manifest, spec)
    if spec.read_fraction > 0 and not pools.nonempty() and put_count == 0:
        raise ValueError("no readable files (check never_read_fraction / size filter)")

    zipf = ZipfSelector(len(pools.pools), spec.access_skew_s)
    choose_priority = _priority_chooser(spec)
    bmin, bmax = spec.batch_size

    offsets = _issue_offsets(spec, rng)
    requests: list[Request] = []
    next_dynamic = 0
    for i in range(spec.request_count):
        priority = choose_priority(rng)
        if i in put_at and next_dynamic < len(dynamics):
            record = dynamics[next_dynamic]
            next_dynamic += 1
            requests.append(Request(i, "put", (record.file_id,), priority, offsets[i]))
            pools.admit(record)
            continue
        if not pools.nonempty():
            raise ValueError("read requested before any readable file exists")
        mission = pools.pick_mission(zipf, rng)
        if rng.random() < spec.batch_fraction:
            size = rng.randint(bmin, bmax)
            file_ids = pools.pick_batch(mission, size, rng)
        else:
            file_ids = (pools.pick_file(mission, rng),)
        requests.append(Request(i, "get", file_ids, priority, offsets[i]))
    return requests


def interleave_ingest(manifest: DatasetManifest, spec: WorkloadSpec) -> list[Request]:
    """Request stream in which every dynamic file is ingested exactly once."""
    return generate_workload(manifest, spec, ensure_full_ingest=True)


def _issue_offsets(spec: WorkloadSpec, rng: RngStream) -> list[int]:
    if spec.arrival.kind == "closed":
        return list(range(spec.request_count))
    offsets = []
    t = 0.0
    mean_gap_us = US_PER_SECOND / spec.arrival.rate_per_s
    for _ in range(spec.request_count):
        t += rng.expovariate(1.0) * mean_gap_us
        offsets.append(int(t))
    return offsets


# --- serialization ----------------------------------------------------------

def save_workload(requests: Sequence[Request], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["request_id", "op", "priority", "issue_offset", "file_ids"])
        for r in requests:
            writer.writerow([r.request_id, r.op, r.priority, r.issue_offset, ";".join(r.file_ids)])
    return path


def load_workload(path) -> list[Request]:
    requests = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["request_id", "op", "priority", "issue_offset", "file_ids"]:
            raise ValueError(f"unexpected requests header {header}")
        for request_id, op, priority, issue_offset, file_ids in reader:
            requests.append(
                Request(int(request_id), op, tuple(file_ids.split(";")), priority, int(issue_offset))
            )
    return requests
