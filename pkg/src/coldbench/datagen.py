"""Synthetic file populations with realistic, heavily skewed size laws.

A dataset is metadata only: (file_id, size, mission, static/dynamic) records.
Payload bytes are never materialized; the simulated backends consume sizes.
The bundled "dsda-main" histogram reproduces a production earth-observation
product library of ~95.9M files, 81% of them under 8 MiB.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .dists import ZipfSelector, log_uniform, weighted_index
from .sim import RngStream

MANIFEST_FORMAT = "coldbench-manifest/1"

KIB = 1024
MIB = 1024**2
GIB = 1024**3
TIB = 1024**4

# Lower bound of a bucket that nominally starts at 0 bytes: avoids
# zero/near-zero files that no archive stores as objects.
FIRST_BUCKET_FLOOR = 1 * KIB
# Cap for an open-ended top bucket; configurable up to TB-scale outliers.
DEFAULT_TOP_CAP = 4 * GIB


@dataclass(frozen=True)
class SizeBucket:
    """Half-open byte range [lo, hi) with a relative population weight."""

    lo: int
    hi: Optional[int]  # None = open-ended top bucket
    weight: int

    def bounds(self, top_cap: int) -> tuple[int, int]:
        lo = max(self.lo, FIRST_BUCKET_FLOOR) if self.lo < FIRST_BUCKET_FLOOR else self.lo
        hi = self.hi if self.hi is not None else top_cap
        return lo, hi


@dataclass(frozen=True)
class FileSizeDistribution:
    """File-size law: bucketed histogram, lognormal, or fixed size.

    Histogram buckets must be disjoint and ascending; sizes inside a bucket
    are drawn log-uniformly so wide low buckets keep their tiny-file skew.
    """

    kind: str  # "histogram" | "lognormal" | "fixed"
    histogram: tuple[SizeBucket, ...] = ()
    lognormal_mu: float = 0.0
    lognormal_sigma: float = 0.0
    fixed_bytes: int = 0
    top_cap_bytes: int = DEFAULT_TOP_CAP

    def __post_init__(self) -> None:
        if self.kind == "histogram":
            if not self.histogram:
                raise ValueError("histogram distribution needs buckets")
            prev_hi = 0
            for b in self.histogram[:-1]:
                if b.hi is None:
                    raise ValueError("only the last bucket may be open-ended")
            for b in self.histogram:
                if b.weight <= 0:
                    raise ValueError("bucket weights must be > 0")
                if b.lo < prev_hi:
                    raise ValueError("buckets must be disjoint and ascending")
                prev_hi = b.hi if b.hi is not None else b.lo
            last = self.histogram[-1]
            if last.hi is None and self.top_cap_bytes <= last.lo:
                raise ValueError("top_cap_bytes must exceed the last bucket's lower bound")
        elif self.kind == "lognormal":
            if self.lognormal_sigma < 0:
                raise ValueError("lognormal sigma must be >= 0")
        elif self.kind == "fixed":
            if self.fixed_bytes < 1:
                raise ValueError("fixed size must be >= 1 byte")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @staticmethod
    def fixed(size_bytes: int) -> "FileSizeDistribution":
        return FileSizeDistribution(kind="fixed", fixed_bytes=size_bytes)

    @staticmethod
    def lognormal(mu: float, sigma: float) -> "FileSizeDistribution":
        return FileSizeDistribution(kind="lognormal", lognormal_mu=mu, lognormal_sigma=sigma)

    @staticmethod
    def from_buckets(
        buckets: Iterable[tuple[int, Optional[int], int]],
        top_cap_bytes: int = DEFAULT_TOP_CAP,
    ) -> "FileSizeDistribution":
        return FileSizeDistribution(
            kind="histogram",
            histogram=tuple(SizeBucket(lo, hi, w) for lo, hi, w in buckets),
            top_cap_bytes=top_cap_bytes,
        )

    @property
    def total_weight(self) -> int:
        return sum(b.weight for b in self.histogram)

    def bucket_probabilities(self) -> list[float]:
        total = self.total_weight
        return [b.weight / total for b in self.histogram]

    def bucket_of(self, size_bytes: int) -> Optional[int]:
        """Index of the histogram bucket containing `size_bytes`."""
        if self.kind != "histogram":
            return None
        for i, b in enumerate(self.histogram):
            hi = b.hi if b.hi is not None else self.top_cap_bytes
            if b.lo <= size_bytes < hi or (i == len(self.histogram) - 1 and size_bytes >= hi):
                return i
        return None

    def expected_mean_bytes(self) -> float:
        """Closed-form mean of the mixture.

        Log-uniform on [a,b) has mean (b-a)/ln(b/a); the histogram mean is
        the weight-proportional mixture of per-bucket means.
        """
        if self.kind == "fixed":
            return float(self.fixed_bytes)
        if self.kind == "lognormal":
            return math.exp(self.lognormal_mu + self.lognormal_sigma**2 / 2.0)
        total = self.total_weight
        mean = 0.0
        for b in self.histogram:
            lo, hi = b.bounds(self.top_cap_bytes)
            mean += (b.weight / total) * ((hi - lo) / math.log(hi / lo))
        return mean


def _mib_histogram(rows: Sequence[tuple[float, Optional[float], int]],
                   top_cap_bytes: int = DEFAULT_TOP_CAP) -> FileSizeDistribution:
    buckets = []
    for lo_mib, hi_mib, weight in rows:
        hi = None if hi_mib is None else int(hi_mib * MIB)
        buckets.append((int(lo_mib * MIB), hi, weight))
    return FileSizeDistribution.from_buckets(buckets, top_cap_bytes=top_cap_bytes)


# Earth-observation product library histogram (file counts per MiB bucket).
DSDA_MAIN = _mib_histogram(
    [
        (0, 8, 77_540_744),
        (8, 16, 4_719_466),
        (16, 32, 2_387_125),
        (32, 64, 2_095_864),
        (64, 128, 2_748_315),
        (128, 256, 1_616_620),
        (256, 512, 1_991_281),
        (512, 1024, 993_066),
        (1024, 2048, 1_586_496),
        (2048, None, 184_138),
    ]
)

PRESET_DISTRIBUTIONS: dict[str, FileSizeDistribution] = {"dsda-main": DSDA_MAIN}


def preset_distribution(name: str) -> FileSizeDistribution:
    try:
        return PRESET_DISTRIBUTIONS[name]
    except KeyError:
        raise KeyError(
            f"unknown distribution preset {name!r}; have {sorted(PRESET_DISTRIBUTIONS)}"
        ) from None


def sample_file_size(dist: FileSizeDistribution, rng: RngStream) -> int:
    """One size draw in bytes, always inside its bucket's bounds."""
    if dist.kind == "fixed":
        return dist.fixed_bytes
    if dist.kind == "lognormal":
        return max(1, round(math.exp(rng.normalvariate(dist.lognormal_mu, dist.lognormal_sigma))))
    cumulative = []
    total = 0
    for b in dist.histogram:
        total += b.weight
        cumulative.append(total)
    idx = weighted_index(rng, cumulative)
    lo, hi = dist.histogram[idx].bounds(dist.top_cap_bytes)
    return log_uniform(rng, lo, hi)


class _HistogramSampler:
    """Reusable sampler: precomputes cumulative weights once per dataset."""

    def __init__(self, dist: FileSizeDistribution) -> None:
        self.dist = dist
        self._cumulative: list[int] = []
        total = 0
        for b in dist.histogram:
            total += b.weight
            self._cumulative.append(total)

    def sample(self, rng: RngStream) -> int:
        idx = weighted_index(rng, self._cumulative)
        lo, hi = self.dist.histogram[idx].bounds(self.dist.top_cap_bytes)
        return log_uniform(rng, lo, hi)


@dataclass(frozen=True)
class DatasetSpec:
    """Recipe for a file population."""

    total_files: int
    distribution: FileSizeDistribution
    static_fraction: float = 1.0
    mission_count: int = 1
    mission_skew_s: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.total_files < 1:
            raise ValueError("total_files must be >= 1")
        if not (0.0 <= self.static_fraction <= 1.0):
            raise ValueError("static_fraction must lie in [0, 1]")
        if self.mission_count < 1:
            raise ValueError("mission_count must be >= 1")
        if self.mission_skew_s < 0:
            raise ValueError("mission_skew_s must be >= 0")


@dataclass(frozen=True)
class FileRecord:
    file_id: str
    size_bytes: int
    mission: int
    set_name: str  # "static" | "dynamic"


@dataclass
class DatasetSummary:
    file_count: int = 0
    total_bytes: int = 0
    max_bytes: int = 0
    bucket_counts: list[int] = field(default_factory=list)

    @property
    def mean_bytes(self) -> float:
        return self.total_bytes / self.file_count if self.file_count else 0.0


@dataclass
class DatasetManifest:
    spec: DatasetSpec
    records: list[FileRecord]
    summary: DatasetSummary

    @property
    def static_records(self) -> list[FileRecord]:
        return [r for r in self.records if r.set_name == "static"]

    @property
    def dynamic_records(self) -> list[FileRecord]:
        return [r for r in self.records if r.set_name == "dynamic"]

    def record_by_id(self) -> dict[str, FileRecord]:
        return {r.file_id: r for r in self.records}


def _summarize(records: Iterable[FileRecord], dist: FileSizeDistribution) -> DatasetSummary:
    summary = DatasetSummary()
    if dist.kind == "histogram":
        summary.bucket_counts = [0] * len(dist.histogram)
    for r in records:
        summary.file_count += 1
        summary.total_bytes += r.size_bytes
        summary.max_bytes = max(summary.max_bytes, r.size_bytes)
        if summary.bucket_counts:
            idx = dist.bucket_of(r.size_bytes)
            if idx is not None:
                summary.bucket_counts[idx] += 1
    return summary


def generate_dataset(spec: DatasetSpec) -> DatasetManifest:
    """Deterministically generate the file population for `spec`.

    The first ceil(static_fraction * total_files) records form the static
    set (populated up-front, free of charge); the remainder is the dynamic
    set whose ingest the workload generator interleaves with reads.
    """
    rng = RngStream(spec.seed, "datagen")
    dist = spec.distribution
    sampler = _HistogramSampler(dist) if dist.kind == "histogram" else None
    mission_picker = (
        ZipfSelector(spec.mission_count, spec.mission_skew_s)
        if spec.mission_count > 1
        else None
    )
    static_count = math.ceil(spec.static_fraction * spec.total_files)

    records = []
    for i in range(spec.total_files):
        size = sampler.sample(rng) if sampler else sample_file_size(dist, rng)
        mission = mission_picker.pick(rng) if mission_picker else 0
        records.append(
            FileRecord(
                file_id=f"f{i:08d}",
                size_bytes=size,
                mission=mission,
                set_name="static" if i < static_count else "dynamic",
            )
        )
    return DatasetManifest(spec=spec, records=records, summary=_summarize(records, dist))


def scale_distribution(
    dist: FileSizeDistribution,
    target_file_count: int,
    *,
    static_fraction: float = 1.0,
    mission_count: int = 1,
    mission_skew_s: float = 0.0,
    seed: int = 0,
) -> DatasetSpec:
    """Spec for `target_file_count` files keeping the source proportions.

    Sampling is i.i.d. per file, so expected bucket shares equal the weight
    ratios at any target count; this guards the target against degenerate
    sizes where buckets cannot all be represented.
    """
    if dist.kind == "histogram":
        populated = sum(1 for b in dist.histogram if b.weight > 0)
        if target_file_count < populated:
            raise ValueError(
                f"target {target_file_count} below populated bucket count {populated}"
            )
    return DatasetSpec(
        total_files=target_file_count,
        distribution=dist,
        static_fraction=static_fraction,
        mission_count=mission_count,
        mission_skew_s=mission_skew_s,
        seed=seed,
    )


def expected_bucket_counts(dist: FileSizeDistribution, n: int) -> list[float]:
    return [p * n for p in dist.bucket_probabilities()]


# --- serialization ---------------------------------------------------------

def _dist_to_dict(dist: FileSizeDistribution) -> dict:
    out: dict = {"kind": dist.kind}
    if dist.kind == "histogram":
        out["buckets"] = [[b.lo, b.hi, b.weight] for b in dist.histogram]
        out["top_cap_bytes"] = dist.top_cap_bytes
    elif dist.kind == "lognormal":
        out["mu"] = dist.lognormal_mu
        out["sigma"] = dist.lognormal_sigma
    else:
        out["fixed_bytes"] = dist.fixed_bytes
    return out


def _dist_from_dict(data: dict) -> FileSizeDistribution:
    kind = data["kind"]
    if kind == "histogram":
        return FileSizeDistribution.from_buckets(
            [(lo, hi, w) for lo, hi, w in data["buckets"]],
            top_cap_bytes=data.get("top_cap_bytes", DEFAULT_TOP_CAP),
        )
    if kind == "lognormal":
        return FileSizeDistribution.lognormal(data["mu"], data["sigma"])
    return FileSizeDistribution.fixed(data["fixed_bytes"])


def save_manifest(manifest: DatasetManifest, directory) -> tuple[Path, Path]:
    """Write records.csv + summary.json under `directory`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records_path = directory / "records.csv"
    summary_path = directory / "summary.json"

    with open(records_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file_id", "size_bytes", "mission", "set"])
        for r in manifest.records:
            writer.writerow([r.file_id, r.size_bytes, r.mission, r.set_name])

    spec = manifest.spec
    payload = {
        "format": MANIFEST_FORMAT,
        "spec": {
            "total_files": spec.total_files,
            "static_fraction": spec.static_fraction,
            "mission_count": spec.mission_count,
            "mission_skew_s": spec.mission_skew_s,
            "seed": spec.seed,
            "distribution": _dist_to_dict(spec.distribution),
        },
        "summary": {
            "file_count": manifest.summary.file_count,
            "total_bytes": manifest.summary.total_bytes,
            "max_bytes": manifest.summary.max_bytes,
            "mean_bytes": manifest.summary.mean_bytes,
            "bucket_counts": manifest.summary.bucket_counts,
        },
    }
    with open(summary_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return records_path, summary_path


def write_payload_files(manifest: DatasetManifest, directory, *, chunk_bytes: int = 1 * MIB) -> int:
    """Materialize real files with seeded pseudo-random bytes.

    Manifests are normally metadata-only (simulated backends consume sizes);
    this exists for driving future real storage adapters.  Bytes per file
    are a pure function of (manifest seed, file_id).  Returns bytes written.
    Intended for desk-scale datasets; writing a PB is on the caller.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = 0
    for record in manifest.records:
        rng = RngStream(manifest.spec.seed, f"payload/{record.file_id}")
        with open(directory / record.file_id, "wb") as fh:
            remaining = record.size_bytes
            while remaining > 0:
                n = min(chunk_bytes, remaining)
                fh.write(rng.randbytes(n))
                remaining -= n
        written += record.size_bytes
    return written


def load_manifest(directory) -> DatasetManifest:
    directory = Path(directory)
    with open(directory / "summary.json") as fh:
        payload = json.load(fh)
    if payload.get("format") != MANIFEST_FORMAT:
        raise ValueError(f"unsupported manifest format {payload.get('format')!r}")
    spec_data = payload["spec"]
    spec = DatasetSpec(
        total_files=spec_data["total_files"],
        distribution=_dist_from_dict(spec_data["distribution"]),
        static_fraction=spec_data["static_fraction"],
        mission_count=spec_data["mission_count"],
        mission_skew_s=spec_data["mission_skew_s"],
        seed=spec_data["seed"],
    )
    records = []
    with open(directory / "records.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["file_id", "size_bytes", "mission", "set"]:
            raise ValueError(f"unexpected records header {header}")
        for file_id, size_bytes, mission, set_name in reader:
            records.append(FileRecord(file_id, int(size_bytes), int(mission), set_name))
    return DatasetManifest(
        spec=spec, records=records, summary=_summarize(records, spec.distribution)
    )
