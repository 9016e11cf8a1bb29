"""Run configuration: one TOML file describing dataset, workload, backend,
sessions, and cost scenarios.  CLI flags override file values.
"""
from __future__ import annotations

import re
from dataclasses import replace
from decimal import Decimal
from fractions import Fraction
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .backends import (
    CacheConfig,
    CacheTier,
    CloudTier,
    CloudTierConfig,
    HybridArchive,
    HybridConfig,
    StorageBackend,
    TapeConfig,
    TapeLibrary,
)
from .costs import CostScenario, TierPricing, builtin_catalog, load_catalog, tier
from .datagen import (
    GIB,
    DatasetManifest,
    DatasetSpec,
    FileSizeDistribution,
    generate_dataset,
    load_manifest,
    preset_distribution,
)
from .sim import US_PER_MS, US_PER_SECOND, Simulator
from .workload import Arrival, WorkloadSpec, preset as workload_preset

_UNITS = {
    "B": 1,
    "KB": 10**3, "MB": 10**6, "GB": 10**9, "TB": 10**12, "PB": 10**15,
    "KIB": 2**10, "MIB": 2**20, "GIB": 2**30, "TIB": 2**40, "PIB": 2**50,
}

_SIZE_RE = re.compile(r"^\s*([0-9]+(?:\.[0-9]+)?)\s*([A-Za-z]*)\s*$")


def parse_size_bytes(text) -> int:
    """'256MiB' -> bytes.  Binary suffixes are powers of 1024, decimal of
    1000; a bare number is bytes."""
    if isinstance(text, int):
        return text
    m = _SIZE_RE.match(str(text))
    if not m:
        raise ValueError(f"cannot parse size {text!r}")
    value, unit = m.group(1), m.group(2).upper()
    if unit == "":
        unit = "B"
    if unit not in _UNITS:
        raise ValueError(f"unknown size unit {unit!r} in {text!r}")
    out = Decimal(value) * _UNITS[unit]
    if out != int(out):
        raise ValueError(f"{text!r} is not a whole number of bytes")
    return int(out)


def capacity_to_gb(text) -> Fraction:
    """Capacity string to GB-for-billing (GB = 2^30 bytes).

    A bare number is already GB.  '1PiB' -> 2^20 GB exactly, the convention
    the reference cost scenarios use.
    """
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    s = str(text)
    m = _SIZE_RE.match(s)
    if m and m.group(2) == "":
        return Fraction(Decimal(m.group(1)))
    return Fraction(parse_size_bytes(s), GIB)


def load_run_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _merged(section: Optional[dict], overrides: Optional[dict]) -> dict:
    out = dict(section or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            out[key] = value
    return out


def build_dataset(config: dict, default_seed: int = 0) -> DatasetManifest:
    cfg = config.get("dataset", {})
    if "manifest" in cfg:
        return load_manifest(cfg["manifest"])
    dist = _distribution_from(cfg)
    spec = DatasetSpec(
        total_files=int(cfg.get("total_files", 10_000)),
        distribution=dist,
        static_fraction=float(cfg.get("static_fraction", 1.0)),
        mission_count=int(cfg.get("mission_count", 1)),
        mission_skew_s=float(cfg.get("mission_skew_s", 0.0)),
        seed=int(cfg.get("seed", config.get("seed", default_seed))),
    )
    return generate_dataset(spec)


def _distribution_from(cfg: dict) -> FileSizeDistribution:
    if "preset" in cfg:
        dist = preset_distribution(cfg["preset"])
        if "top_cap" in cfg:
            dist = replace(dist, top_cap_bytes=parse_size_bytes(cfg["top_cap"]))
        return dist
    d = cfg.get("distribution", {})
    kind = d.get("kind", "fixed")
    if kind == "fixed":
        return FileSizeDistribution.fixed(parse_size_bytes(d.get("size", "1MiB")))
    if kind == "lognormal":
        return FileSizeDistribution.lognormal(float(d["mu"]), float(d["sigma"]))
    if kind == "histogram":
        buckets = [
            (parse_size_bytes(lo), None if hi is None else parse_size_bytes(hi), int(w))
            for lo, hi, w in d["buckets"]
        ]
        top_cap = parse_size_bytes(d.get("top_cap", "4GiB"))
        return FileSizeDistribution.from_buckets(buckets, top_cap_bytes=top_cap)
    raise ValueError(f"unknown distribution kind {kind!r}")


def build_workload(config: dict, default_seed: int = 0) -> WorkloadSpec:
    cfg = config.get("workload", {})
    seed = int(cfg.get("seed", config.get("seed", default_seed)))
    request_count = int(cfg.get("request_count", 1_000))
    if "preset" in cfg:
        spec = workload_preset(cfg["preset"], request_count=request_count, seed=seed)
    else:
        spec = WorkloadSpec(request_count=request_count, seed=seed)
    fields: dict = {}
    for name in ("read_fraction", "batch_fraction", "access_skew_s",
                 "temporal_window", "never_read_fraction"):
        if name in cfg:
            fields[name] = float(cfg[name])
    if "batch_min" in cfg or "batch_max" in cfg:
        fields["batch_size"] = (
            int(cfg.get("batch_min", spec.batch_size[0])),
            int(cfg.get("batch_max", spec.batch_size[1])),
        )
    if "priority_weights" in cfg:
        fields["priority_weights"] = {k: float(v) for k, v in cfg["priority_weights"].items()}
    if "size_filter_max" in cfg:
        fields["size_filter_max_bytes"] = parse_size_bytes(cfg["size_filter_max"])
    if cfg.get("arrival") == "open":
        fields["arrival"] = Arrival(kind="open", rate_per_s=float(cfg.get("rate_per_s", 10.0)))
    elif "think_time_ms" in cfg or cfg.get("arrival") == "closed":
        fields["arrival"] = Arrival(
            kind="closed", think_time_us=int(cfg.get("think_time_ms", 0)) * US_PER_MS
        )
    return replace(spec, **fields) if fields else spec


def _tape_config(cfg: dict, seed: int) -> TapeConfig:
    kwargs: dict = {"placement_seed": int(cfg.get("placement_seed", seed))}
    if "drive_count" in cfg:
        kwargs["drive_count"] = int(cfg["drive_count"])
    for toml_key, attr in (
        ("robot_exchange_s", "robot_exchange_us"),
        ("load_thread_s", "load_thread_us"),
        ("max_seek_s", "max_seek_us"),
    ):
        if toml_key in cfg:
            kwargs[attr] = int(float(cfg[toml_key]) * US_PER_SECOND)
    for key in ("transfer_rate_mb_s", "unload_policy", "scheduler", "placement"):
        if key in cfg:
            kwargs[key] = cfg[key] if isinstance(cfg[key], str) else int(cfg[key])
    if "tape_capacity" in cfg:
        kwargs["tape_capacity_bytes"] = parse_size_bytes(cfg["tape_capacity"])
    if "idle_timeout_s" in cfg:
        kwargs["idle_timeout_us"] = int(float(cfg["idle_timeout_s"]) * US_PER_SECOND)
    return TapeConfig(**kwargs)


def _cache_config(cfg: dict) -> CacheConfig:
    kwargs: dict = {"capacity_bytes": parse_size_bytes(cfg.get("capacity", "64GiB"))}
    if "policy" in cfg:
        kwargs["policy"] = cfg["policy"]
    if "disk_latency_ms" in cfg:
        kwargs["disk_latency_us"] = int(float(cfg["disk_latency_ms"]) * US_PER_MS)
    if "disk_rate_mb_s" in cfg:
        kwargs["disk_rate_mb_s"] = int(cfg["disk_rate_mb_s"])
    return CacheConfig(**kwargs)


def _pricing_from(cfg: dict) -> TierPricing:
    catalog_name = cfg.get("catalog", "azure-2019")
    if isinstance(catalog_name, str) and catalog_name.endswith(".toml"):
        catalog = load_catalog(catalog_name)
    else:
        catalog = builtin_catalog(catalog_name)
    return tier(cfg.get("tier", "hot"), catalog)


def _cloud_config(cfg: dict, seed: int) -> CloudTierConfig:
    kwargs: dict = {"pricing": _pricing_from(cfg), "seed": int(cfg.get("seed", seed))}
    if "latency_model" in cfg:
        kwargs["latency_model"] = cfg["latency_model"]
    if "bandwidth_mb_s" in cfg:
        kwargs["bandwidth_mb_s"] = int(cfg["bandwidth_mb_s"])
    if "lognormal_sigma" in cfg:
        kwargs["lognormal_sigma"] = float(cfg["lognormal_sigma"])
    return CloudTierConfig(**kwargs)


def build_backend(config: dict, sim: Simulator, default_seed: int = 0) -> StorageBackend:
    cfg = config.get("backend", {})
    kind = cfg.get("kind", "tape")
    seed = int(config.get("seed", default_seed))
    if kind == "tape":
        backend: StorageBackend = TapeLibrary(sim, _tape_config(cfg.get("tape", {}), seed))
    elif kind == "cache+tape":
        tape = TapeLibrary(sim, _tape_config(cfg.get("tape", {}), seed))
        backend = CacheTier(sim, _cache_config(cfg.get("cache", {})), tape)
    elif kind.startswith("cloud"):
        cloud_cfg = dict(cfg.get("cloud", {}))
        if ":" in kind:  # "cloud:hot" shorthand
            cloud_cfg.setdefault("tier", kind.split(":", 1)[1])
        backend = CloudTier(sim, _cloud_config(cloud_cfg, seed))
    elif kind == "hybrid":
        hybrid_cfg = cfg.get("hybrid", {})
        copies = hybrid_cfg.get("copies") or [cfg.get("cloud", {"tier": "archive"})]
        cache_cfg = cfg.get("cache")
        backend = HybridArchive(sim, HybridConfig(
            tape=_tape_config(cfg.get("tape", {}), seed),
            cache=_cache_config(cache_cfg) if cache_cfg else None,
            cloud_copies=tuple(_cloud_config(dict(c), seed + i) for i, c in enumerate(copies)),
            scrub_target=hybrid_cfg.get("scrub_target", "local"),
        ))
    else:
        raise ValueError(f"unknown backend kind {kind!r}")
    if cfg.get("trace"):
        backend.trace = []
    return backend


def build_cost_scenario(cfg: dict) -> CostScenario:
    kwargs: dict = {
        "capacity_gb": capacity_to_gb(cfg.get("capacity", "1PiB")),
        "months": Fraction(Decimal(str(cfg.get("months", 12)))),
        "full_reads": Fraction(Decimal(str(cfg.get("reads", 1)))),
        "blob_size_gb": capacity_to_gb(cfg.get("blob", "256MiB")),
    }
    if "egress_per_gb" in cfg:
        kwargs["egress_per_gb"] = Fraction(Decimal(str(cfg["egress_per_gb"])))
    return CostScenario(**kwargs)
