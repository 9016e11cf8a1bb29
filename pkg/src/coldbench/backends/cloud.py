"""Cloud blob-store tier with per-request cost accrual.

Online tiers (hot/cool) serve at their nominal latency (optionally with a
lognormal spread); offline archive tiers first rehydrate for a several-hour
delay before bytes start flowing.  Every GET accrues per-GB retrieval plus
per-10k-request charges; stored bytes accrue per GB-month continuously under
the virtual clock, so a simulated year reconciles exactly with the
closed-form cost model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..costs import CostReport, TierPricing
from ..datagen import FileRecord
from ..sim import US_PER_HOUR, RngStream, Simulator
from .base import Callback, CostLedger, OpOutcome, StorageBackend

DEFAULT_BANDWIDTH_MB_S = 500
REHYDRATE_MIN_US = 1 * US_PER_HOUR
REHYDRATE_MAX_US = 15 * US_PER_HOUR


@dataclass(frozen=True)
class CloudTierConfig:
    pricing: TierPricing
    # "constant" | "lognormal" | "rehydrate"; None picks per latency class.
    latency_model: Optional[str] = None
    lognormal_sigma: float = 0.25
    bandwidth_mb_s: int = DEFAULT_BANDWIDTH_MB_S
    rehydrate_min_us: int = REHYDRATE_MIN_US
    rehydrate_max_us: int = REHYDRATE_MAX_US
    seed: int = 0

    def __post_init__(self) -> None:
        model = self.effective_latency_model
        if model not in ("constant", "lognormal", "rehydrate"):
            raise ValueError(f"unknown latency model {model!r}")
        if model == "rehydrate" and not self.pricing.offline:
            raise ValueError("rehydrate latency needs an offline (hours-class) tier")
        if model != "rehydrate" and self.pricing.offline:
            raise ValueError(f"{self.pricing.tier_name} is offline; use the rehydrate model")
        if self.bandwidth_mb_s <= 0:
            raise ValueError("bandwidth_mb_s must be > 0")
        if not (0 < self.rehydrate_min_us <= self.rehydrate_max_us):
            raise ValueError("need 0 < rehydrate_min_us <= rehydrate_max_us")

    @property
    def effective_latency_model(self) -> str:
        if self.latency_model is not None:
            return self.latency_model
        return "rehydrate" if self.pricing.offline else "constant"


class CloudTier(StorageBackend):
    name = "cloud"

    def __init__(self, sim: Simulator, config: CloudTierConfig) -> None:
        super().__init__(sim)
        self.config = config
        self.name = f"cloud:{config.pricing.tier_name}"
        self.files: dict[str, int] = {}
        self.ledger = CostLedger(config.pricing)
        self.rng = RngStream(config.seed, f"cloud/{config.pricing.tier_name}")
        self._link_free_at = 0  # shared egress link, serialized transfers

    def contains(self, file_id: str) -> bool:
        return file_id in self.files

    def size_of(self, file_id: str) -> int:
        try:
            return self.files[file_id]
        except KeyError:
            from .base import UnknownFileError

            raise UnknownFileError(f"{self.name}: unknown file {file_id}") from None

    def _first_byte_delay_us(self) -> int:
        model = self.config.effective_latency_model
        if model == "rehydrate":
            return self.rng.randint(self.config.rehydrate_min_us, self.config.rehydrate_max_us)
        nominal = self.config.pricing.nominal_latency_us or 0
        if model == "constant":
            return nominal
        mu = math.log(max(nominal, 1))
        return max(1, int(round(math.exp(self.rng.normalvariate(mu, self.config.lognormal_sigma)))))

    def _transfer(self, size_bytes: int, start_at: int) -> int:
        """Serialize transfers through the shared link; returns finish time."""
        begin = max(start_at, self._link_free_at)
        finish = begin + int(round(size_bytes / self.config.bandwidth_mb_s))
        self._link_free_at = finish
        return finish

    def get(self, file_id: str, on_done: Callback, priority: str = "normal") -> None:
        issued_at = self.sim.now
        size = self.files.get(file_id)
        if size is None:
            self._finish(OpOutcome(
                op="get", file_ids=(file_id,), issued_at=issued_at,
                completed_at=issued_at, bytes_moved=0,
                error=f"unknown file {file_id}",
            ), on_done)
            return
        self.ledger.on_get(size)
        cost_cents = self.ledger.get_cost_dollars(size) * 100
        done_at = self._transfer(size, issued_at + self._first_byte_delay_us())

        def complete() -> None:
            self._finish(OpOutcome(
                op="get", file_ids=(file_id,), issued_at=issued_at,
                completed_at=self.sim.now, bytes_moved=size,
                cost_delta_cents=cost_cents,
            ), on_done)

        self.sim.schedule_at(done_at, complete)

    def put(self, file_id: str, size_bytes: int, on_done: Callback,
            priority: str = "normal") -> None:
        issued_at = self.sim.now
        if file_id in self.files:
            self._finish(OpOutcome(
                op="put", file_ids=(file_id,), issued_at=issued_at,
                completed_at=issued_at, bytes_moved=0,
                error=f"duplicate file {file_id}",
            ), on_done)
            return
        # Ingress is free of per-byte charges; storage accrues on landing.
        nominal = self.config.pricing.nominal_latency_us or 0
        done_at = self._transfer(size_bytes, issued_at + nominal)

        def complete() -> None:
            self.files[file_id] = size_bytes
            self.ledger.on_store(size_bytes, self.sim.now)
            self._finish(OpOutcome(
                op="put", file_ids=(file_id,), issued_at=issued_at,
                completed_at=self.sim.now, bytes_moved=size_bytes,
            ), on_done)

        self.sim.schedule_at(done_at, complete)

    def _preload(self, records: list[FileRecord]) -> None:
        for r in records:
            self.files[r.file_id] = r.size_bytes
            self.ledger.on_store(r.size_bytes, self.sim.now)

    def drop(self, file_id: str) -> None:
        size = self.files.pop(file_id, None)
        if size is not None:
            self.ledger.on_remove(size, self.sim.now)

    def ledger_report(self, now_us: int) -> CostReport:
        return self.ledger.report(now_us)

    def stats(self) -> dict:
        return {
            "cloud_tier": self.config.pricing.tier_name,
            "cloud_gets": self.ledger.get_requests,
            "cloud_bytes_read": self.ledger.bytes_read,
            "resident_files": len(self.files),
            "resident_bytes": sum(self.files.values()),
        }
