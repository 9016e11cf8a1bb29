"""Two-tier hybrid archive: local tape+cache copy plus cloud backup copies.

Reads are served from the local copy (cache, then tape), so a failure-free
workload accrues zero cloud retrieval cost; the cloud copies exist for
durability and are read only when a local file has been lost.  Scrubbing
walks the local copy at tape speed for free, instead of paying per-GB
retrieval to verify the cloud copy.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..costs import CostReport, report_from_components
from ..datagen import FileRecord
from ..sim import Simulator
from .base import Callback, OpOutcome, StorageBackend
from .cache import CacheConfig, CacheTier
from .cloud import CloudTier, CloudTierConfig
from .tape import TapeConfig, TapeLibrary


@dataclass(frozen=True)
class HybridConfig:
    tape: TapeConfig = field(default_factory=TapeConfig)
    cache: Optional[CacheConfig] = None
    cloud_copies: tuple[CloudTierConfig, ...] = ()
    scrub_interval_us: Optional[int] = None
    scrub_target: str = "local"  # "local" | "cloud"

    def __post_init__(self) -> None:
        if not self.cloud_copies:
            raise ValueError("hybrid needs at least one cloud copy")
        if self.scrub_target not in ("local", "cloud"):
            raise ValueError(f"unknown scrub target {self.scrub_target!r}")


class HybridArchive(StorageBackend):
    name = "hybrid"

    def __init__(self, sim: Simulator, config: HybridConfig) -> None:
        super().__init__(sim)
        self.config = config
        self.tape = TapeLibrary(sim, config.tape)
        self.local: StorageBackend = (
            CacheTier(sim, config.cache, self.tape) if config.cache else self.tape
        )
        self.clouds = [CloudTier(sim, c) for c in config.cloud_copies]
        self.lost_local: set[str] = set()
        self.fallback_reads = 0
        self.scrub_runs = 0

    # --- placement and loss -----------------------------------------------------

    def _preload(self, records: list[FileRecord]) -> None:
        self.local.preload(records)
        for cloud in self.clouds:
            cloud.preload(records)

    def inject_local_loss(self, file_id: str) -> None:
        """Simulate local media loss; later reads fall back to the cloud."""
        if not self.tape.contains(file_id):
            raise KeyError(f"{file_id} is not stored locally")
        self.lost_local.add(file_id)
        self.tape.drop(file_id)
        if isinstance(self.local, CacheTier):
            self.local.evict(file_id)

    def contains(self, file_id: str) -> bool:
        return self.local.contains(file_id) or any(c.contains(file_id) for c in self.clouds)

    def size_of(self, file_id: str) -> int:
        if self.tape.contains(file_id):
            return self.tape.size_of(file_id)
        return self.clouds[0].size_of(file_id)

    # --- API ----------------------------------------------------------------------

    def get(self, file_id: str, on_done: Callback, priority: str = "normal") -> None:
        if file_id in self.lost_local or not self.local.contains(file_id):
            # Fallback replica: first configured cloud copy.
            self.fallback_reads += 1
            self.clouds[0].get(file_id, on_done, priority)
            return
        self.local.get(file_id, on_done, priority)

    def put(self, file_id: str, size_bytes: int, on_done: Callback,
            priority: str = "normal") -> None:
        issued_at = self.sim.now

        def local_done(outcome: OpOutcome) -> None:
            if outcome.ok:
                # Cloud copies upload behind the local acknowledgement.
                for cloud in self.clouds:
                    cloud.put(file_id, size_bytes, _ignore, priority)
            self._finish(OpOutcome(
                op="put", file_ids=(file_id,), issued_at=issued_at,
                completed_at=outcome.completed_at, bytes_moved=outcome.bytes_moved,
                cost_delta_cents=outcome.cost_delta_cents, error=outcome.error,
                info=outcome.info,
            ), on_done)

        self.local.put(file_id, size_bytes, local_done, priority)

    # --- scrubbing ------------------------------------------------------------------

    def scrub(self, on_done: Callback, target: Optional[str] = None) -> None:
        """Full integrity pass over one copy of the archive.

        Local scrubs stream every tape at media speed and cost nothing;
        scrubbing the cloud copy instead pays retrieval for every byte.
        """
        target = target or self.config.scrub_target
        issued_at = self.sim.now
        self.scrub_runs += 1
        if target == "local":
            duration = self.tape.full_scan_time_us()
            total_bytes = sum(f.size for f in self.tape.files.values())

            def local_done() -> None:
                self._finish(OpOutcome(
                    op="scrub", file_ids=(), issued_at=issued_at,
                    completed_at=self.sim.now, bytes_moved=total_bytes,
                    cost_delta_cents=Fraction(0), info={"target": "local"},
                ), on_done)

            self.sim.schedule_after(duration, local_done)
            return

        cloud = self.clouds[0]
        ids = tuple(sorted(cloud.files))
        if not ids:
            raise ValueError("cloud copy is empty; nothing to scrub")
        cloud.batch_get(
            ids,
            lambda outcome: self._finish(OpOutcome(
                op="scrub", file_ids=(), issued_at=issued_at,
                completed_at=outcome.completed_at, bytes_moved=outcome.bytes_moved,
                cost_delta_cents=outcome.cost_delta_cents, error=outcome.error,
                info={"target": "cloud"},
            ), on_done),
        )

    def start_scrub_cycle(self) -> None:
        """Schedule recurring scrubs every scrub_interval_us."""
        if self.config.scrub_interval_us is None:
            return

        def fire() -> None:
            self.scrub(_ignore)
            self.sim.schedule_after(self.config.scrub_interval_us, fire)

        self.sim.schedule_after(self.config.scrub_interval_us, fire)

    # --- reporting -------------------------------------------------------------------

    def cloud_retrieval_dollars(self) -> Fraction:
        return sum((c.ledger.retrieval_dollars for c in self.clouds), Fraction(0))

    def ledger_report(self, now_us: int) -> CostReport:
        storage = sum((c.ledger.storage_dollars(now_us) for c in self.clouds), Fraction(0))
        retrieval = self.cloud_retrieval_dollars()
        requests = sum((c.ledger.request_dollars for c in self.clouds), Fraction(0))
        return report_from_components("hybrid-cloud", storage, retrieval, requests)

    def stats(self) -> dict:
        out = {"fallback_reads": self.fallback_reads, "scrub_runs": self.scrub_runs}
        out.update(self.local.stats())
        for i, cloud in enumerate(self.clouds):
            for key, value in cloud.stats().items():
                out[f"copy{i}_{key}"] = value
        return out


def _ignore(outcome: OpOutcome) -> None:
    pass
