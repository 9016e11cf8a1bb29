"""HDD cache tier in front of a backing store.

Hits are served at disk latency; misses forward to the backing store and
admit the file on return (LRU or FIFO eviction).  The tier doubles as a
burst buffer: PUTs are acknowledged at disk latency and destaged to the
backing store asynchronously, which is how real archives absorb ingest
bursts ahead of slow tape mounts.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

from ..datagen import FileRecord
from ..sim import US_PER_MS, Simulator
from .base import Callback, OpOutcome, StorageBackend


@dataclass(frozen=True)
class CacheConfig:
    capacity_bytes: int
    policy: str = "lru"  # "lru" | "fifo"
    disk_latency_us: int = 10 * US_PER_MS
    disk_rate_mb_s: int = 150
    # Files larger than the cache bypass admission instead of erroring.
    admit_bypass: bool = True

    def __post_init__(self) -> None:
        if self.capacity_bytes < 0:
            raise ValueError("capacity_bytes must be >= 0")
        if self.policy not in ("lru", "fifo"):
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.disk_latency_us < 0 or self.disk_rate_mb_s <= 0:
            raise ValueError("disk latency/rate must be positive")


class CacheTier(StorageBackend):
    name = "cache"

    def __init__(self, sim: Simulator, config: CacheConfig, backing: StorageBackend) -> None:
        super().__init__(sim)
        self.config = config
        self.backing = backing
        self.resident: "OrderedDict[str, int]" = OrderedDict()  # id -> bytes, MRU last
        self.resident_bytes = 0
        self.hits = 0
        self.misses = 0
        self.evictions = 0
        self.destages = 0

    def _disk_time_us(self, size: int) -> int:
        return self.config.disk_latency_us + int(round(size / self.config.disk_rate_mb_s))

    # --- residency bookkeeping -------------------------------------------------

    def _touch(self, file_id: str) -> None:
        if self.config.policy == "lru":
            self.resident.move_to_end(file_id)

    def _admit(self, file_id: str, size: int) -> None:
        if size > self.config.capacity_bytes:
            return  # oversized files pass through uncached
        if file_id in self.resident:
            self._touch(file_id)
            return
        while self.resident_bytes + size > self.config.capacity_bytes:
            victim, victim_size = self.resident.popitem(last=False)
            self.resident_bytes -= victim_size
            self.evictions += 1
        self.resident[file_id] = size
        self.resident_bytes += size

    def evict(self, file_id: str) -> None:
        size = self.resident.pop(file_id, None)
        if size is not None:
            self.resident_bytes -= size

    # --- API --------------------------------------------------------------------

    def contains(self, file_id: str) -> bool:
        return file_id in self.resident or self.backing.contains(file_id)

    def size_of(self, file_id: str) -> int:
        if file_id in self.resident:
            return self.resident[file_id]
        return self.backing.size_of(file_id)

    def get(self, file_id: str, on_done: Callback, priority: str = "normal") -> None:
        issued_at = self.sim.now
        if file_id in self.resident:
            self.hits += 1
            self._touch(file_id)
            size = self.resident[file_id]
            done_at = self.sim.now + self._disk_time_us(size)

            def hit() -> None:
                self._finish(OpOutcome(
                    op="get", file_ids=(file_id,), issued_at=issued_at,
                    completed_at=self.sim.now, bytes_moved=size,
                    info={"cache": "hit"},
                ), on_done)

            self.sim.schedule_at(done_at, hit)
            return

        self.misses += 1

        def miss_done(outcome: OpOutcome) -> None:
            if outcome.ok:
                self._admit(file_id, outcome.bytes_moved)
            self._finish(OpOutcome(
                op="get", file_ids=(file_id,), issued_at=issued_at,
                completed_at=outcome.completed_at, bytes_moved=outcome.bytes_moved,
                cost_delta_cents=outcome.cost_delta_cents, error=outcome.error,
                info={"cache": "miss"},
            ), on_done)

        self.backing.get(file_id, miss_done, priority)

    def put(self, file_id: str, size_bytes: int, on_done: Callback,
            priority: str = "normal") -> None:
        """Burst-buffer write: acknowledge at disk latency, destage async.

        Writes larger than the buffer are rejected unless admit_bypass lets
        them stream straight to the backing store.
        """
        issued_at = self.sim.now
        if size_bytes > self.config.capacity_bytes and not self.config.admit_bypass:
            self._finish(OpOutcome(
                op="put", file_ids=(file_id,), issued_at=issued_at,
                completed_at=issued_at, bytes_moved=0,
                error=f"{file_id} ({size_bytes} B) exceeds buffer capacity",
            ), on_done)
            return
        ack_at = self.sim.now + self._disk_time_us(size_bytes)

        def ack() -> None:
            self._admit(file_id, size_bytes)
            self._finish(OpOutcome(
                op="put", file_ids=(file_id,), issued_at=issued_at,
                completed_at=self.sim.now, bytes_moved=size_bytes,
                info={"cache": "buffered"},
            ), on_done)
            # Destage runs behind the acknowledgement; its completion only
            # matters to the backing store's state and ledger.
            self.backing.put(file_id, size_bytes, self._destaged, priority)

        self.sim.schedule_at(ack_at, ack)

    def _destaged(self, outcome: OpOutcome) -> None:
        self.destages += 1

    def _preload(self, records: list[FileRecord]) -> None:
        # The static set starts on the backing store; the cache warms on use.
        self.backing.preload(records)

    def ledger_report(self, now_us: int):
        return self.backing.ledger_report(now_us)

    @property
    def hit_rate(self) -> float:
        total = self.hits + self.misses
        return self.hits / total if total else 0.0

    def stats(self) -> dict:
        out = {
            "cache_hits": self.hits,
            "cache_misses": self.misses,
            "cache_hit_rate": self.hit_rate,
            "cache_evictions": self.evictions,
            "cache_resident_bytes": self.resident_bytes,
            "cache_destages": self.destages,
        }
        for key, value in self.backing.stats().items():
            out[key] = value
        return out
