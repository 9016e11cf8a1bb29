"""Uniform GET/PUT surface over simulated storage systems.

Backends never block: an operation enqueues work on the simulator and the
caller's callback fires inside event dispatch when the operation completes.
All state mutation happens inside that single-threaded dispatch.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from ..costs import CostReport, TierPricing, report_from_components
from ..datagen import GIB, FileRecord
from ..sim import MONTH_US, Simulator


class StorageError(RuntimeError):
    """Base class for backend request failures."""


class UnknownFileError(StorageError):
    """GET of an id that was never put/loaded."""


class DuplicateFileError(StorageError):
    """PUT of an id that is already stored."""


class PreloadError(StorageError):
    """Preloading a backend that already holds data."""


@dataclass
class OpOutcome:
    """Completion record handed to the caller's callback."""

    op: str  # "get" | "put" | "batch_get" | "scrub"
    file_ids: tuple[str, ...]
    issued_at: int
    completed_at: int
    bytes_moved: int
    cost_delta_cents: Fraction = Fraction(0)
    error: Optional[str] = None
    info: dict = field(default_factory=dict)

    @property
    def latency_us(self) -> int:
        return self.completed_at - self.issued_at

    @property
    def ok(self) -> bool:
        return self.error is None


Callback = Callable[[OpOutcome], None]


class CostLedger:
    """Exact accrual of cloud charges under virtual time.

    Storage cost integrates stored bytes over time (billed per GB-month of
    30 days); retrieval and request charges accrue per GET.  Everything is
    kept as exact rationals so a year-long simulated run reconciles with the
    closed-form cost model to the cent.
    """

    def __init__(self, pricing: TierPricing) -> None:
        self.pricing = pricing
        self._byte_us = Fraction(0)  # integral of stored bytes over time
        self._stored_bytes = 0
        self._last_change_us = 0
        self.bytes_read = 0
        self.get_requests = 0
        self.retrieval_dollars = Fraction(0)
        self.request_dollars = Fraction(0)

    def _settle(self, now_us: int) -> None:
        if now_us < self._last_change_us:
            raise ValueError("ledger time moved backwards")
        self._byte_us += Fraction(self._stored_bytes) * (now_us - self._last_change_us)
        self._last_change_us = now_us

    def on_store(self, size_bytes: int, now_us: int) -> None:
        self._settle(now_us)
        self._stored_bytes += size_bytes

    def on_remove(self, size_bytes: int, now_us: int) -> None:
        self._settle(now_us)
        self._stored_bytes -= size_bytes

    def on_get(self, size_bytes: int) -> None:
        self.bytes_read += size_bytes
        self.get_requests += 1
        self.retrieval_dollars += self.pricing.retrieval_per_gb * Fraction(size_bytes, GIB)
        self.request_dollars += self.pricing.get_per_10k_requests / 10_000

    def get_cost_dollars(self, size_bytes: int) -> Fraction:
        return (
            self.pricing.retrieval_per_gb * Fraction(size_bytes, GIB)
            + self.pricing.get_per_10k_requests / 10_000
        )

    def storage_dollars(self, now_us: int) -> Fraction:
        integral = self._byte_us + Fraction(self._stored_bytes) * (now_us - self._last_change_us)
        gb_months = integral / (GIB * MONTH_US)
        return self.pricing.storage_per_gb_month * gb_months

    def total_dollars(self, now_us: int) -> Fraction:
        return self.storage_dollars(now_us) + self.retrieval_dollars + self.request_dollars

    def report(self, now_us: int) -> CostReport:
        return report_from_components(
            self.pricing.tier_name,
            self.storage_dollars(now_us),
            self.retrieval_dollars,
            self.request_dollars,
        )


class StorageBackend(ABC):
    """Simulated cold-storage system behind a GET/PUT API.

    Implementations complete requests by scheduling simulator events; the
    API contract is re-entrant per event and never blocks the loop.
    """

    name = "storage"

    def __init__(self, sim: Simulator) -> None:
        self.sim = sim
        self.preloaded = False
        self.trace: Optional[list[tuple]] = None  # (time_us, backend, op, file_id, latency_us, cost_cents)

    @abstractmethod
    def get(self, file_id: str, on_done: Callback, priority: str = "normal") -> None: ...

    @abstractmethod
    def put(self, file_id: str, size_bytes: int, on_done: Callback,
            priority: str = "normal") -> None: ...

    @abstractmethod
    def contains(self, file_id: str) -> bool: ...

    @abstractmethod
    def size_of(self, file_id: str) -> int: ...

    def batch_get(self, file_ids: Sequence[str], on_done: Callback,
                  priority: str = "normal") -> None:
        """Issue all GETs now; report once when the last one lands.

        Bytes and cost deltas are summed; the batch fails if any sub-get
        fails, carrying the first error.
        """
        ids = tuple(file_ids)
        if not ids:
            raise ValueError("batch_get needs at least one file id")
        state = {"pending": len(ids), "bytes": 0, "cost": Fraction(0),
                 "error": None, "last": self.sim.now}
        issued_at = self.sim.now

        def sub_done(outcome: OpOutcome) -> None:
            state["pending"] -= 1
            state["bytes"] += outcome.bytes_moved
            state["cost"] += outcome.cost_delta_cents
            state["last"] = max(state["last"], outcome.completed_at)
            if outcome.error and state["error"] is None:
                state["error"] = outcome.error
            if state["pending"] == 0:
                on_done(OpOutcome(
                    op="batch_get",
                    file_ids=ids,
                    issued_at=issued_at,
                    completed_at=state["last"],
                    bytes_moved=state["bytes"],
                    cost_delta_cents=state["cost"],
                    error=state["error"],
                ))

        for fid in ids:
            self.get(fid, sub_done, priority)

    def preload(self, records: Iterable[FileRecord]) -> None:
        """Populate the initial (static) data set, free of time and charge.

        Storage-cost accrual starts at the current clock for cloud tiers.
        """
        if self.preloaded:
            raise PreloadError(f"{self.name}: already preloaded")
        self._preload(list(records))
        self.preloaded = True

    @abstractmethod
    def _preload(self, records: list[FileRecord]) -> None: ...

    def stats(self) -> dict:
        return {}

    def ledger_report(self, now_us: int) -> Optional[CostReport]:
        """Accrued cloud cost, None for backends without cloud charges."""
        return None

    def _trace(self, outcome: OpOutcome) -> None:
        if self.trace is not None:
            fid = outcome.file_ids[0] if len(outcome.file_ids) == 1 else f"batch[{len(outcome.file_ids)}]"
            self.trace.append((
                outcome.completed_at, self.name, outcome.op, fid,
                outcome.latency_us, float(outcome.cost_delta_cents),
            ))

    def _finish(self, outcome: OpOutcome, on_done: Callback) -> None:
        self._trace(outcome)
        on_done(outcome)


def save_trace(trace: list[tuple], path) -> None:
    """Event-level trace rows as CSV."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_us", "backend", "op", "file_id", "latency_us", "cost_cents"])
        for row in trace:
            writer.writerow(row)
