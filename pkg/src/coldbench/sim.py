"""Deterministic discrete-event core: clocks, event queue, seeded RNG streams.

All simulated time is integer microseconds since simulation start. Backends
and the driver never read wall time; they schedule events on a Simulator and
react inside event dispatch, so a full run is a pure function of its seeds.
"""
from __future__ import annotations

import hashlib
import heapq
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

US_PER_MS = 1_000
US_PER_SECOND = 1_000_000
US_PER_MINUTE = 60 * US_PER_SECOND
US_PER_HOUR = 3_600 * US_PER_SECOND
# Billing month for storage-cost accrual: 30 days of virtual time.
MONTH_US = 30 * 86_400 * US_PER_SECOND


class SimTimeError(ValueError):
    """Raised when an event is scheduled before the current clock value."""


class VirtualClock:
    """Monotonic microsecond clock advanced only by event dispatch."""

    __slots__ = ("_now",)

    def __init__(self) -> None:
        self._now = 0

    @property
    def now(self) -> int:
        return self._now

    def _advance_to(self, t: int) -> None:
        if t < self._now:
            raise SimTimeError(f"clock cannot move backwards ({t} < {self._now})")
        self._now = t


class WallClock:
    """Wall-time counterpart for future real-backend adapters.

    Exposes the same `now` surface (microseconds since construction) so the
    driver stays clock-agnostic; determinism is waived in this mode.
    """

    __slots__ = ("_t0",)

    def __init__(self) -> None:
        self._t0 = time.monotonic_ns()

    @property
    def now(self) -> int:
        return (time.monotonic_ns() - self._t0) // 1_000


@dataclass(order=True)
class SimEvent:
    """A pending action.  Ties on fire_at dispatch in ascending seq order."""

    fire_at: int
    seq: int
    action: Callable[[], None] = field(compare=False)
    cancelled: bool = field(default=False, compare=False)

    def cancel(self) -> None:
        self.cancelled = True


class Simulator:
    """Single-threaded event loop over a VirtualClock.

    Not thread-safe; all simulated concurrency is interleaved events.
    """

    def __init__(self) -> None:
        self.clock = VirtualClock()
        self._queue: list[SimEvent] = []
        self._seq = 0

    @property
    def now(self) -> int:
        return self.clock.now

    def schedule_at(self, fire_at: int, action: Callable[[], None]) -> SimEvent:
        """Queue `action` for time `fire_at`; returns a cancellable handle."""
        if fire_at < self.now:
            raise SimTimeError(
                f"cannot schedule at t={fire_at} before now={self.now}"
            )
        self._seq += 1
        event = SimEvent(fire_at=fire_at, seq=self._seq, action=action)
        heapq.heappush(self._queue, event)
        return event

    def schedule_after(self, delay: int, action: Callable[[], None]) -> SimEvent:
        if delay < 0:
            raise SimTimeError(f"negative delay {delay}")
        return self.schedule_at(self.now + delay, action)

    def pending(self) -> int:
        return sum(1 for e in self._queue if not e.cancelled)

    def next_fire_at(self) -> Optional[int]:
        while self._queue and self._queue[0].cancelled:
            heapq.heappop(self._queue)
        return self._queue[0].fire_at if self._queue else None

    def step(self) -> bool:
        """Dispatch the single next event; False if the queue is empty."""
        while self._queue:
            event = heapq.heappop(self._queue)
            if event.cancelled:
                continue
            self.clock._advance_to(event.fire_at)
            event.action()
            return True
        return False

    def run_until(self, t_end: int) -> int:
        """Dispatch every event with fire_at <= t_end, then park the clock
        at t_end.  Returns the number of dispatched events."""
        if t_end < self.now:
            raise SimTimeError(f"t_end={t_end} is before now={self.now}")
        count = 0
        while True:
            nxt = self.next_fire_at()
            if nxt is None or nxt > t_end:
                break
            if self.step():
                count += 1
        self.clock._advance_to(t_end)
        return count

    def run(self) -> int:
        """Drain the queue completely (including follow-up events)."""
        count = 0
        while self.step():
            count += 1
        return count


def derive_seed(seed: int, stream_id: str) -> int:
    """Platform-stable 128-bit seed for a named sub-stream."""
    digest = hashlib.sha256(f"{seed}/{stream_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "big")


class RngStream(random.Random):
    """Seeded random stream named by (seed, stream_id).

    One named sub-stream per module keeps draw sequences independent:
    changing how many values one module consumes cannot perturb another.
    Mersenne Twister draws are identical across platforms and runs.
    """

    def __new__(cls, seed: int, stream_id: str) -> "RngStream":
        # The C-level Random.__new__ would choke on our two-arg signature.
        return super().__new__(cls)

    def __init__(self, seed: int, stream_id: str) -> None:
        self.base_seed = seed
        self.stream_id = stream_id
        super().__init__(derive_seed(seed, stream_id))

    def substream(self, label: str) -> "RngStream":
        return RngStream(self.base_seed, f"{self.stream_id}/{label}")

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.base_seed}, stream_id={self.stream_id!r})"
