"""Robotic tape library model.

Service time for a request is queue wait + (robot exchange + load thread if
the file's tape is not already mounted on an idle drive) + a seek that grows
linearly with the file's position on tape + size/transfer_rate.  Random
access to many small files therefore pays a mount-and-seek penalty per file,
the classic pathology of tape archives; batching requests per tape amortizes
mounts.

Timing defaults approximate a contemporary LTO-class library and are not
measurements; every knob is configurable and golden tests pin defaults only.
Rates are in decimal MB/s, so transfer time in microseconds is simply
bytes / MB_per_s.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..datagen import FileRecord
from ..sim import US_PER_SECOND, RngStream, Simulator
from .base import (
    Callback,
    DuplicateFileError,
    OpOutcome,
    StorageBackend,
    UnknownFileError,
)

PRIORITY_ORDER = ("urgent", "normal", "low")


def priority_rank(label: str) -> int:
    try:
        return PRIORITY_ORDER.index(label)
    except ValueError:
        return PRIORITY_ORDER.index("normal")


@dataclass(frozen=True)
class TapeConfig:
    drive_count: int = 4
    robot_exchange_us: int = 15 * US_PER_SECOND
    load_thread_us: int = 20 * US_PER_SECOND
    max_seek_us: int = 60 * US_PER_SECOND
    transfer_rate_mb_s: int = 250
    unload_policy: str = "lazy"  # "lazy" | "immediate"
    idle_timeout_us: Optional[int] = None  # lazy: unload after this much idle
    scheduler: str = "fifo"  # "fifo" | "priority" | "tape-batched"
    tape_capacity_bytes: int = 12 * 10**12  # LTO-8 class native capacity
    placement: str = "mission"  # "mission" | "random"
    placement_seed: int = 0

    def __post_init__(self) -> None:
        if self.drive_count < 1:
            raise ValueError("drive_count must be >= 1")
        for name in ("robot_exchange_us", "load_thread_us", "max_seek_us"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.transfer_rate_mb_s <= 0:
            raise ValueError("transfer_rate_mb_s must be > 0")
        if self.unload_policy not in ("lazy", "immediate"):
            raise ValueError(f"unknown unload_policy {self.unload_policy!r}")
        if self.scheduler not in ("fifo", "priority", "tape-batched"):
            raise ValueError(f"unknown scheduler {self.scheduler!r}")
        if self.tape_capacity_bytes < 1:
            raise ValueError("tape_capacity_bytes must be >= 1")
        if self.placement not in ("mission", "random"):
            raise ValueError(f"unknown placement {self.placement!r}")

    @property
    def mount_us(self) -> int:
        return self.robot_exchange_us + self.load_thread_us


@dataclass
class _TapeFile:
    tape: int
    offset: int
    size: int


@dataclass
class _Drive:
    tape: Optional[int] = None
    busy: bool = False
    unload_event: object = None  # pending lazy-unload handle


@dataclass
class _Job:
    seq: int
    enqueued_at: int
    op: str  # "get" | "put"
    file_id: str
    tape: int
    priority: str
    on_done: Callback
    size: int


class TapeLibrary(StorageBackend):
    name = "tape"

    def __init__(self, sim: Simulator, config: TapeConfig = TapeConfig()) -> None:
        super().__init__(sim)
        self.config = config
        self.files: dict[str, _TapeFile] = {}
        self.drives = [_Drive() for _ in range(config.drive_count)]
        self.queue: list[_Job] = []
        self._seq = 0
        self.mounts = 0
        self._tape_fill: dict[int, int] = {}  # tape -> used bytes
        self._mission_tape: dict[int, int] = {}  # mission -> open tape
        self._next_tape = 0

    # --- placement ----------------------------------------------------------

    def _new_tape(self) -> int:
        t = self._next_tape
        self._next_tape += 1
        self._tape_fill[t] = 0
        return t

    def _place(self, file_id: str, size: int, mission: int) -> _TapeFile:
        if file_id in self.files:
            raise DuplicateFileError(f"tape: {file_id} already stored")
        tape = self._mission_tape.get(mission)
        if tape is None or self._tape_fill[tape] + size > self.config.tape_capacity_bytes:
            tape = self._new_tape()
            self._mission_tape[mission] = tape
        placed = _TapeFile(tape=tape, offset=self._tape_fill[tape], size=size)
        self._tape_fill[tape] += size
        self.files[file_id] = placed
        return placed

    def _preload(self, records: list[FileRecord]) -> None:
        if self.config.placement == "random":
            order = list(records)
            RngStream(self.config.placement_seed, "tape-placement").shuffle(order)
            # Scatter: ignore missions entirely, fill tapes in shuffled order.
            for r in order:
                self._place(r.file_id, r.size_bytes, mission=-1)
        else:
            # Mission-contiguous: each mission fills its own tape chain, so
            # same-mission batches land on few tapes.
            for r in records:
                self._place(r.file_id, r.size_bytes, mission=r.mission)

    def drop(self, file_id: str) -> None:
        """Remove a file (media-loss injection); space is not reclaimed."""
        if file_id not in self.files:
            raise UnknownFileError(f"tape: unknown file {file_id}")
        del self.files[file_id]

    def contains(self, file_id: str) -> bool:
        return file_id in self.files

    def size_of(self, file_id: str) -> int:
        try:
            return self.files[file_id].size
        except KeyError:
            raise UnknownFileError(f"tape: unknown file {file_id}") from None

    # --- service-time model ---------------------------------------------------

    def _seek_us(self, placed: _TapeFile) -> int:
        # Deterministic by file position: fraction of a full-stroke seek.
        fraction = placed.offset / self.config.tape_capacity_bytes
        return int(self.config.max_seek_us * fraction)

    def _transfer_us(self, size: int) -> int:
        return int(round(size / self.config.transfer_rate_mb_s))

    def service_time_us(self, placed: _TapeFile, needs_mount: bool) -> int:
        mount = self.config.mount_us if needs_mount else 0
        return mount + self._seek_us(placed) + self._transfer_us(placed.size)

    # --- request path ---------------------------------------------------------

    def get(self, file_id: str, on_done: Callback, priority: str = "normal") -> None:
        placed = self.files.get(file_id)
        if placed is None:
            self._finish(OpOutcome(
                op="get", file_ids=(file_id,), issued_at=self.sim.now,
                completed_at=self.sim.now, bytes_moved=0,
                error=f"unknown file {file_id}",
            ), on_done)
            return
        self._enqueue("get", file_id, placed, priority, on_done)

    def put(self, file_id: str, size_bytes: int, on_done: Callback,
            priority: str = "normal") -> None:
        if file_id in self.files:
            self._finish(OpOutcome(
                op="put", file_ids=(file_id,), issued_at=self.sim.now,
                completed_at=self.sim.now, bytes_moved=0,
                error=f"duplicate file {file_id}",
            ), on_done)
            return
        # Appends go to the tail of the ingest tape: full-stroke position.
        placed = self._place(file_id, size_bytes, mission=-2)
        self._enqueue("put", file_id, placed, priority, on_done)

    def _enqueue(self, op: str, file_id: str, placed: _TapeFile, priority: str,
                 on_done: Callback) -> None:
        self._seq += 1
        self.queue.append(_Job(
            seq=self._seq, enqueued_at=self.sim.now, op=op, file_id=file_id,
            tape=placed.tape, priority=priority, on_done=on_done, size=placed.size,
        ))
        self._dispatch()

    # --- scheduling -------------------------------------------------------------

    def _pick_job(self, candidates: list[_Job], idle_tapes: set[int]) -> _Job:
        sched = self.config.scheduler
        if sched == "priority":
            return min(candidates, key=lambda j: (priority_rank(j.priority), j.seq))
        if sched == "tape-batched":
            # Serve tapes already mounted on an idle drive first; this keeps
            # a mounted tape busy until its queued requests drain, so a
            # same-tape batch never mounts more often than FIFO would.
            hot = [j for j in candidates if j.tape in idle_tapes]
            if hot:
                return min(hot, key=lambda j: j.seq)
            return min(candidates, key=lambda j: j.seq)
        return min(candidates, key=lambda j: j.seq)

    def _pick_drive(self, tape: int) -> tuple[_Drive, bool]:
        idle = [d for d in self.drives if not d.busy]
        for d in idle:
            if d.tape == tape:
                return d, False
        for d in idle:
            if d.tape is None:
                return d, True
        # Evict the first idle tape (stable, deterministic pick).
        return idle[0], True

    def _dispatch(self) -> None:
        while self.queue and any(not d.busy for d in self.drives):
            idle_tapes = {d.tape for d in self.drives if not d.busy and d.tape is not None}
            # A cartridge exists once: a job whose tape is inside a busy
            # drive must wait for that drive.
            busy_tapes = {d.tape for d in self.drives if d.busy and d.tape is not None}
            candidates = [j for j in self.queue if j.tape not in busy_tapes]
            if not candidates:
                break
            job = self._pick_job(candidates, idle_tapes)
            self.queue.remove(job)
            drive, needs_mount = self._pick_drive(job.tape)
            if drive.unload_event is not None:
                drive.unload_event.cancel()
                drive.unload_event = None
            if needs_mount:
                self.mounts += 1
                drive.tape = job.tape
            drive.busy = True
            placed = self.files.get(job.file_id)
            if placed is None:  # dropped while queued
                drive.busy = False
                self._finish(OpOutcome(
                    op=job.op, file_ids=(job.file_id,), issued_at=job.enqueued_at,
                    completed_at=self.sim.now, bytes_moved=0,
                    error=f"unknown file {job.file_id}",
                ), job.on_done)
                continue
            service = self.service_time_us(placed, needs_mount)
            done_at = self.sim.now + service
            self.sim.schedule_at(done_at, lambda j=job, d=drive: self._complete(j, d))

    def _complete(self, job: _Job, drive: _Drive) -> None:
        drive.busy = False
        if self.config.unload_policy == "immediate":
            # Robot puts the tape away right after the operation.
            drive.tape = None
        elif self.config.idle_timeout_us is not None:
            drive.unload_event = self.sim.schedule_after(
                self.config.idle_timeout_us, lambda d=drive: self._lazy_unload(d)
            )
        self._finish(OpOutcome(
            op=job.op, file_ids=(job.file_id,), issued_at=job.enqueued_at,
            completed_at=self.sim.now, bytes_moved=job.size,
            info={"tape": job.tape},
        ), job.on_done)
        self._dispatch()

    def _lazy_unload(self, drive: _Drive) -> None:
        if not drive.busy:
            drive.tape = None
        drive.unload_event = None

    # --- maintenance ---------------------------------------------------------

    def full_scan_time_us(self) -> int:
        """Sequential pass over every resident byte (scrubbing support):
        one mount per tape plus streaming at the transfer rate."""
        tapes = {f.tape for f in self.files.values()}
        total_bytes = sum(f.size for f in self.files.values())
        return len(tapes) * self.config.mount_us + self._transfer_us(total_bytes)

    def mounted_count(self) -> int:
        return sum(1 for d in self.drives if d.tape is not None)

    def stats(self) -> dict:
        return {
            "mounts": self.mounts,
            "tapes": len(self._tape_fill),
            "drives": self.config.drive_count,
            "resident_files": len(self.files),
            "resident_bytes": sum(f.size for f in self.files.values()),
        }
