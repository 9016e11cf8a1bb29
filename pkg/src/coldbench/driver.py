"""Benchmark driver: a pool of concurrent sessions replaying request
streams against a storage backend under the virtual clock.

Sessions are interleaved event chains, not threads, so a run is fully
deterministic: closed-loop sessions issue the next request when the previous
one completes (plus think time), open-loop sessions issue at their generated
offsets regardless of completions.  Backend errors become failed
measurements, never crashes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .backends.base import OpOutcome, PreloadError, StorageBackend
from .datagen import DatasetManifest
from .sim import Simulator
from .workload import Request, WorkloadSpec, generate_workload

MEASUREMENTS_FORMAT = "coldbench-measurements/1"


@dataclass(frozen=True)
class SessionConfig:
    workload: WorkloadSpec
    session_count: int = 1
    warmup_requests: int = 0  # per session, excluded from metrics

    def __post_init__(self) -> None:
        if self.session_count < 1:
            raise ValueError("session_count must be >= 1")
        if self.warmup_requests < 0:
            raise ValueError("warmup_requests must be >= 0")


@dataclass
class Measurement:
    request_id: int
    session: int
    op: str
    priority: str
    issue_time_us: int
    completion_time_us: int
    bytes_moved: int
    cost_delta_cents: Fraction = Fraction(0)
    error: Optional[str] = None
    file_ids: tuple[str, ...] = ()

    @property
    def file_count(self) -> int:
        return len(self.file_ids)

    @property
    def latency_us(self) -> int:
        return self.completion_time_us - self.issue_time_us

    @property
    def ok(self) -> bool:
        return self.error is None


def preload(backend: StorageBackend, manifest: DatasetManifest) -> None:
    """Populate the static set; free of time and retrieval charge.

    Storage-cost accrual starts at the current clock.  A second preload of
    the same backend is a programming error.
    """
    if backend.preloaded:
        raise PreloadError("backend already preloaded")
    backend.preload(manifest.static_records)


class _Session:
    def __init__(self, index: int, stream: Sequence[Request], driver: "_Run") -> None:
        self.index = index
        self.stream = stream
        self.driver = driver
        self.next_i = 0
        self.done = False

    def start(self) -> None:
        spec = self.driver.sessions.workload
        if spec.arrival.kind == "open":
            for req in self.stream:
                self.driver.sim.schedule_at(
                    req.issue_offset, lambda r=req: self.driver.issue(self, r)
                )
            self.done = True  # all issues scheduled; completions tracked globally
        else:
            self._issue_next()

    def _issue_next(self) -> None:
        if self.next_i >= len(self.stream):
            self.done = True
            return
        req = self.stream[self.next_i]
        self.next_i += 1
        self.driver.issue(self, req, chained=True)

    def on_complete(self) -> None:
        think = self.driver.sessions.workload.arrival.think_time_us
        if think:
            self.driver.sim.schedule_after(think, self._issue_next)
        else:
            self._issue_next()


def _session_views(manifest: DatasetManifest, session_count: int) -> list[DatasetManifest]:
    """Per-session manifest views with the dynamic set partitioned.

    Every session reads the whole static set, but each dynamic file belongs
    to exactly one session, so a file is never PUT twice.
    """
    dynamics = manifest.dynamic_records
    if session_count == 1 or not dynamics:
        return [manifest] * session_count
    statics = manifest.static_records
    return [
        DatasetManifest(
            spec=manifest.spec,
            records=statics + dynamics[k::session_count],
            summary=manifest.summary,
        )
        for k in range(session_count)
    ]


class _Run:
    def __init__(self, backend: StorageBackend, manifest: DatasetManifest,
                 sessions: SessionConfig, sim: Simulator) -> None:
        self.backend = backend
        self.manifest = manifest
        self.sessions = sessions
        self.sim = sim
        self.sizes = {r.file_id: r.size_bytes for r in manifest.records}
        self.measurements: list[Measurement] = []

    def issue(self, session: _Session, req: Request, chained: bool = False) -> None:
        issue_time = self.sim.now
        measured = req.request_id >= self.sessions.warmup_requests

        def done(outcome: OpOutcome) -> None:
            if measured:
                self.measurements.append(Measurement(
                    request_id=req.request_id,
                    session=session.index,
                    op=req.op,
                    priority=req.priority,
                    issue_time_us=issue_time,
                    completion_time_us=outcome.completed_at,
                    bytes_moved=outcome.bytes_moved,
                    cost_delta_cents=outcome.cost_delta_cents,
                    error=outcome.error,
                    file_ids=req.file_ids,
                ))
            if chained:
                session.on_complete()

        if req.op == "put":
            fid = req.file_ids[0]
            self.backend.put(fid, self.sizes[fid], done, req.priority)
        elif req.is_batch:
            self.backend.batch_get(req.file_ids, done, req.priority)
        else:
            self.backend.get(req.file_ids[0], done, req.priority)


def run_benchmark(
    backend: StorageBackend,
    manifest: DatasetManifest,
    sessions: SessionConfig,
    sim: Simulator,
    *,
    horizon_us: Optional[int] = None,
) -> list[Measurement]:
    """Run every session's stream to completion; returns non-warmup
    measurements sorted by (issue time, session, request id).

    Each session replays its own deterministic stream derived from the
    shared seed, so adding sessions never perturbs existing ones.  With
    `horizon_us` the clock is parked there after the last event (useful to
    close cost accrual at an exact simulated duration).
    """
    if not backend.preloaded:
        preload(backend, manifest)
    run = _Run(backend, manifest, sessions, sim)
    views = _session_views(manifest, sessions.session_count)
    for k in range(sessions.session_count):
        stream = generate_workload(
            views[k], sessions.workload, stream_id=f"workload/s{k}"
        )
        _Session(k, stream, run).start()
    sim.run()
    if horizon_us is not None:
        sim.run_until(horizon_us)
    run.measurements.sort(key=lambda m: (m.issue_time_us, m.session, m.request_id))
    return run.measurements


def save_measurements(measurements: Sequence[Measurement], path) -> Path:
    """Measurement log as CSV, one row per request, deterministic bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "request_id", "session", "op", "priority", "issue_time_us",
            "completion_time_us", "latency_us", "bytes", "cost_cents",
            "file_ids", "error",
        ])
        for m in measurements:
            cost = (
                f"{m.cost_delta_cents.numerator / m.cost_delta_cents.denominator:.6f}"
                if m.cost_delta_cents else "0.000000"
            )
            writer.writerow([
                m.request_id, m.session, m.op, m.priority, m.issue_time_us,
                m.completion_time_us, m.latency_us, m.bytes_moved, cost,
                ";".join(m.file_ids), m.error or "",
            ])
    return path
