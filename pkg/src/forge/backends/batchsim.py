"""Simulated batch system: FIFO queues, slot limits, wall-time limits.

Two modes share one on-disk protocol (the sandbox marker files):

* real mode executes script.sh in a bounded pool, one process per
  slot, and enforces queue wall-time limits in wall-clock seconds;
* virtual mode runs no processes at all: payload duration comes from a
  `#BS cost=<ticks>` script directive and an integer clock advanced by
  the test driver, which makes scheduling assertions deterministic.

Queue selection comes from the `#BS queue=<name>` directive written by
the script generator from the job's requirements; the first configured
queue is the default. Dequeue/termination is observed through poll as
Killed, wall-time expiry as Failed with reason "walltime".
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .. import clock, jobmodel
from ..errors import AlreadyTerminal, BackendUnavailable, UnknownTicket
from . import (
    EXIT_CODE,
    KILLED,
    WALLTIME,
    PollResult,
    ReplicaCatalogue,
    kill_group,
    mark,
    observe,
    pid_alive,
    read_started,
    spawn_payload,
    write_started,
)
from . import transfer


@dataclass
class _Entry:
    job_id: str
    ticket: str
    seq: int
    sandbox: Path
    queue: str
    cost: int


def parse_directives(script_text: str) -> dict[str, str]:
    """`#BS key=value` header lines from a generated script."""
    out = {}
    for line in script_text.splitlines():
        if not line.startswith("#BS "):
            continue
        key, sep, value = line[4:].partition("=")
        if sep:
            out[key.strip().lower()] = value.strip()
    return out


class BatchSimHandler:
    """Queue-based execution with FIFO order and per-queue slot limits."""

    id = "batchsim"
    dialect = "batchsim"

    def __init__(self, registry, config, store_root):
        self._registry = registry
        self._catalogue = ReplicaCatalogue(config.replicas)
        self._store_root = Path(store_root)
        self._queues = {q.name: q for q in config.queues}
        self._default_queue = config.queues[0].name if config.queues else ""
        self.mode = "real"
        self._tick = 0
        self._entries: dict[str, _Entry] = {}
        self._procs = {}
        self._lock = threading.RLock()

    @property
    def tick(self) -> int:
        return self._tick

    # -- lifecycle ------------------------------------------------------

    def configure_job(self, job) -> None:
        transfer.write_job_files(
            job, self._registry.job_dir(job.id), self.dialect,
            with_jdl=False, catalogue=self._catalogue, method="Sandbox",
        )

    def _next_seq(self) -> int:
        counter = self._store_root / "backends" / "batchsim.seq"
        counter.parent.mkdir(parents=True, exist_ok=True)
        current = int(counter.read_text("utf-8")) if counter.exists() else 0
        counter.write_text(str(current + 1), "utf-8")
        return current + 1

    def _entry_for(self, job) -> _Entry:
        with self._lock:
            cached = self._entries.get(job.ticket)
            if cached is not None:
                return cached
        job_dir = self._registry.job_dir(job.id)
        directives = parse_directives((job_dir / "script.sh").read_text("utf-8"))
        queue = directives.get("queue", self._default_queue)
        cost = int(directives.get("cost", "1"))
        seq = int(job.ticket.partition(":")[2])
        entry = _Entry(job.id, job.ticket, seq, job_dir / "sandbox", queue, cost)
        with self._lock:
            self._entries[job.ticket] = entry
        return entry

    def submit(self, job) -> str:
        if not self._queues:
            raise BackendUnavailable("no queues configured")
        job_dir = self._registry.job_dir(job.id)
        sandbox = transfer.stage_sandbox(job, job_dir, self._store_root)
        directives = parse_directives((job_dir / "script.sh").read_text("utf-8"))
        queue = directives.get("queue", self._default_queue)
        if queue not in self._queues:
            raise BackendUnavailable(f"no such queue: {queue}")
        seq = self._next_seq()
        ticket = f"bs:{seq}"
        entry = _Entry(job.id, ticket, seq, sandbox, queue, int(directives.get("cost", "1")))
        with self._lock:
            self._entries[ticket] = entry
        return ticket

    # -- scheduling -------------------------------------------------------

    def pump(self, jobs) -> None:
        """Real-mode scheduler step: reap, enforce wall time, start FIFO."""
        if self.mode != "real":
            return
        with self._lock:
            for proc in list(self._procs.values()):
                proc.poll()
            entries = [self._entry_for(j) for j in jobs
                       if j.backend_id == self.id and j.ticket.startswith("bs:")]
            now = clock.now()
            running = Counter()
            pending = []
            for entry in sorted(entries, key=lambda e: e.seq):
                if observe(entry.sandbox) is not None:
                    continue
                started = read_started(entry.sandbox)
                if started is not None:
                    pid, ts, limit = started
                    if limit > 0 and now - ts >= limit:
                        mark(entry.sandbox, WALLTIME)
                        kill_group(pid)
                    else:
                        running[entry.queue] += 1
                else:
                    pending.append(entry)
            for entry in pending:
                queue = self._queues.get(entry.queue)
                if queue is None or running[entry.queue] >= queue.slots:
                    continue
                proc = spawn_payload(entry.sandbox)
                write_started(entry.sandbox, proc.pid, now, queue.limit_ticks)
                self._procs[entry.ticket] = proc
                running[entry.queue] += 1

    def advance(self, ticks: int = 1) -> None:
        """Virtual-mode clock: finish/expire running work, then start FIFO."""
        with self._lock:
            for _ in range(ticks):
                self._tick += 1
                t = self._tick
                running = Counter()
                pending = []
                for entry in sorted(self._entries.values(), key=lambda e: e.seq):
                    if observe(entry.sandbox) is not None:
                        continue
                    started = read_started(entry.sandbox)
                    if started is not None:
                        _, ts, limit = started
                        if t - ts >= entry.cost:
                            (entry.sandbox / EXIT_CODE).write_text("0\n", "utf-8")
                        elif limit > 0 and t - ts >= limit:
                            mark(entry.sandbox, WALLTIME)
                        else:
                            running[entry.queue] += 1
                    else:
                        pending.append(entry)
                for entry in pending:
                    queue = self._queues.get(entry.queue)
                    if queue is None or running[entry.queue] >= queue.slots:
                        continue
                    write_started(entry.sandbox, 0, t, queue.limit_ticks)
                    running[entry.queue] += 1

    # -- observation ------------------------------------------------------

    def _sandbox(self, job) -> Path:
        return self._registry.job_dir(job.id) / "sandbox"

    def poll(self, job) -> PollResult:
        if not job.ticket.startswith("bs:"):
            raise UnknownTicket(job.ticket or "<no ticket>")
        sandbox = self._sandbox(job)
        outcome = observe(sandbox)
        if outcome is not None:
            return outcome
        started = read_started(sandbox)
        if started is None:
            return PollResult(jobmodel.SUBMITTED)
        pid, _, _ = started
        if pid == 0 or pid_alive(pid):
            return PollResult(jobmodel.RUNNING)
        outcome = observe(sandbox)
        if outcome is not None:
            return outcome
        return PollResult(jobmodel.FAILED, "lost")

    def kill(self, job) -> None:
        if not job.ticket.startswith("bs:"):
            raise UnknownTicket(job.ticket or "<no ticket>")
        sandbox = self._sandbox(job)
        if observe(sandbox) is not None:
            raise AlreadyTerminal(job.id)
        mark(sandbox, KILLED)
        started = read_started(sandbox)
        if started is not None and started[0] > 0:
            kill_group(started[0])

    def fetch_output(self, job) -> list[str]:
        job_dir = self._registry.job_dir(job.id)
        return transfer.fetch_output(
            job, job_dir, self._registry.output_dir(job), self._store_root,
        )
