"""Local executor: runs the payload as a child process on this host."""

from __future__ import annotations

import threading

from .. import clock, jobmodel
from ..errors import AlreadyTerminal, UnknownTicket
from . import (
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
from . import KILLED as KILLED_MARK
from . import transfer


class LocalHandler:
    """Immediate execution, one process per job, no queueing."""

    id = "local"
    dialect = None

    def __init__(self, registry, config, store_root):
        self._registry = registry
        self._catalogue = ReplicaCatalogue(config.replicas)
        self._store_root = store_root
        self._procs = {}
        self._lock = threading.Lock()

    def configure_job(self, job) -> None:
        transfer.write_job_files(
            job, self._registry.job_dir(job.id), self.dialect,
            with_jdl=False, catalogue=self._catalogue, method="LocalCopy",
        )

    def submit(self, job) -> str:
        job_dir = self._registry.job_dir(job.id)
        sandbox = transfer.stage_sandbox(job, job_dir, self._store_root)
        proc = spawn_payload(sandbox)
        write_started(sandbox, proc.pid, clock.now(), 0)
        with self._lock:
            self._procs[f"pid:{proc.pid}"] = proc
        return f"pid:{proc.pid}"

    def _sandbox(self, job):
        return self._registry.job_dir(job.id) / "sandbox"

    def _reap(self, ticket: str) -> None:
        with self._lock:
            proc = self._procs.get(ticket)
        if proc is not None:
            proc.poll()

    def poll(self, job) -> PollResult:
        if not job.ticket.startswith("pid:"):
            raise UnknownTicket(job.ticket or "<no ticket>")
        self._reap(job.ticket)
        sandbox = self._sandbox(job)
        outcome = observe(sandbox)
        if outcome is not None:
            return outcome
        started = read_started(sandbox)
        if started is None:
            raise UnknownTicket(job.ticket)
        pid, _, _ = started
        if pid_alive(pid):
            return PollResult(jobmodel.RUNNING)
        outcome = observe(sandbox)
        if outcome is not None:
            return outcome
        return PollResult(jobmodel.FAILED, "lost")

    def kill(self, job) -> None:
        if not job.ticket.startswith("pid:"):
            raise UnknownTicket(job.ticket or "<no ticket>")
        sandbox = self._sandbox(job)
        if observe(sandbox) is not None:
            raise AlreadyTerminal(job.id)
        mark(sandbox, KILLED_MARK)
        started = read_started(sandbox)
        if started is not None:
            kill_group(started[0])

    def fetch_output(self, job) -> list[str]:
        job_dir = self._registry.job_dir(job.id)
        return transfer.fetch_output(
            job, job_dir, self._registry.output_dir(job), self._store_root,
        )
