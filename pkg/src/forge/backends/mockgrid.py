"""Mock grid: matchmaking against computing elements, sandbox staging.

The handler deliberately consumes the generated jdl.txt rather than the
Job value, so description generation is exercised end-to-end: submit
parses the JDL, matches its requirements against the configured
computing elements, stages the InputSandbox into a scratch directory
standing in for the remote site, and runs the payload there. When the
payload reaches a terminal state, the OutputSandbox is staged back into
the job's sandbox, where the ordinary fetch path picks it up.

Matching rules: a `>=` clause on attribute Min<X> tests the element's
<X> capacity; other `>=` clauses test the same-named attribute; `==`
clauses test equality. A computing element is eligible iff every clause
holds. Among eligible elements the one with the most free slots wins,
ties broken by name.
"""

from __future__ import annotations

import stat
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .. import jobmodel, scriptgen
from ..errors import AlreadyTerminal, BackendUnavailable, MatchFailure, UnknownTicket
from . import (
    KILLED,
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

_STAGED = ".staged"


@dataclass
class _Entry:
    job_id: str
    ticket: str
    seq: int
    scratch: Path
    sandbox: Path
    ce: str
    output_sandbox: tuple[str, ...] = ()
    input_sandbox: tuple[str, ...] = ()
    app_name: str = ""


def clause_holds(ce, attr: str, op: str, value) -> bool:
    if op == ">=":
        target = attr
        if attr.startswith("Min") and attr[3:] in ce.attributes:
            target = attr[3:]
        actual = ce.attributes.get(target)
        if not isinstance(actual, (int, float)) or isinstance(actual, bool):
            return False
        return actual >= value
    return ce.attributes.get(attr) == value


def match_ce(ces, requirements, free_slots) -> object:
    """The eligible element with the most free slots, name-tiebroken."""
    eligible = []
    reasons = []
    for ce in ces:
        failed = [f"{attr} {op} {value!r}" for attr, op, value in requirements
                  if not clause_holds(ce, attr, op, value)]
        if failed:
            reasons.append(f"{ce.name}: fails {', '.join(failed)}")
        else:
            eligible.append(ce)
    if not eligible:
        listing = "; ".join(reasons) if reasons else "no computing elements"
        raise MatchFailure(f"no match: {listing}")
    return min(eligible, key=lambda ce: (-(max(free_slots(ce.name), 0)), ce.name))


class MockGridHandler:
    """Grid-style execution driven entirely by the job description file."""

    id = "mockgrid"
    dialect = "jdl"

    def __init__(self, registry, config, store_root):
        self._registry = registry
        self._config = config
        self._catalogue = ReplicaCatalogue(config.replicas)
        self._store_root = Path(store_root)
        self._entries: dict[str, _Entry] = {}
        self._procs = {}
        self._lock = threading.RLock()

    def configure_job(self, job) -> None:
        transfer.write_job_files(
            job, self._registry.job_dir(job.id), self.dialect,
            with_jdl=True, catalogue=self._catalogue, method="Sandbox",
        )

    # -- submission -------------------------------------------------------

    def _next_seq(self) -> int:
        counter = self._store_root / "backends" / "mockgrid.seq"
        counter.parent.mkdir(parents=True, exist_ok=True)
        current = int(counter.read_text("utf-8")) if counter.exists() else 0
        counter.write_text(str(current + 1), "utf-8")
        return current + 1

    def _free_slots(self, ce_name: str) -> int:
        ce = next((c for c in self._config.ces if c.name == ce_name), None)
        if ce is None:
            return 0
        busy = 0
        for entry in self._entries.values():
            if entry.ce != ce_name or observe(entry.scratch) is not None:
                continue
            if read_started(entry.scratch) is not None:
                busy += 1
        return ce.slots - busy

    def submit(self, job) -> str:
        if not self._config.ces:
            raise BackendUnavailable("no computing elements configured")
        job_dir = self._registry.job_dir(job.id)
        sandbox = transfer.stage_sandbox(job, job_dir, self._store_root)
        jdl = scriptgen.parse_jdl((job_dir / "jdl.txt").read_text("utf-8"))
        with self._lock:
            ce = match_ce(self._config.ces, jdl.requirements, self._free_slots)
            seq = self._next_seq()
            ticket = f"mg:{seq}"
            scratch = self._store_root / "grid" / str(seq)
            self._stage_in(scratch, sandbox, jdl, job.application.name)
            (scratch / ".ce").write_text(ce.name + "\n", "utf-8")
            self._entries[ticket] = _Entry(
                job.id, ticket, seq, scratch, sandbox, ce.name,
                jdl.output_sandbox, jdl.input_sandbox, job.application.name,
            )
        return ticket

    @staticmethod
    def _stage_in(scratch: Path, sandbox: Path, jdl, app_name: str) -> None:
        (scratch / "input").mkdir(parents=True, exist_ok=True)
        (scratch / "output").mkdir(parents=True, exist_ok=True)
        for name in jdl.input_sandbox:
            if name == "script.sh":
                transfer.local_copy(sandbox / "script.sh", scratch / "script.sh")
            else:
                transfer.local_copy(sandbox / "input" / name, scratch / "input" / name)
        image = sandbox / app_name
        if app_name and image.is_file():
            target = scratch / app_name
            transfer.local_copy(image, target)
            target.chmod(target.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)

    # -- scheduling ---------------------------------------------------------

    def pump(self, jobs) -> None:
        """Start pending payloads wherever their element has a free slot."""
        with self._lock:
            for proc in list(self._procs.values()):
                proc.poll()
            slots = {ce.name: ce.slots for ce in self._config.ces}
            running = Counter()
            pending = []
            for entry in sorted(self._entries.values(), key=lambda e: e.seq):
                if observe(entry.scratch) is not None:
                    continue
                if read_started(entry.scratch) is not None:
                    running[entry.ce] += 1
                else:
                    pending.append(entry)
            for entry in pending:
                if running[entry.ce] >= slots.get(entry.ce, 0):
                    continue
                proc = spawn_payload(entry.scratch)
                write_started(entry.scratch, proc.pid, 0, 0)
                self._procs[entry.ticket] = proc
                running[entry.ce] += 1

    # -- observation ----------------------------------------------------------

    def _entry_for(self, job) -> _Entry:
        with self._lock:
            cached = self._entries.get(job.ticket)
            if cached is not None:
                return cached
        seq_raw = job.ticket.partition(":")[2]
        scratch = self._store_root / "grid" / seq_raw
        if not scratch.is_dir():
            raise UnknownTicket(job.ticket)
        job_dir = self._registry.job_dir(job.id)
        jdl = scriptgen.parse_jdl((job_dir / "jdl.txt").read_text("utf-8"))
        ce = (scratch / ".ce").read_text("utf-8").strip() if (scratch / ".ce").exists() else ""
        entry = _Entry(job.id, job.ticket, int(seq_raw), scratch, job_dir / "sandbox",
                       ce, jdl.output_sandbox, jdl.input_sandbox, job.application.name)
        with self._lock:
            self._entries[job.ticket] = entry
        return entry

    def _stage_back(self, entry: _Entry) -> None:
        if (entry.scratch / _STAGED).exists():
            return
        (entry.sandbox / "output").mkdir(parents=True, exist_ok=True)
        for name in entry.output_sandbox:
            src = entry.scratch / "output" / name
            if src.is_file():
                transfer.local_copy(src, entry.sandbox / "output" / name)
        mark(entry.scratch, _STAGED)

    def poll(self, job) -> PollResult:
        if not job.ticket.startswith("mg:"):
            raise UnknownTicket(job.ticket or "<no ticket>")
        entry = self._entry_for(job)
        outcome = observe(entry.scratch)
        if outcome is not None:
            self._stage_back(entry)
            return outcome
        started = read_started(entry.scratch)
        if started is None:
            return PollResult(jobmodel.SUBMITTED)
        if pid_alive(started[0]):
            return PollResult(jobmodel.RUNNING)
        outcome = observe(entry.scratch)
        if outcome is not None:
            self._stage_back(entry)
            return outcome
        return PollResult(jobmodel.FAILED, "lost")

    def kill(self, job) -> None:
        if not job.ticket.startswith("mg:"):
            raise UnknownTicket(job.ticket or "<no ticket>")
        entry = self._entry_for(job)
        if observe(entry.scratch) is not None:
            raise AlreadyTerminal(job.id)
        mark(entry.scratch, KILLED)
        started = read_started(entry.scratch)
        if started is not None and started[0] > 0:
            kill_group(started[0])

    def fetch_output(self, job) -> list[str]:
        job_dir = self._registry.job_dir(job.id)
        return transfer.fetch_output(
            job, job_dir, self._registry.output_dir(job), self._store_root,
        )
