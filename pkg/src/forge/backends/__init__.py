"""Job handlers: one per computing system, plus shared plumbing.

Every handler implements the same contract:

    configure_job(job)      write script.sh (and jdl.txt where relevant)
    submit(job) -> ticket   launch or enqueue the payload
    poll(job) -> PollResult backend-observed status; never transitions
    kill(job)               terminate or dequeue the payload
    fetch_output(job)       move outputs to the job's output directory

Payload outcome is recorded as small marker files in the directory the
payload ran in (.exit.code, .killed, .walltime, .started), so poll can
reconstruct the observed status without owning the original process
handle. The wrapper writes .exit.code as its very last act, which makes
"exit code file present" the authoritative terminal signal.
"""

from __future__ import annotations

import os
import signal
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .. import jobmodel, meta
from ..errors import UnresolvedLogicalName


class PollResult(NamedTuple):
    """Observed status plus an optional reason (e.g. "walltime")."""

    status: str
    reason: str = ""


# -- backend configuration -------------------------------------------------

@dataclass(frozen=True)
class Queue:
    name: str
    limit_ticks: int
    slots: int


@dataclass(frozen=True)
class ComputingElement:
    name: str
    attributes: dict
    slots: int


@dataclass(frozen=True)
class BackendConfig:
    queues: tuple[Queue, ...] = ()
    ces: tuple[ComputingElement, ...] = ()
    replicas: dict = field(default_factory=dict)


def _typed(raw: str):
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def parse_config(mapping: dict) -> BackendConfig:
    queues = tuple(
        Queue(q.get("name", ""), int(q.get("limit_ticks", "1")), int(q.get("slots", "1")))
        for q in meta.indexed(mapping, "queue")
    )
    ces = []
    for sub in meta.indexed(mapping, "ce"):
        attrs = {
            k: _typed(v) for k, v in sub.items()
            if k not in ("name", "slots") and k
        }
        ces.append(ComputingElement(sub.get("name", ""), attrs, int(sub.get("slots", "1"))))
    replicas: dict[str, list[str]] = {}
    for sub in meta.indexed(mapping, "replica"):
        replicas.setdefault(sub.get("lfn", ""), []).append(sub.get("path", ""))
    return BackendConfig(queues, tuple(ces), replicas)


def load_config(store_root) -> BackendConfig:
    """Read backends.meta from the store, else the packaged default."""
    path = Path(store_root) / "backends.meta"
    if path.exists():
        return parse_config(meta.read(path))
    from importlib import resources

    text = resources.files("forge").joinpath("data/backends.meta").read_text("utf-8")
    return parse_config(meta.loads(text, "data/backends.meta"))


class ReplicaCatalogue:
    """Logical file name (`lfn:<name>`) to physical locations."""

    def __init__(self, replicas: dict):
        self._replicas = {k: list(v) for k, v in replicas.items()}

    def resolve(self, lfn: str) -> str:
        name = lfn[4:] if lfn.startswith("lfn:") else lfn
        locations = self._replicas.get(name)
        if not locations:
            raise UnresolvedLogicalName(lfn)
        return locations[0]

    def locations(self, lfn: str) -> list[str]:
        name = lfn[4:] if lfn.startswith("lfn:") else lfn
        locations = self._replicas.get(name)
        if not locations:
            raise UnresolvedLogicalName(lfn)
        return list(locations)


# -- payload execution and outcome markers ----------------------------------

EXIT_CODE = ".exit.code"
KILLED = ".killed"
WALLTIME = ".walltime"
STARTED = ".started"

_WRAPPER = 'sh "script.sh" > "output/stdout.txt" 2> "output/stderr.txt"; echo $? > "{exit_file}"'


def spawn_payload(run_dir: Path) -> subprocess.Popen:
    """Run script.sh inside run_dir, capturing stdout/stderr and exit code.

    The child gets its own process group so kill() can take down the
    whole payload tree.
    """
    (run_dir / "output").mkdir(exist_ok=True)
    command = _WRAPPER.format(exit_file=EXIT_CODE)
    proc = subprocess.Popen(
        ["/bin/sh", "-c", command],
        cwd=str(run_dir),
        start_new_session=True,
        stdin=subprocess.DEVNULL,
    )
    return proc


def write_started(run_dir: Path, pid: int, ts: int, limit: int) -> None:
    (run_dir / STARTED).write_text(f"{pid} {ts} {limit}\n", "utf-8")


def read_started(run_dir: Path):
    path = run_dir / STARTED
    if not path.exists():
        return None
    pid, ts, limit = path.read_text("utf-8").split()
    return int(pid), int(ts), int(limit)


def mark(run_dir: Path, marker: str) -> None:
    (run_dir / marker).write_text("", "utf-8")


def has(run_dir: Path, marker: str) -> bool:
    return (run_dir / marker).exists()


def read_exit_code(run_dir: Path):
    path = run_dir / EXIT_CODE
    if not path.exists():
        return None
    raw = path.read_text("utf-8").strip()
    return int(raw) if raw else None


def kill_group(pid: int) -> None:
    try:
        os.killpg(pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        try:
            os.kill(pid, signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            pass


def pid_alive(pid: int) -> bool:
    if pid <= 0:
        return False
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


def observe(run_dir: Path) -> PollResult | None:
    """Outcome from marker files alone; None when nothing has finished."""
    if has(run_dir, KILLED):
        return PollResult(jobmodel.KILLED)
    if has(run_dir, WALLTIME):
        return PollResult(jobmodel.FAILED, "walltime")
    code = read_exit_code(run_dir)
    if code is not None:
        if code == 0:
            return PollResult(jobmodel.COMPLETED)
        return PollResult(jobmodel.FAILED, f"exit {code}")
    return None
