"""Monitoring: periodic polling, status transitions, event fan-out.

The poller is the only writer of monitored-job status. Each cycle it
asks every backend for the observed status of every active job and
applies the difference as legal transitions, bridging skipped states
(a fast payload first observed completed yields submitted -> running
-> completed, one event per hop). Subscribers receive events through
bounded queues: a consumer that falls behind gets an overflow marker
and is cut off rather than stalling the poller.

Per-job poll failures never stop the cycle: they surface as diagnostic
events (old == new) tagged "poll-error", and the job is left untouched.
A job reaching Completed triggers an automatic output fetch; fetch
problems likewise become diagnostic "fetch-error" events while the
status stays Completed.
"""

from __future__ import annotations

import logging
import queue
import threading
from dataclasses import dataclass

from . import clock, jobmodel
from .errors import OutOfRange

log = logging.getLogger("forge.monitor")

OVERFLOW_WIRE = "EVT-OVERFLOW"

MIN_INTERVAL = 1
DEFAULT_INTERVAL = 5


@dataclass(frozen=True)
class JobEvent:
    job_id: str
    old: str
    new: str
    ts: int
    reason: str = ""

    @property
    def diagnostic(self) -> bool:
        return self.old == self.new

    def wire(self) -> str:
        base = f"EVT {self.job_id} {self.old} {self.new} {self.ts}"
        return f"{base} {self.reason}" if self.reason else base


def parse_event(line: str) -> JobEvent:
    parts = line.strip().split(" ", 5)
    if len(parts) < 5 or parts[0] != "EVT":
        raise ValueError(f"not an event line: {line!r}")
    reason = parts[5] if len(parts) > 5 else ""
    return JobEvent(parts[1], parts[2], parts[3], int(parts[4]), reason)


class Overflow:
    """Sentinel delivered once to a subscriber that fell behind."""

    def wire(self) -> str:
        return OVERFLOW_WIRE


OVERFLOW = Overflow()


class Subscription:
    """One consumer's bounded event queue."""

    def __init__(self, hub: "EventHub", maxsize: int):
        self._hub = hub
        self._capacity = maxsize
        self._q: queue.Queue = queue.Queue(maxsize + 1)
        self._cut = False

    def _offer(self, event) -> bool:
        """Producer side; returns False once the subscriber is cut off."""
        if self._cut:
            return False
        if self._q.qsize() >= self._capacity:
            self._q.put_nowait(OVERFLOW)
            self._cut = True
            return False
        self._q.put_nowait(event)
        return True

    def get(self, timeout: float | None = None):
        """Next event; OVERFLOW ends the stream; raises queue.Empty on timeout."""
        if timeout is None:
            return self._q.get_nowait()
        return self._q.get(True, timeout)

    def drain(self) -> list:
        out = []
        while True:
            try:
                out.append(self._q.get_nowait())
            except queue.Empty:
                return out

    def close(self) -> None:
        self._hub.unsubscribe(self)


class EventHub:
    def __init__(self):
        self._lock = threading.Lock()
        self._subs: list[Subscription] = []

    def subscribe(self, maxsize: int = 256) -> Subscription:
        sub = Subscription(self, maxsize)
        with self._lock:
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)

    def publish(self, event: JobEvent) -> None:
        with self._lock:
            dead = [s for s in self._subs if not s._offer(event)]
            for sub in dead:
                self._subs.remove(sub)


class Monitor:
    """Background poller over a job core (the api facade).

    The core provides: active_jobs(), handler_for(backend_id),
    load_job(id), save_job(job), auto_fetch(job).
    """

    def __init__(self, core, hub: EventHub | None = None):
        self._core = core
        self.hub = hub if hub is not None else EventHub()
        self.poll_interval_s = DEFAULT_INTERVAL
        self._thread: threading.Thread | None = None
        self._stop = threading.Event()
        self._lock = threading.RLock()

    # -- lifecycle --------------------------------------------------------

    def start(self, poll_interval: float | None = None) -> None:
        with self._lock:
            if poll_interval is not None:
                if poll_interval < MIN_INTERVAL:
                    raise OutOfRange(f"poll interval {poll_interval} below minimum {MIN_INTERVAL}")
                self.poll_interval_s = poll_interval
            if self._thread is not None and self._thread.is_alive():
                return
            self._stop.clear()
            self._thread = threading.Thread(target=self._loop, name="forge-monitor", daemon=True)
            self._thread.start()

    def stop(self) -> None:
        with self._lock:
            thread = self._thread
            self._thread = None
        if thread is None or not thread.is_alive():
            return
        self._stop.set()
        thread.join(timeout=10)

    @property
    def running(self) -> bool:
        thread = self._thread
        return thread is not None and thread.is_alive()

    def _loop(self) -> None:
        while not self._stop.wait(self.poll_interval_s):
            try:
                self.poll_once()
            except Exception:
                log.exception("poll cycle failed")

    def subscribe(self, maxsize: int = 256) -> Subscription:
        return self.hub.subscribe(maxsize)

    # -- polling ----------------------------------------------------------

    def poll_once(self) -> list[JobEvent]:
        """Poll every active job once; apply and publish transitions."""
        with self._lock:
            events: list[JobEvent] = []
            jobs = self._core.active_jobs()
            leaves = [j for j in jobs if not j.subjob_ids]
            by_backend: dict[str, list] = {}
            for job in leaves:
                by_backend.setdefault(job.backend_id, []).append(job)
            for backend_id, group in sorted(by_backend.items()):
                try:
                    handler = self._core.handler_for(backend_id)
                except Exception:
                    self._diagnose(events, group[0], "poll-error")
                    continue
                pump = getattr(handler, "pump", None)
                if callable(pump):
                    try:
                        pump(group)
                    except Exception:
                        log.exception("pump failed for %s", backend_id)
                for job in group:
                    self._poll_job(events, handler, job)
            return events

    def _diagnose(self, events, job, reason: str) -> None:
        event = JobEvent(job.id, job.status, job.status, clock.now(), reason)
        events.append(event)
        self.hub.publish(event)

    def _poll_job(self, events, handler, job) -> None:
        try:
            result = handler.poll(job)
        except Exception:
            self._diagnose(events, job, "poll-error")
            return
        if result.status == job.status:
            return
        try:
            path = jobmodel.bridge(job.status, result.status)
        except Exception:
            self._diagnose(events, job, "poll-error")
            return
        for hop in path:
            old = job.status
            reason = result.reason if hop == path[-1] else ""
            job.apply_transition(hop, clock.now(), reason)
            event = JobEvent(job.id, old, hop, job.updated_at, reason)
            events.append(event)
            self.hub.publish(event)
        self._core.save_job(job)
        if job.status == jobmodel.COMPLETED:
            try:
                self._core.auto_fetch(job)
            except Exception:
                self._diagnose(events, job, "fetch-error")
        if job.parent_id:
            self._rollup(events, job.parent_id)

    def _rollup(self, events, parent_id: str) -> None:
        """Recompute a parent's derived status after a subjob event."""
        try:
            parent = self._core.load_job(parent_id)
            statuses = [self._core.load_job(s).status for s in parent.subjob_ids]
        except Exception:
            log.exception("rollup load failed for %s", parent_id)
            return
        derived = jobmodel.derived_status(statuses)
        if derived == parent.status:
            return
        try:
            path = jobmodel.bridge(parent.status, derived)
        except Exception:
            self._diagnose(events, parent, "rollup-error")
            return
        for hop in path:
            old = parent.status
            parent.apply_transition(hop, clock.now())
            event = JobEvent(parent.id, old, hop, parent.updated_at)
            events.append(event)
            self.hub.publish(event)
        self._core.save_job(parent)
