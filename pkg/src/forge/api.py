"""The front-end facade: one object tying store, bus, backends, monitor.

Forge is the single entry point used by the command line, the HTTP
service, and tests. Every mutating call is appended to the store's
session log as a replayable command line, so any interactive session
can be captured, edited, and re-run against a fresh store.
"""

from __future__ import annotations

import os
import shlex
import threading
import time
from dataclasses import replace as data_replace
from importlib import resources
from pathlib import Path

from . import clock, jobmodel, meta, optedit, splitmerge
from .backends import load_config
from .backends.batchsim import BatchSimHandler
from .backends.localrun import LocalHandler
from .backends.mockgrid import MockGridHandler
from .bus import Bus, ComponentDescriptor, ParamSpec
from .errors import (
    AlreadyTerminal,
    EmptyInput,
    IllegalTransition,
    InvalidOverride,
    InvalidPlan,
    InvalidWorkflow,
    JobActive,
    SubjobsActive,
    UnknownHandler,
    UnknownJob,
    UnknownName,
    UnknownTemplate,
)
from .jobmodel import (
    ACTIVE,
    IN_PREPARATION,
    KILLED,
    RUNNING,
    SUBMITTED,
    TERMINAL,
    Executable,
    InputFile,
    Job,
    OutputFile,
    Parameter,
    Requirement,
    Workflow,
    check_transition,
    derived_status,
    validate_job,
)
from .monitor import EventHub, JobEvent, Monitor
from .registry import Registry

DEFAULT_STORE = "~/.forge"


def store_root_from(path=None) -> Path:
    """Resolve the store root: explicit path, then env, then home."""
    if path:
        return Path(path).expanduser()
    env = os.environ.get("FORGE_STORE")
    if env:
        return Path(env).expanduser()
    return Path(DEFAULT_STORE).expanduser()


class GenericAppHandler:
    """Pass-through application adapter: no validation, no rewriting."""

    id = "generic"

    def configure(self, job) -> None:
        return None


class CountDemoAppHandler:
    """Adapter for the shipped counting application.

    The payload counts pattern occurrences per input file, so a job is
    only runnable once a `pattern` parameter is present.
    """

    id = "count-demo"

    def configure(self, job) -> None:
        names = {p.name for p in job.workflow.parameters if str(p.value) != ""}
        if "pattern" not in names:
            raise InvalidWorkflow("count-demo requires a non-empty 'pattern' parameter")
        if not job.workflow.input_files:
            raise InvalidWorkflow("count-demo requires at least one input file")


class Forge:
    """Facade over one job store.

    All mutating operations serialize on an internal lock, persist
    through the registry, publish status events on the shared hub, and
    append a replayable line to <store>/session.log.
    """

    def __init__(self, store_root=None, record: bool = True):
        self.store_root = store_root_from(store_root)
        self.registry = Registry(self.store_root)
        self.registry.ensure()
        self.config = load_config(self.store_root)
        self.bus = Bus()
        self.hub = EventHub()
        self.monitor = Monitor(self, hub=self.hub)
        self._record = record
        self._lock = threading.RLock()
        self._register_components()

    # -- component wiring ---------------------------------------------------

    def _register_components(self):
        reg, cfg, root = self.registry, self.config, self.store_root
        bus = self.bus
        bus.register(
            ComponentDescriptor("local.v1", "local", frozenset({"job-handler"}), priority=10),
            lambda: LocalHandler(reg, cfg, root),
        )
        bus.register(
            ComponentDescriptor(
                "batchsim.v1", "batchsim", frozenset({"job-handler"}), priority=10,
                config_params=(
                    ParamSpec("mode", "enum", "real", choices=("real", "virtual"),
                              doc="real processes or virtual clock"),
                ),
            ),
            lambda: BatchSimHandler(reg, cfg, root),
        )
        bus.register(
            ComponentDescriptor("mockgrid.v1", "mockgrid", frozenset({"job-handler"}), priority=10),
            lambda: MockGridHandler(reg, cfg, root),
        )
        bus.register(
            ComponentDescriptor("apphandler.generic", "generic",
                                frozenset({"app-handler"}), priority=10),
            GenericAppHandler,
        )
        bus.register(
            ComponentDescriptor("apphandler.count-demo", "count-demo",
                                frozenset({"app-handler"}), priority=10),
            CountDemoAppHandler,
        )

    def _connect_contract(self, name: str, functional: str):
        # restrict resolution to components advertising the contract so
        # a typo never falls through to the module-import path
        known = self.bus.list_components(functional)
        if not any(name in (d.actual_name, d.logical_name) or name in d.functional_names
                   for d, _ in known):
            raise UnknownHandler(name)
        try:
            return self.bus.connect(name)
        except UnknownName:
            raise UnknownHandler(name) from None

    def handler_for(self, backend_id: str):
        """Connect (or reuse) the job handler serving one backend id."""
        return self._connect_contract(backend_id, "job-handler")

    def resolve_application_handler(self, handler_id: str):
        return self._connect_contract(handler_id, "app-handler")

    # -- session log ----------------------------------------------------------

    @property
    def session_log_path(self) -> Path:
        return self.store_root / "session.log"

    def _log(self, verb: str, args: list[str], summary: str = "ok") -> None:
        if not self._record:
            return
        line = " ".join([verb] + [shlex.quote(str(a)) for a in args])
        stamp = clock.now()
        with self._lock:
            with open(self.session_log_path, "a", encoding="utf-8") as fh:
                fh.write(f"# {stamp} {verb} -> {summary}\n{line}\n")

    # -- templates -------------------------------------------------------------

    def template_dir(self) -> Path:
        return self.store_root / "templates" / "jobs"

    def load_template(self, template_id: str) -> dict:
        local = self.template_dir() / f"{template_id}.meta"
        if local.exists():
            return meta.read(local)
        packaged = resources.files("forge") / "data" / "templates" / f"{template_id}.meta"
        if packaged.is_file():
            return meta.loads(packaged.read_text(encoding="utf-8"), str(packaged))
        raise UnknownTemplate(template_id)

    def list_templates(self) -> list[str]:
        names = set()
        packaged = resources.files("forge") / "data" / "templates"
        if packaged.is_dir():
            names.update(p.name[:-5] for p in packaged.iterdir() if p.name.endswith(".meta"))
        if self.template_dir().is_dir():
            names.update(p.stem for p in self.template_dir().glob("*.meta"))
        return sorted(names)

    # -- events ------------------------------------------------------------------

    def subscribe(self, maxsize: int = 256):
        return self.hub.subscribe(maxsize)

    def _transition(self, job: Job, to: str, reason: str = "") -> None:
        old = job.status
        job.apply_transition(to, clock.now(), reason)
        self.hub.publish(JobEvent(job.id, old, to, job.updated_at, reason))

    # -- job lifecycle --------------------------------------------------------------

    def create_job(self, template_id: str, overrides: dict | None = None) -> Job:
        overrides = dict(overrides or {})
        with self._lock:
            template = self.load_template(template_id)
            job_id = self.registry.allocate_id()
            job = jobmodel.job_from_template(template, overrides, job_id, clock.now())
            self.registry.save(job)
        args = ["--template", template_id]
        for key in sorted(overrides):
            if key == "name":
                args += ["--name", overrides[key]]
            elif key == "backend_id":
                args += ["--backend", overrides[key]]
            else:
                args += ["--set", f"{key}={overrides[key]}"]
        self._log("create", args, job.id)
        return job

    def copy_job(self, job_id: str) -> Job:
        with self._lock:
            source = self.registry.load(job_id)
            new_id = self.registry.allocate_id()
            job = source.copy_as(new_id, clock.now())
            self.registry.save(job)
        self._log("copy", [job_id], job.id)
        return job

    def rename_job(self, job_id: str, new_name: str) -> Job:
        with self._lock:
            job = self.registry.load(job_id)
            if job.status in (SUBMITTED, RUNNING):
                raise JobActive(f"{job_id} is {job.status}")
            job.name = new_name
            job.updated_at = clock.now()
            self.registry.save(job)
        self._log("rename", [job_id, new_name])
        return job

    def delete_job(self, job_id: str) -> None:
        with self._lock:
            job = self.registry.load(job_id)
            if job.status in (SUBMITTED, RUNNING):
                raise JobActive(f"{job_id} is {job.status}")
            for sub_id in job.subjob_ids:
                if self.registry.exists(sub_id):
                    sub = self.registry.load(sub_id)
                    if sub.status in (SUBMITTED, RUNNING):
                        raise JobActive(f"subjob {sub_id} is {sub.status}")
            for sub_id in job.subjob_ids:
                if self.registry.exists(sub_id):
                    self.registry.delete(sub_id)
            if job.parent_id and self.registry.exists(job.parent_id):
                parent = self.registry.load(job.parent_id)
                parent.subjob_ids = tuple(s for s in parent.subjob_ids if s != job_id)
                parent.updated_at = clock.now()
                self.registry.save(parent)
            self.registry.delete(job_id)
        self._log("delete", [job_id])

    # -- configuration ----------------------------------------------------------------

    def configure(self, job_id: str, ops: list[tuple[str, str]]) -> Job:
        """Apply ordered edit operations to a job still in preparation.

        Ops mirror the CLI flags: ("name", v), ("backend", v),
        ("param", "k=v"), ("input", "name[=location]"),
        ("output", "name[=location]"), ("require", "attr=v"),
        ("arg", v) replacing the executable's argument list,
        ("drop", name), ("drop-require", attr), ("app", "k=v").
        """
        with self._lock:
            job = self.registry.load(job_id)
            if job.status != IN_PREPARATION:
                raise JobActive(f"{job_id} is {job.status}")
            self._apply_ops(job, ops)
            validate_job(job)
            self.resolve_application_handler(job.application.handler_id).configure(job)
            job.updated_at = clock.now()
            self.registry.save(job)
        flat = []
        for op, value in ops:
            flat += [f"--{op}", value]
        self._log("configure", [job_id] + flat)
        return job

    def _apply_ops(self, job: Job, ops) -> None:
        elements = list(job.workflow.elements)
        requirements = list(job.requirements)
        args: list[str] = []
        for op, value in ops:
            if op == "name":
                job.name = value
            elif op == "backend":
                job.backend_id = value
            elif op == "param":
                key, val = _split_kv(op, value)
                elements = _upsert(elements, Parameter(key, val))
            elif op == "input":
                key, val = _split_kv(op, value, optional=True)
                elements = _upsert(elements, InputFile(key, val))
            elif op == "output":
                key, val = _split_kv(op, value, optional=True)
                elements = _upsert(elements, OutputFile(key, val))
            elif op == "require":
                key, val = _split_kv(op, value)
                requirements = [r for r in requirements if r.name != key]
                requirements.append(Requirement(key, _auto_type(val)))
            elif op == "arg":
                args.append(value)
            elif op == "drop":
                elements = [e for e in elements if getattr(e, "name", None) != value]
            elif op == "drop-require":
                requirements = [r for r in requirements if r.name != value]
            elif op == "app":
                key, val = _split_kv(op, value)
                if key not in ("handler_id", "image_location", "name", "version"):
                    raise InvalidOverride(f"unknown application field {key!r}")
                job.application = data_replace(job.application, **{key: val})
            else:
                raise InvalidOverride(f"unknown configure op {op!r}")
        if args:
            exes = [e for e in elements if e.kind == jobmodel.EXECUTABLE]
            if not exes:
                raise InvalidWorkflow("no executable to receive arguments")
            new_exe = Executable(exes[0].name, tuple(args))
            elements[elements.index(exes[0])] = new_exe
        job.workflow = Workflow(tuple(elements))
        job.requirements = tuple(requirements)

    # -- submission ----------------------------------------------------------------------

    def submit(self, job_id: str) -> Job:
        with self._lock:
            job = self.registry.load(job_id)
            if job.subjob_ids:
                return self._submit_parent(job)
            check_transition(job.status, SUBMITTED)
            self._submit_one(job)
            self.registry.save(job)
        self._log("submit", [job_id], job.status)
        return job

    def _submit_one(self, job: Job) -> None:
        check_transition(job.status, SUBMITTED)
        self.resolve_application_handler(job.application.handler_id).configure(job)
        handler = self.handler_for(job.backend_id)
        handler.configure_job(job)
        job.ticket = handler.submit(job)
        self._transition(job, SUBMITTED)

    def _submit_parent(self, parent: Job) -> Job:
        check_transition(parent.status, SUBMITTED)
        for sub_id in parent.subjob_ids:
            sub = self.registry.load(sub_id)
            self._submit_one(sub)
            self.registry.save(sub)
        self._rollup_parent(parent)
        self.registry.save(parent)
        self._log("submit", [parent.id], parent.status)
        return parent

    def _rollup_parent(self, parent: Job) -> None:
        statuses = [self.registry.load(s).status for s in parent.subjob_ids]
        target = derived_status(statuses)
        if target == parent.status:
            return
        for hop in jobmodel.bridge(parent.status, target):
            self._transition(parent, hop)

    # -- steering -------------------------------------------------------------------------

    def kill(self, job_id: str) -> Job:
        with self._lock:
            job = self.registry.load(job_id)
            if job.subjob_ids:
                killed_any = False
                for sub_id in job.subjob_ids:
                    sub = self.registry.load(sub_id)
                    if sub.status in TERMINAL or sub.status == IN_PREPARATION:
                        continue
                    self._kill_one(sub)
                    self.registry.save(sub)
                    killed_any = True
                if not killed_any:
                    raise AlreadyTerminal(f"{job_id} has no active subjobs")
                self._rollup_parent(job)
                self.registry.save(job)
            else:
                self._kill_one(job)
                self.registry.save(job)
        self._log("kill", [job_id])
        return job

    def _kill_one(self, job: Job) -> None:
        if job.status in TERMINAL:
            raise AlreadyTerminal(f"{job.id} is {job.status}")
        if job.status == IN_PREPARATION:
            raise IllegalTransition(f"{job.id} not submitted")
        handler = self.handler_for(job.backend_id)
        handler.kill(job)
        self._transition(job, KILLED)

    def fetch(self, job_id: str, dest=None) -> list[str]:
        with self._lock:
            job = self.registry.load(job_id)
            if job.subjob_ids:
                retrieved: list[str] = []
                for sub_id in job.subjob_ids:
                    retrieved.extend(self.fetch(sub_id))
                self._log("fetch", [job_id], f"{len(retrieved)} files")
                return retrieved
            if job.status not in TERMINAL:
                raise JobActive(f"{job_id} is {job.status}")
            if dest is not None:
                job.output_dir = str(Path(dest).expanduser().resolve())
            handler = self.handler_for(job.backend_id)
            files = handler.fetch_output(job)
            job.updated_at = clock.now()
            self.registry.save(job)
        args = [job_id] + (["--dest", str(dest)] if dest else [])
        self._log("fetch", args, f"{len(files)} files")
        return files

    # -- queries -----------------------------------------------------------------------------

    def load_job(self, job_id: str) -> Job:
        return self.registry.load(job_id)

    def save_job(self, job: Job) -> None:
        self.registry.save(job)

    def job_status(self, job_id: str) -> tuple[str, str]:
        job = self.registry.load(job_id)
        return job.status, job.status_reason

    def list_jobs(self, status: str | None = None) -> list[dict]:
        return self.registry.list_rows(status)

    def active_jobs(self) -> list[Job]:
        rows = self.registry.list_rows()
        jobs = []
        for row in rows:
            if row.get("status") in ACTIVE:
                try:
                    jobs.append(self.registry.load(row["id"]))
                except UnknownJob:
                    continue
        return jobs

    def auto_fetch(self, job: Job) -> None:
        handler = self.handler_for(job.backend_id)
        handler.fetch_output(job)

    # -- split / merge -------------------------------------------------------------------------

    def default_splitter(self) -> Path:
        packaged = resources.files("forge") / "data" / "splitters" / "by-input-files.sh"
        return Path(str(packaged))

    def split(self, job_id: str, max_files: int | None = None,
              splitter=None, plan_text: str | None = None) -> list[Job]:
        with self._lock:
            job = self.registry.load(job_id)
            if job.status != IN_PREPARATION:
                raise JobActive(f"{job_id} is {job.status}")
            if job.subjob_ids:
                raise InvalidPlan(f"{job_id} already has subjobs")
            names = splitmerge.input_names(job)
            if plan_text is not None:
                plan = splitmerge.parse_plan(plan_text)
            elif max_files is not None:
                plan = splitmerge.chunk_plan(names, max_files)
            else:
                script = Path(splitter) if splitter else self.default_splitter()
                plan_path = self.registry.job_dir(job_id) / "split.plan"
                plan = splitmerge.run_splitter(script, names, plan_path)
            splitmerge.validate_plan(names, plan)
            subjobs = []
            parent_input = self.registry.job_dir(job_id) / "input"
            for spec in plan.specs:
                new_id = self.registry.allocate_id()
                sub = splitmerge.make_subjob(job, spec, new_id, clock.now())
                self.registry.save(sub)
                for name in spec.files:
                    src = parent_input / name
                    if src.exists():
                        dst = self.registry.job_dir(new_id) / "input" / name
                        dst.write_bytes(src.read_bytes())
                subjobs.append(sub)
            job.subjob_ids = tuple(s.id for s in subjobs)
            job.updated_at = clock.now()
            self.registry.save(job)
        args = [job_id]
        if max_files is not None:
            args += ["--max", str(max_files)]
        if splitter:
            args += ["--splitter", str(splitter)]
        self._log("split", args, f"{len(subjobs)} subjobs")
        return subjobs

    def merge(self, job_id: str) -> splitmerge.MergeReport:
        with self._lock:
            parent = self.registry.load(job_id)
            if not parent.subjob_ids:
                raise EmptyInput(f"{job_id} has no subjobs")
            subjobs = [self.registry.load(s) for s in parent.subjob_ids]
            for sub in subjobs:
                if sub.status not in TERMINAL:
                    raise SubjobsActive(f"{sub.id} is {sub.status}")
            report = splitmerge.collect_outputs(
                parent, subjobs,
                outdir_of=lambda s: self.registry.output_dir(s),
                parent_outdir=self.registry.output_dir(parent),
            )
        self._log("merge", [job_id],
                  f"merged={len(report.merged)} copied={len(report.copied)} missing={len(report.missing)}")
        return report

    # -- monitor control --------------------------------------------------------------------------

    def monitor_poll(self) -> list[JobEvent]:
        events = self.monitor.poll_once()
        self._log("monitor", ["poll"], f"{len(events)} events")
        return events

    def monitor_start(self, interval: float | None = None) -> None:
        self.monitor.start(interval)
        args = ["start"] + ([] if interval is None else ["--interval", str(interval)])
        self._log("monitor", args)

    def monitor_stop(self) -> None:
        self.monitor.stop()
        self._log("monitor", ["stop"])

    def wait_until_idle(self, timeout: float = 60.0, poll_interval: float = 0.2) -> bool:
        """Poll in-process until no job is active; True if drained."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            self.monitor.poll_once()
            if not self.active_jobs():
                return True
            time.sleep(poll_interval)
        return not self.active_jobs()

    # -- components surface --------------------------------------------------------------------------

    def components_rows(self, functional: str | None = None) -> list[dict]:
        rows = []
        for desc, connected in self.bus.list_components(functional):
            rows.append({
                "actual": desc.actual_name,
                "logical": desc.logical_name,
                "functional": ",".join(sorted(desc.functional_names)),
                "priority": str(desc.priority),
                "connected": "yes" if connected else "no",
            })
        return rows

    def components_connect(self, name: str, alias: str | None = None):
        handle = self.bus.connect(name, alias)
        self._log("components", ["connect", name] + (["--alias", alias] if alias else []))
        return handle

    def components_disconnect(self, name: str) -> set[str]:
        removed = self.bus.disconnect(name)
        self._log("components", ["disconnect", name], ",".join(sorted(removed)))
        return removed

    def components_replace(self, name: str, replacement: str) -> None:
        self.bus.replace(name, replacement)
        self._log("components", ["replace", name, replacement])

    def components_pin(self, name: str, actual: str) -> None:
        self.bus.pin(name, actual)
        self._log("components", ["pin", name, actual])

    def components_graph(self) -> str:
        return self.bus.dependency_graph()

    # -- options surface ----------------------------------------------------------------------------------

    def options_template_dir(self) -> Path:
        return self.store_root / "templates" / "options"

    def load_options_schema(self, schema_path=None) -> optedit.OptionSchema:
        if schema_path:
            return optedit.load_schema(schema_path)
        local = self.store_root / "options.schema"
        if local.exists():
            return optedit.load_schema(local)
        packaged = resources.files("forge") / "data" / "options" / "demo.schema"
        return optedit.parse_schema(packaged.read_text(encoding="utf-8"), str(packaged))

    def options_set(self, sets: list[tuple[str, str]], template: str | None = None,
                    schema_path=None) -> optedit.OptionSet:
        schema = self.load_options_schema(schema_path)
        if template:
            option_set = optedit.load_template(schema, self.options_template_dir(), template)
        else:
            option_set = optedit.OptionSet(schema)
        for label, raw in sets:
            optedit.set_option_text(option_set, label, raw)
        return option_set

    def options_save_template(self, name: str, sets: list[tuple[str, str]],
                              base: str | None = None, schema_path=None) -> Path:
        option_set = self.options_set(sets, template=base, schema_path=schema_path)
        path = optedit.save_template(option_set, self.options_template_dir(), name)
        args = ["save-template", name]
        for label, raw in sets:
            args += ["--set", f"{label}={raw}"]
        if base:
            args += ["--from", base]
        self._log("options", args, path.name)
        return path

    def options_templates(self) -> list[str]:
        return optedit.list_templates(self.options_template_dir())


def _upsert(elements: list, element) -> list:
    """Replace the same-kind same-name element in place, else append."""
    out = list(elements)
    for i, existing in enumerate(out):
        if existing.kind == element.kind and existing.name == element.name:
            out[i] = element
            return out
    out.append(element)
    return out


def _split_kv(op: str, value: str, optional: bool = False) -> tuple[str, str]:
    key, sep, val = value.partition("=")
    if not key or (not sep and not optional):
        raise InvalidOverride(f"--{op} needs KEY=VALUE, got {value!r}")
    return key, val


def _auto_type(raw: str):
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw
