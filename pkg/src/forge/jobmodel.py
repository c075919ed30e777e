"""Jobs, workflows, applications, templates, and the status machine.

A Job is a value object: nothing in this module touches disk or
emits events. Persistence and event fan-out live in the registry and
monitor modules; this module only defines the data and the rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import meta, values
from .errors import IllegalTransition, InvalidOverride, InvalidWorkflow

# status wire strings
IN_PREPARATION = "in-preparation"
SUBMITTED = "submitted"
RUNNING = "running"
COMPLETED = "completed"
FAILED = "failed"
KILLED = "killed"

STATUSES = (IN_PREPARATION, SUBMITTED, RUNNING, COMPLETED, FAILED, KILLED)
TERMINAL = frozenset({COMPLETED, FAILED, KILLED})
ACTIVE = frozenset({SUBMITTED, RUNNING})

LEGAL_TRANSITIONS = frozenset({
    (IN_PREPARATION, SUBMITTED),
    (SUBMITTED, RUNNING),
    (SUBMITTED, FAILED),
    (SUBMITTED, KILLED),
    (RUNNING, COMPLETED),
    (RUNNING, FAILED),
    (RUNNING, KILLED),
})


def check_transition(current: str, to: str) -> None:
    if (current, to) not in LEGAL_TRANSITIONS:
        raise IllegalTransition(f"{current} -> {to}")


def bridge(current: str, observed: str) -> list[str]:
    """Legal-edge path from current to an observed status.

    A backend poll may skip states (a fast job is first seen completed).
    Returns the intermediate+final statuses to apply in order, empty if
    already there. Raises IllegalTransition when no legal path exists
    (e.g. out of a terminal state).
    """
    if current == observed:
        return []
    if (current, observed) in LEGAL_TRANSITIONS:
        return [observed]
    if current == IN_PREPARATION:
        return [SUBMITTED] + bridge(SUBMITTED, observed)
    if current == SUBMITTED and observed == COMPLETED:
        return [RUNNING, COMPLETED]
    raise IllegalTransition(f"{current} -> {observed}")


def derived_status(statuses) -> str:
    """Parent status derived from subjob statuses.

    Rules, in order: Running if any Running/Submitted; Failed if any
    Failed and none Running; Completed iff all Completed; Killed if any
    Killed and none Running; otherwise the parent is still InPreparation.
    """
    statuses = list(statuses)
    if not statuses:
        return IN_PREPARATION
    if any(s in (RUNNING, SUBMITTED) for s in statuses):
        return RUNNING
    if any(s == FAILED for s in statuses):
        return FAILED
    if all(s == COMPLETED for s in statuses):
        return COMPLETED
    if any(s == KILLED for s in statuses):
        return KILLED
    return IN_PREPARATION


# -- workflow elements ---------------------------------------------------

EXECUTABLE = "Executable"
PARAMETER = "Parameter"
INPUT_FILE = "InputFile"
OUTPUT_FILE = "OutputFile"


@dataclass(frozen=True)
class Executable:
    name: str
    args: tuple[str, ...] = ()

    kind = EXECUTABLE


@dataclass(frozen=True)
class Parameter:
    name: str
    value: object = ""

    kind = PARAMETER


@dataclass(frozen=True)
class InputFile:
    name: str
    location: str = ""
    resolved: str = ""

    kind = INPUT_FILE


@dataclass(frozen=True)
class OutputFile:
    name: str
    location: str = ""

    kind = OUTPUT_FILE


@dataclass(frozen=True)
class Workflow:
    """Ordered element list; order is preserved verbatim into scripts."""

    elements: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def of_kind(self, kind: str) -> list:
        return [e for e in self.elements if e.kind == kind]

    @property
    def executables(self):
        return self.of_kind(EXECUTABLE)

    @property
    def parameters(self):
        return self.of_kind(PARAMETER)

    @property
    def input_files(self):
        return self.of_kind(INPUT_FILE)

    @property
    def output_files(self):
        return self.of_kind(OUTPUT_FILE)


@dataclass(frozen=True)
class Requirement:
    name: str
    value: object  # str or number

    @property
    def is_numeric(self) -> bool:
        return isinstance(self.value, (int, float)) and not isinstance(self.value, bool)


@dataclass(frozen=True)
class Application:
    """What runs: an image identified by location, name, and version.

    Parameter values and file lists live in the workflow; the
    application record points at the payload and its handler.
    """

    handler_id: str = "generic"
    image_location: str = ""
    name: str = ""
    version: str = ""


@dataclass
class Job:
    id: str
    name: str = ""
    workflow: Workflow = field(default_factory=Workflow)
    requirements: tuple[Requirement, ...] = ()
    application: Application = field(default_factory=Application)
    backend_id: str = "local"
    status: str = IN_PREPARATION
    status_reason: str = ""
    parent_id: str = ""
    subjob_ids: tuple[str, ...] = ()
    output_dir: str = ""
    ticket: str = ""
    transfer_method: str = ""
    created_at: int = 0
    updated_at: int = 0

    def apply_transition(self, to: str, ts: int, reason: str = "") -> None:
        check_transition(self.status, to)
        self.status = to
        self.status_reason = reason
        self.updated_at = ts

    def copy_as(self, new_id: str, ts: int) -> "Job":
        """Fresh InPreparation job with identical workflow/requirements."""
        return Job(
            id=new_id,
            name=self.name,
            workflow=self.workflow,
            requirements=self.requirements,
            application=self.application,
            backend_id=self.backend_id,
            created_at=ts,
            updated_at=ts,
        )


def format_job_id(n: int) -> str:
    return f"j{n:06d}"


# -- validation ----------------------------------------------------------

_SEPARATORS = ("/", "\\")


def validate_job(job: Job) -> None:
    """Raise InvalidWorkflow when a job violates the model invariants."""
    if not job.workflow.executables:
        raise InvalidWorkflow("workflow has no Executable element")
    for element in job.workflow.elements:
        if not element.name:
            raise InvalidWorkflow(f"{element.kind} element with empty name")
        if element.kind != EXECUTABLE and any(s in element.name for s in _SEPARATORS):
            raise InvalidWorkflow(f"file name {element.name!r} contains a path separator")
    seen = set()
    for req in job.requirements:
        if not req.name:
            raise InvalidWorkflow("requirement with empty attribute name")
        if req.name in seen:
            raise InvalidWorkflow(f"duplicate requirement attribute {req.name!r}")
        seen.add(req.name)
    if not job.application.name or not job.application.version:
        raise InvalidWorkflow("application name and version must be non-empty")
    if not job.application.handler_id:
        raise InvalidWorkflow("application handler_id must be non-empty")


# -- meta serialization ----------------------------------------------------

def element_to_meta(element) -> dict:
    out = {"kind": element.kind, "name": element.name}
    if element.kind == EXECUTABLE:
        out.update(meta.flatten("args", [{"": a} for a in element.args]))
    elif element.kind == PARAMETER:
        out["ptype"] = _ptype(element.value)
        out["value"] = values.render_plain(element.value)
    elif element.kind == INPUT_FILE:
        if element.location:
            out["location"] = element.location
        if element.resolved:
            out["resolved"] = element.resolved
    elif element.kind == OUTPUT_FILE:
        if element.location:
            out["location"] = element.location
    return out


def _ptype(value) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "real"
    return "string"


def element_from_meta(sub: dict, source: str = "") -> object:
    kind = sub.get("kind", "")
    name = sub.get("name", "")
    if kind == EXECUTABLE:
        args = tuple(d.get("", "") for d in meta.indexed(sub, "args"))
        return Executable(name, args)
    if kind == PARAMETER:
        ptype = sub.get("ptype", "string")
        return Parameter(name, values.parse_plain(sub.get("value", ""), ptype))
    if kind == INPUT_FILE:
        return InputFile(name, sub.get("location", ""), sub.get("resolved", ""))
    if kind == OUTPUT_FILE:
        return OutputFile(name, sub.get("location", ""))
    raise InvalidOverride(f"unknown element kind {kind!r}{source}")


def requirement_to_meta(req: Requirement) -> dict:
    kind = "number" if req.is_numeric else "string"
    return {"name": req.name, "type": kind, "value": values.render_plain(req.value)}


def requirement_from_meta(sub: dict) -> Requirement:
    raw = sub.get("value", "")
    if sub.get("type", "string") == "number":
        value = float(raw)
        if value == math.floor(value) and "." not in raw and "e" not in raw.lower():
            value = int(raw)
        return Requirement(sub.get("name", ""), value)
    return Requirement(sub.get("name", ""), raw)


def to_meta(job: Job) -> dict[str, str]:
    out = {
        "id": job.id,
        "name": job.name,
        "status": job.status,
        "backend_id": job.backend_id,
        "created_at": str(job.created_at),
        "updated_at": str(job.updated_at),
        "application.handler_id": job.application.handler_id,
        "application.name": job.application.name,
        "application.version": job.application.version,
    }
    if job.status_reason:
        out["status_reason"] = job.status_reason
    if job.application.image_location:
        out["application.image_location"] = job.application.image_location
    if job.parent_id:
        out["parent_id"] = job.parent_id
    if job.output_dir:
        out["output_dir"] = job.output_dir
    if job.ticket:
        out["ticket"] = job.ticket
    if job.transfer_method:
        out["transfer_method"] = job.transfer_method
    out.update(meta.flatten("element", [element_to_meta(e) for e in job.workflow.elements]))
    out.update(meta.flatten("requirement", [requirement_to_meta(r) for r in job.requirements]))
    out.update(meta.flatten("subjob_ids", [{"": s} for s in job.subjob_ids]))
    return out


def from_meta(mapping: dict[str, str]) -> Job:
    elements = tuple(element_from_meta(sub) for sub in meta.indexed(mapping, "element"))
    requirements = tuple(requirement_from_meta(sub) for sub in meta.indexed(mapping, "requirement"))
    subjobs = tuple(d.get("", "") for d in meta.indexed(mapping, "subjob_ids"))
    application = Application(
        handler_id=mapping.get("application.handler_id", "generic"),
        image_location=mapping.get("application.image_location", ""),
        name=mapping.get("application.name", ""),
        version=mapping.get("application.version", ""),
    )
    return Job(
        id=mapping.get("id", ""),
        name=mapping.get("name", ""),
        workflow=Workflow(elements),
        requirements=requirements,
        application=application,
        backend_id=mapping.get("backend_id", "local"),
        status=mapping.get("status", IN_PREPARATION),
        status_reason=mapping.get("status_reason", ""),
        parent_id=mapping.get("parent_id", ""),
        subjob_ids=subjobs,
        output_dir=mapping.get("output_dir", ""),
        ticket=mapping.get("ticket", ""),
        transfer_method=mapping.get("transfer_method", ""),
        created_at=int(mapping.get("created_at", "0")),
        updated_at=int(mapping.get("updated_at", "0")),
    )


# -- templates -------------------------------------------------------------

TEMPLATE_FIELDS = ("name", "backend_id")
TEMPLATE_PREFIXES = ("application.", "element.", "requirement.")


def job_from_template(template: dict[str, str], overrides: dict[str, str],
                      job_id: str, ts: int) -> Job:
    """Materialize a job from a template mapping plus flat overrides.

    Overrides use the same keys as the template grammar (name,
    backend_id, application.*, element.N.*, requirement.N.*); an
    override key outside that grammar raises InvalidOverride, as does
    an override that leaves the workflow invalid.
    """
    merged = {k: v for k, v in template.items() if k != "template_id"}
    for key, value in overrides.items():
        if key not in TEMPLATE_FIELDS and not key.startswith(TEMPLATE_PREFIXES):
            raise InvalidOverride(f"unknown override key {key!r}")
        merged[key] = value
    merged["id"] = job_id
    merged["status"] = IN_PREPARATION
    merged["created_at"] = str(ts)
    merged["updated_at"] = str(ts)
    try:
        job = from_meta(merged)
    except (ValueError, InvalidOverride) as exc:
        raise InvalidOverride(str(exc)) from None
    try:
        validate_job(job)
    except InvalidWorkflow as exc:
        raise InvalidOverride(str(exc)) from None
    return job
