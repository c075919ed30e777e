"""File movement: transfer methods, input staging, output fetching.

Three methods cover the supported movement styles:

    LocalCopy    direct filesystem copy
    RemoteStore  put/get against a content store `<store>/objects/<name>`
    Sandbox      staging through the job's sandbox directory

Handlers pick the method during configuration; jobs headed to a queue
or the grid use Sandbox, locally executed jobs use LocalCopy. Element
locations of the form `store:<name>` always move through the
RemoteStore regardless of the job's primary method.
"""

from __future__ import annotations

import shutil
import stat
from pathlib import Path

from .. import scriptgen
from ..errors import MissingOutput, SourceMissing, StoreUnreachable, UnresolvedLogicalName
from ..jobmodel import INPUT_FILE, InputFile, Workflow

METHODS = ("LocalCopy", "RemoteStore", "Sandbox")


def local_copy(src, dst) -> None:
    src = Path(src)
    if not src.is_file():
        raise SourceMissing(str(src))
    dst = Path(dst)
    dst.parent.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(src, dst)
    shutil.copymode(src, dst)


class RemoteStore:
    """Named-object store standing in for a remote transfer service."""

    def __init__(self, store_root):
        self.root = Path(store_root) / "objects"

    def _ensure(self) -> Path:
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreUnreachable(str(exc)) from None
        return self.root

    def put(self, src, name: str) -> None:
        src = Path(src)
        if not src.is_file():
            raise SourceMissing(str(src))
        local_copy(src, self._ensure() / name)

    def get(self, name: str, dst) -> None:
        path = self._ensure() / name
        if not path.is_file():
            raise SourceMissing(f"store:{name}")
        local_copy(path, dst)

    def has(self, name: str) -> bool:
        return (self._ensure() / name).is_file()


def transfer(method: str, src: str, dst: str, store_root=None, sandbox=None) -> None:
    """Move one file by method; `store:<name>` locations hit the store."""
    if method not in METHODS:
        raise SourceMissing(f"unknown transfer method {method!r}")
    if method == "RemoteStore":
        store = RemoteStore(store_root)
        if str(dst).startswith("store:"):
            store.put(src, str(dst)[6:])
        elif str(src).startswith("store:"):
            store.get(str(src)[6:], dst)
        else:
            raise SourceMissing("RemoteStore transfer needs a store:<name> endpoint")
        return
    if method == "Sandbox" and sandbox is not None:
        dst_path = Path(dst)
        if not dst_path.is_absolute():
            dst_path = Path(sandbox) / dst_path
        local_copy(src, dst_path)
        return
    local_copy(src, dst)


# -- staging ----------------------------------------------------------------

def input_source(element, job_dir: Path):
    """Where an InputFile's bytes come from.

    Returns a filesystem path, or the string `store:<name>` for
    store-held inputs (fetched via RemoteStore by the caller).
    """
    if element.resolved:
        return Path(element.resolved)
    location = element.location
    if not location:
        return job_dir / "input" / element.name
    if location.startswith("store:"):
        return location
    if location.startswith("lfn:"):
        raise UnresolvedLogicalName(location)
    return Path(location)


def stage_sandbox(job, job_dir: Path, store_root) -> Path:
    """Populate the job sandbox: script, inputs, and the app image."""
    sandbox = job_dir / "sandbox"
    (sandbox / "input").mkdir(parents=True, exist_ok=True)
    (sandbox / "output").mkdir(parents=True, exist_ok=True)
    local_copy(job_dir / "script.sh", sandbox / "script.sh")
    for element in job.workflow.input_files:
        src = input_source(element, job_dir)
        dst = sandbox / "input" / element.name
        if isinstance(src, str):
            RemoteStore(store_root).get(src[6:], dst)
        else:
            local_copy(src, dst)
    image = resolve_image(job.application.image_location)
    if image is not None:
        payload = image / job.application.name
        if payload.is_file():
            target = sandbox / job.application.name
            local_copy(payload, target)
            target.chmod(target.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return sandbox


def resolve_image(image_location: str):
    """Application image directory; `pkg:<relpath>` means packaged data."""
    if not image_location:
        return None
    if image_location.startswith("pkg:"):
        from importlib import resources

        root = resources.files("forge")
        return Path(str(root.joinpath(image_location[4:])))
    return Path(image_location)


def write_job_files(job, job_dir: Path, dialect: str | None, with_jdl: bool,
                    catalogue, method: str) -> None:
    """The configure step: resolve lfn inputs, write script.sh/jdl.txt."""
    elements = []
    changed = False
    for element in job.workflow.elements:
        if (element.kind == INPUT_FILE and element.location.startswith("lfn:")
                and not element.resolved):
            elements.append(InputFile(element.name, element.location,
                                      catalogue.resolve(element.location)))
            changed = True
        else:
            elements.append(element)
    if changed:
        job.workflow = Workflow(tuple(elements))
    script = scriptgen.generate_script(job, dialect)
    script_path = job_dir / "script.sh"
    script_path.write_text(script.text, "utf-8")
    script_path.chmod(script_path.stat().st_mode | stat.S_IXUSR)
    if with_jdl:
        (job_dir / "jdl.txt").write_text(scriptgen.generate_jdl(job), "utf-8")
    job.transfer_method = method


# -- fetching ---------------------------------------------------------------

def fetch_output(job, job_dir: Path, output_dir: Path, store_root) -> list[str]:
    """Copy stdout/stderr plus declared outputs into the output directory.

    Raises MissingOutput for the first declared output the payload did
    not produce. Idempotent: re-fetching overwrites identical copies.
    """
    src_dir = job_dir / "sandbox" / "output"
    output_dir.mkdir(parents=True, exist_ok=True)
    retrieved = []
    for name in ("stdout.txt", "stderr.txt"):
        src = src_dir / name
        if src.is_file():
            local_copy(src, output_dir / name)
            retrieved.append(str(output_dir / name))
    for element in job.workflow.output_files:
        src = src_dir / element.name
        if not src.is_file():
            raise MissingOutput(element.name)
        local_copy(src, output_dir / element.name)
        retrieved.append(str(output_dir / element.name))
        if element.location.startswith("store:"):
            RemoteStore(store_root).put(src, element.location[6:])
        elif element.location:
            local_copy(src, Path(element.location))
    return retrieved
