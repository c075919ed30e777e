"""Job splitting and output merging.

Splitting fans a job out into subjobs over subsets of its input files,
either by fixed-size chunks or by an external splitter script that
writes a plan file. A plan must partition the parent's input list:
disjoint, covering, and order-preserving. Plans may also override
Parameter values per subjob.

Merging recombines subjob outputs: histogram files are summed bin by
bin, tables are concatenated, and anything else is copied side by side
suffixed with the producing subjob's id.

File formats:
    plan       `subjob.N.files = a.dat, b.dat` (+ `subjob.N.param.<name> = v`)
    histogram  line 1 `HIST <name> <nbins> <lo> <hi>`, line 2 counts
    table      TSV, first row headers
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from . import jobmodel, meta, values
from .errors import (
    BinningMismatch,
    EmptyInput,
    InvalidPlan,
    NoInputFiles,
    SchemaMismatch,
    ScriptFailure,
)


@dataclass(frozen=True)
class SubjobSpec:
    files: tuple[str, ...]
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SplitPlan:
    specs: tuple[SubjobSpec, ...]


def chunk_plan(names: list[str], max_files: int) -> SplitPlan:
    if max_files < 1:
        raise InvalidPlan(f"max_files_per_subjob must be >= 1, got {max_files}")
    specs = [
        SubjobSpec(tuple(names[i:i + max_files]))
        for i in range(0, len(names), max_files)
    ]
    return SplitPlan(tuple(specs))


def parse_plan(text: str) -> SplitPlan:
    mapping = meta.loads(text, "<plan>")
    specs = []
    for sub in meta.indexed(mapping, "subjob"):
        files = tuple(meta.split_list(sub.get("files", "")))
        overrides = {}
        for key, value in sub.items():
            if key.startswith("param."):
                overrides[key[6:]] = value
        specs.append(SubjobSpec(files, overrides))
    return SplitPlan(tuple(specs))


def render_plan(plan: SplitPlan) -> str:
    items = []
    for spec in plan.specs:
        item = {"files": meta.join_list(spec.files)}
        for name, value in sorted(spec.overrides.items()):
            item[f"param.{name}"] = value
        items.append(item)
    return meta.dumps(meta.flatten("subjob", items))


def validate_plan(parent_files: list[str], plan: SplitPlan) -> None:
    """Partition check: disjoint, covering, order-preserving."""
    position = {name: i for i, name in enumerate(parent_files)}
    seen: set[str] = set()
    for spec in plan.specs:
        last = -1
        for name in spec.files:
            if name not in position:
                raise InvalidPlan(f"unknown file {name!r}")
            if name in seen:
                raise InvalidPlan("not disjoint")
            seen.add(name)
            if position[name] < last:
                raise InvalidPlan("not order-preserving")
            last = position[name]
    if seen != set(parent_files):
        raise InvalidPlan("not covering")


def run_splitter(script_path, input_names: list[str], plan_path) -> SplitPlan:
    """Execute an external splitter: names on stdin, plan file as $1."""
    script_path = Path(script_path)
    if not script_path.is_file():
        raise ScriptFailure(127, f"no such splitter script: {script_path}")
    plan_path = Path(plan_path)
    plan_path.parent.mkdir(parents=True, exist_ok=True)
    proc = subprocess.run(
        ["/bin/sh", str(script_path), str(plan_path)],
        input="".join(n + "\n" for n in input_names),
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise ScriptFailure(proc.returncode, proc.stderr)
    if not plan_path.is_file():
        raise InvalidPlan("splitter wrote no plan file")
    return parse_plan(plan_path.read_text("utf-8"))


# -- subjob construction -----------------------------------------------------

def make_subjob(parent, spec: SubjobSpec, new_id: str, ts: int):
    """A copy of the parent restricted to one input subset."""
    job = parent.copy_as(new_id, ts)
    keep = set(spec.files)
    elements = [
        e for e in parent.workflow.elements
        if e.kind != jobmodel.INPUT_FILE or e.name in keep
    ]
    for name, raw in sorted(spec.overrides.items()):
        replaced = False
        for i, element in enumerate(elements):
            if element.kind == jobmodel.PARAMETER and element.name == name:
                elements[i] = jobmodel.Parameter(name, _retype(raw, element.value))
                replaced = True
                break
        if not replaced:
            elements.append(jobmodel.Parameter(name, raw))
    job.workflow = jobmodel.Workflow(tuple(elements))
    job.parent_id = parent.id
    return job


def _retype(raw: str, previous):
    """Keep the overridden parameter's previous scalar type."""
    kind = {bool: "boolean", int: "integer", float: "real"}.get(type(previous), "string")
    try:
        return values.parse_plain(raw, kind)
    except Exception:
        raise InvalidPlan(f"override {raw!r} is not a valid {kind}") from None


def input_names(job) -> list[str]:
    names = [e.name for e in job.workflow.input_files]
    if not names:
        raise NoInputFiles(job.id)
    return names


# -- histograms ---------------------------------------------------------------

@dataclass(frozen=True)
class Histogram:
    name: str
    nbins: int
    lo: float
    hi: float
    counts: tuple[float, ...]

    def __post_init__(self):
        if self.nbins < 1 or not self.lo < self.hi:
            raise ValueError(f"bad histogram axis: nbins={self.nbins} lo={self.lo} hi={self.hi}")
        if len(self.counts) != self.nbins:
            raise ValueError(f"{len(self.counts)} counts for {self.nbins} bins")

    def binning(self):
        return (self.name, self.nbins, self.lo, self.hi)


def parse_histogram(text: str) -> Histogram:
    lines = [l for l in text.splitlines() if l.strip()]
    if len(lines) < 2 or not lines[0].startswith("HIST "):
        raise ValueError("not a histogram file")
    _, name, nbins, lo, hi = lines[0].split()
    counts = tuple(float(c) for c in lines[1].split())
    return Histogram(name, int(nbins), float(lo), float(hi), counts)


def render_histogram(hist: Histogram) -> str:
    head = (f"HIST {hist.name} {hist.nbins} "
            f"{values.fmt_num(hist.lo)} {values.fmt_num(hist.hi)}")
    body = " ".join(values.fmt_num(c) for c in hist.counts)
    return head + "\n" + body + "\n"


def merge_histograms(inputs: list[Histogram]) -> Histogram:
    if not inputs:
        raise EmptyInput("no histograms to merge")
    head = inputs[0]
    counts = list(head.counts)
    for hist in inputs[1:]:
        if hist.binning() != head.binning():
            raise BinningMismatch(f"{hist.binning()} != {head.binning()}")
        counts = [a + b for a, b in zip(counts, hist.counts)]
    return Histogram(head.name, head.nbins, head.lo, head.hi, tuple(counts))


# -- tables -------------------------------------------------------------------

@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...] = ()

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row arity {len(row)} != {len(self.columns)} columns")


def parse_table(text: str) -> Table:
    lines = text.splitlines()
    if not lines or not lines[0]:
        raise ValueError("not a table file: missing header row")
    columns = tuple(lines[0].split("\t"))
    rows = tuple(tuple(line.split("\t")) for line in lines[1:] if line)
    return Table(columns, rows)


def render_table(table: Table) -> str:
    lines = ["\t".join(table.columns)]
    lines.extend("\t".join(str(v) for v in row) for row in table.rows)
    return "\n".join(lines) + "\n"


def merge_tables(inputs: list[Table]) -> Table:
    if not inputs:
        raise EmptyInput("no tables to merge")
    head = inputs[0]
    rows = list(head.rows)
    for table in inputs[1:]:
        if table.columns != head.columns:
            raise SchemaMismatch(f"{table.columns} != {head.columns}")
        rows.extend(table.rows)
    return Table(head.columns, tuple(rows))


# -- collection ---------------------------------------------------------------

@dataclass
class MergeReport:
    merged: list[str] = field(default_factory=list)
    copied: list[str] = field(default_factory=list)
    missing: list[tuple[str, str]] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.missing


def collect_outputs(parent, subjobs, outdir_of, parent_outdir) -> MergeReport:
    """Recombine subjob outputs into the parent's output directory.

    Subjobs must be passed in subjob-id order; `outdir_of(job)` maps a
    job to its output directory. Declared `.hist` outputs are merged by
    summation, `.tsv` by concatenation, everything else is copied as
    `<name>.<subjob id>`. Outputs a subjob failed to produce are listed
    as missing and skipped.
    """
    parent_outdir = Path(parent_outdir)
    parent_outdir.mkdir(parents=True, exist_ok=True)
    report = MergeReport()
    for element in parent.workflow.output_files:
        name = element.name
        present = []
        for sub in subjobs:
            path = Path(outdir_of(sub)) / name
            if path.is_file():
                present.append((sub.id, path))
            else:
                report.missing.append((sub.id, name))
        if not present:
            continue
        if name.endswith(".hist"):
            merged = merge_histograms([parse_histogram(p.read_text("utf-8")) for _, p in present])
            (parent_outdir / name).write_text(render_histogram(merged), "utf-8")
            report.merged.append(name)
        elif name.endswith(".tsv"):
            merged = merge_tables([parse_table(p.read_text("utf-8")) for _, p in present])
            (parent_outdir / name).write_text(render_table(merged), "utf-8")
            report.merged.append(name)
        else:
            for sub_id, path in present:
                target = parent_outdir / f"{name}.{sub_id}"
                target.write_bytes(path.read_bytes())
                report.copied.append(target.name)
    return report
