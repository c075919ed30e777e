"""Job-options editor: schemas, typed option sets, rendering, templates.

An OptionSchema (loaded from a data file) declares every editable
option with its type, default, constraints, and a favorite flag. An
OptionSet holds the user's assignments on top of those defaults plus
user-defined sequences, whose entries can be enabled, disabled and
rearranged freely. Everything works without a UI; the presentation
selector merely describes which widget a front end should offer for a
given option type.

Rendered options text is deterministic: one `Owner.Name = value;` line
per schema option, in schema order, defaults filled in. The script
format carries the same assignments as `set Owner.Name value` lines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from . import meta, values
from .errors import (
    CorruptStore,
    InvalidSpec,
    NotAChoice,
    OutOfRange,
    ParseError,
    TypeMismatch,
    UnknownOption,
    UnknownTemplate,
)

PRESENTATION_KINDS = ("checkbox", "dropdown", "text-entry", "list-append", "sequence-arranger")


@dataclass(frozen=True)
class OptionSpec:
    owner: str
    name: str
    value_type: values.ValueType
    default: object
    range: tuple | None = None
    choices: tuple | None = None
    favorite: bool = False
    doc: str = ""

    @property
    def label(self) -> str:
        return f"{self.owner}.{self.name}" if self.owner else self.name

    @property
    def key(self) -> tuple[str, str]:
        return (self.owner, self.name)

    def check(self, value):
        return values.check_value(value, self.value_type, self.range, self.choices)


@dataclass(frozen=True)
class PresentationDescriptor:
    kind: str
    choices: tuple | None = None
    range: tuple | None = None


def presentation_for(spec: OptionSpec) -> PresentationDescriptor:
    """Widget selection as a total function of the value type."""
    kind = spec.value_type.kind
    if kind == "boolean":
        return PresentationDescriptor("checkbox")
    if kind == "enum":
        return PresentationDescriptor("dropdown", choices=spec.choices)
    if kind in ("integer", "real", "string"):
        return PresentationDescriptor("text-entry", range=spec.range)
    if kind == "list":
        return PresentationDescriptor("list-append", choices=spec.choices, range=spec.range)
    return PresentationDescriptor("sequence-arranger")


class OptionSchema:
    def __init__(self, options):
        self.options = tuple(options)
        self._by_key = {}
        for spec in self.options:
            if spec.key in self._by_key:
                raise InvalidSpec(spec.owner, spec.name, "duplicate (owner, name)")
            self._by_key[spec.key] = spec

    def find(self, owner: str, name: str) -> OptionSpec:
        spec = self._by_key.get((owner, name))
        if spec is None:
            raise UnknownOption(f"{owner}.{name}" if owner else name)
        return spec

    def find_label(self, label: str) -> OptionSpec:
        owner, dot, name = label.rpartition(".")
        if not dot:
            owner, name = "", label
        return self.find(owner, name)

    def find_sequence(self, name: str) -> OptionSpec:
        for spec in self.options:
            if spec.name == name and spec.value_type.kind == "sequence":
                return spec
        raise UnknownOption(name)


def favorites_first(schema: OptionSchema) -> list[OptionSpec]:
    """Stable partition: favorites in schema order, then the rest."""
    favorites = [s for s in schema.options if s.favorite]
    rest = [s for s in schema.options if not s.favorite]
    return favorites + rest


# -- schema file ------------------------------------------------------------

def parse_schema(text: str, source: str = "<schema>") -> OptionSchema:
    try:
        mapping = meta.loads(text, source)
    except CorruptStore as exc:
        m = re.match(r"line (\d+): (.*)", exc.reason)
        if m:
            raise ParseError(int(m.group(1)), m.group(2)) from None
        raise ParseError(0, exc.reason) from None
    options = []
    for sub in meta.indexed(mapping, "option"):
        owner = sub.get("owner", "")
        name = sub.get("name", "")
        if not name:
            raise InvalidSpec(owner, name, "missing name")
        try:
            vtype = values.parse_type(sub.get("type", "string"))
        except TypeMismatch as exc:
            raise InvalidSpec(owner, name, str(exc)) from None
        choices = tuple(meta.split_list(sub["choices"])) if "choices" in sub else None
        value_range = None
        if "range" in sub:
            bounds = meta.split_list(sub["range"])
            if len(bounds) != 2:
                raise InvalidSpec(owner, name, f"range needs two bounds, got {sub['range']!r}")
            item = vtype.item if vtype.kind == "list" else vtype
            try:
                lo, hi = (values.parse_scalar(b, item) for b in bounds)
            except TypeMismatch as exc:
                raise InvalidSpec(owner, name, str(exc)) from None
            value_range = (lo, hi)
        raw_default = sub.get("default", "")
        try:
            if vtype.kind in ("list", "sequence"):
                default = values.parse_value(raw_default, vtype) if raw_default else []
            else:
                default = values.parse_value(raw_default, vtype)
            default = values.check_value(default, vtype, value_range, choices)
        except (TypeMismatch, OutOfRange, NotAChoice) as exc:
            raise InvalidSpec(owner, name, f"bad default: {exc}") from None
        favorite = sub.get("favorite", "false") == "true"
        options.append(OptionSpec(owner, name, vtype, _freeze(default), value_range,
                                  choices, favorite, sub.get("doc", "")))
    return OptionSchema(options)


def load_schema(path) -> OptionSchema:
    path = Path(path)
    return parse_schema(path.read_text("utf-8"), str(path))


def _freeze(value):
    return tuple(value) if isinstance(value, list) else value


# -- option sets -------------------------------------------------------------

@dataclass
class OptionSet:
    schema: OptionSchema
    assignments: dict = field(default_factory=dict)
    sequences: dict = field(default_factory=dict)

    def value_of(self, spec: OptionSpec):
        if spec.value_type.kind == "sequence":
            if spec.name in self.sequences:
                return [text for text, enabled in self.sequences[spec.name] if enabled]
            return list(spec.default)
        if spec.key in self.assignments:
            return self.assignments[spec.key]
        return spec.default

    def is_default(self, spec: OptionSpec) -> bool:
        current = self.value_of(spec)
        default = list(spec.default) if spec.value_type.kind in ("list", "sequence") else spec.default
        current = list(current) if isinstance(current, tuple) else current
        return current == default


def set_option(option_set: OptionSet, owner: str, name: str, value) -> None:
    """Validate, then store; a rejected value changes nothing."""
    spec = option_set.schema.find(owner, name)
    if spec.value_type.kind == "sequence":
        raise TypeMismatch(f"{spec.label} is a sequence; use define_sequence")
    normalized = spec.check(value)
    option_set.assignments[spec.key] = _freeze(normalized)


def set_option_text(option_set: OptionSet, label: str, raw: str) -> None:
    """CLI-facing variant: the value arrives in options-text syntax."""
    spec = option_set.schema.find_label(label)
    if spec.value_type.kind == "sequence":
        entries = [(item, True) for item in values.parse_value(raw, spec.value_type)]
        define_sequence(option_set, spec.name, entries)
        return
    value = values.parse_value(raw, spec.value_type)
    set_option(option_set, spec.owner, spec.name, value)


def define_sequence(option_set: OptionSet, name: str, entries) -> None:
    """Store a sequence's entries: (text, enabled) pairs, order kept."""
    option_set.schema.find_sequence(name)
    option_set.sequences[name] = tuple((str(t), bool(e)) for t, e in entries)


# -- rendering ----------------------------------------------------------------

def render_options(option_set: OptionSet, fmt: str = "options-text") -> str:
    lines = []
    for spec in option_set.schema.options:
        value = option_set.value_of(spec)
        text = values.render_value(value, spec.value_type)
        if fmt == "script":
            lines.append(f"set {spec.label} {text}")
        else:
            lines.append(f"{spec.label} = {text};")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_options(schema: OptionSchema, text: str) -> OptionSet:
    """Inverse of render_options(options-text): keeps non-default values."""
    option_set = OptionSet(schema)
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not line.endswith(";"):
            raise ParseError(n, "missing trailing ';'")
        body = line[:-1]
        label, sep, raw_value = body.partition(" = ")
        if not sep:
            raise ParseError(n, "missing ' = '")
        spec = schema.find_label(label.strip())
        try:
            value = values.parse_value(raw_value.strip(), spec.value_type)
            value = spec.check(value)
        except (TypeMismatch, OutOfRange, NotAChoice) as exc:
            raise ParseError(n, str(exc)) from None
        if spec.value_type.kind == "sequence":
            if list(value) != list(spec.default):
                define_sequence(option_set, spec.name, [(v, True) for v in value])
        else:
            option_set.assignments[spec.key] = _freeze(value)
    for spec in list(schema.options):
        if spec.key in option_set.assignments and option_set.is_default(spec):
            del option_set.assignments[spec.key]
    return option_set


# -- templates ----------------------------------------------------------------

def save_template(option_set: OptionSet, directory, name: str) -> Path:
    """Persist the set as an immutable snapshot (disabled entries kept)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    items = []
    for (owner, opt_name), value in sorted(option_set.assignments.items()):
        spec = option_set.schema.find(owner, opt_name)
        items.append({
            "owner": owner,
            "name": opt_name,
            "value": values.render_value(value, spec.value_type),
        })
    mapping = meta.flatten("assignment", items)
    seq_items = []
    for seq_name in sorted(option_set.sequences):
        entries = option_set.sequences[seq_name]
        sub = {"name": seq_name}
        sub.update(meta.flatten("entry", [
            {"text": text, "enabled": "true" if enabled else "false"}
            for text, enabled in entries
        ]))
        seq_items.append(sub)
    mapping.update(meta.flatten("sequence", seq_items))
    path = directory / f"{name}.opts"
    meta.write(path, mapping)
    return path


def load_template(schema: OptionSchema, directory, name: str) -> OptionSet:
    path = Path(directory) / f"{name}.opts"
    if not path.exists():
        raise UnknownTemplate(name)
    mapping = meta.read(path)
    option_set = OptionSet(schema)
    for sub in meta.indexed(mapping, "assignment"):
        spec = schema.find(sub.get("owner", ""), sub.get("name", ""))
        value = values.parse_value(sub.get("value", ""), spec.value_type)
        option_set.assignments[spec.key] = _freeze(spec.check(value))
    for sub in meta.indexed(mapping, "sequence"):
        entries = [
            (e.get("text", ""), e.get("enabled", "true") == "true")
            for e in meta.indexed(sub, "entry")
        ]
        define_sequence(option_set, sub.get("name", ""), entries)
    return option_set


def list_templates(directory) -> list[str]:
    directory = Path(directory)
    if not directory.is_dir():
        return []
    return sorted(p.stem for p in directory.glob("*.opts"))
