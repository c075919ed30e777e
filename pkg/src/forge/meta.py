"""The key-value metadata grammar.

UTF-8 lines ``key = value`` with ``#`` comments; lists are flattened to
``key.N`` indexed keys (1-based); keys are sorted lexicographically on
write so files are bit-exact for a given mapping. job.meta,
catalogue.meta, templates, backend config and split plans all share it.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from .errors import CorruptStore


def dumps(mapping: dict) -> str:
    lines = []
    for key in sorted(mapping):
        value = mapping[key]
        if value is None:
            continue
        line = f"{key} = {str(value)}"
        # any character splitlines() treats as a boundary would corrupt
        # the file on read-back, not just "\n"
        if line.splitlines() != [line]:
            raise ValueError(f"line break in metadata entry {key!r}")
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


def loads(text: str, source: str = "<string>") -> dict[str, str]:
    mapping: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CorruptStore(source, f"line {n}: missing '='")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise CorruptStore(source, f"line {n}: empty key")
        mapping[key] = value.strip()
    return mapping


def read(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CorruptStore(path, "missing file") from None
    except UnicodeDecodeError:
        raise CorruptStore(path, "not valid UTF-8") from None
    return loads(text, source=str(path))


def write(path, mapping: dict) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    path = Path(path)
    text = dumps(mapping)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        _rename(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


# seam for crash-safety tests to inject a failure at the rename boundary
def _rename(src, dst):
    os.replace(src, dst)


def indexed(mapping: dict[str, str], prefix: str) -> list[dict[str, str]]:
    """Collect ``<prefix>.N[.rest]`` keys into a list of sub-mappings.

    Returns them in ascending numeric N order; a bare ``<prefix>.N``
    value appears under the empty key "".
    """
    groups: dict[int, dict[str, str]] = {}
    dotted = prefix + "."
    for key, value in mapping.items():
        if not key.startswith(dotted):
            continue
        rest = key[len(dotted):]
        idx, _, sub = rest.partition(".")
        try:
            n = int(idx)
        except ValueError:
            continue
        groups.setdefault(n, {})[sub] = value
    return [groups[n] for n in sorted(groups)]


def flatten(prefix: str, items: list[dict]) -> dict[str, str]:
    """Inverse of indexed(): lay out sub-mappings as ``prefix.N.key``."""
    out: dict[str, str] = {}
    for n, item in enumerate(items, start=1):
        for sub, value in item.items():
            if value is None:
                continue
            key = f"{prefix}.{n}.{sub}" if sub else f"{prefix}.{n}"
            out[key] = str(value)
    return out


def split_list(value: str) -> list[str]:
    """Split a comma-separated inline list such as ``a.dat, b.dat``."""
    value = value.strip()
    if not value:
        return []
    return [item.strip() for item in value.split(",")]


def join_list(items) -> str:
    return ", ".join(str(i) for i in items)
