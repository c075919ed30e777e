"""Typed values shared by component parameters and job options.

A value type is one of: boolean, integer, real, string, enum, sequence,
or list(<scalar type>). Numeric types may carry an inclusive [lo, hi]
range; enum carries its choices. The same checker backs the bus's
ParamSpec and the options editor's OptionSpec.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NotAChoice, OutOfRange, TypeMismatch

SCALAR_KINDS = ("boolean", "integer", "real", "string", "enum")
KINDS = SCALAR_KINDS + ("list", "sequence")


@dataclass(frozen=True)
class ValueType:
    kind: str
    item: "ValueType | None" = None  # element type for list

    def __str__(self) -> str:
        if self.kind == "list":
            return f"list({self.item})"
        return self.kind


def parse_type(text: str) -> ValueType:
    """Parse a type name like ``integer`` or ``list(string)``."""
    text = text.strip()
    if text.startswith("list(") and text.endswith(")"):
        inner = parse_type(text[5:-1])
        if inner.kind not in SCALAR_KINDS:
            raise TypeMismatch(f"unsupported list element type {inner}")
        return ValueType("list", inner)
    if text not in SCALAR_KINDS + ("sequence",):
        raise TypeMismatch(f"unknown value type {text!r}")
    return ValueType(text)


def check_value(value, vtype: ValueType, value_range=None, choices=None):
    """Validate and normalize a value against a type, range and choices.

    Returns the normalized value; raises TypeMismatch, OutOfRange or
    NotAChoice. Booleans are never accepted where numbers are expected.
    """
    kind = vtype.kind
    if kind == "boolean":
        if not isinstance(value, bool):
            raise TypeMismatch(f"expected boolean, got {value!r}")
        return value
    if kind == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeMismatch(f"expected integer, got {value!r}")
        _check_range(value, value_range)
        return value
    if kind == "real":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeMismatch(f"expected real, got {value!r}")
        value = float(value)
        _check_range(value, value_range)
        return value
    if kind == "string":
        if not isinstance(value, str):
            raise TypeMismatch(f"expected string, got {value!r}")
        return value
    if kind == "enum":
        if not isinstance(value, str):
            raise TypeMismatch(f"expected enum value, got {value!r}")
        if not choices or value not in choices:
            raise NotAChoice(f"{value!r} not among {list(choices or [])}")
        return value
    if kind == "list":
        if not isinstance(value, (list, tuple)):
            raise TypeMismatch(f"expected list, got {value!r}")
        return [check_value(v, vtype.item, value_range, choices) for v in value]
    if kind == "sequence":
        if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
            raise TypeMismatch(f"expected sequence of strings, got {value!r}")
        return list(value)
    raise TypeMismatch(f"unhandled type {kind}")


def _check_range(value, value_range):
    if value_range is None:
        return
    lo, hi = value_range
    if not (lo <= value <= hi):
        raise OutOfRange(f"{value} outside [{fmt_num(lo)}, {fmt_num(hi)}]")


def fmt_num(x) -> str:
    """Format a number; whole floats print as integers."""
    if isinstance(x, bool):
        raise TypeMismatch("boolean is not a number")
    if isinstance(x, float):
        if x.is_integer():
            return str(int(x))
        return repr(x)
    return str(x)


def render_scalar(value, vtype: ValueType) -> str:
    """Render one scalar in the options-text value syntax."""
    kind = vtype.kind
    if kind == "boolean":
        return "true" if value else "false"
    if kind == "integer":
        return str(value)
    if kind == "real":
        return repr(float(value))
    # strings and enum members are double-quoted
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_value(value, vtype: ValueType) -> str:
    if vtype.kind == "list":
        if not value:
            return "{}"
        return "{ " + ", ".join(render_scalar(v, vtype.item) for v in value) + " }"
    if vtype.kind == "sequence":
        if not value:
            return "{}"
        s = ValueType("string")
        return "{ " + ", ".join(render_scalar(v, s) for v in value) + " }"
    return render_scalar(value, vtype)


def parse_scalar(text: str, vtype: ValueType):
    text = text.strip()
    kind = vtype.kind
    if kind == "boolean":
        if text == "true":
            return True
        if text == "false":
            return False
        raise TypeMismatch(f"not a boolean: {text!r}")
    if kind == "integer":
        try:
            return int(text)
        except ValueError:
            raise TypeMismatch(f"not an integer: {text!r}") from None
    if kind == "real":
        try:
            return float(text)
        except ValueError:
            raise TypeMismatch(f"not a real: {text!r}") from None
    # string / enum
    return unquote(text)


def unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == '"' and text[-1] == '"':
        body = text[1:-1]
        out = []
        i = 0
        while i < len(body):
            c = body[i]
            if c == "\\" and i + 1 < len(body):
                out.append(body[i + 1])
                i += 2
            else:
                out.append(c)
                i += 1
        return "".join(out)
    return text


def split_braced(text: str) -> list[str]:
    """Split a ``{ "a", "b" }`` list into raw item strings."""
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise TypeMismatch(f"not a braced list: {text!r}")
    body = text[1:-1].strip()
    if not body:
        return []
    items = []
    current = []
    in_quote = False
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and in_quote and i + 1 < len(body):
            current.append(c)
            current.append(body[i + 1])
            i += 2
            continue
        if c == '"':
            in_quote = not in_quote
            current.append(c)
        elif c == "," and not in_quote:
            items.append("".join(current).strip())
            current = []
        else:
            current.append(c)
        i += 1
    items.append("".join(current).strip())
    return items


def parse_value(text: str, vtype: ValueType):
    if vtype.kind == "list":
        return [parse_scalar(i, vtype.item) for i in split_braced(text)]
    if vtype.kind == "sequence":
        s = ValueType("string")
        return [parse_scalar(i, s) for i in split_braced(text)]
    return parse_scalar(text, vtype)


def render_plain(value) -> str:
    """Render a value for the key-value metadata grammar (unquoted)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_plain(text: str, kind: str):
    """Parse a metadata value by scalar kind name."""
    return parse_scalar(text, ValueType(kind))
