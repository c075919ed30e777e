"""Workflow-to-script and workflow-to-JDL translation.

Both generators are pure functions of the Job value and emit fixed,
deterministic text so golden-file tests can compare bytes. The JDL
grammar here is also the grammar the mock grid parses back.

Script shape (POSIX sh):

    #!/bin/sh
    #BS <attr>=<v>            (batchsim dialect only)
    set -e
    PATH=".:$PATH"
    export PATH
    mkdir -p "output"
    cp "input/<name>" "<name>"            (one per InputFile)
    FORGE_PARAM_<NAME>=<value>            (one per Parameter)
    export FORGE_PARAM_<NAME>
    <executable> <args...>                (one per Executable)
    mv "<name>" "output/<name>"           (one per OutputFile)

The script works entirely inside its working directory: inputs are
staged from input/, outputs are collected into output/. `set -e` makes
the script exit with the first failing executable's code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import jobmodel, values
from .errors import UnsupportedDialect

DIALECTS = ("jdl", "batchsim")

_BARE_TOKEN = re.compile(r"[A-Za-z0-9_.:=/-]+")


@dataclass(frozen=True)
class RunScript:
    text: str
    declared_inputs: tuple[str, ...]
    declared_outputs: tuple[str, ...]


def sh_quote(token: str) -> str:
    """Single-quote a token unless it is bare-safe."""
    if token and _BARE_TOKEN.fullmatch(token):
        return token
    return "'" + token.replace("'", "'\\''") + "'"


def param_env_name(name: str) -> str:
    return "FORGE_PARAM_" + re.sub(r"[^A-Za-z0-9]", "_", name).upper()


def generate_script(job, dialect: str | None = None) -> RunScript:
    jobmodel.validate_job(job)
    lines = ["#!/bin/sh"]
    if dialect == "batchsim":
        lines.extend(translate_requirements(job.requirements, "batchsim"))
    lines.append("set -e")
    lines.append('PATH=".:$PATH"')
    lines.append("export PATH")
    lines.append('mkdir -p "output"')
    inputs = []
    outputs = []
    setup = []
    invocations = []
    collect = []
    for element in job.workflow.elements:
        if element.kind == jobmodel.INPUT_FILE:
            inputs.append(element.name)
            setup.append(f'cp "input/{element.name}" "{element.name}"')
        elif element.kind == jobmodel.EXECUTABLE:
            parts = [element.name] + [sh_quote(a) for a in element.args]
            invocations.append(" ".join(parts))
        elif element.kind == jobmodel.OUTPUT_FILE:
            outputs.append(element.name)
            collect.append(f'mv "{element.name}" "output/{element.name}"')
    params = []
    for element in job.workflow.parameters:
        env = param_env_name(element.name)
        rendered = sh_quote(values.render_plain(element.value))
        params.append(f"{env}={rendered}")
        params.append(f"export {env}")
    lines.extend(setup)
    lines.extend(params)
    lines.extend(invocations)
    lines.extend(collect)
    text = "\n".join(lines) + "\n"
    return RunScript(text, tuple(inputs), tuple(outputs))


def translate_requirements(requirements, dialect: str) -> list[str]:
    """Requirement entries to backend directive strings, order-preserving."""
    if dialect not in DIALECTS:
        raise UnsupportedDialect(dialect)
    out = []
    for req in requirements:
        if dialect == "jdl":
            if req.is_numeric:
                out.append(f"other.{req.name} >= {values.fmt_num(req.value)}")
            else:
                out.append(f'other.{req.name} == "{req.value}"')
        else:
            value = values.fmt_num(req.value) if req.is_numeric else str(req.value)
            out.append(f"#BS {req.name.lower()}={value}")
    return out


# -- JDL ------------------------------------------------------------------

def _jdl_string(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _jdl_list(items) -> str:
    return "{" + ", ".join(_jdl_string(i) for i in items) + "}"


def generate_jdl(job) -> str:
    """Job description text: fixed key order, one `Key = value;` per line."""
    jobmodel.validate_job(job)
    exe = job.workflow.executables[0]
    script = generate_script(job)
    lines = [f"Executable = {_jdl_string(exe.name)};"]
    if exe.args:
        lines.append(f"Arguments = {_jdl_string(' '.join(exe.args))};")
    lines.append('StdOutput = "stdout.txt";')
    lines.append('StdError = "stderr.txt";')
    lines.append(f"InputSandbox = {_jdl_list(('script.sh',) + script.declared_inputs)};")
    out_sandbox = ("stdout.txt", "stderr.txt") + script.declared_outputs
    lines.append(f"OutputSandbox = {_jdl_list(out_sandbox)};")
    clauses = translate_requirements(job.requirements, "jdl")
    body = " && ".join(clauses) if clauses else "true"
    lines.append(f"Requirements = {body};")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class JdlJob:
    """Parsed job description, as the mock grid consumes it."""

    executable: str
    arguments: str
    std_output: str
    std_error: str
    input_sandbox: tuple[str, ...]
    output_sandbox: tuple[str, ...]
    requirements: tuple  # (attr, op, value) triples; empty means `true`


def _parse_jdl_string(text: str, where: str) -> str:
    text = text.strip()
    if len(text) < 2 or text[0] != '"' or text[-1] != '"':
        raise ValueError(f"{where}: expected a quoted string, got {text!r}")
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


def _parse_jdl_reqs(text: str):
    text = text.strip()
    if text == "true":
        return ()
    triples = []
    for clause in text.split(" && "):
        m = re.fullmatch(r"other\.([A-Za-z0-9_]+) (>=|==) (.+)", clause.strip())
        if not m:
            raise ValueError(f"bad requirement clause {clause!r}")
        attr, op, raw = m.groups()
        if raw.startswith('"'):
            value = _parse_jdl_string(raw, "requirement")
        else:
            value = float(raw)
            if value.is_integer() and "." not in raw:
                value = int(raw)
        triples.append((attr, op, value))
    return tuple(triples)


def parse_jdl(text: str) -> JdlJob:
    fields = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if not line.endswith(";") or " = " not in line:
            raise ValueError(f"line {n}: not a `Key = value;` line")
        key, _, raw = line[:-1].partition(" = ")
        fields[key.strip()] = raw.strip()
    if "Executable" not in fields or "Requirements" not in fields:
        raise ValueError("missing Executable or Requirements")
    def listval(key):
        raw = fields.get(key, "{}").strip()
        if not raw.startswith("{") or not raw.endswith("}"):
            raise ValueError(f"{key}: expected a brace list")
        inner = raw[1:-1].strip()
        if not inner:
            return ()
        return tuple(_parse_jdl_string(i, key) for i in inner.split(", "))
    return JdlJob(
        executable=_parse_jdl_string(fields["Executable"], "Executable"),
        arguments=_parse_jdl_string(fields["Arguments"], "Arguments") if "Arguments" in fields else "",
        std_output=_parse_jdl_string(fields.get("StdOutput", '"stdout.txt"'), "StdOutput"),
        std_error=_parse_jdl_string(fields.get("StdError", '"stderr.txt"'), "StdError"),
        input_sandbox=listval("InputSandbox"),
        output_sandbox=listval("OutputSandbox"),
        requirements=_parse_jdl_reqs(fields["Requirements"]),
    )
