"""Command-line front end.

Every verb maps one-to-one onto a Forge facade call, so a recorded
session log replays through this module unchanged. Output is terse and
line-oriented; `--porcelain` switches row output to tab-separated
fields for scripting.

Exit codes: 0 success, 1 domain error (error name on stderr), 2 usage.
"""

from __future__ import annotations

import argparse
import shlex
import sys

from . import optedit
from .api import Forge, store_root_from
from .errors import ForgeError

_POLL_WAIT = 0.5

VERBS = (
    "create", "copy", "rename", "delete", "configure", "submit", "kill",
    "status", "list", "split", "merge", "fetch", "monitor", "components",
    "options", "serve", "replay",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="define, submit, steer and collect computing jobs",
    )
    parser.add_argument("--store", help="job store root (default: $FORGE_STORE or ~/.forge)")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("create", help="create a job from a template")
    p.add_argument("--template", required=True)
    p.add_argument("--name")
    p.add_argument("--backend")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="template override in the job metadata grammar")

    p = sub.add_parser("copy", help="duplicate a job into a fresh one")
    p.add_argument("job_id")

    p = sub.add_parser("rename", help="change a job's name")
    p.add_argument("job_id")
    p.add_argument("new_name")

    p = sub.add_parser("delete", help="remove a job and its directory")
    p.add_argument("job_id")

    p = sub.add_parser("configure", help="edit a job still in preparation")
    p.add_argument("job_id")
    p.add_argument("--name")
    p.add_argument("--backend")
    p.add_argument("--drop", action="append", default=[], metavar="NAME")
    p.add_argument("--drop-require", action="append", default=[], metavar="ATTR")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--input", action="append", default=[], metavar="NAME[=LOCATION]")
    p.add_argument("--output", action="append", default=[], metavar="NAME[=LOCATION]")
    p.add_argument("--require", action="append", default=[], metavar="ATTR=VALUE")
    p.add_argument("--arg", action="append", default=[], metavar="VALUE",
                   help="replace the executable argument list")
    p.add_argument("--app", action="append", default=[], metavar="FIELD=VALUE")

    p = sub.add_parser("submit", help="hand a job to its backend")
    p.add_argument("job_id")

    p = sub.add_parser("kill", help="abort a submitted or running job")
    p.add_argument("job_id")

    p = sub.add_parser("status", help="print one job's status")
    p.add_argument("job_id")
    p.add_argument("--porcelain", action="store_true")

    p = sub.add_parser("list", help="list catalogued jobs")
    p.add_argument("--status")
    p.add_argument("--porcelain", action="store_true")

    p = sub.add_parser("split", help="fan a job out into subjobs")
    p.add_argument("job_id")
    p.add_argument("--max", type=int, help="chunk input files, at most MAX per subjob")
    p.add_argument("--splitter", help="splitter script writing a plan file")
    p.add_argument("--plan", help="use an existing plan file verbatim")

    p = sub.add_parser("merge", help="recombine subjob outputs")
    p.add_argument("job_id")

    p = sub.add_parser("fetch", help="retrieve a job's declared outputs")
    p.add_argument("job_id")
    p.add_argument("--dest", help="write outputs here instead of the job output dir")

    p = sub.add_parser("monitor", help="drive the status monitor")
    msub = p.add_subparsers(dest="action", required=True)
    m = msub.add_parser("poll", help="one polling pass over active jobs")
    m = msub.add_parser("start", help="start background polling")
    m.add_argument("--interval", type=float)
    m.add_argument("--until-idle", action="store_true",
                   help="block, printing events, until no job is active")
    m.add_argument("--timeout", type=float, default=120.0)
    m = msub.add_parser("stop", help="stop background polling")

    p = sub.add_parser("components", help="inspect and rewire the component bus")
    csub = p.add_subparsers(dest="action", required=True)
    c = csub.add_parser("list")
    c.add_argument("--functional")
    c.add_argument("--porcelain", action="store_true")
    c = csub.add_parser("connect")
    c.add_argument("name")
    c.add_argument("--alias")
    c = csub.add_parser("disconnect")
    c.add_argument("name")
    c = csub.add_parser("replace")
    c.add_argument("name")
    c.add_argument("replacement")
    c = csub.add_parser("pin")
    c.add_argument("name")
    c.add_argument("actual")
    csub.add_parser("graph")

    p = sub.add_parser("options", help="edit and render job options")
    osub = p.add_subparsers(dest="action", required=True)
    o = osub.add_parser("schema", help="list the option schema")
    o.add_argument("--schema")
    o.add_argument("--porcelain", action="store_true")
    o = osub.add_parser("render", help="render an option set")
    o.add_argument("--schema")
    o.add_argument("--format", choices=("options-text", "script"), default="options-text")
    o.add_argument("--template", help="start from a saved template")
    o.add_argument("--set", action="append", default=[], metavar="OWNER.NAME=VALUE")
    o = osub.add_parser("save-template", help="save an option set under a name")
    o.add_argument("name")
    o.add_argument("--schema")
    o.add_argument("--from", dest="base", help="start from a saved template")
    o.add_argument("--set", action="append", default=[], metavar="OWNER.NAME=VALUE")
    o = osub.add_parser("templates", help="list saved option templates")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--addr", default="127.0.0.1:8765")
    p.add_argument("--ui", action="store_true", help="also serve the bundled web UI")

    p = sub.add_parser("replay", help="re-run a recorded command script")
    p.add_argument("script")
    p.add_argument("--dry-run", action="store_true")

    return parser


def _configure_ops(ns) -> list[tuple[str, str]]:
    """Flags in a fixed order: removals first so add-after-drop works."""
    ops: list[tuple[str, str]] = []
    ops += [("drop", v) for v in ns.drop]
    ops += [("drop-require", v) for v in ns.drop_require]
    if ns.name is not None:
        ops.append(("name", ns.name))
    if ns.backend is not None:
        ops.append(("backend", ns.backend))
    ops += [("param", v) for v in ns.param]
    ops += [("input", v) for v in ns.input]
    ops += [("output", v) for v in ns.output]
    ops += [("require", v) for v in ns.require]
    ops += [("arg", v) for v in ns.arg]
    ops += [("app", v) for v in ns.app]
    return ops


def _kv_pairs(raw: list[str], flag: str) -> list[tuple[str, str]]:
    pairs = []
    for item in raw:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ForgeError(f"{flag} needs KEY=VALUE, got {item!r}")
        pairs.append((key, value))
    return pairs


def _rows(rows: list[dict], columns: list[str], porcelain: bool) -> str:
    if porcelain:
        return "\n".join("\t".join(r.get(c, "") for c in columns) for r in rows)
    if not rows:
        return "(none)"
    widths = [max(len(c), *(len(r.get(c, "")) for r in rows)) for c in columns]
    head = "  ".join(c.ljust(w) for c, w in zip(columns, widths))
    lines = [head]
    for r in rows:
        lines.append("  ".join(r.get(c, "").ljust(w) for c, w in zip(columns, widths)))
    return "\n".join(lines)


def dispatch(forge: Forge, ns, out=None) -> int:
    out = out or sys.stdout
    verb = ns.verb

    if verb == "create":
        overrides = {}
        if ns.name is not None:
            overrides["name"] = ns.name
        if ns.backend is not None:
            overrides["backend_id"] = ns.backend
        for key, value in _kv_pairs(ns.set, "--set"):
            overrides[key] = value
        job = forge.create_job(ns.template, overrides)
        print(job.id, file=out)
    elif verb == "copy":
        job = forge.copy_job(ns.job_id)
        print(job.id, file=out)
    elif verb == "rename":
        forge.rename_job(ns.job_id, ns.new_name)
    elif verb == "delete":
        forge.delete_job(ns.job_id)
    elif verb == "configure":
        forge.configure(ns.job_id, _configure_ops(ns))
    elif verb == "submit":
        job = forge.submit(ns.job_id)
        print(f"{job.id} {job.status}", file=out)
    elif verb == "kill":
        job = forge.kill(ns.job_id)
        print(f"{job.id} {job.status}", file=out)
    elif verb == "status":
        status, reason = forge.job_status(ns.job_id)
        if ns.porcelain:
            print(f"{ns.job_id}\t{status}\t{reason}", file=out)
        else:
            print(f"{ns.job_id} {status}" + (f" ({reason})" if reason else ""), file=out)
    elif verb == "list":
        rows = forge.list_jobs(ns.status)
        text = _rows(rows, ["id", "name", "status"], ns.porcelain)
        if text:
            print(text, file=out)
    elif verb == "split":
        plan_text = None
        if ns.plan:
            with open(ns.plan, encoding="utf-8") as fh:
                plan_text = fh.read()
        subjobs = forge.split(ns.job_id, max_files=ns.max,
                              splitter=ns.splitter, plan_text=plan_text)
        for sub in subjobs:
            print(sub.id, file=out)
    elif verb == "merge":
        report = forge.merge(ns.job_id)
        for name in report.merged:
            print(f"merged {name}", file=out)
        for name in report.copied:
            print(f"copied {name}", file=out)
        for name in report.missing:
            print(f"missing {name}", file=out)
        print("complete" if report.complete else "incomplete", file=out)
    elif verb == "fetch":
        for path in forge.fetch(ns.job_id, dest=ns.dest):
            print(path, file=out)
    elif verb == "monitor":
        return _dispatch_monitor(forge, ns, out)
    elif verb == "components":
        return _dispatch_components(forge, ns, out)
    elif verb == "options":
        return _dispatch_options(forge, ns, out)
    elif verb == "serve":
        from .httpd import serve
        serve(forge, ns.addr, with_ui=ns.ui)
    elif verb == "replay":
        return replay(forge, ns.script, dry_run=ns.dry_run, out=out)
    return 0


def _dispatch_monitor(forge: Forge, ns, out) -> int:
    if ns.action == "poll":
        for event in forge.monitor_poll():
            print(event.wire(), file=out)
    elif ns.action == "start":
        if ns.until_idle:
            subscription = forge.subscribe()
            forge.monitor_start(ns.interval)
            try:
                _print_until_idle(forge, subscription, ns.timeout, out)
            finally:
                forge.monitor_stop()
                subscription.close()
        else:
            forge.monitor_start(ns.interval)
    elif ns.action == "stop":
        forge.monitor_stop()
    return 0


def _print_until_idle(forge: Forge, subscription, timeout: float, out) -> None:
    import queue as queue_mod
    import time

    def emit(event):
        print(getattr(event, "wire", lambda: str(event))(), file=out)

    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            emit(subscription.get(timeout=_POLL_WAIT))
            continue
        except queue_mod.Empty:
            pass
        if not forge.active_jobs():
            for event in subscription.drain():
                emit(event)
            return


def _dispatch_components(forge: Forge, ns, out) -> int:
    if ns.action == "list":
        rows = forge.components_rows(ns.functional)
        print(_rows(rows, ["actual", "logical", "functional", "priority", "connected"],
                    ns.porcelain), file=out)
    elif ns.action == "connect":
        handle = forge.components_connect(ns.name, ns.alias)
        print(handle.descriptor.actual_name, file=out)
    elif ns.action == "disconnect":
        for name in sorted(forge.components_disconnect(ns.name)):
            print(name, file=out)
    elif ns.action == "replace":
        forge.components_replace(ns.name, ns.replacement)
    elif ns.action == "pin":
        forge.components_pin(ns.name, ns.actual)
    elif ns.action == "graph":
        print(forge.components_graph(), end="", file=out)
    return 0


def _dispatch_options(forge: Forge, ns, out) -> int:
    if ns.action == "schema":
        schema = forge.load_options_schema(ns.schema)
        rows = []
        for spec in optedit.favorites_first(schema):
            widget = optedit.presentation_for(spec)
            rows.append({
                "option": spec.label,
                "type": str(spec.value_type),
                "widget": widget.kind,
                "favorite": "yes" if spec.favorite else "no",
                "doc": spec.doc,
            })
        print(_rows(rows, ["option", "type", "widget", "favorite", "doc"],
                    ns.porcelain), file=out)
    elif ns.action == "render":
        option_set = forge.options_set(_kv_pairs(ns.set, "--set"),
                                       template=ns.template, schema_path=ns.schema)
        print(optedit.render_options(option_set, ns.format), end="", file=out)
    elif ns.action == "save-template":
        path = forge.options_save_template(ns.name, _kv_pairs(ns.set, "--set"),
                                           base=ns.base, schema_path=ns.schema)
        print(path, file=out)
    elif ns.action == "templates":
        for name in forge.options_templates():
            print(name, file=out)
    return 0


def replay(forge: Forge, script_path: str, dry_run: bool = False, out=None) -> int:
    """Re-run a recorded session line by line, stopping at the first failure."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        with open(script_path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        print(f"replay: {exc}", file=sys.stderr)
        return 1
    executed = 0
    for n, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        argv = shlex.split(line)
        if argv[0] not in VERBS:
            print(f"line {n}: unknown verb {argv[0]!r}", file=sys.stderr)
            return 2
        if argv[0] in ("serve", "replay"):
            print(f"line {n}: verb {argv[0]!r} not allowed in replay", file=sys.stderr)
            return 2
        try:
            ns = parser.parse_args(argv)
        except SystemExit:
            print(f"line {n}: bad arguments", file=sys.stderr)
            return 2
        if dry_run:
            executed += 1
            continue
        try:
            code = dispatch(forge, ns, out)
        except ForgeError as exc:
            print(f"line {n}: {exc.name}: {exc}", file=sys.stderr)
            return 1
        if code != 0:
            print(f"line {n}: exit {code}", file=sys.stderr)
            return code
        executed += 1
    if dry_run:
        print(f"{executed} commands ok", file=out)
    return 0


def run_line(forge: Forge, line: str) -> tuple[int, str]:
    """Execute one CLI line in-process; returns (exit code, output text).

    Both normal output and error text land in the returned string so an
    embedded console can echo everything inline.
    """
    import contextlib
    import io

    argv = shlex.split(line)
    if not argv:
        return 0, ""
    if argv[0] not in VERBS:
        return 2, f"unknown verb {argv[0]!r}\n"
    if argv[0] in ("serve", "replay"):
        return 2, f"verb {argv[0]!r} not available here\n"
    buf = io.StringIO()
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(buf):
            ns = parser.parse_args(argv)
    except SystemExit:
        return 2, buf.getvalue()
    try:
        code = dispatch(forge, ns, out=buf)
    except ForgeError as exc:
        buf.write(f"{exc.name}: {exc}\n")
        return 1, buf.getvalue()
    return code, buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    forge = Forge(store_root_from(ns.store))
    try:
        return dispatch(forge, ns)
    except ForgeError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
