"""HTTP service: a thin adapter from REST-ish routes onto the facade.

Every endpoint delegates to a Forge method; the only logic here is
request parsing, JSON shaping, and error-to-status mapping. `/events`
relays the monitor wire format verbatim, one line per event, until the
client disconnects or its queue overflows.
"""

from __future__ import annotations

import json
import queue as queue_mod
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import cli
from .api import Forge
from .errors import ForgeError
from .monitor import OVERFLOW, OVERFLOW_WIRE

_NOT_FOUND = {
    "UnknownJob", "UnknownTemplate", "UnknownName", "UnknownOption",
    "UnknownHandler", "UnknownTicket", "UnknownParam",
}
_CONFLICT = {
    "IllegalTransition", "JobActive", "AlreadyTerminal", "SubjobsActive",
    "NotConnected", "DisconnectedComponent", "DuplicateActualName",
    "ContractMismatch", "BackendUnavailable", "DependencyCycle",
}
_UNPROCESSABLE = {
    "InvalidOverride", "InvalidWorkflow", "InvalidSpec", "InvalidPlan",
    "TypeMismatch", "OutOfRange", "ParseError", "UnsupportedDialect",
    "MatchFailure", "NoInputFiles", "EmptyInput", "BinningMismatch",
    "SchemaMismatch", "SourceMissing", "MissingOutput",
    "UnresolvedLogicalName", "ScriptFailure", "NotAChoice",
}

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
}


class _BadRequest(Exception):
    pass


def error_status(exc: ForgeError) -> int:
    name = exc.name
    if name in _NOT_FOUND:
        return 404
    if name in _CONFLICT:
        return 409
    if name in _UNPROCESSABLE:
        return 422
    return 500


def job_to_json(job) -> dict:
    workflow = []
    for element in job.workflow.elements:
        entry = {"kind": element.kind, "name": element.name}
        if element.kind == "Executable":
            entry["args"] = list(element.args)
        elif element.kind == "Parameter":
            entry["value"] = element.value
        elif element.kind == "InputFile":
            entry["location"] = element.location
            entry["resolved"] = element.resolved
        elif element.kind == "OutputFile":
            entry["location"] = element.location
        workflow.append(entry)
    return {
        "id": job.id,
        "name": job.name,
        "status": job.status,
        "status_reason": job.status_reason,
        "backend_id": job.backend_id,
        "parent_id": job.parent_id,
        "subjob_ids": list(job.subjob_ids),
        "created_at": job.created_at,
        "updated_at": job.updated_at,
        "output_dir": job.output_dir,
        "ticket": job.ticket,
        "transfer_method": job.transfer_method,
        "application": {
            "handler_id": job.application.handler_id,
            "image_location": job.application.image_location,
            "name": job.application.name,
            "version": job.application.version,
        },
        "workflow": workflow,
        "requirements": [{"name": r.name, "value": r.value} for r in job.requirements],
    }


class ForgeRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "forge-httpd"

    # routes: (method, compiled pattern, handler attribute)
    ROUTES = [
        ("GET", r"^/jobs$", "list_jobs"),
        ("POST", r"^/jobs$", "create_job"),
        ("GET", r"^/jobs/(?P<job_id>[^/]+)$", "get_job"),
        ("PATCH", r"^/jobs/(?P<job_id>[^/]+)$", "patch_job"),
        ("DELETE", r"^/jobs/(?P<job_id>[^/]+)$", "delete_job"),
        ("POST", r"^/jobs/(?P<job_id>[^/]+)/copy$", "copy_job"),
        ("POST", r"^/jobs/(?P<job_id>[^/]+)/configure$", "configure_job"),
        ("POST", r"^/jobs/(?P<job_id>[^/]+)/submit$", "submit_job"),
        ("POST", r"^/jobs/(?P<job_id>[^/]+)/kill$", "kill_job"),
        ("POST", r"^/jobs/(?P<job_id>[^/]+)/fetch$", "fetch_job"),
        ("POST", r"^/jobs/(?P<job_id>[^/]+)/split$", "split_job"),
        ("POST", r"^/jobs/(?P<job_id>[^/]+)/merge$", "merge_job"),
        ("GET", r"^/components$", "list_components"),
        ("GET", r"^/components/graph$", "components_graph"),
        ("POST", r"^/components/connect$", "components_connect"),
        ("POST", r"^/components/disconnect$", "components_disconnect"),
        ("POST", r"^/components/replace$", "components_replace"),
        ("POST", r"^/components/pin$", "components_pin"),
        ("GET", r"^/monitor$", "monitor_state"),
        ("POST", r"^/monitor/start$", "monitor_start"),
        ("POST", r"^/monitor/stop$", "monitor_stop"),
        ("POST", r"^/monitor/poll$", "monitor_poll"),
        ("GET", r"^/events$", "events_stream"),
        ("GET", r"^/options/schema$", "options_schema"),
        ("POST", r"^/options/render$", "options_render"),
        ("GET", r"^/options/templates$", "options_templates"),
        ("POST", r"^/options/templates$", "options_save_template"),
        ("GET", r"^/templates$", "job_templates"),
        ("POST", r"^/commands$", "run_command"),
        ("GET", r"^/$", "ui_index"),
        ("GET", r"^/ui(?P<asset>/.*)?$", "ui_asset"),
    ]

    @property
    def forge(self) -> Forge:
        return self.server.forge

    def log_message(self, format, *args):  # silence per-request stderr noise
        return

    # -- plumbing -----------------------------------------------------

    def _dispatch(self, method: str):
        parsed = urlparse(self.path)
        self.query = {k: v[0] for k, v in parse_qs(parsed.query).items()}
        for route_method, pattern, attr in self.ROUTES:
            if route_method != method:
                continue
            match = re.match(pattern, parsed.path)
            if match:
                try:
                    getattr(self, attr)(**match.groupdict())
                except _BadRequest as exc:
                    self._send_json({"error": "BadRequest", "message": str(exc)},
                                    status=400)
                except ForgeError as exc:
                    self._send_json({"error": exc.name, "message": str(exc)},
                                    status=error_status(exc))
                except (BrokenPipeError, ConnectionResetError):
                    pass
                except Exception as exc:  # noqa: BLE001 - transport boundary
                    self._send_json({"error": type(exc).__name__, "message": str(exc)},
                                    status=500)
                return
        self._send_json({"error": "NotFound", "message": parsed.path}, status=404)

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PATCH(self):
        self._dispatch("PATCH")

    def do_DELETE(self):
        self._dispatch("DELETE")

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            data = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _BadRequest(f"bad request body: {exc}") from None
        if not isinstance(data, dict):
            raise _BadRequest("request body must be a JSON object")
        return data

    def _send_json(self, payload, status: int = 200) -> None:
        body = json.dumps(payload, indent=1).encode("utf-8") + b"\n"
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_text(self, text: str, status: int = 200,
                   content_type: str = "text/plain; charset=utf-8") -> None:
        body = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    # -- jobs -----------------------------------------------------------

    def list_jobs(self):
        rows = self.forge.list_jobs(self.query.get("status"))
        self._send_json(rows)

    def create_job(self):
        body = self._body()
        job = self.forge.create_job(body.get("template", ""),
                                    body.get("overrides") or {})
        self._send_json(job_to_json(job), status=201)

    def get_job(self, job_id: str):
        self._send_json(job_to_json(self.forge.load_job(job_id)))

    def patch_job(self, job_id: str):
        body = self._body()
        if "rename" in body:
            job = self.forge.rename_job(job_id, str(body["rename"]))
        else:
            ops = [(str(op), str(value)) for op, value in body.get("ops", [])]
            job = self.forge.configure(job_id, ops)
        self._send_json(job_to_json(job))

    def configure_job(self, job_id: str):
        body = self._body()
        ops = [(str(op), str(value)) for op, value in body.get("ops", [])]
        job = self.forge.configure(job_id, ops)
        self._send_json(job_to_json(job))

    def delete_job(self, job_id: str):
        self.forge.delete_job(job_id)
        self._send_json({"deleted": job_id})

    def copy_job(self, job_id: str):
        job = self.forge.copy_job(job_id)
        self._send_json(job_to_json(job), status=201)

    def submit_job(self, job_id: str):
        job = self.forge.submit(job_id)
        self._send_json(job_to_json(job))

    def kill_job(self, job_id: str):
        job = self.forge.kill(job_id)
        self._send_json(job_to_json(job))

    def fetch_job(self, job_id: str):
        body = self._body()
        files = self.forge.fetch(job_id, dest=body.get("dest"))
        self._send_json({"files": [str(p) for p in files]})

    def split_job(self, job_id: str):
        body = self._body()
        max_files = body.get("max")
        if max_files is not None:
            try:
                max_files = int(max_files)
            except (TypeError, ValueError):
                raise _BadRequest(f"max must be an integer, got {max_files!r}") from None
        subjobs = self.forge.split(
            job_id,
            max_files=max_files,
            splitter=body.get("splitter"),
            plan_text=body.get("plan"),
        )
        self._send_json([job_to_json(s) for s in subjobs], status=201)

    def merge_job(self, job_id: str):
        report = self.forge.merge(job_id)
        self._send_json({
            "merged": list(report.merged),
            "copied": list(report.copied),
            "missing": list(report.missing),
            "complete": report.complete,
        })

    # -- components --------------------------------------------------------

    def list_components(self):
        self._send_json(self.forge.components_rows(self.query.get("functional")))

    def components_graph(self):
        self._send_text(self.forge.components_graph())

    def components_connect(self):
        body = self._body()
        handle = self.forge.components_connect(body.get("name", ""), body.get("alias"))
        self._send_json({"actual": handle.descriptor.actual_name})

    def components_disconnect(self):
        removed = self.forge.components_disconnect(self._body().get("name", ""))
        self._send_json({"removed": sorted(removed)})

    def components_replace(self):
        body = self._body()
        self.forge.components_replace(body.get("name", ""), body.get("replacement", ""))
        self._send_json({"ok": True})

    def components_pin(self):
        body = self._body()
        self.forge.components_pin(body.get("name", ""), body.get("actual", ""))
        self._send_json({"ok": True})

    # -- monitor ---------------------------------------------------------------

    def monitor_state(self):
        self._send_json({"running": self.forge.monitor.running})

    def monitor_start(self):
        body = self._body()
        interval = body.get("interval")
        if interval is not None:
            try:
                interval = float(interval)
            except (TypeError, ValueError):
                raise _BadRequest(f"interval must be a number, got {interval!r}") from None
        self.forge.monitor_start(interval)
        self._send_json({"running": True})

    def monitor_stop(self):
        self.forge.monitor_stop()
        self._send_json({"running": False})

    def monitor_poll(self):
        events = self.forge.monitor_poll()
        self._send_json({"events": [e.wire() for e in events]})

    # -- events stream -------------------------------------------------------------

    def events_stream(self):
        subscription = self.forge.subscribe()
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/plain; charset=utf-8")
            self.send_header("Cache-Control", "no-store")
            self.send_header("Connection", "close")
            self.end_headers()
            while not self.server.stopping.is_set():
                try:
                    event = subscription.get(timeout=0.5)
                except queue_mod.Empty:
                    continue
                if event is OVERFLOW:
                    self.wfile.write((OVERFLOW_WIRE + "\n").encode("utf-8"))
                    self.wfile.flush()
                    break
                self.wfile.write((event.wire() + "\n").encode("utf-8"))
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            subscription.close()
            self.forge.hub.unsubscribe(subscription)
            self.close_connection = True

    # -- options ----------------------------------------------------------------------

    def options_schema(self):
        from . import optedit

        schema = self.forge.load_options_schema(self.query.get("schema"))
        rows = []
        for spec in optedit.favorites_first(schema):
            widget = optedit.presentation_for(spec)
            rows.append({
                "owner": spec.owner,
                "name": spec.name,
                "label": spec.label,
                "type": str(spec.value_type),
                "widget": widget.kind,
                "choices": list(spec.choices) if spec.choices else None,
                "range": list(spec.range) if spec.range else None,
                "default": spec.default if not isinstance(spec.default, tuple)
                           else list(spec.default),
                "favorite": spec.favorite,
                "doc": spec.doc,
            })
        self._send_json(rows)

    def options_render(self):
        from . import optedit

        body = self._body()
        sets = [(str(k), str(v)) for k, v in body.get("set", [])]
        option_set = self.forge.options_set(sets, template=body.get("template"),
                                            schema_path=body.get("schema"))
        self._send_text(optedit.render_options(option_set, body.get("format", "options-text")))

    def options_templates(self):
        self._send_json(self.forge.options_templates())

    def options_save_template(self):
        body = self._body()
        sets = [(str(k), str(v)) for k, v in body.get("set", [])]
        path = self.forge.options_save_template(body.get("name", ""), sets,
                                                base=body.get("from"))
        self._send_json({"path": str(path)}, status=201)

    def job_templates(self):
        self._send_json(self.forge.list_templates())

    # -- console -----------------------------------------------------------------------

    def run_command(self):
        line = str(self._body().get("line", ""))
        code, output = cli.run_line(self.forge, line)
        self._send_json({"exit_code": code, "output": output})

    # -- static UI ----------------------------------------------------------------------

    def ui_index(self):
        self.ui_asset("/index.html")

    def ui_asset(self, asset: str | None = None):
        root = self.server.ui_root
        if root is None:
            self._send_json({"error": "NotFound",
                             "message": "UI not enabled; run serve --ui"}, status=404)
            return
        name = (asset or "/index.html").lstrip("/") or "index.html"
        target = (root / name).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self._send_json({"error": "NotFound", "message": name}, status=404)
            return
        content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class ForgeServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, forge: Forge, address, with_ui: bool = False):
        super().__init__(address, ForgeRequestHandler)
        self.forge = forge
        self.stopping = threading.Event()
        self.ui_root = self._find_ui_root() if with_ui else None

    @staticmethod
    def _find_ui_root() -> Path | None:
        packaged = resources.files("forge") / "data" / "ui"
        root = Path(str(packaged))
        return root if root.is_dir() else None

    def shutdown(self):
        self.stopping.set()
        super().shutdown()


def make_server(forge: Forge, host: str = "127.0.0.1", port: int = 0,
                with_ui: bool = False) -> ForgeServer:
    return ForgeServer(forge, (host, port), with_ui=with_ui)


def serve(forge: Forge, addr: str, with_ui: bool = False) -> None:
    host, _, port = addr.rpartition(":")
    server = make_server(forge, host or "127.0.0.1", int(port), with_ui=with_ui)
    bound = server.server_address
    print(f"forge service on http://{bound[0]}:{bound[1]}/ "
          f"(store: {forge.store_root})", flush=True)
    try:
        server.serve_forever(poll_interval=0.2)
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
        forge.monitor_stop()
