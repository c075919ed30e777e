"""Persistent job store.

Layout under one root directory:

    <root>/catalogue.meta
    <root>/jobs/<id>/job.meta
    <root>/jobs/<id>/{script.sh, jdl.txt}
    <root>/jobs/<id>/{input/, output/, sandbox/}

The catalogue carries one summary row per job plus the id counter; the
per-job truth is job.meta. All files use the same key-value grammar and
are written atomically (temp file, then rename), so a crash between the
two leaves the previous version loadable. Ids are never reused.
"""

from __future__ import annotations

import shutil
import threading
from pathlib import Path

from . import jobmodel, meta
from .errors import CorruptStore, UnknownJob

CATALOGUE = "catalogue.meta"
JOB_META = "job.meta"

_ROW_KEYS = ("id", "name", "status", "backend_id", "updated_at")


class Registry:
    """Single-writer job store; every mutation runs under one lock."""

    def __init__(self, root):
        self.root = Path(root)
        self._lock = threading.RLock()
        self.ensure()

    # -- store layout ---------------------------------------------------

    def ensure(self) -> None:
        with self._lock:
            self.jobs_root.mkdir(parents=True, exist_ok=True)
            if not self.catalogue_path.exists():
                meta.write(self.catalogue_path, {"next_id": "1"})

    @property
    def catalogue_path(self) -> Path:
        return self.root / CATALOGUE

    @property
    def jobs_root(self) -> Path:
        return self.root / "jobs"

    def job_dir(self, job_id: str) -> Path:
        return self.jobs_root / job_id

    def job_meta_path(self, job_id: str) -> Path:
        return self.job_dir(job_id) / JOB_META

    def output_dir(self, job) -> Path:
        if job.output_dir:
            return Path(job.output_dir)
        return self.job_dir(job.id) / "output"

    # -- catalogue ------------------------------------------------------

    def _read_catalogue(self) -> tuple[int, list[dict]]:
        mapping = meta.read(self.catalogue_path)
        try:
            next_id = int(mapping.get("next_id", "1"))
        except ValueError:
            raise CorruptStore(str(self.catalogue_path), "next_id is not an integer") from None
        return next_id, meta.indexed(mapping, "entry")

    def _write_catalogue(self, next_id: int, rows: list[dict]) -> None:
        rows = sorted(rows, key=lambda r: r["id"])
        mapping = {"next_id": str(next_id)}
        mapping.update(meta.flatten("entry", rows))
        meta.write(self.catalogue_path, mapping)

    def allocate_id(self) -> str:
        """Reserve the next job id; the counter never moves backwards."""
        with self._lock:
            next_id, rows = self._read_catalogue()
            job_id = jobmodel.format_job_id(next_id)
            self._write_catalogue(next_id + 1, rows)
            return job_id

    @staticmethod
    def _row(job) -> dict:
        return {
            "id": job.id,
            "name": job.name,
            "status": job.status,
            "backend_id": job.backend_id,
            "updated_at": str(job.updated_at),
        }

    # -- job persistence --------------------------------------------------

    def save(self, job) -> None:
        with self._lock:
            job_dir = self.job_dir(job.id)
            for sub in ("input", "output", "sandbox"):
                (job_dir / sub).mkdir(parents=True, exist_ok=True)
            meta.write(self.job_meta_path(job.id), jobmodel.to_meta(job))
            next_id, rows = self._read_catalogue()
            rows = [r for r in rows if r.get("id") != job.id]
            rows.append(self._row(job))
            self._write_catalogue(next_id, rows)

    def load(self, job_id: str):
        with self._lock:
            _, rows = self._read_catalogue()
            if not any(r.get("id") == job_id for r in rows):
                raise UnknownJob(job_id)
            path = self.job_meta_path(job_id)
            mapping = meta.read(path)
            try:
                job = jobmodel.from_meta(mapping)
            except (ValueError, TypeError) as exc:
                raise CorruptStore(str(path), str(exc)) from None
            if job.id != job_id:
                raise CorruptStore(str(path), f"id field {job.id!r} does not match directory")
            return job

    def exists(self, job_id: str) -> bool:
        with self._lock:
            _, rows = self._read_catalogue()
            return any(r.get("id") == job_id for r in rows)

    def delete(self, job_id: str) -> None:
        with self._lock:
            next_id, rows = self._read_catalogue()
            kept = [r for r in rows if r.get("id") != job_id]
            if len(kept) == len(rows):
                raise UnknownJob(job_id)
            self._write_catalogue(next_id, kept)
            shutil.rmtree(self.job_dir(job_id), ignore_errors=True)

    def list_rows(self, status: str | None = None) -> list[dict]:
        with self._lock:
            _, rows = self._read_catalogue()
            if status is not None:
                rows = [r for r in rows if r.get("status") == status]
            return sorted(rows, key=lambda r: r.get("id", ""))

    def ids(self) -> list[str]:
        return [r["id"] for r in self.list_rows()]

    # -- consistency ------------------------------------------------------

    def fsck(self) -> list[tuple[str, str, str]]:
        """Report catalogue/disk mismatches as (kind, job_id, detail)."""
        with self._lock:
            findings = []
            _, rows = self._read_catalogue()
            seen = set()
            for row in rows:
                job_id = row.get("id", "")
                seen.add(job_id)
                job_dir = self.job_dir(job_id)
                if not job_dir.is_dir():
                    findings.append(("MissingDirectory", job_id, str(job_dir)))
                    continue
                path = self.job_meta_path(job_id)
                try:
                    mapping = meta.read(path)
                except CorruptStore as exc:
                    findings.append(("UnreadableMeta", job_id, exc.reason))
                    continue
                disk_status = mapping.get("status", "")
                if disk_status != row.get("status", ""):
                    findings.append((
                        "StatusMismatch", job_id,
                        f"catalogue={row.get('status', '')} meta={disk_status}",
                    ))
            if self.jobs_root.is_dir():
                for entry in sorted(self.jobs_root.iterdir()):
                    if entry.is_dir() and entry.name not in seen:
                        findings.append(("MissingEntry", entry.name, str(entry)))
            return findings
