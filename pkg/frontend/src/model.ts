/**
 * Client-side model of the job store: row and event types, wire-line
 * parsing, and the folder tree that groups jobs by status.
 */

export const STATUSES = [
  "in-preparation",
  "submitted",
  "running",
  "completed",
  "failed",
  "killed",
] as const;

export type JobStatus = (typeof STATUSES)[number];

export const FOLDER_LABELS: Record<JobStatus, string> = {
  "in-preparation": "In Preparation",
  submitted: "Submitted",
  running: "Running",
  completed: "Completed",
  failed: "Failed",
  killed: "Killed",
};

/** One row of GET /jobs. */
export interface JobSummary {
  id: string;
  name: string;
  status: string;
  backend_id: string;
  updated_at: string;
}

export interface WorkflowElement {
  kind: string;
  name: string;
  args?: string[];
  value?: string;
  location?: string;
  resolved?: string;
}

/** Full job body of GET /jobs/{id}. */
export interface JobDetail {
  id: string;
  name: string;
  status: string;
  status_reason: string;
  backend_id: string;
  parent_id: string;
  subjob_ids: string[];
  created_at: number;
  updated_at: number;
  output_dir: string;
  ticket: string;
  transfer_method: string;
  application: {
    handler_id: string;
    image_location: string;
    name: string;
    version: string;
  };
  workflow: WorkflowElement[];
  requirements: { name: string; value: string | number }[];
}

export interface JobEvent {
  jobId: string;
  from: string;
  to: string;
  ts: number;
  reason: string;
}

export const OVERFLOW_WIRE = "EVT-OVERFLOW";

/** Parse one wire line; null for anything that is not an event line. */
export function parseEvent(line: string): JobEvent | null {
  const parts = line.trim().split(" ");
  if (parts[0] !== "EVT" || parts.length < 5) return null;
  const ts = Number(parts[4]);
  if (!Number.isFinite(ts)) return null;
  return {
    jobId: parts[1],
    from: parts[2],
    to: parts[3],
    ts,
    reason: parts.slice(5).join(" "),
  };
}

/** Diagnostic events report a problem without a status change. */
export function isDiagnostic(evt: JobEvent): boolean {
  return evt.from === evt.to;
}

/**
 * Jobs grouped into one folder per status plus All. The tree never
 * moves a job optimistically: resync (GET /jobs) and applyEvent
 * (server event lines) are the only mutators.
 */
export class FolderTree {
  private jobs = new Map<string, JobSummary>();
  expert = false;

  /** Replace the whole population from a GET /jobs response. */
  resync(rows: JobSummary[]): void {
    this.jobs.clear();
    for (const row of rows) this.jobs.set(row.id, { ...row });
  }

  /** Apply one server event; true when a job changed folder. */
  applyEvent(evt: JobEvent): boolean {
    if (isDiagnostic(evt)) return false;
    const job = this.jobs.get(evt.jobId);
    if (!job) return false;
    job.status = evt.to;
    job.updated_at = String(evt.ts);
    return true;
  }

  get(id: string): JobSummary | undefined {
    return this.jobs.get(id);
  }

  get size(): number {
    return this.jobs.size;
  }

  /** Jobs in one folder ("All" or a status), ordered by id. */
  folder(name: string): JobSummary[] {
    const rows = [...this.jobs.values()].filter(
      (j) => name === "All" || j.status === name,
    );
    rows.sort((a, b) => (a.id < b.id ? -1 : a.id > b.id ? 1 : 0));
    return rows;
  }

  /** All folders in display order: All first, then one per status. */
  folders(): { name: string; label: string; jobs: JobSummary[] }[] {
    const out = [{ name: "All", label: "All", jobs: this.folder("All") }];
    for (const status of STATUSES) {
      out.push({ name: status, label: FOLDER_LABELS[status], jobs: this.folder(status) });
    }
    return out;
  }
}

export interface TreeGroup {
  name: string;
  entries: [string, string][];
}

/**
 * Expert-mode children of a job node: fixed groups in fixed order,
 * entries alphabetical within each group. Workflow entries carry a
 * zero-padded position so the alphabetical ordering is the workflow
 * ordering.
 */
export function jobChildren(detail: JobDetail): TreeGroup[] {
  const identity: [string, string][] = [
    ["created_at", String(detail.created_at)],
    ["id", detail.id],
    ["name", detail.name],
    ["parent_id", detail.parent_id],
    ["status", detail.status],
    ["status_reason", detail.status_reason],
    ["subjob_ids", detail.subjob_ids.join(" ")],
    ["updated_at", String(detail.updated_at)],
  ];
  const workflow: [string, string][] = detail.workflow.map((el, i) => {
    const pos = String(i + 1).padStart(2, "0");
    let shown = el.name;
    if (el.kind === "Executable") shown = [el.name, ...(el.args ?? [])].join(" ");
    else if (el.kind === "Parameter") shown = `${el.name} = ${el.value ?? ""}`;
    else if (el.location) shown = `${el.name} (${el.location})`;
    return [`${pos} ${el.kind}`, shown];
  });
  const requirements: [string, string][] = detail.requirements
    .map((r): [string, string] => [r.name, String(r.value)])
    .sort((a, b) => a[0].localeCompare(b[0]));
  const backend: [string, string][] = [
    ["app.handler_id", detail.application.handler_id],
    ["app.image_location", detail.application.image_location],
    ["app.name", detail.application.name],
    ["app.version", detail.application.version],
    ["backend_id", detail.backend_id],
    ["output_dir", detail.output_dir],
    ["ticket", detail.ticket],
    ["transfer_method", detail.transfer_method],
  ];
  return [
    { name: "identity", entries: identity },
    { name: "workflow", entries: workflow },
    { name: "requirements", entries: requirements },
    { name: "backend", entries: backend },
  ];
}
