/**
 * Thin client for the job service HTTP API. Every method returns the
 * parsed response; non-2xx responses reject with an ApiError carrying
 * the server's error name, so callers can surface "409 JobActive"
 * style messages inline.
 */

import { JobDetail, JobEvent, JobSummary, OVERFLOW_WIRE, parseEvent } from "./model";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface MergeReport {
  merged: string[];
  copied: string[];
  missing: string[];
  complete: boolean;
}

export interface OptionRow {
  owner: string;
  name: string;
  label: string;
  type: string;
  widget: string;
  choices: string[] | null;
  range: number[] | null;
  default: unknown;
  favorite: boolean;
  doc: string;
}

export interface CommandResult {
  exit_code: number;
  output: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorName: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }

  /** The inline form shown to the user, e.g. "JobActive: j000001 is running". */
  get display(): string {
    return this.message ? `${this.errorName}: ${this.message}` : this.errorName;
  }
}

async function reject(resp: Response): Promise<never> {
  let errorName = `HTTP ${resp.status}`;
  let message = "";
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") errorName = body.error;
    if (body && typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body: keep the status line
  }
  throw new ApiError(resp.status, errorName, message);
}

export class Api {
  constructor(readonly fetchFn: FetchLike = (input, init) => fetch(input, init)) {}

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const resp = await this.fetchFn(path, init);
    if (!resp.ok) await reject(resp);
    return resp;
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    return (await this.request(method, path, body)).json() as Promise<T>;
  }

  private async text(method: string, path: string, body?: unknown): Promise<string> {
    return (await this.request(method, path, body)).text();
  }

  listJobs(status?: string): Promise<JobSummary[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.json("GET", `/jobs${query}`);
  }

  getJob(id: string): Promise<JobDetail> {
    return this.json("GET", `/jobs/${id}`);
  }

  createJob(template: string, overrides?: Record<string, string>): Promise<JobDetail> {
    return this.json("POST", "/jobs", { template, overrides: overrides ?? {} });
  }

  copyJob(id: string): Promise<JobDetail> {
    return this.json("POST", `/jobs/${id}/copy`);
  }

  deleteJob(id: string): Promise<{ deleted: string }> {
    return this.json("DELETE", `/jobs/${id}`);
  }

  renameJob(id: string, name: string): Promise<JobDetail> {
    return this.json("PATCH", `/jobs/${id}`, { rename: name });
  }

  configureJob(id: string, ops: [string, string][]): Promise<JobDetail> {
    return this.json("POST", `/jobs/${id}/configure`, { ops });
  }

  submitJob(id: string): Promise<JobDetail> {
    return this.json("POST", `/jobs/${id}/submit`);
  }

  killJob(id: string): Promise<JobDetail> {
    return this.json("POST", `/jobs/${id}/kill`);
  }

  fetchJob(id: string, dest?: string): Promise<{ files: string[] }> {
    return this.json("POST", `/jobs/${id}/fetch`, dest ? { dest } : {});
  }

  splitJob(id: string, max?: number, splitter?: string): Promise<JobDetail[]> {
    const body: Record<string, unknown> = {};
    if (max !== undefined) body.max = max;
    if (splitter !== undefined) body.splitter = splitter;
    return this.json("POST", `/jobs/${id}/split`, body);
  }

  mergeJob(id: string): Promise<MergeReport> {
    return this.json("POST", `/jobs/${id}/merge`);
  }

  monitorState(): Promise<{ running: boolean }> {
    return this.json("GET", "/monitor");
  }

  monitorStart(interval?: number): Promise<{ running: boolean }> {
    return this.json("POST", "/monitor/start", interval ? { interval } : {});
  }

  monitorStop(): Promise<{ running: boolean }> {
    return this.json("POST", "/monitor/stop");
  }

  optionsSchema(schema?: string): Promise<OptionRow[]> {
    const query = schema ? `?schema=${encodeURIComponent(schema)}` : "";
    return this.json("GET", `/options/schema${query}`);
  }

  optionsRender(
    sets: [string, string][],
    format: "options-text" | "script" = "options-text",
    template?: string,
  ): Promise<string> {
    const body: Record<string, unknown> = { set: sets, format };
    if (template) body.template = template;
    return this.text("POST", "/options/render", body);
  }

  runCommand(line: string): Promise<CommandResult> {
    return this.json("POST", "/commands", { line });
  }
}

export interface StreamHandlers {
  onEvent(evt: JobEvent): void;
  /** The server cut this consumer off; a full resync is required. */
  onOverflow(): void;
  /** The connection ended (EOF, error, overflow close). */
  onDrop(): void;
}

/**
 * Read the plain-text event stream line by line. Returns a stop
 * function; after stop() no handler fires again. Partial chunks are
 * buffered until their newline arrives.
 */
export function openEvents(
  handlers: StreamHandlers,
  fetchFn: FetchLike = (input, init) => fetch(input, init),
): () => void {
  let stopped = false;
  const controller = new AbortController();
  (async () => {
    try {
      const resp = await fetchFn("/events", { signal: controller.signal });
      if (!resp.ok || !resp.body) return;
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { done, value } = await reader.read();
        if (done || stopped) break;
        buffer += decoder.decode(value, { stream: true });
        let nl;
        while ((nl = buffer.indexOf("\n")) >= 0) {
          const line = buffer.slice(0, nl).trim();
          buffer = buffer.slice(nl + 1);
          if (!line || stopped) continue;
          if (line === OVERFLOW_WIRE) {
            handlers.onOverflow();
            continue;
          }
          const evt = parseEvent(line);
          if (evt) handlers.onEvent(evt);
        }
      }
    } catch {
      // connection failure: fall through to onDrop
    }
    if (!stopped) handlers.onDrop();
  })();
  return () => {
    stopped = true;
    controller.abort();
  };
}
