/** In-memory transport: request log plus canned routing, and a
 * hand-driven event stream source. */

import { FetchLike } from "../src/api";
import { JobDetail, JobSummary } from "../src/model";

export interface CapturedRequest {
  method: string;
  path: string;
  body: unknown;
}

export type RouteResult = Response | { status?: number; json?: unknown; text?: string };
export type RouteHandler = (req: CapturedRequest) => RouteResult;

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export class FakeServer {
  readonly calls: CapturedRequest[] = [];
  private routes: { method: string; path: string | RegExp; handler: RouteHandler }[] = [];

  on(method: string, path: string | RegExp, result: RouteResult | RouteHandler): this {
    const handler = typeof result === "function" ? result : () => result;
    this.routes.push({ method, path, handler });
    return this;
  }

  of(method: string, path: string | RegExp): CapturedRequest[] {
    return this.calls.filter(
      (c) =>
        c.method === method &&
        (typeof path === "string" ? c.path === path : path.test(c.path)),
    );
  }

  readonly fetchFn: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : undefined;
    const req: CapturedRequest = { method, path: input, body };
    this.calls.push(req);
    const route = this.routes.find(
      (r) =>
        r.method === method &&
        (typeof r.path === "string" ? r.path === input : r.path.test(input)),
    );
    if (!route) return jsonResponse({ error: "NotFound", message: input }, 404);
    const out = route.handler(req);
    if (out instanceof Response) return out;
    if (out.text !== undefined) {
      return new Response(out.text, {
        status: out.status ?? 200,
        headers: { "Content-Type": "text/plain; charset=utf-8" },
      });
    }
    return jsonResponse(out.json, out.status ?? 200);
  };
}

/** A /events response whose lines the test pushes by hand. */
export class EventStreamSource {
  readonly response: Response;
  private controller!: ReadableStreamDefaultController<Uint8Array>;
  private encoder = new TextEncoder();

  constructor() {
    const stream = new ReadableStream<Uint8Array>({
      start: (controller) => {
        this.controller = controller;
      },
    });
    this.response = new Response(stream, {
      status: 200,
      headers: { "Content-Type": "text/plain; charset=utf-8" },
    });
  }

  /** Push one complete wire line (newline added if missing). */
  push(line: string): void {
    this.pushRaw(line.endsWith("\n") ? line : line + "\n");
  }

  /** Push an arbitrary chunk, e.g. half a line. */
  pushRaw(chunk: string): void {
    this.controller.enqueue(this.encoder.encode(chunk));
  }

  close(): void {
    try {
      this.controller.close();
    } catch {
      // already closed
    }
  }
}

/** Let pending promise chains and stream reads settle. */
export async function flush(rounds = 3): Promise<void> {
  for (let i = 0; i < rounds; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

export function row(id: string, status: string, name = "demo"): JobSummary {
  return { id, name, status, backend_id: "local", updated_at: "1700000000" };
}

export function detail(id: string, status: string, over: Partial<JobDetail> = {}): JobDetail {
  return {
    id,
    name: "demo",
    status,
    status_reason: "",
    backend_id: "local",
    parent_id: "",
    subjob_ids: [],
    created_at: 1700000000,
    updated_at: 1700000000,
    output_dir: `/store/jobs/${id}/output`,
    ticket: "",
    transfer_method: "",
    application: { handler_id: "generic", image_location: "", name: "", version: "" },
    workflow: [
      { kind: "Executable", name: "echo", args: ["hello"] },
      { kind: "Parameter", name: "retries", value: "2" },
    ],
    requirements: [{ name: "cpu", value: 2 }],
    ...over,
  };
}
