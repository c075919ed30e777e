/** Scripted end-to-end run against a faked server: boot, submit via
 * the console, and watch the job walk the folders on event lines
 * alone. */

import { afterEach, describe, expect, it } from "vitest";

import { Api } from "../src/api";
import { Handles, boot } from "../src/main";
import { EventStreamSource, FakeServer, detail, flush, row } from "./helpers";

function jobsUnder(root: HTMLElement, folder: string): string[] {
  return [
    ...root.querySelectorAll<HTMLElement>(`[data-folder="${folder}"] .job`),
  ].map((el) => el.dataset.jobId!);
}

function folderOf(root: HTMLElement, jobId: string): string[] {
  return [...root.querySelectorAll<HTMLElement>(".folder")]
    .filter((f) => f.dataset.folder !== "All")
    .filter((f) => f.querySelector(`[data-job-id="${jobId}"]`))
    .map((f) => f.dataset.folder!);
}

describe("console-driven lifecycle", () => {
  let handles: Handles | null = null;

  afterEach(() => {
    handles?.stop();
    handles = null;
    document.body.textContent = "";
  });

  async function start(server: FakeServer): Promise<HTMLElement> {
    const root = document.createElement("div");
    document.body.appendChild(root);
    handles = await boot(root, {
      api: new Api(server.fetchFn),
      reconnectDelayMs: 1,
      ask: () => null,
    });
    await flush();
    return root;
  }

  it("starts the monitor on load", async () => {
    const stream = new EventStreamSource();
    const server = new FakeServer()
      .on("GET", "/jobs", { json: [] })
      .on("POST", "/monitor/start", { json: { running: true } })
      .on("GET", "/events", stream.response);
    await start(server);
    expect(server.of("POST", "/monitor/start")).toHaveLength(1);
  });

  it("moves the job through the folders on event lines alone", async () => {
    const stream = new EventStreamSource();
    const server = new FakeServer()
      .on("GET", "/jobs", { json: [row("j000001", "in-preparation")] })
      .on("POST", "/monitor/start", { json: { running: true } })
      .on("GET", "/events", stream.response)
      .on("POST", "/commands", { json: { exit_code: 0, output: "j000001 submitted\n" } });
    const root = await start(server);

    expect(folderOf(root, "j000001")).toEqual(["in-preparation"]);
    expect(jobsUnder(root, "All")).toEqual(["j000001"]);

    // submit through the embedded shell, exactly like the CLI verb
    const input = root.querySelector<HTMLInputElement>(".console-input")!;
    input.value = "submit j000001";
    root
      .querySelector("form.console-form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await flush();
    expect(server.of("POST", "/commands")[0].body).toEqual({ line: "submit j000001" });

    // the tree does not move until the server says so
    expect(folderOf(root, "j000001")).toEqual(["in-preparation"]);

    const hops: [string, string][] = [
      ["in-preparation", "submitted"],
      ["submitted", "running"],
      ["running", "completed"],
    ];
    let ts = 1700000001;
    for (const [from, to] of hops) {
      stream.push(`EVT j000001 ${from} ${to} ${ts++}`);
      await flush();
      expect(folderOf(root, "j000001")).toEqual([to]);
      expect(jobsUnder(root, "All")).toEqual(["j000001"]);
    }

    // moves were event-driven: the job list was fetched once, at boot
    expect(server.of("GET", "/jobs")).toHaveLength(1);
    // and every event line landed in the console log
    const log = root.querySelector(".console-log")!.textContent!;
    for (const [from, to] of hops) {
      expect(log).toContain(`EVT j000001 ${from} ${to}`);
    }
  });

  it("resyncs from GET /jobs after an overflow cut-off", async () => {
    const first = new EventStreamSource();
    const second = new EventStreamSource();
    let streams = 0;
    const server = new FakeServer()
      .on("GET", "/jobs", () => ({
        json:
          streams === 0
            ? [row("j000001", "running")]
            : [row("j000001", "completed"), row("j000002", "in-preparation")],
      }))
      .on("POST", "/monitor/start", { json: { running: true } })
      .on("GET", "/events", () => (streams++ === 0 ? first.response : second.response));
    const root = await start(server);
    expect(folderOf(root, "j000001")).toEqual(["running"]);

    // the server cuts this consumer off; the stream then closes
    first.push("EVT-OVERFLOW");
    first.close();
    await flush(6);

    expect(server.of("GET", "/jobs").length).toBe(2);
    expect(folderOf(root, "j000001")).toEqual(["completed"]);
    expect(jobsUnder(root, "All")).toEqual(["j000001", "j000002"]);
    expect(streams).toBe(2);
    const log = root.querySelector(".console-log")!.textContent!;
    expect(log).toContain("overflowed");
  });

  it("refreshes the list after console commands that change it", async () => {
    const stream = new EventStreamSource();
    let created = false;
    const server = new FakeServer()
      .on("GET", "/jobs", () => ({
        json: created ? [row("j000001", "in-preparation")] : [],
      }))
      .on("POST", "/monitor/start", { json: { running: true } })
      .on("GET", "/events", stream.response)
      .on("POST", "/commands", () => {
        created = true;
        return { json: { exit_code: 0, output: "j000001\n" } };
      });
    const root = await start(server);
    expect(jobsUnder(root, "All")).toEqual([]);

    const input = root.querySelector<HTMLInputElement>(".console-input")!;
    input.value = "create --template generic-exec";
    root
      .querySelector("form.console-form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await flush();

    expect(jobsUnder(root, "All")).toEqual(["j000001"]);
    expect(folderOf(root, "j000001")).toEqual(["in-preparation"]);
  });

  it("runs toolbar actions against the selected job", async () => {
    const stream = new EventStreamSource();
    const server = new FakeServer()
      .on("GET", "/jobs", { json: [row("j000001", "in-preparation")] })
      .on("GET", "/jobs/j000001", { json: detail("j000001", "in-preparation") })
      .on("POST", "/monitor/start", { json: { running: true } })
      .on("GET", "/events", stream.response)
      .on("POST", "/jobs/j000001/submit", { json: detail("j000001", "submitted") });
    const root = await start(server);

    root.querySelector<HTMLElement>('[data-job-id="j000001"] .job-row')!.click();
    await flush();
    root.querySelector<HTMLButtonElement>('[data-action="submit"]')!.click();
    await flush();

    expect(server.of("POST", "/jobs/j000001/submit")).toHaveLength(1);
    // still in-preparation in the tree: no optimistic move
    expect(folderOf(root, "j000001")).toEqual(["in-preparation"]);
    stream.push("EVT j000001 in-preparation submitted 1700000002");
    await flush();
    expect(folderOf(root, "j000001")).toEqual(["submitted"]);
  });

  it("opens a context menu whose entries are per-job actions", async () => {
    const stream = new EventStreamSource();
    const server = new FakeServer()
      .on("GET", "/jobs", { json: [row("j000001", "running")] })
      .on("POST", "/monitor/start", { json: { running: true } })
      .on("GET", "/events", stream.response)
      .on("POST", "/jobs/j000001/kill", { json: detail("j000001", "killed") });
    const root = await start(server);

    root
      .querySelector<HTMLElement>('[data-job-id="j000001"] .job-row')!
      .dispatchEvent(new MouseEvent("contextmenu", { bubbles: true, cancelable: true }));
    const menu = root.querySelector<HTMLElement>(".context-menu")!;
    expect(menu).not.toBeNull();
    menu.querySelector<HTMLButtonElement>('[data-action="kill"]')!.click();
    await flush();
    expect(server.of("POST", "/jobs/j000001/kill")).toHaveLength(1);
    expect(root.querySelector(".context-menu")).toBeNull();
  });
});
