/**
 * The toolbar/menu action manifest. Every action maps to exactly one
 * CLI verb, so a button click and the matching console line hit the
 * same server operation; the parity test asserts this table against
 * the documented verb set.
 */

import { Api } from "./api";

export interface ActionContext {
  jobId?: string;
  /** Ask the user for one field; null means cancelled. */
  ask(field: string, fallback?: string): string | null;
}

export interface ActionSpec {
  id: string;
  label: string;
  /** The CLI verb this action dispatches. */
  verb: string;
  needsJob: boolean;
  /** What must be refreshed afterwards; status moves arrive via /events. */
  refresh: "list" | "job" | "none";
  run(api: Api, ctx: ActionContext): Promise<string>;
}

const CANCELLED = "cancelled";

export const ACTIONS: ActionSpec[] = [
  {
    id: "create",
    label: "New Job",
    verb: "create",
    needsJob: false,
    refresh: "list",
    run: async (api, ctx) => {
      const template = ctx.ask("template", "generic-exec");
      if (template === null) return CANCELLED;
      const job = await api.createJob(template);
      return `created ${job.id}`;
    },
  },
  {
    id: "copy",
    label: "Copy",
    verb: "copy",
    needsJob: true,
    refresh: "list",
    run: async (api, ctx) => {
      const job = await api.copyJob(ctx.jobId!);
      return `copied ${ctx.jobId} to ${job.id}`;
    },
  },
  {
    id: "delete",
    label: "Delete",
    verb: "delete",
    needsJob: true,
    refresh: "list",
    run: async (api, ctx) => {
      await api.deleteJob(ctx.jobId!);
      return `deleted ${ctx.jobId}`;
    },
  },
  {
    id: "configure",
    label: "Configure",
    verb: "configure",
    needsJob: true,
    refresh: "job",
    run: async (api, ctx) => {
      // One op per prompt, in CLI form: "param retries=3", "arg hello".
      const raw = ctx.ask("op", "param key=value");
      if (raw === null) return CANCELLED;
      const space = raw.indexOf(" ");
      if (space <= 0) throw new Error(`op needs "<kind> <value>", got ${JSON.stringify(raw)}`);
      const op: [string, string] = [raw.slice(0, space), raw.slice(space + 1)];
      await api.configureJob(ctx.jobId!, [op]);
      return `configured ${ctx.jobId}`;
    },
  },
  {
    id: "submit",
    label: "Submit",
    verb: "submit",
    needsJob: true,
    refresh: "none",
    run: async (api, ctx) => {
      const job = await api.submitJob(ctx.jobId!);
      return `${job.id} ${job.status}`;
    },
  },
  {
    id: "kill",
    label: "Kill",
    verb: "kill",
    needsJob: true,
    refresh: "none",
    run: async (api, ctx) => {
      const job = await api.killJob(ctx.jobId!);
      return `${job.id} ${job.status}`;
    },
  },
  {
    id: "fetch",
    label: "Fetch Output",
    verb: "fetch",
    needsJob: true,
    refresh: "job",
    run: async (api, ctx) => {
      const result = await api.fetchJob(ctx.jobId!);
      return `fetched ${result.files.length} files`;
    },
  },
  {
    id: "split",
    label: "Split",
    verb: "split",
    needsJob: true,
    refresh: "list",
    run: async (api, ctx) => {
      const raw = ctx.ask("max input files per subjob", "2");
      if (raw === null) return CANCELLED;
      const max = Number(raw);
      if (!Number.isInteger(max)) throw new Error(`max must be an integer, got ${JSON.stringify(raw)}`);
      const subjobs = await api.splitJob(ctx.jobId!, max);
      return `split ${ctx.jobId} into ${subjobs.length} subjobs`;
    },
  },
  {
    id: "merge",
    label: "Merge",
    verb: "merge",
    needsJob: true,
    refresh: "job",
    run: async (api, ctx) => {
      const report = await api.mergeJob(ctx.jobId!);
      const state = report.complete ? "complete" : "incomplete";
      return `merged ${report.merged.length}, copied ${report.copied.length}, ` +
        `missing ${report.missing.length} (${state})`;
    },
  },
  {
    id: "monitor-start",
    label: "Start Monitor",
    verb: "monitor start",
    needsJob: false,
    refresh: "none",
    run: async (api) => {
      await api.monitorStart();
      return "monitor running";
    },
  },
  {
    id: "monitor-stop",
    label: "Stop Monitor",
    verb: "monitor stop",
    needsJob: false,
    refresh: "none",
    run: async (api) => {
      await api.monitorStop();
      return "monitor stopped";
    },
  },
];

export function actionById(id: string): ActionSpec | undefined {
  return ACTIONS.find((a) => a.id === id);
}
