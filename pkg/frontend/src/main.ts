/**
 * Boot: load the job list, start the monitor, connect the event
 * stream, and wire the toolbar, tree, detail panel and console
 * together. Folder moves come only from server event lines; GET /jobs
 * runs once at load and again on stream loss or after commands that
 * change the list itself.
 */

import { ACTIONS, ActionContext, ActionSpec } from "./actions";
import { Api, openEvents } from "./api";
import { CommandConsole } from "./console";
import { FolderTree, JobEvent, isDiagnostic, jobChildren } from "./model";
import { DetailPanel, TreeView } from "./ui";

/** Console verbs that change the job list (ids, names, backends). */
const LIST_VERBS = new Set(["create", "copy", "delete", "rename", "configure", "split"]);

export interface BootOptions {
  api?: Api;
  reconnectDelayMs?: number;
  /** Prompt hook; window.prompt outside tests. */
  ask?: (field: string, fallback?: string) => string | null;
}

export interface Handles {
  model: FolderTree;
  tree: TreeView;
  detail: DetailPanel;
  shell: CommandConsole;
  resync(): Promise<void>;
  stop(): void;
}

export async function boot(root: HTMLElement, options: BootOptions = {}): Promise<Handles> {
  const api = options.api ?? new Api();
  const reconnectDelay = options.reconnectDelayMs ?? 1500;
  const ask =
    options.ask ?? ((field: string, fallback?: string) => window.prompt(field, fallback ?? ""));

  root.textContent = "";
  const toolbar = document.createElement("header");
  toolbar.className = "toolbar";
  const layout = document.createElement("main");
  layout.className = "layout";
  const treeBox = document.createElement("nav");
  layout.appendChild(treeBox);
  root.append(toolbar, layout);

  const model = new FolderTree();
  const shell = new CommandConsole(
    (line) => api.runCommand(line),
    (line, result) => {
      const verb = line.split(/\s+/, 1)[0];
      if (result.exit_code === 0 && LIST_VERBS.has(verb)) void resync();
    },
  );

  const detail = new DetailPanel(api, {
    onMutated: (refresh) => {
      if (refresh === "list") void resync();
    },
    log: (line) => shell.append(line),
  });

  const tree: TreeView = new TreeView(treeBox, model, {
    onSelect: (jobId) => void detail.show(jobId),
    onContextMenu: (jobId, ev) => openContextMenu(jobId, ev),
    loadChildren: async (jobId) => jobChildren(await api.getJob(jobId)),
  });
  layout.appendChild(detail.element);
  root.appendChild(shell.element);

  async function resync(): Promise<void> {
    model.resync(await api.listJobs());
    tree.render();
  }

  function runAction(action: ActionSpec, jobId?: string): void {
    const ctx: ActionContext = { jobId: jobId ?? tree.selectedJob ?? undefined, ask };
    if (action.needsJob && !ctx.jobId) {
      shell.append(`${action.label}: select a job first`);
      return;
    }
    action
      .run(api, ctx)
      .then(async (line) => {
        shell.append(line);
        if (action.refresh === "list") await resync();
        else if (action.refresh === "job" && detail.jobId) await detail.refresh();
      })
      .catch((err) => shell.append(String(err instanceof Error ? err.message : err)));
  }

  for (const action of ACTIONS) {
    const button = document.createElement("button");
    button.type = "button";
    button.className = "action";
    button.dataset.action = action.id;
    button.textContent = action.label;
    button.addEventListener("click", () => runAction(action));
    toolbar.appendChild(button);
  }

  const expertLabel = document.createElement("label");
  expertLabel.className = "expert-toggle";
  const expertBox = document.createElement("input");
  expertBox.type = "checkbox";
  expertBox.addEventListener("change", () => {
    model.expert = expertBox.checked;
    tree.render();
  });
  expertLabel.append(expertBox, document.createTextNode(" expert"));
  const consoleToggle = document.createElement("button");
  consoleToggle.type = "button";
  consoleToggle.className = "console-toggle";
  consoleToggle.textContent = "Console";
  consoleToggle.addEventListener("click", () => shell.toggle());
  toolbar.append(expertLabel, consoleToggle);

  let menu: HTMLElement | null = null;
  function closeContextMenu(): void {
    menu?.remove();
    menu = null;
  }
  function openContextMenu(jobId: string, ev: MouseEvent): void {
    closeContextMenu();
    menu = document.createElement("div");
    menu.className = "context-menu";
    menu.style.left = `${ev.clientX}px`;
    menu.style.top = `${ev.clientY}px`;
    for (const action of ACTIONS.filter((a) => a.needsJob)) {
      const entry = document.createElement("button");
      entry.type = "button";
      entry.dataset.action = action.id;
      entry.textContent = action.label;
      entry.addEventListener("click", () => {
        closeContextMenu();
        runAction(action, jobId);
      });
      menu.appendChild(entry);
    }
    root.appendChild(menu);
  }
  root.addEventListener("click", () => closeContextMenu());

  await resync();
  try {
    await api.monitorStart();
    shell.append("monitor running");
  } catch (err) {
    shell.append(String(err instanceof Error ? err.message : err));
  }

  let stopped = false;
  let stopStream: (() => void) | null = null;
  let reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  function onEvent(evt: JobEvent): void {
    shell.append(
      `EVT ${evt.jobId} ${evt.from} ${evt.to}` + (evt.reason ? ` ${evt.reason}` : ""),
    );
    if (isDiagnostic(evt)) return;
    if (model.applyEvent(evt)) {
      tree.invalidate(evt.jobId);
      tree.render();
      if (detail.jobId === evt.jobId) void detail.refresh();
    }
  }

  function connect(): void {
    if (stopped) return;
    // the stream rides the Api's transport so tests inject one fetch
    stopStream = openEvents(
      {
        onEvent,
        onOverflow: () => shell.append("event stream overflowed; resyncing"),
        onDrop: () => {
          if (stopped) return;
          void resync();
          reconnectTimer = setTimeout(connect, reconnectDelay);
        },
      },
      api.fetchFn,
    );
  }

  connect();

  return {
    model,
    tree,
    detail,
    shell,
    resync,
    stop: () => {
      stopped = true;
      if (reconnectTimer) clearTimeout(reconnectTimer);
      stopStream?.();
    },
  };
}

const mount = document.getElementById("forge-app");
if (mount) {
  void boot(mount);
}
