/**
 * DOM views: the folder tree on the left and the multi-purpose detail
 * panel (values + options editor) on the right.
 */

import { Api, ApiError, OptionRow } from "./api";
import { FolderTree, JobDetail, TreeGroup, jobChildren } from "./model";
import { buildWidget, readWidget } from "./widgets";

export interface TreeCallbacks {
  onSelect(jobId: string): void;
  onContextMenu(jobId: string, ev: MouseEvent): void;
  /** Expert mode expands a job into its parameter hierarchy. */
  loadChildren(jobId: string): Promise<TreeGroup[]>;
}

export class TreeView {
  private selected: string | null = null;
  private expanded = new Set<string>();
  private childCache = new Map<string, TreeGroup[]>();

  constructor(
    private container: HTMLElement,
    private model: FolderTree,
    private callbacks: TreeCallbacks,
  ) {
    this.container.classList.add("tree");
  }

  get selectedJob(): string | null {
    return this.selected;
  }

  select(jobId: string | null): void {
    this.selected = jobId;
    this.render();
    if (jobId) this.callbacks.onSelect(jobId);
  }

  /** A status change makes any cached hierarchy stale. */
  invalidate(jobId: string): void {
    this.childCache.delete(jobId);
  }

  render(): void {
    this.container.textContent = "";
    const list = document.createElement("ul");
    list.className = "folders";
    for (const folder of this.model.folders()) {
      const item = document.createElement("li");
      item.className = "folder";
      item.dataset.folder = folder.name;
      const head = document.createElement("div");
      head.className = "folder-name";
      head.textContent = `${folder.label} (${folder.jobs.length})`;
      item.appendChild(head);
      const jobs = document.createElement("ul");
      jobs.className = "folder-jobs";
      for (const job of folder.jobs) {
        jobs.appendChild(this.jobNode(job.id, job.name, job.status));
      }
      item.appendChild(jobs);
      list.appendChild(item);
    }
    this.container.appendChild(list);
  }

  private jobNode(id: string, name: string, status: string): HTMLLIElement {
    const li = document.createElement("li");
    li.className = "job";
    li.dataset.jobId = id;
    if (id === this.selected) li.classList.add("selected");
    const row = document.createElement("div");
    row.className = "job-row";
    if (this.model.expert) {
      const expander = document.createElement("button");
      expander.type = "button";
      expander.className = "expander";
      expander.textContent = this.expanded.has(id) ? "▾" : "▸";
      expander.addEventListener("click", (ev) => {
        ev.stopPropagation();
        void this.toggleExpand(id);
      });
      row.appendChild(expander);
    }
    const label = document.createElement("span");
    label.className = "job-label";
    label.textContent = `${id} ${name}`.trim();
    const badge = document.createElement("span");
    badge.className = "job-status";
    badge.textContent = status;
    row.append(label, badge);
    row.addEventListener("click", () => this.select(id));
    row.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      this.callbacks.onContextMenu(id, ev);
    });
    li.appendChild(row);
    if (this.model.expert && this.expanded.has(id)) {
      const cached = this.childCache.get(id);
      if (cached) li.appendChild(renderGroups(cached));
    }
    return li;
  }

  private async toggleExpand(id: string): Promise<void> {
    if (this.expanded.has(id)) {
      this.expanded.delete(id);
      this.render();
      return;
    }
    this.expanded.add(id);
    if (!this.childCache.has(id)) {
      try {
        this.childCache.set(id, await this.callbacks.loadChildren(id));
      } catch {
        this.expanded.delete(id);
        return;
      }
    }
    this.render();
  }
}

function renderGroups(groups: TreeGroup[]): HTMLUListElement {
  const list = document.createElement("ul");
  list.className = "job-params";
  for (const group of groups) {
    const item = document.createElement("li");
    item.className = "param-group";
    item.dataset.group = group.name;
    const head = document.createElement("span");
    head.className = "group-name";
    head.textContent = group.name;
    item.appendChild(head);
    const entries = document.createElement("ul");
    for (const [key, value] of group.entries) {
      const entry = document.createElement("li");
      entry.className = "param";
      entry.textContent = value === "" ? key : `${key}: ${value}`;
      entries.appendChild(entry);
    }
    item.appendChild(entries);
    list.appendChild(item);
  }
  return list;
}

interface EditableRow {
  field: string;
  value: string;
  /** Configure op committing the edit, built from the new text. */
  op?: (text: string) => [string, string];
  rename?: boolean;
}

export interface DetailCallbacks {
  onMutated(refresh: "list" | "job"): void;
  log(line: string): void;
}

export class DetailPanel {
  readonly element: HTMLElement;
  private banner: HTMLElement;
  private valuesPane: HTMLElement;
  private optionsPane: HTMLElement;
  private current: JobDetail | null = null;
  private schema: OptionRow[] | null = null;

  constructor(private api: Api, private callbacks: DetailCallbacks) {
    this.element = document.createElement("section");
    this.element.className = "detail";
    this.banner = document.createElement("div");
    this.banner.className = "detail-error hidden";
    const tabs = document.createElement("div");
    tabs.className = "tabs";
    for (const name of ["values", "options"]) {
      const tab = document.createElement("button");
      tab.type = "button";
      tab.className = "tab";
      tab.dataset.tab = name;
      tab.textContent = name === "values" ? "Values" : "Options";
      tab.addEventListener("click", () => this.showPane(name));
      tabs.appendChild(tab);
    }
    this.valuesPane = document.createElement("div");
    this.valuesPane.className = "pane";
    this.valuesPane.dataset.pane = "values";
    this.optionsPane = document.createElement("div");
    this.optionsPane.className = "pane hidden";
    this.optionsPane.dataset.pane = "options";
    this.element.append(tabs, this.banner, this.valuesPane, this.optionsPane);
    this.valuesPane.textContent = "no job selected";
  }

  private showPane(name: string): void {
    this.valuesPane.classList.toggle("hidden", name !== "values");
    this.optionsPane.classList.toggle("hidden", name !== "options");
    if (name === "options" && !this.schema) void this.renderOptions();
  }

  private showError(err: unknown): void {
    const text = err instanceof ApiError ? err.display : String(err);
    this.banner.textContent = text;
    this.banner.classList.remove("hidden");
    this.callbacks.log(text);
  }

  private clearError(): void {
    this.banner.textContent = "";
    this.banner.classList.add("hidden");
  }

  async show(jobId: string): Promise<void> {
    try {
      this.current = await this.api.getJob(jobId);
    } catch (err) {
      this.showError(err);
      return;
    }
    this.clearError();
    this.renderValues();
  }

  async refresh(): Promise<void> {
    if (this.current) await this.show(this.current.id);
  }

  get jobId(): string | null {
    return this.current?.id ?? null;
  }

  private rows(detail: JobDetail): EditableRow[] {
    const rows: EditableRow[] = [
      { field: "id", value: detail.id },
      { field: "name", value: detail.name, rename: true },
      {
        field: "status",
        value: detail.status_reason
          ? `${detail.status} (${detail.status_reason})`
          : detail.status,
      },
      { field: "backend", value: detail.backend_id },
    ];
    detail.workflow.forEach((el, i) => {
      if (el.kind === "Executable") {
        rows.push({
          field: `executable ${el.name}`,
          value: (el.args ?? []).join(" "),
        });
      } else if (el.kind === "Parameter") {
        rows.push({
          field: `parameter ${el.name}`,
          value: el.value ?? "",
          op: (text) => ["param", `${el.name}=${text}`],
        });
      } else {
        rows.push({
          field: `${el.kind === "InputFile" ? "input" : "output"} ${i + 1}`,
          value: el.name,
        });
      }
    });
    for (const req of detail.requirements) {
      rows.push({
        field: `require ${req.name}`,
        value: String(req.value),
        op: (text) => ["require", `${req.name}=${text}`],
      });
    }
    if (detail.subjob_ids.length) {
      rows.push({ field: "subjobs", value: detail.subjob_ids.join(" ") });
    }
    return rows;
  }

  private renderValues(): void {
    const detail = this.current!;
    const editable = detail.status === "in-preparation";
    this.valuesPane.textContent = "";
    this.valuesPane.classList.toggle("read-only", !editable);
    const table = document.createElement("table");
    table.className = "job-values";
    for (const row of this.rows(detail)) {
      const tr = document.createElement("tr");
      tr.dataset.field = row.field;
      const th = document.createElement("th");
      th.textContent = row.field;
      const td = document.createElement("td");
      td.textContent = row.value;
      const canEdit = editable && (row.rename || row.op) ? true : false;
      td.classList.toggle("editable", canEdit);
      if (canEdit) {
        td.addEventListener("dblclick", () => this.startEdit(td, row));
      }
      tr.append(th, td);
      table.appendChild(tr);
    }
    this.valuesPane.appendChild(table);
    if (!editable) {
      const note = document.createElement("p");
      note.className = "read-only-note";
      note.textContent = "values are read-only once a job leaves preparation";
      this.valuesPane.appendChild(note);
    }
  }

  private startEdit(cell: HTMLElement, row: EditableRow): void {
    if (cell.querySelector("input")) return;
    const original = row.value;
    cell.textContent = "";
    const input = document.createElement("input");
    input.type = "text";
    input.className = "edit-field";
    input.value = original;
    cell.appendChild(input);
    input.focus();
    input.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter") void this.commitEdit(row, input);
      else if (ev.key === "Escape") {
        cell.textContent = original;
      }
    });
  }

  private async commitEdit(row: EditableRow, input: HTMLInputElement): Promise<void> {
    const detail = this.current!;
    const text = input.value;
    try {
      if (row.rename) {
        this.current = await this.api.renameJob(detail.id, text);
      } else if (row.op) {
        this.current = await this.api.configureJob(detail.id, [row.op(text)]);
      }
    } catch (err) {
      // keep the input (and the typed text) so the edit can be fixed
      this.showError(err);
      return;
    }
    this.clearError();
    this.renderValues();
    this.callbacks.onMutated(row.rename ? "list" : "job");
  }

  private async renderOptions(): Promise<void> {
    try {
      this.schema = await this.api.optionsSchema();
    } catch (err) {
      this.showError(err);
      return;
    }
    this.optionsPane.textContent = "";
    const form = document.createElement("div");
    form.className = "options-form";
    // server order: favorites first, then schema order
    for (const row of this.schema) form.appendChild(buildWidget(row));
    const render = document.createElement("button");
    render.type = "button";
    render.className = "render-options";
    render.textContent = "Render";
    const output = document.createElement("pre");
    output.className = "options-output";
    render.addEventListener("click", () => void this.renderOptionsText(form, output));
    this.optionsPane.append(form, render, output);
  }

  private async renderOptionsText(form: HTMLElement, output: HTMLElement): Promise<void> {
    const fields = [...form.querySelectorAll<HTMLElement>(".option-field")];
    const sets: [string, string][] = fields.map((f) => [f.dataset.label!, readWidget(f)]);
    try {
      output.textContent = await this.api.optionsRender(sets);
      this.clearError();
    } catch (err) {
      this.showError(err);
    }
  }
}

export { jobChildren };
