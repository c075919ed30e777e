// src/actions.ts
var CANCELLED = "cancelled";
var ACTIONS = [
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
    }
  },
  {
    id: "copy",
    label: "Copy",
    verb: "copy",
    needsJob: true,
    refresh: "list",
    run: async (api, ctx) => {
      const job = await api.copyJob(ctx.jobId);
      return `copied ${ctx.jobId} to ${job.id}`;
    }
  },
  {
    id: "delete",
    label: "Delete",
    verb: "delete",
    needsJob: true,
    refresh: "list",
    run: async (api, ctx) => {
      await api.deleteJob(ctx.jobId);
      return `deleted ${ctx.jobId}`;
    }
  },
  {
    id: "configure",
    label: "Configure",
    verb: "configure",
    needsJob: true,
    refresh: "job",
    run: async (api, ctx) => {
      const raw = ctx.ask("op", "param key=value");
      if (raw === null) return CANCELLED;
      const space = raw.indexOf(" ");
      if (space <= 0) throw new Error(`op needs "<kind> <value>", got ${JSON.stringify(raw)}`);
      const op = [raw.slice(0, space), raw.slice(space + 1)];
      await api.configureJob(ctx.jobId, [op]);
      return `configured ${ctx.jobId}`;
    }
  },
  {
    id: "submit",
    label: "Submit",
    verb: "submit",
    needsJob: true,
    refresh: "none",
    run: async (api, ctx) => {
      const job = await api.submitJob(ctx.jobId);
      return `${job.id} ${job.status}`;
    }
  },
  {
    id: "kill",
    label: "Kill",
    verb: "kill",
    needsJob: true,
    refresh: "none",
    run: async (api, ctx) => {
      const job = await api.killJob(ctx.jobId);
      return `${job.id} ${job.status}`;
    }
  },
  {
    id: "fetch",
    label: "Fetch Output",
    verb: "fetch",
    needsJob: true,
    refresh: "job",
    run: async (api, ctx) => {
      const result = await api.fetchJob(ctx.jobId);
      return `fetched ${result.files.length} files`;
    }
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
      const subjobs = await api.splitJob(ctx.jobId, max);
      return `split ${ctx.jobId} into ${subjobs.length} subjobs`;
    }
  },
  {
    id: "merge",
    label: "Merge",
    verb: "merge",
    needsJob: true,
    refresh: "job",
    run: async (api, ctx) => {
      const report = await api.mergeJob(ctx.jobId);
      const state = report.complete ? "complete" : "incomplete";
      return `merged ${report.merged.length}, copied ${report.copied.length}, missing ${report.missing.length} (${state})`;
    }
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
    }
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
    }
  }
];

// src/model.ts
var STATUSES = [
  "in-preparation",
  "submitted",
  "running",
  "completed",
  "failed",
  "killed"
];
var FOLDER_LABELS = {
  "in-preparation": "In Preparation",
  submitted: "Submitted",
  running: "Running",
  completed: "Completed",
  failed: "Failed",
  killed: "Killed"
};
var OVERFLOW_WIRE = "EVT-OVERFLOW";
function parseEvent(line) {
  const parts = line.trim().split(" ");
  if (parts[0] !== "EVT" || parts.length < 5) return null;
  const ts = Number(parts[4]);
  if (!Number.isFinite(ts)) return null;
  return {
    jobId: parts[1],
    from: parts[2],
    to: parts[3],
    ts,
    reason: parts.slice(5).join(" ")
  };
}
function isDiagnostic(evt) {
  return evt.from === evt.to;
}
var FolderTree = class {
  jobs = /* @__PURE__ */ new Map();
  expert = false;
  /** Replace the whole population from a GET /jobs response. */
  resync(rows) {
    this.jobs.clear();
    for (const row of rows) this.jobs.set(row.id, { ...row });
  }
  /** Apply one server event; true when a job changed folder. */
  applyEvent(evt) {
    if (isDiagnostic(evt)) return false;
    const job = this.jobs.get(evt.jobId);
    if (!job) return false;
    job.status = evt.to;
    job.updated_at = String(evt.ts);
    return true;
  }
  get(id) {
    return this.jobs.get(id);
  }
  get size() {
    return this.jobs.size;
  }
  /** Jobs in one folder ("All" or a status), ordered by id. */
  folder(name) {
    const rows = [...this.jobs.values()].filter(
      (j) => name === "All" || j.status === name
    );
    rows.sort((a, b) => a.id < b.id ? -1 : a.id > b.id ? 1 : 0);
    return rows;
  }
  /** All folders in display order: All first, then one per status. */
  folders() {
    const out = [{ name: "All", label: "All", jobs: this.folder("All") }];
    for (const status of STATUSES) {
      out.push({ name: status, label: FOLDER_LABELS[status], jobs: this.folder(status) });
    }
    return out;
  }
};
function jobChildren(detail) {
  const identity = [
    ["created_at", String(detail.created_at)],
    ["id", detail.id],
    ["name", detail.name],
    ["parent_id", detail.parent_id],
    ["status", detail.status],
    ["status_reason", detail.status_reason],
    ["subjob_ids", detail.subjob_ids.join(" ")],
    ["updated_at", String(detail.updated_at)]
  ];
  const workflow = detail.workflow.map((el, i) => {
    const pos = String(i + 1).padStart(2, "0");
    let shown = el.name;
    if (el.kind === "Executable") shown = [el.name, ...el.args ?? []].join(" ");
    else if (el.kind === "Parameter") shown = `${el.name} = ${el.value ?? ""}`;
    else if (el.location) shown = `${el.name} (${el.location})`;
    return [`${pos} ${el.kind}`, shown];
  });
  const requirements = detail.requirements.map((r) => [r.name, String(r.value)]).sort((a, b) => a[0].localeCompare(b[0]));
  const backend = [
    ["app.handler_id", detail.application.handler_id],
    ["app.image_location", detail.application.image_location],
    ["app.name", detail.application.name],
    ["app.version", detail.application.version],
    ["backend_id", detail.backend_id],
    ["output_dir", detail.output_dir],
    ["ticket", detail.ticket],
    ["transfer_method", detail.transfer_method]
  ];
  return [
    { name: "identity", entries: identity },
    { name: "workflow", entries: workflow },
    { name: "requirements", entries: requirements },
    { name: "backend", entries: backend }
  ];
}

// src/api.ts
var ApiError = class extends Error {
  constructor(status, errorName, message) {
    super(message);
    this.status = status;
    this.errorName = errorName;
    this.name = "ApiError";
  }
  status;
  errorName;
  /** The inline form shown to the user, e.g. "JobActive: j000001 is running". */
  get display() {
    return this.message ? `${this.errorName}: ${this.message}` : this.errorName;
  }
};
async function reject(resp) {
  let errorName = `HTTP ${resp.status}`;
  let message = "";
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") errorName = body.error;
    if (body && typeof body.message === "string") message = body.message;
  } catch {
  }
  throw new ApiError(resp.status, errorName, message);
}
var Api = class {
  constructor(fetchFn = (input, init) => fetch(input, init)) {
    this.fetchFn = fetchFn;
  }
  fetchFn;
  async request(method, path, body) {
    const init = { method };
    if (body !== void 0) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const resp = await this.fetchFn(path, init);
    if (!resp.ok) await reject(resp);
    return resp;
  }
  async json(method, path, body) {
    return (await this.request(method, path, body)).json();
  }
  async text(method, path, body) {
    return (await this.request(method, path, body)).text();
  }
  listJobs(status) {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.json("GET", `/jobs${query}`);
  }
  getJob(id) {
    return this.json("GET", `/jobs/${id}`);
  }
  createJob(template, overrides) {
    return this.json("POST", "/jobs", { template, overrides: overrides ?? {} });
  }
  copyJob(id) {
    return this.json("POST", `/jobs/${id}/copy`);
  }
  deleteJob(id) {
    return this.json("DELETE", `/jobs/${id}`);
  }
  renameJob(id, name) {
    return this.json("PATCH", `/jobs/${id}`, { rename: name });
  }
  configureJob(id, ops) {
    return this.json("POST", `/jobs/${id}/configure`, { ops });
  }
  submitJob(id) {
    return this.json("POST", `/jobs/${id}/submit`);
  }
  killJob(id) {
    return this.json("POST", `/jobs/${id}/kill`);
  }
  fetchJob(id, dest) {
    return this.json("POST", `/jobs/${id}/fetch`, dest ? { dest } : {});
  }
  splitJob(id, max, splitter) {
    const body = {};
    if (max !== void 0) body.max = max;
    if (splitter !== void 0) body.splitter = splitter;
    return this.json("POST", `/jobs/${id}/split`, body);
  }
  mergeJob(id) {
    return this.json("POST", `/jobs/${id}/merge`);
  }
  monitorState() {
    return this.json("GET", "/monitor");
  }
  monitorStart(interval) {
    return this.json("POST", "/monitor/start", interval ? { interval } : {});
  }
  monitorStop() {
    return this.json("POST", "/monitor/stop");
  }
  optionsSchema(schema) {
    const query = schema ? `?schema=${encodeURIComponent(schema)}` : "";
    return this.json("GET", `/options/schema${query}`);
  }
  optionsRender(sets, format = "options-text", template) {
    const body = { set: sets, format };
    if (template) body.template = template;
    return this.text("POST", "/options/render", body);
  }
  runCommand(line) {
    return this.json("POST", "/commands", { line });
  }
};
function openEvents(handlers, fetchFn = (input, init) => fetch(input, init)) {
  let stopped = false;
  const controller = new AbortController();
  (async () => {
    try {
      const resp = await fetchFn("/events", { signal: controller.signal });
      if (!resp.ok || !resp.body) return;
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (; ; ) {
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
    }
    if (!stopped) handlers.onDrop();
  })();
  return () => {
    stopped = true;
    controller.abort();
  };
}

// src/console.ts
var CommandConsole = class {
  constructor(runLine, onRan) {
    this.runLine = runLine;
    this.onRan = onRan;
    this.element = document.createElement("section");
    this.element.className = "console";
    this.log = document.createElement("pre");
    this.log.className = "console-log";
    const form = document.createElement("form");
    form.className = "console-form";
    this.input = document.createElement("input");
    this.input.type = "text";
    this.input.className = "console-input";
    this.input.placeholder = "forge command, e.g. submit j000001";
    form.appendChild(this.input);
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.run(this.input.value);
      this.input.value = "";
    });
    this.element.append(this.log, form);
  }
  runLine;
  onRan;
  element;
  log;
  input;
  async run(line) {
    const trimmed = line.trim();
    if (!trimmed) return;
    this.append(`forge> ${trimmed}`);
    let result;
    try {
      result = await this.runLine(trimmed);
    } catch (err) {
      this.append(String(err instanceof Error ? err.message : err));
      return;
    }
    const output = result.output.replace(/\n$/, "");
    if (output) this.append(output);
    if (result.exit_code !== 0) this.append(`(exit ${result.exit_code})`);
    this.onRan?.(trimmed, result);
  }
  /** Append one line to the log (commands, output, event lines). */
  append(line) {
    this.log.textContent += line + "\n";
    this.log.scrollTop = this.log.scrollHeight;
  }
  get hidden() {
    return this.element.classList.contains("hidden");
  }
  toggle(visible) {
    const show = visible ?? this.hidden;
    this.element.classList.toggle("hidden", !show);
  }
};

// src/widgets.ts
function quoted(item) {
  return `"${item.replace(/\\/g, "\\\\").replace(/"/g, '\\"')}"`;
}
function braced(items) {
  return items.length ? `{ ${items.map(quoted).join(", ")} }` : "{}";
}
function defaultItems(row) {
  if (Array.isArray(row.default)) return row.default.map(String);
  return [];
}
function listItem(text, arranger) {
  const li = document.createElement("li");
  const span = document.createElement("span");
  span.className = "item-text";
  span.textContent = text;
  li.appendChild(span);
  if (arranger) {
    const up = document.createElement("button");
    up.type = "button";
    up.className = "move-up";
    up.textContent = "\u2191";
    up.addEventListener("click", () => {
      const prev = li.previousElementSibling;
      if (prev) li.parentElement.insertBefore(li, prev);
    });
    const down = document.createElement("button");
    down.type = "button";
    down.className = "move-down";
    down.textContent = "\u2193";
    down.addEventListener("click", () => {
      const next = li.nextElementSibling;
      if (next) li.parentElement.insertBefore(next, li);
    });
    li.append(up, down);
  } else {
    const remove = document.createElement("button");
    remove.type = "button";
    remove.className = "remove-item";
    remove.textContent = "\xD7";
    remove.addEventListener("click", () => li.remove());
    li.appendChild(remove);
  }
  return li;
}
function buildControl(row) {
  switch (row.widget) {
    case "checkbox": {
      const input = document.createElement("input");
      input.type = "checkbox";
      input.checked = row.default === true;
      return input;
    }
    case "dropdown": {
      const select = document.createElement("select");
      for (const choice of row.choices ?? []) {
        const option = document.createElement("option");
        option.value = choice;
        option.textContent = choice;
        option.selected = choice === row.default;
        select.appendChild(option);
      }
      return select;
    }
    case "list-append":
    case "sequence-arranger": {
      const arranger = row.widget === "sequence-arranger";
      const box = document.createElement("div");
      const list = document.createElement(arranger ? "ol" : "ul");
      list.className = "items";
      for (const item of defaultItems(row)) {
        list.appendChild(listItem(item, arranger));
      }
      box.appendChild(list);
      if (!arranger) {
        const entry = document.createElement("input");
        entry.type = "text";
        entry.className = "new-item";
        const add = document.createElement("button");
        add.type = "button";
        add.className = "add-item";
        add.textContent = "Add";
        add.addEventListener("click", () => {
          if (!entry.value.trim()) return;
          list.appendChild(listItem(entry.value.trim(), false));
          entry.value = "";
        });
        box.append(entry, add);
      }
      return box;
    }
    default: {
      const input = document.createElement("input");
      input.type = "text";
      input.value = row.default == null ? "" : String(row.default);
      return input;
    }
  }
}
function buildWidget(row) {
  const field = document.createElement("div");
  field.className = "option-field";
  field.dataset.widget = row.widget;
  field.dataset.label = row.label;
  if (row.favorite) field.classList.add("favorite");
  const label = document.createElement("label");
  label.textContent = row.label;
  label.title = row.doc;
  const control = buildControl(row);
  control.classList.add("option-control");
  field.append(label, control);
  return field;
}
function readWidget(field) {
  const widget = field.dataset.widget;
  if (widget === "checkbox") {
    const input = field.querySelector("input[type=checkbox]");
    return input.checked ? "true" : "false";
  }
  if (widget === "dropdown") {
    return field.querySelector("select").value;
  }
  if (widget === "list-append" || widget === "sequence-arranger") {
    const items = [...field.querySelectorAll(".items .item-text")];
    return braced(items.map((el) => el.textContent ?? ""));
  }
  return field.querySelector("input[type=text]").value;
}

// src/ui.ts
var TreeView = class {
  constructor(container, model, callbacks) {
    this.container = container;
    this.model = model;
    this.callbacks = callbacks;
    this.container.classList.add("tree");
  }
  container;
  model;
  callbacks;
  selected = null;
  expanded = /* @__PURE__ */ new Set();
  childCache = /* @__PURE__ */ new Map();
  get selectedJob() {
    return this.selected;
  }
  select(jobId) {
    this.selected = jobId;
    this.render();
    if (jobId) this.callbacks.onSelect(jobId);
  }
  /** A status change makes any cached hierarchy stale. */
  invalidate(jobId) {
    this.childCache.delete(jobId);
  }
  render() {
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
  jobNode(id, name, status) {
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
      expander.textContent = this.expanded.has(id) ? "\u25BE" : "\u25B8";
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
  async toggleExpand(id) {
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
};
function renderGroups(groups) {
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
var DetailPanel = class {
  constructor(api, callbacks) {
    this.api = api;
    this.callbacks = callbacks;
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
  api;
  callbacks;
  element;
  banner;
  valuesPane;
  optionsPane;
  current = null;
  schema = null;
  showPane(name) {
    this.valuesPane.classList.toggle("hidden", name !== "values");
    this.optionsPane.classList.toggle("hidden", name !== "options");
    if (name === "options" && !this.schema) void this.renderOptions();
  }
  showError(err) {
    const text = err instanceof ApiError ? err.display : String(err);
    this.banner.textContent = text;
    this.banner.classList.remove("hidden");
    this.callbacks.log(text);
  }
  clearError() {
    this.banner.textContent = "";
    this.banner.classList.add("hidden");
  }
  async show(jobId) {
    try {
      this.current = await this.api.getJob(jobId);
    } catch (err) {
      this.showError(err);
      return;
    }
    this.clearError();
    this.renderValues();
  }
  async refresh() {
    if (this.current) await this.show(this.current.id);
  }
  get jobId() {
    return this.current?.id ?? null;
  }
  rows(detail) {
    const rows = [
      { field: "id", value: detail.id },
      { field: "name", value: detail.name, rename: true },
      {
        field: "status",
        value: detail.status_reason ? `${detail.status} (${detail.status_reason})` : detail.status
      },
      { field: "backend", value: detail.backend_id }
    ];
    detail.workflow.forEach((el, i) => {
      if (el.kind === "Executable") {
        rows.push({
          field: `executable ${el.name}`,
          value: (el.args ?? []).join(" ")
        });
      } else if (el.kind === "Parameter") {
        rows.push({
          field: `parameter ${el.name}`,
          value: el.value ?? "",
          op: (text) => ["param", `${el.name}=${text}`]
        });
      } else {
        rows.push({
          field: `${el.kind === "InputFile" ? "input" : "output"} ${i + 1}`,
          value: el.name
        });
      }
    });
    for (const req of detail.requirements) {
      rows.push({
        field: `require ${req.name}`,
        value: String(req.value),
        op: (text) => ["require", `${req.name}=${text}`]
      });
    }
    if (detail.subjob_ids.length) {
      rows.push({ field: "subjobs", value: detail.subjob_ids.join(" ") });
    }
    return rows;
  }
  renderValues() {
    const detail = this.current;
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
  startEdit(cell, row) {
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
  async commitEdit(row, input) {
    const detail = this.current;
    const text = input.value;
    try {
      if (row.rename) {
        this.current = await this.api.renameJob(detail.id, text);
      } else if (row.op) {
        this.current = await this.api.configureJob(detail.id, [row.op(text)]);
      }
    } catch (err) {
      this.showError(err);
      return;
    }
    this.clearError();
    this.renderValues();
    this.callbacks.onMutated(row.rename ? "list" : "job");
  }
  async renderOptions() {
    try {
      this.schema = await this.api.optionsSchema();
    } catch (err) {
      this.showError(err);
      return;
    }
    this.optionsPane.textContent = "";
    const form = document.createElement("div");
    form.className = "options-form";
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
  async renderOptionsText(form, output) {
    const fields = [...form.querySelectorAll(".option-field")];
    const sets = fields.map((f) => [f.dataset.label, readWidget(f)]);
    try {
      output.textContent = await this.api.optionsRender(sets);
      this.clearError();
    } catch (err) {
      this.showError(err);
    }
  }
};

// src/main.ts
var LIST_VERBS = /* @__PURE__ */ new Set(["create", "copy", "delete", "rename", "configure", "split"]);
async function boot(root, options = {}) {
  const api = options.api ?? new Api();
  const reconnectDelay = options.reconnectDelayMs ?? 1500;
  const ask = options.ask ?? ((field, fallback) => window.prompt(field, fallback ?? ""));
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
    }
  );
  const detail = new DetailPanel(api, {
    onMutated: (refresh) => {
      if (refresh === "list") void resync();
    },
    log: (line) => shell.append(line)
  });
  const tree = new TreeView(treeBox, model, {
    onSelect: (jobId) => void detail.show(jobId),
    onContextMenu: (jobId, ev) => openContextMenu(jobId, ev),
    loadChildren: async (jobId) => jobChildren(await api.getJob(jobId))
  });
  layout.appendChild(detail.element);
  root.appendChild(shell.element);
  async function resync() {
    model.resync(await api.listJobs());
    tree.render();
  }
  function runAction(action, jobId) {
    const ctx = { jobId: jobId ?? tree.selectedJob ?? void 0, ask };
    if (action.needsJob && !ctx.jobId) {
      shell.append(`${action.label}: select a job first`);
      return;
    }
    action.run(api, ctx).then(async (line) => {
      shell.append(line);
      if (action.refresh === "list") await resync();
      else if (action.refresh === "job" && detail.jobId) await detail.refresh();
    }).catch((err) => shell.append(String(err instanceof Error ? err.message : err)));
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
  let menu = null;
  function closeContextMenu() {
    menu?.remove();
    menu = null;
  }
  function openContextMenu(jobId, ev) {
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
  let stopStream = null;
  let reconnectTimer = null;
  function onEvent(evt) {
    shell.append(
      `EVT ${evt.jobId} ${evt.from} ${evt.to}` + (evt.reason ? ` ${evt.reason}` : "")
    );
    if (isDiagnostic(evt)) return;
    if (model.applyEvent(evt)) {
      tree.invalidate(evt.jobId);
      tree.render();
      if (detail.jobId === evt.jobId) void detail.refresh();
    }
  }
  function connect() {
    if (stopped) return;
    stopStream = openEvents(
      {
        onEvent,
        onOverflow: () => shell.append("event stream overflowed; resyncing"),
        onDrop: () => {
          if (stopped) return;
          void resync();
          reconnectTimer = setTimeout(connect, reconnectDelay);
        }
      },
      api.fetchFn
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
    }
  };
}
var mount = document.getElementById("forge-app");
if (mount) {
  void boot(mount);
}
export {
  boot
};
