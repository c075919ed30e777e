/** Tree and detail panel rendering, including edit guards. */

import { beforeEach, describe, expect, it } from "vitest";

import { Api, OptionRow } from "../src/api";
import { FolderTree, jobChildren } from "../src/model";
import { DetailPanel, TreeView } from "../src/ui";
import { FakeServer, detail, flush, jsonResponse, row } from "./helpers";

function keyDown(el: HTMLElement, key: string): void {
  el.dispatchEvent(new KeyboardEvent("keydown", { key, bubbles: true }));
}

describe("TreeView", () => {
  let container: HTMLElement;
  let model: FolderTree;
  let selected: string[];
  let menus: string[];

  beforeEach(() => {
    container = document.createElement("nav");
    model = new FolderTree();
    model.resync([row("j000001", "in-preparation"), row("j000002", "running")]);
    selected = [];
    menus = [];
  });

  function view(loadChildren = async (id: string) => jobChildren(detail(id, "running"))) {
    return new TreeView(container, model, {
      onSelect: (id) => selected.push(id),
      onContextMenu: (id) => menus.push(id),
      loadChildren,
    });
  }

  it("renders All plus one folder per status, jobs under their own", () => {
    view().render();
    const folders = [...container.querySelectorAll<HTMLElement>(".folder")];
    expect(folders.map((f) => f.dataset.folder)).toEqual([
      "All",
      "in-preparation",
      "submitted",
      "running",
      "completed",
      "failed",
      "killed",
    ]);
    const under = (name: string) =>
      [...container.querySelectorAll<HTMLElement>(`[data-folder="${name}"] .job`)].map(
        (el) => el.dataset.jobId,
      );
    expect(under("All")).toEqual(["j000001", "j000002"]);
    expect(under("in-preparation")).toEqual(["j000001"]);
    expect(under("running")).toEqual(["j000002"]);
    expect(under("completed")).toEqual([]);
  });

  it("shows folder counts in the header", () => {
    view().render();
    const all = container.querySelector('[data-folder="All"] .folder-name');
    expect(all?.textContent).toBe("All (2)");
  });

  it("selects on click and reports the id", () => {
    const tree = view();
    tree.render();
    container
      .querySelector<HTMLElement>('[data-folder="running"] .job .job-row')!
      .click();
    expect(selected).toEqual(["j000002"]);
    expect(tree.selectedJob).toBe("j000002");
    const li = container.querySelector('[data-job-id="j000002"]');
    expect(li?.classList.contains("selected")).toBe(true);
  });

  it("hides the parameter hierarchy in normal view", () => {
    view().render();
    expect(container.querySelector(".expander")).toBeNull();
    expect(container.querySelector(".job-params")).toBeNull();
  });

  it("expands a job into grouped parameters in expert view", async () => {
    model.expert = true;
    const tree = view();
    tree.render();
    const jobArea = container.querySelector<HTMLElement>('[data-folder="All"] .job')!;
    jobArea.querySelector<HTMLButtonElement>(".expander")!.click();
    await flush();
    const groups = [
      ...container.querySelectorAll<HTMLElement>('[data-folder="All"] .param-group'),
    ];
    expect(groups.map((g) => g.dataset.group)).toEqual([
      "identity",
      "workflow",
      "requirements",
      "backend",
    ]);
  });

  it("routes right-clicks to the context menu callback", () => {
    view().render();
    const jobRow = container.querySelector<HTMLElement>('[data-job-id="j000001"] .job-row')!;
    jobRow.dispatchEvent(new MouseEvent("contextmenu", { bubbles: true, cancelable: true }));
    expect(menus).toEqual(["j000001"]);
  });
});

const SCHEMA: OptionRow[] = [
  {
    owner: "Tracker",
    name: "Enabled",
    label: "Tracker.Enabled",
    type: "boolean",
    widget: "checkbox",
    choices: null,
    range: null,
    default: true,
    favorite: true,
    doc: "switch the tracking stage on or off",
  },
  {
    owner: "Fit",
    name: "Method",
    label: "Fit.Method",
    type: "enum",
    widget: "dropdown",
    choices: ["chi2", "kalman", "refit"],
    range: null,
    default: "chi2",
    favorite: false,
    doc: "track fit strategy",
  },
];

describe("DetailPanel", () => {
  function panel(server: FakeServer) {
    const mutations: string[] = [];
    const logs: string[] = [];
    const view = new DetailPanel(new Api(server.fetchFn), {
      onMutated: (refresh) => mutations.push(refresh),
      log: (line) => logs.push(line),
    });
    document.body.appendChild(view.element);
    return { view, mutations, logs };
  }

  it("renders editable parameter cells for a job in preparation", async () => {
    const server = new FakeServer().on("GET", "/jobs/j000001", {
      json: detail("j000001", "in-preparation"),
    });
    const { view } = panel(server);
    await view.show("j000001");
    const cell = view.element.querySelector<HTMLElement>(
      '[data-field="parameter retries"] td',
    )!;
    expect(cell.classList.contains("editable")).toBe(true);
    expect(view.element.querySelector(".read-only-note")).toBeNull();
  });

  it("commits a parameter edit as a configure op", async () => {
    const server = new FakeServer()
      .on("GET", "/jobs/j000001", { json: detail("j000001", "in-preparation") })
      .on("POST", "/jobs/j000001/configure", (req) => {
        const ops = (req.body as { ops: [string, string][] }).ops;
        expect(ops).toEqual([["param", "retries=5"]]);
        return {
          json: detail("j000001", "in-preparation", {
            workflow: [
              { kind: "Executable", name: "echo", args: ["hello"] },
              { kind: "Parameter", name: "retries", value: "5" },
            ],
          }),
        };
      });
    const { view, mutations } = panel(server);
    await view.show("j000001");
    const cell = view.element.querySelector<HTMLElement>(
      '[data-field="parameter retries"] td',
    )!;
    cell.dispatchEvent(new MouseEvent("dblclick", { bubbles: true }));
    const input = cell.querySelector<HTMLInputElement>("input")!;
    input.value = "5";
    keyDown(input, "Enter");
    await flush();
    expect(server.of("POST", "/jobs/j000001/configure")).toHaveLength(1);
    expect(mutations).toEqual(["job"]);
    expect(
      view.element.querySelector('[data-field="parameter retries"] td')?.textContent,
    ).toBe("5");
  });

  it("renames through PATCH and asks for a list refresh", async () => {
    const server = new FakeServer()
      .on("GET", "/jobs/j000001", { json: detail("j000001", "in-preparation") })
      .on("PATCH", "/jobs/j000001", {
        json: detail("j000001", "in-preparation", { name: "alpha" }),
      });
    const { view, mutations } = panel(server);
    await view.show("j000001");
    const cell = view.element.querySelector<HTMLElement>('[data-field="name"] td')!;
    cell.dispatchEvent(new MouseEvent("dblclick", { bubbles: true }));
    const input = cell.querySelector<HTMLInputElement>("input")!;
    input.value = "alpha";
    keyDown(input, "Enter");
    await flush();
    expect(server.of("PATCH", "/jobs/j000001")[0].body).toEqual({ rename: "alpha" });
    expect(mutations).toEqual(["list"]);
  });

  it("disables editing once the job is active", async () => {
    const server = new FakeServer().on("GET", "/jobs/j000001", {
      json: detail("j000001", "running"),
    });
    const { view } = panel(server);
    await view.show("j000001");
    expect(view.element.querySelector("td.editable")).toBeNull();
    expect(view.element.querySelector(".read-only-note")).not.toBeNull();
    const cell = view.element.querySelector<HTMLElement>('[data-field="name"] td')!;
    cell.dispatchEvent(new MouseEvent("dblclick", { bubbles: true }));
    expect(cell.querySelector("input")).toBeNull();
  });

  it("surfaces a rejected edit inline and keeps the typed value", async () => {
    const server = new FakeServer()
      .on("GET", "/jobs/j000001", { json: detail("j000001", "in-preparation") })
      .on(
        "POST",
        "/jobs/j000001/configure",
        jsonResponse({ error: "InvalidOverride", message: "retries must be numeric" }, 422),
      );
    const { view, logs } = panel(server);
    await view.show("j000001");
    const cell = view.element.querySelector<HTMLElement>(
      '[data-field="parameter retries"] td',
    )!;
    cell.dispatchEvent(new MouseEvent("dblclick", { bubbles: true }));
    const input = cell.querySelector<HTMLInputElement>("input")!;
    input.value = "many";
    keyDown(input, "Enter");
    await flush();
    const banner = view.element.querySelector(".detail-error")!;
    expect(banner.classList.contains("hidden")).toBe(false);
    expect(banner.textContent).toBe("InvalidOverride: retries must be numeric");
    expect(logs).toEqual(["InvalidOverride: retries must be numeric"]);
    // the edit survives the rejection
    expect(cell.querySelector<HTMLInputElement>("input")?.value).toBe("many");
  });

  it("builds the options tab from the schema's widget kinds", async () => {
    const server = new FakeServer()
      .on("GET", "/jobs/j000001", { json: detail("j000001", "running") })
      .on("GET", "/options/schema", { json: SCHEMA })
      .on("POST", "/options/render", { text: "Tracker.Enabled = true;\n" });
    const { view } = panel(server);
    await view.show("j000001");
    view.element.querySelector<HTMLButtonElement>('[data-tab="options"]')!.click();
    await flush();
    const fields = [...view.element.querySelectorAll<HTMLElement>(".option-field")];
    expect(fields.map((f) => f.dataset.widget)).toEqual(["checkbox", "dropdown"]);
    expect(fields[0].classList.contains("favorite")).toBe(true);
    view.element.querySelector<HTMLButtonElement>(".render-options")!.click();
    await flush();
    expect(view.element.querySelector(".options-output")?.textContent).toContain(
      "Tracker.Enabled = true;",
    );
    const body = server.of("POST", "/options/render")[0].body as { set: [string, string][] };
    expect(body.set).toEqual([
      ["Tracker.Enabled", "true"],
      ["Fit.Method", "chi2"],
    ]);
  });
});
