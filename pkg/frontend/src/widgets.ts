/**
 * Form controls for option rows, one builder per widget kind reported
 * by GET /options/schema. readWidget() turns the control back into the
 * raw text the service's option grammar accepts.
 */

import { OptionRow } from "./api";

export const WIDGET_KINDS = [
  "checkbox",
  "dropdown",
  "text-entry",
  "list-append",
  "sequence-arranger",
] as const;

export type WidgetKind = (typeof WIDGET_KINDS)[number];

function quoted(item: string): string {
  return `"${item.replace(/\\/g, "\\\\").replace(/"/g, '\\"')}"`;
}

function braced(items: string[]): string {
  return items.length ? `{ ${items.map(quoted).join(", ")} }` : "{}";
}

function defaultItems(row: OptionRow): string[] {
  if (Array.isArray(row.default)) return row.default.map(String);
  return [];
}

function listItem(text: string, arranger: boolean): HTMLLIElement {
  const li = document.createElement("li");
  const span = document.createElement("span");
  span.className = "item-text";
  span.textContent = text;
  li.appendChild(span);
  if (arranger) {
    const up = document.createElement("button");
    up.type = "button";
    up.className = "move-up";
    up.textContent = "↑";
    up.addEventListener("click", () => {
      const prev = li.previousElementSibling;
      if (prev) li.parentElement!.insertBefore(li, prev);
    });
    const down = document.createElement("button");
    down.type = "button";
    down.className = "move-down";
    down.textContent = "↓";
    down.addEventListener("click", () => {
      const next = li.nextElementSibling;
      if (next) li.parentElement!.insertBefore(next, li);
    });
    li.append(up, down);
  } else {
    const remove = document.createElement("button");
    remove.type = "button";
    remove.className = "remove-item";
    remove.textContent = "×";
    remove.addEventListener("click", () => li.remove());
    li.appendChild(remove);
  }
  return li;
}

function buildControl(row: OptionRow): HTMLElement {
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
      // "text-entry" and anything unrecognised degrade to plain text
      const input = document.createElement("input");
      input.type = "text";
      input.value = row.default == null ? "" : String(row.default);
      return input;
    }
  }
}

/** One labelled form row; data-widget and data-label identify it. */
export function buildWidget(row: OptionRow): HTMLElement {
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

/** Raw option text for the field's current state. */
export function readWidget(field: HTMLElement): string {
  const widget = field.dataset.widget;
  if (widget === "checkbox") {
    const input = field.querySelector<HTMLInputElement>("input[type=checkbox]")!;
    return input.checked ? "true" : "false";
  }
  if (widget === "dropdown") {
    return field.querySelector<HTMLSelectElement>("select")!.value;
  }
  if (widget === "list-append" || widget === "sequence-arranger") {
    const items = [...field.querySelectorAll<HTMLElement>(".items .item-text")];
    return braced(items.map((el) => el.textContent ?? ""));
  }
  return field.querySelector<HTMLInputElement>("input[type=text]")!.value;
}
