/** The embedded command shell and its log pane. */

import { describe, expect, it } from "vitest";

import { CommandResult } from "../src/api";
import { CommandConsole } from "../src/console";

function shellWith(results: Record<string, CommandResult>) {
  const ran: string[] = [];
  const shell = new CommandConsole(async (line) => {
    ran.push(line);
    const result = results[line];
    if (!result) throw new Error(`unexpected line: ${line}`);
    return result;
  });
  return { shell, ran, log: () => shell.element.querySelector("pre")!.textContent! };
}

describe("CommandConsole", () => {
  it("echoes the command and appends its output", async () => {
    const { shell, log } = shellWith({
      "status j000001": { exit_code: 0, output: "j000001 running\n" },
    });
    await shell.run("status j000001");
    expect(log()).toBe("forge> status j000001\nj000001 running\n");
  });

  it("marks non-zero exits", async () => {
    const { shell, log } = shellWith({
      "submit j999999": { exit_code: 1, output: "UnknownJob: j999999\n" },
    });
    await shell.run("submit j999999");
    expect(log()).toContain("UnknownJob: j999999");
    expect(log()).toContain("(exit 1)");
  });

  it("sends a usage error to the log and runs nothing else", async () => {
    const { shell, ran, log } = shellWith({
      frobnicate: { exit_code: 2, output: "invalid choice: 'frobnicate'\n" },
    });
    await shell.run("frobnicate");
    expect(ran).toEqual(["frobnicate"]);
    expect(log()).toContain("invalid choice");
    expect(log()).toContain("(exit 2)");
  });

  it("skips blank lines", async () => {
    const { shell, ran, log } = shellWith({});
    await shell.run("   ");
    expect(ran).toEqual([]);
    expect(log()).toBe("");
  });

  it("submits through the input form and clears it", async () => {
    const { shell, ran } = shellWith({ list: { exit_code: 0, output: "(none)\n" } });
    const input = shell.element.querySelector<HTMLInputElement>("input")!;
    input.value = "list";
    shell.element
      .querySelector("form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await Promise.resolve();
    expect(ran).toEqual(["list"]);
    expect(input.value).toBe("");
  });

  it("doubles as a log window for event lines", async () => {
    const { shell, log } = shellWith({});
    shell.append("EVT j000001 submitted running 1700000001");
    expect(log()).toBe("EVT j000001 submitted running 1700000001\n");
  });

  it("reports command results to the onRan hook", async () => {
    const seen: [string, number][] = [];
    const shell = new CommandConsole(
      async () => ({ exit_code: 0, output: "j000001\n" }),
      (line, result) => seen.push([line, result.exit_code]),
    );
    await shell.run("create --template generic-exec");
    expect(seen).toEqual([["create --template generic-exec", 0]]);
  });

  it("can be hidden and shown again", () => {
    const { shell } = shellWith({});
    expect(shell.hidden).toBe(false);
    shell.toggle();
    expect(shell.hidden).toBe(true);
    expect(shell.element.classList.contains("hidden")).toBe(true);
    shell.toggle();
    expect(shell.hidden).toBe(false);
  });
});
