/**
 * Embedded command shell. Lines go to POST /commands, its output and
 * every server event line land in the same log, so the pane doubles as
 * the log window. The whole pane can be hidden.
 */

import { CommandResult } from "./api";

export class CommandConsole {
  readonly element: HTMLElement;
  private log: HTMLElement;
  private input: HTMLInputElement;

  constructor(
    private runLine: (line: string) => Promise<CommandResult>,
    private onRan?: (line: string, result: CommandResult) => void,
  ) {
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

  async run(line: string): Promise<void> {
    const trimmed = line.trim();
    if (!trimmed) return;
    this.append(`forge> ${trimmed}`);
    let result: CommandResult;
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
  append(line: string): void {
    this.log.textContent += line + "\n";
    this.log.scrollTop = this.log.scrollHeight;
  }

  get hidden(): boolean {
    return this.element.classList.contains("hidden");
  }

  toggle(visible?: boolean): void {
    const show = visible ?? this.hidden;
    this.element.classList.toggle("hidden", !show);
  }
}
