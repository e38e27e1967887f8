// Application shell: composes the panels and routes DOM events (delegated on
// the root element) into workflow calls. Rendering always reflects the last
// server responses held by the ReleaseConsole; there is no optimistic state.

import { ApiClient, ApiError } from "./api.js";
import {
  renderCorpusPicker,
  renderError,
  renderFtg,
  renderManifest,
  renderNavGraph,
  renderSelection,
  renderShortcuts,
  renderSteering,
  renderTrace,
} from "./render.js";
import type { EntryScriptDoc, SimulatePreview } from "./types.js";
import { ReleaseConsole, coerceValue, entryFromShortcut } from "./workflow.js";

interface SteeringState {
  activity: string;
  entry: EntryScriptDoc;
  actions: string[];
  preview: SimulatePreview;
}

export class App {
  console: ReleaseConsole;
  corpus: string[] = [];
  pickedActivity: string | null = null;
  steering: SteeringState | null = null;
  previewHash: string | null = null;
  lastVerified: { uri: string; trace: import("./types.js").TraceDoc } | null = null;
  error: { code: string; message: string } | null = null;

  constructor(
    readonly root: HTMLElement,
    api: ApiClient,
  ) {
    this.console = new ReleaseConsole(api);
    root.addEventListener("click", (e) => void this.onAction(e));
    root.addEventListener("change", (e) => void this.onAction(e));
  }

  async start(sessionId?: string): Promise<void> {
    this.corpus = await this.console.corpusModels();
    if (sessionId) {
      await this.guard(async () => {
        await this.console.resume(sessionId);
      });
    }
    this.render();
  }

  render(): void {
    const parts: string[] = [];
    if (this.error) parts.push(renderError(this.error.code, this.error.message));
    parts.push(renderCorpusPicker(this.corpus));
    const report = this.console.report;
    if (report) {
      parts.push(renderNavGraph(report, this.pickedActivity ?? undefined));
      if (this.pickedActivity) {
        parts.push(renderShortcuts(this.pickedActivity, this.console.shortcutsFor(this.pickedActivity)));
      }
      if (this.steering) {
        parts.push(renderSteering(this.steering.activity, this.steering.preview, this.steering.actions));
      }
      const ftg = this.pickedActivity ? this.console.ftgs[this.pickedActivity] : undefined;
      if (ftg) {
        parts.push(renderFtg(ftg, this.previewHash ?? undefined));
      }
      parts.push(renderSelection(
        report,
        this.console.ftgs,
        (a, f) => this.console.hasTarget(a, f),
        this.console.selectionApplied,
      ));
    }
    if (this.console.manifest) parts.push(renderManifest(this.console.manifest));
    if (this.lastVerified) parts.push(renderTrace(this.lastVerified.uri, this.lastVerified.trace));

    const selected = this.select<HTMLSelectElement>("#corpus-select")?.value;
    this.root.innerHTML = parts.join("\n");
    if (selected) {
      const again = this.select<HTMLSelectElement>("#corpus-select");
      if (again) again.value = selected;
    }
    const analyzeButton = this.select<HTMLButtonElement>("#analyze-button");
    if (analyzeButton) analyzeButton.disabled = this.console.session === null;
  }

  select<T extends Element>(selector: string): T | null {
    return this.root.querySelector(selector) as T | null;
  }

  private async guard(fn: () => Promise<void>): Promise<void> {
    try {
      await fn();
      this.error = null;
    } catch (err) {
      if (err instanceof ApiError) {
        this.error = { code: err.envelope.code, message: err.envelope.message };
      } else {
        this.error = { code: "client_error", message: String(err) };
      }
    }
    this.render();
  }

  private shortcutValues(index: number): Record<string, unknown> {
    const values: Record<string, unknown> = {};
    for (const input of this.root.querySelectorAll<HTMLInputElement>(
      `input[data-shortcut="${index}"]`,
    )) {
      const name = input.dataset.param ?? "";
      const type = input.dataset.type ?? "text";
      const raw = input.value === "" ? defaultFor(type) : input.value;
      values[name] = coerceValue(raw, type);
    }
    return values;
  }

  private entryFor(activity: string, index: number): EntryScriptDoc {
    const shortcut = this.console.shortcutsFor(activity)[index];
    if (!shortcut) throw new Error(`no shortcut ${index} for ${activity}`);
    return entryFromShortcut(shortcut, this.shortcutValues(index));
  }

  async onAction(event: Event): Promise<void> {
    const target = (event.target as Element).closest<HTMLElement>("[data-action]");
    if (!target) return;
    const action = target.dataset.action ?? "";
    if (event.type === "change" && action !== "toggle-target") return;
    if (event.type === "click" && action === "toggle-target") return;

    switch (action) {
      case "load-corpus": {
        const name = this.select<HTMLSelectElement>("#corpus-select")?.value;
        if (!name) return;
        await this.guard(async () => {
          const status = await this.console.loadFromCorpus(name);
          this.pickedActivity = null;
          this.steering = null;
          this.previewHash = null;
          this.lastVerified = null;
          history.replaceState(null, "", `?session=${status.id}`);
        });
        break;
      }
      case "analyze":
        await this.guard(async () => {
          await this.console.analyze();
        });
        break;
      case "pick-activity": {
        this.pickedActivity = target.dataset.activity ?? null;
        this.steering = null;
        this.previewHash = null;
        this.render();
        break;
      }
      case "steer": {
        const activity = target.dataset.activity ?? "";
        const index = Number(target.dataset.shortcut);
        await this.guard(async () => {
          const entry = this.entryFor(activity, index);
          const preview = await this.console.simulate(entry);
          this.steering = { activity, entry, actions: [], preview };
        });
        break;
      }
      case "click-view": {
        if (!this.steering) return;
        const ref = target.dataset.ref ?? "";
        await this.guard(async () => {
          const steering = this.steering!;
          const actions = [...steering.actions, ref];
          const preview = await this.console.simulate({
            intents: steering.entry.intents,
            actions,
          });
          steering.actions = actions;
          steering.preview = preview;
        });
        break;
      }
      case "crawl": {
        const activity = target.dataset.activity ?? "";
        const index = Number(target.dataset.shortcut);
        await this.guard(async () => {
          const entry = this.entryFor(activity, index);
          await this.console.crawl(activity, entry);
          await this.console.refreshStatus();
        });
        break;
      }
      case "add-fragment": {
        const activity = target.dataset.activity ?? "";
        const name = this.select<HTMLInputElement>("#manual-name")?.value ?? "";
        const actions = this.steering?.actions ?? [];
        await this.guard(async () => {
          await this.console.addManualFragment(activity, actions, name);
        });
        break;
      }
      case "preview-fragment": {
        this.previewHash = target.dataset.hash ?? null;
        this.pickedActivity = target.dataset.activity ?? this.pickedActivity;
        this.render();
        break;
      }
      case "toggle-target": {
        const fragment = target.dataset.fragment;
        this.console.toggleTarget(target.dataset.activity ?? "", fragment);
        this.render();
        break;
      }
      case "apply-selection":
        await this.guard(async () => {
          await this.console.applySelection();
        });
        break;
      case "build-manifest":
        await this.guard(async () => {
          await this.console.buildManifest();
        });
        break;
      case "verify": {
        const index = target.dataset.template ?? "0";
        const input = this.select<HTMLInputElement>(`input[data-verify-uri="${index}"]`);
        const uri = input?.value ?? "";
        await this.guard(async () => {
          this.lastVerified = await this.console.verify(uri);
        });
        break;
      }
      case "download-manifest": {
        const text = this.console.manifestText;
        if (text === null) return;
        downloadText("release-manifest.json", text);
        break;
      }
      default:
        break;
    }
  }
}

function defaultFor(type: string): string {
  return { int: "1", long: "1", double: "1.0", boolean: "true", text: "x" }[type] ?? "x";
}

function downloadText(filename: string, text: string): void {
  const blob = new Blob([text], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

export function mountApp(root: HTMLElement, api: ApiClient): App {
  const app = new App(root, api);
  const params = new URLSearchParams(location.search);
  void app.start(params.get("session") ?? undefined);
  return app;
}
