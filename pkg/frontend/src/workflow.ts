// Session workflow controller: load, analyze, crawl, select, release, verify.
// Holds only what the API returned; a page reload can rebuild the same state
// from the session id alone (resume).

import { ApiClient } from "./api.js";
import type {
  AnalysisReport,
  EntryScriptDoc,
  FtgDoc,
  ManifestDoc,
  SelectionTarget,
  SessionStatus,
  ShortcutDoc,
  SimulatePreview,
  TemplateDoc,
  TraceDoc,
} from "./types.js";

export const PARAM_DEFAULTS: Record<string, string> = {
  int: "1",
  long: "1",
  double: "1.0",
  boolean: "true",
  text: "x",
};

/** Turn a form string into the typed value an extra of `type` expects. */
export function coerceValue(text: string, type: string): unknown {
  switch (type) {
    case "int":
    case "long": {
      const n = Number(text.trim());
      if (!Number.isInteger(n)) throw new Error(`${JSON.stringify(text)} is not a ${type}`);
      return n;
    }
    case "double": {
      const n = Number(text.trim());
      if (Number.isNaN(n)) throw new Error(`${JSON.stringify(text)} is not a double`);
      return n;
    }
    case "boolean":
      if (text === "true") return true;
      if (text === "false") return false;
      throw new Error(`${JSON.stringify(text)} is not a boolean`);
    default:
      return text;
  }
}

/**
 * Assemble the entry script that walks a shortcut: one intent per non-launch
 * transition, each filled from the developer-provided parameter values.
 */
export function entryFromShortcut(
  shortcut: ShortcutDoc,
  values: Record<string, unknown>,
): EntryScriptDoc {
  const intents = [];
  for (const transition of shortcut.transitions) {
    if (transition.launch || !transition.intent) continue;
    const extras = transition.intent.extras ?? {};
    const intentValues: Record<string, unknown> = {};
    for (const [name, type] of Object.entries(extras)) {
      if (type === "opaque") continue;
      if (!(name in values)) throw new Error(`missing value for parameter ${name}`);
      intentValues[name] = values[name];
    }
    intents.push({ intent: transition.intent, values: intentValues });
  }
  return { intents, actions: [] };
}

/** Fill a URI schema's `{name}` slots with given or default values. */
export function sampleLink(
  template: TemplateDoc,
  values: Record<string, string> = {},
): string {
  let uri = template.uriSchema;
  for (const param of template.parameters) {
    const raw = values[param.name] ?? PARAM_DEFAULTS[param.type] ?? "x";
    uri = uri.replace(`{${param.name}}`, encodeURIComponent(raw));
  }
  return uri;
}

export interface VerifyResult {
  uri: string;
  trace: TraceDoc;
}

export class ReleaseConsole {
  session: SessionStatus | null = null;
  report: AnalysisReport | null = null;
  ftgs: Record<string, FtgDoc> = {};
  selection: SelectionTarget[] = [];
  selectionApplied = false;
  manifest: ManifestDoc | null = null;
  manifestText: string | null = null;
  verifications: VerifyResult[] = [];

  constructor(readonly api: ApiClient) {}

  private get id(): string {
    if (!this.session) throw new Error("no session loaded");
    return this.session.id;
  }

  async corpusModels(): Promise<string[]> {
    return (await this.api.listCorpus()).models;
  }

  async loadFromCorpus(name: string): Promise<SessionStatus> {
    this.reset();
    this.session = await this.api.createSessionFromCorpus(name);
    return this.session;
  }

  async loadModelDoc(doc: unknown): Promise<SessionStatus> {
    this.reset();
    this.session = await this.api.createSession(doc);
    return this.session;
  }

  /** Rebuild console state for an existing session purely from the API. */
  async resume(sessionId: string): Promise<SessionStatus> {
    this.reset();
    const status = await this.api.sessionStatus(sessionId);
    this.session = status;
    if (status.analyzed) {
      this.report = await this.api.analyze(sessionId);
    }
    for (const activity of status.crawledActivities) {
      this.ftgs[activity] = await this.api.ftg(sessionId, activity);
    }
    if (status.manifest) {
      this.manifest = JSON.parse(await this.api.manifestText(sessionId)) as ManifestDoc;
      this.manifestText = await this.api.manifestText(sessionId);
      this.selectionApplied = true;
    }
    return status;
  }

  private reset(): void {
    this.session = null;
    this.report = null;
    this.ftgs = {};
    this.selection = [];
    this.selectionApplied = false;
    this.manifest = null;
    this.manifestText = null;
    this.verifications = [];
  }

  async analyze(): Promise<AnalysisReport> {
    this.report = await this.api.analyze(this.id);
    return this.report;
  }

  async refreshStatus(): Promise<SessionStatus> {
    this.session = await this.api.sessionStatus(this.id);
    return this.session;
  }

  shortcutsFor(activity: string): ShortcutDoc[] {
    return this.report?.activities[activity]?.uniqueShortcuts ?? [];
  }

  async simulate(entry: EntryScriptDoc): Promise<SimulatePreview> {
    return this.api.simulate(this.id, entry);
  }

  async crawl(activity: string, entry: EntryScriptDoc): Promise<FtgDoc> {
    const ftg = await this.api.crawl(this.id, activity, entry);
    this.ftgs[activity] = ftg;
    return ftg;
  }

  async addManualFragment(activity: string, actions: string[], name: string): Promise<FtgDoc> {
    const ftg = await this.api.addManualFragment(this.id, activity, actions, name);
    this.ftgs[activity] = ftg;
    return ftg;
  }

  hasTarget(activity: string, fragment?: string): boolean {
    return this.selection.some(
      (t) => t.activity === activity && (t.fragment ?? null) === (fragment ?? null),
    );
  }

  toggleTarget(activity: string, fragment?: string): void {
    if (this.hasTarget(activity, fragment)) {
      this.selection = this.selection.filter(
        (t) => !(t.activity === activity && (t.fragment ?? null) === (fragment ?? null)),
      );
    } else {
      const target: SelectionTarget = { activity };
      if (fragment) target.fragment = fragment;
      this.selection.push(target);
    }
    this.selectionApplied = false;
  }

  async applySelection(): Promise<number> {
    const result = await this.api.putSelection(this.id, this.selection);
    this.selectionApplied = true;
    this.manifest = null;
    this.manifestText = null;
    return result.targets;
  }

  async buildManifest(): Promise<ManifestDoc> {
    this.manifest = await this.api.buildManifest(this.id);
    this.manifestText = await this.api.manifestText(this.id);
    return this.manifest;
  }

  async verify(uri: string): Promise<VerifyResult> {
    const { trace } = await this.api.replay(this.id, uri);
    const result = { uri, trace };
    this.verifications.push(result);
    return result;
  }
}
