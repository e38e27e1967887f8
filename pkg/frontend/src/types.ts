// Payload shapes of the analysis service API. The console renders these
// verbatim; it never derives analysis results of its own.

export interface ViewNodeDoc {
  tag: string;
  id?: string;
  children?: ViewNodeDoc[];
}

export interface IntentDoc {
  target: string;
  action?: string;
  categories?: string[];
  data?: string;
  extras?: Record<string, string>;
  bindings?: Record<string, Record<string, unknown>>;
}

export interface TransitionDoc {
  launch?: boolean;
  from?: string;
  to: string;
  labels: string[];
  intent?: IntentDoc;
  externalEntry?: boolean;
}

export interface ParameterDoc {
  name: string;
  type: string;
}

export interface ShortcutDoc {
  length: number;
  transitions: TransitionDoc[];
  labels: string[];
  parameters: ParameterDoc[];
}

export interface ActivityReport {
  uniqueShortcuts: ShortcutDoc[];
  replayable: boolean;
  screens: string[];
  rootScreen: string;
}

export interface NavGraphDoc {
  start: string;
  vertices: string[];
  edges: {
    from: string;
    to: string;
    labels: string[];
    intent: IntentDoc;
    externalEntry: boolean;
  }[];
}

export interface AnalysisReport {
  packageName: string;
  mainActivity: string;
  declaredDeepLinks: number;
  unreplayableActivities: string[];
  navGraph: NavGraphDoc;
  activities: Record<string, ActivityReport>;
}

export interface FtgVertexDoc {
  hash: string;
  name: string | null;
  discoveredAt: number;
  exampleTree: ViewNodeDoc;
}

export interface FtgDoc {
  activity: string;
  start: string;
  vertices: FtgVertexDoc[];
  edges: { source: string; target: string; trigger: string; kind: string }[];
  unidentified: { source: string; target: string }[];
}

export interface SessionStatus {
  id: string;
  packageName: string;
  mainActivity: string;
  activities: string[];
  analyzed: boolean;
  crawledActivities: string[];
  selection: boolean;
  manifest: boolean;
  traceCount: number;
}

export interface EntryIntentDoc {
  intent: IntentDoc;
  values: Record<string, unknown>;
}

export interface EntryScriptDoc {
  intents: EntryIntentDoc[];
  actions: string[];
}

export interface SimulatePreview {
  activity: string;
  screen: string;
  treeHash: string;
  viewTree: ViewNodeDoc;
}

export interface SelectionTarget {
  activity: string;
  fragment?: string;
  pins?: Record<string, unknown>;
}

export interface TemplateDoc {
  activity: string;
  uriSchema: string;
  host: string;
  target: string;
  fragment: string | null;
  fragmentHash: string | null;
  parameters: ParameterDoc[];
  intentSequence: { kind: string; intent?: IntentDoc; assign?: Record<string, unknown> }[];
  actionSequence: string[];
}

export interface ManifestDoc {
  formatVersion: number;
  packageName: string;
  modelDigest: string;
  templates: TemplateDoc[];
}

export interface VerdictDoc {
  kind: string;
  reason: string | null;
}

export interface TraceStepDoc {
  kind: string;
  detail: Record<string, unknown>;
  activity: string;
  screen: string;
}

export interface TraceDoc {
  steps: TraceStepDoc[];
  finalActivity: string | null;
  finalTreeHash: string | null;
  verdict: VerdictDoc;
  stepCount: number;
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  detail: Record<string, unknown>;
}
