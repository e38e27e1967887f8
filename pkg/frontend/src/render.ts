// HTML renderers. Pure string builders so they can be tested without a DOM;
// interactivity comes from data-* attributes handled by delegation in main.ts.

import type {
  AnalysisReport,
  FtgDoc,
  ManifestDoc,
  ShortcutDoc,
  TraceDoc,
  ViewNodeDoc,
} from "./types.js";

export function esc(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/** Click reference of a view: its id, or the positional form `@i/j`. */
export function viewRef(node: ViewNodeDoc, path: number[]): string {
  return node.id ?? "@" + path.join("/");
}

export function shortcutBadge(shortcut: ShortcutDoc): string {
  const params = shortcut.parameters.map((p) => p.name);
  const paramText = params.length ? `params: ${params.join(", ")}` : "no params";
  return `len ${shortcut.length}, ${paramText}`;
}

export function renderCorpusPicker(models: string[]): string {
  const options = models
    .map((m) => `<option value="${esc(m)}">${esc(m)}</option>`)
    .join("");
  return `
    <section class="panel" id="load-panel">
      <h2>1 · Load</h2>
      <label>Bundled model
        <select id="corpus-select">${options}</select>
      </label>
      <button data-action="load-corpus">Load model</button>
      <button data-action="analyze" disabled id="analyze-button">Analyze</button>
    </section>`;
}

export function renderNavGraph(report: AnalysisReport, selected?: string): string {
  const cards = Object.entries(report.activities)
    .map(([name, info]) => {
      const badges = info.uniqueShortcuts
        .map((s) => `<span class="badge">${esc(shortcutBadge(s))}</span>`)
        .join(" ");
      const classes = ["activity-card"];
      if (name === selected) classes.push("selected");
      if (!info.replayable) classes.push("unreplayable");
      const note = info.replayable
        ? badges
        : '<span class="badge blocked">not replayable</span>';
      const main = name === report.mainActivity ? " ★" : "";
      return `<li class="${classes.join(" ")}" data-action="pick-activity" data-activity="${esc(name)}">
        <strong>${esc(name)}${main}</strong> ${note}</li>`;
    })
    .join("");
  return `
    <section class="panel" id="graph-panel">
      <h2>2 · Navigation graph</h2>
      <p>${report.navGraph.vertices.length} activities,
         ${report.navGraph.edges.length} transitions,
         ${report.declaredDeepLinks} deep link(s) already declared.</p>
      <ul class="activity-list">${cards}</ul>
    </section>`;
}

export function renderShortcuts(activity: string, shortcuts: ShortcutDoc[]): string {
  if (!shortcuts.length) {
    return `<section class="panel" id="shortcut-panel">
      <h2>3 · Shortcuts · ${esc(activity)}</h2>
      <p class="chip blocked">Only opaque routes reach this activity; it cannot be linked.</p>
    </section>`;
  }
  const blocks = shortcuts
    .map((s, i) => {
      const hops = s.transitions
        .map((t) => (t.launch ? "(launch)" : `${t.from} → ${t.to}`))
        .join(" · ");
      const slots = s.parameters
        .map(
          (p) => `<label class="param">${esc(p.name)} <small>${esc(p.type)}</small>
            <input data-param="${esc(p.name)}" data-type="${esc(p.type)}"
                   data-shortcut="${i}" value=""></label>`,
        )
        .join("");
      return `<div class="shortcut" data-shortcut-index="${i}">
        <div><span class="badge">${esc(shortcutBadge(s))}</span> ${esc(hops)}</div>
        <div class="slots">${slots}</div>
        <button data-action="steer" data-activity="${esc(activity)}" data-shortcut="${i}">
          Steer simulator here</button>
        <button data-action="crawl" data-activity="${esc(activity)}" data-shortcut="${i}">
          Crawl fragments</button>
      </div>`;
    })
    .join("");
  return `<section class="panel" id="shortcut-panel">
    <h2>3 · Shortcuts · ${esc(activity)}</h2>${blocks}</section>`;
}

export function renderViewTree(
  node: ViewNodeDoc,
  path: number[] = [],
  interactive = true,
): string {
  const ref = viewRef(node, path);
  const action = interactive ? ' data-action="click-view"' : "";
  const label = `<span class="view"${action} data-ref="${esc(ref)}">
    &lt;${esc(node.tag)}&gt;${node.id ? ` <code>#${esc(node.id)}</code>` : ""}</span>`;
  const children = node.children ?? [];
  if (!children.length) return `<li>${label}</li>`;
  const inner = children
    .map((child, i) => renderViewTree(child, [...path, i], interactive))
    .join("");
  return `<li><details open><summary>${label}</summary><ul>${inner}</ul></details></li>`;
}

export function renderSteering(
  activity: string,
  preview: { activity: string; screen: string; treeHash: string; viewTree: ViewNodeDoc },
  actions: string[],
): string {
  const trail = actions.length ? actions.join(" → ") : "(entry point)";
  return `<section class="panel" id="steer-panel">
    <h2>Simulator · ${esc(preview.activity)} / ${esc(preview.screen)}</h2>
    <p>hash <code>${esc(preview.treeHash)}</code> · actions: ${esc(trail)}</p>
    <ul class="tree">${renderViewTree(preview.viewTree)}</ul>
    <label>Fragment name <input id="manual-name" value=""></label>
    <button data-action="add-fragment" data-activity="${esc(activity)}">
      Record as fragment</button>
  </section>`;
}

export function renderFtg(ftg: FtgDoc, previewHash?: string): string {
  const chips = ftg.vertices
    .map((v) => {
      const classes = ["chip"];
      if (v.hash === ftg.start) classes.push("start");
      if (v.hash === previewHash) classes.push("selected");
      return `<button class="${classes.join(" ")}" data-action="preview-fragment"
        data-activity="${esc(ftg.activity)}" data-hash="${esc(v.hash)}">
        ${esc(v.name ?? v.hash.slice(0, 8))}</button>`;
    })
    .join(" ");
  const warnings = ftg.unidentified.length
    ? `<p class="chip blocked">${ftg.unidentified.length} transition(s) had no usable
       trigger id; reach them manually and record them below.</p>`
    : "";
  const preview = ftg.vertices.find((v) => v.hash === previewHash);
  const previewHtml = preview
    ? `<ul class="tree">${renderViewTree(preview.exampleTree, [], false)}</ul>`
    : "";
  return `<section class="panel" id="ftg-panel">
    <h2>4 · Fragments · ${esc(ftg.activity)}</h2>
    <div>${chips}</div>${warnings}${previewHtml}</section>`;
}

export function renderSelection(
  report: AnalysisReport,
  ftgs: Record<string, FtgDoc>,
  isChecked: (activity: string, fragment?: string) => boolean,
  applied: boolean,
): string {
  const rows: string[] = [];
  for (const [name, info] of Object.entries(report.activities)) {
    if (!info.replayable) continue;
    rows.push(checkboxRow(name, undefined, isChecked(name)));
    const ftg = ftgs[name];
    if (ftg) {
      for (const vertex of ftg.vertices) {
        if (vertex.hash === ftg.start || !vertex.name) continue;
        rows.push(checkboxRow(name, vertex.name, isChecked(name, vertex.name)));
      }
    }
  }
  const state = applied ? '<span class="chip ok">selection saved</span>' : "";
  return `<section class="panel" id="selection-panel">
    <h2>5 · Select targets</h2>
    <ul class="selection-list">${rows.join("")}</ul>
    <button data-action="apply-selection">Save selection</button>
    <button data-action="build-manifest">Build manifest</button> ${state}
  </section>`;
}

function checkboxRow(activity: string, fragment: string | undefined, checked: boolean): string {
  const label = fragment ? `${activity} <code>#${fragment}</code>` : activity;
  const frag = fragment ? ` data-fragment="${esc(fragment)}"` : "";
  return `<li><label>
    <input type="checkbox" data-action="toggle-target"
           data-activity="${esc(activity)}"${frag} ${checked ? "checked" : ""}>
    ${label}</label></li>`;
}

export function renderManifest(manifest: ManifestDoc): string {
  const rows = manifest.templates
    .map((t, i) => {
      const params = t.parameters.map((p) => `${p.name}:${p.type}`).join(", ") || "none";
      return `<div class="template">
        <code class="uri">${esc(t.uriSchema)}</code>
        <small>parameters: ${esc(params)} · intents: ${t.intentSequence.length}
          · actions: ${t.actionSequence.length}</small>
        <div class="verify-row">
          <input data-verify-uri="${i}" value="${esc(defaultUri(t.uriSchema, t.parameters))}">
          <button data-action="verify" data-template="${i}">Verify</button>
        </div>
      </div>`;
    })
    .join("");
  return `<section class="panel" id="manifest-panel">
    <h2>6 · Release manifest</h2>
    <p>model digest <code>${esc(manifest.modelDigest.slice(0, 12))}…</code></p>
    ${rows}
    <button data-action="download-manifest">Download manifest</button>
  </section>`;
}

function defaultUri(schema: string, parameters: { name: string; type: string }[]): string {
  const defaults: Record<string, string> = {
    int: "1", long: "1", double: "1.0", boolean: "true", text: "x",
  };
  let uri = schema;
  for (const p of parameters) {
    uri = uri.replace(`{${p.name}}`, encodeURIComponent(defaults[p.type] ?? "x"));
  }
  return uri;
}

export function renderTrace(uri: string, trace: TraceDoc): string {
  const ok = trace.verdict.kind !== "Failed";
  const steps = trace.steps
    .map(
      (s) => `<li><code>${esc(s.kind)}</code> ${esc(JSON.stringify(s.detail))}
        → ${esc(s.activity)}/${esc(s.screen)}</li>`,
    )
    .join("");
  const reason = trace.verdict.reason ? ` — ${esc(trace.verdict.reason)}` : "";
  return `<section class="panel" id="trace-panel">
    <h2>7 · Verification</h2>
    <p><code>${esc(uri)}</code></p>
    <p><span class="chip ${ok ? "ok" : "blocked"}">${esc(trace.verdict.kind)}</span>${reason}</p>
    <ol class="steps">${steps}</ol>
  </section>`;
}

export function renderError(code: string, message: string): string {
  return `<div class="banner error" id="error-banner">
    <strong>${esc(code)}</strong> ${esc(message)}</div>`;
}
