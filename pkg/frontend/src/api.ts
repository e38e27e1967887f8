// Thin typed client for the analysis service. Every console state change
// round-trips through here; nothing is computed locally.

import type {
  AnalysisReport,
  EntryScriptDoc,
  ErrorEnvelope,
  FtgDoc,
  ManifestDoc,
  NavGraphDoc,
  SelectionTarget,
  SessionStatus,
  SimulatePreview,
  TraceDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly envelope: ErrorEnvelope,
  ) {
    super(`${envelope.code}: ${envelope.message}`);
  }
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) {
      let envelope: ErrorEnvelope;
      try {
        envelope = (await resp.json()) as ErrorEnvelope;
      } catch {
        envelope = { code: "http_error", message: resp.statusText, detail: {} };
      }
      throw new ApiError(resp.status, envelope);
    }
    return resp;
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    return (await this.request(method, path, body)).json() as Promise<T>;
  }

  listCorpus(): Promise<{ models: string[] }> {
    return this.json("GET", "/corpus");
  }

  createSessionFromCorpus(name: string): Promise<SessionStatus> {
    return this.json("POST", "/sessions", { corpus: name });
  }

  createSession(modelDoc: unknown): Promise<SessionStatus> {
    return this.json("POST", "/sessions", modelDoc);
  }

  sessionStatus(id: string): Promise<SessionStatus> {
    return this.json("GET", `/sessions/${id}`);
  }

  analyze(id: string): Promise<AnalysisReport> {
    return this.json("POST", `/sessions/${id}/analyze`);
  }

  navGraph(id: string): Promise<NavGraphDoc> {
    return this.json("GET", `/sessions/${id}/navgraph`);
  }

  simulate(id: string, entry: EntryScriptDoc): Promise<SimulatePreview> {
    return this.json("POST", `/sessions/${id}/simulate`, entry);
  }

  crawl(id: string, activity: string, entry: EntryScriptDoc): Promise<FtgDoc> {
    return this.json("POST", `/sessions/${id}/activities/${activity}/crawl`, entry);
  }

  ftg(id: string, activity: string): Promise<FtgDoc> {
    return this.json("GET", `/sessions/${id}/activities/${activity}/ftg`);
  }

  addManualFragment(
    id: string,
    activity: string,
    actions: string[],
    name: string,
  ): Promise<FtgDoc> {
    return this.json("POST", `/sessions/${id}/activities/${activity}/ftg/fragments`, {
      actions,
      name,
    });
  }

  putSelection(id: string, targets: SelectionTarget[]): Promise<{ targets: number }> {
    return this.json("PUT", `/sessions/${id}/selection`, { targets });
  }

  buildManifest(id: string): Promise<ManifestDoc> {
    return this.json("POST", `/sessions/${id}/manifest`);
  }

  /** Raw manifest bytes; the download must stay byte-identical to the CLI output. */
  async manifestText(id: string): Promise<string> {
    return (await this.request("GET", `/sessions/${id}/manifest`)).text();
  }

  replay(id: string, uri: string): Promise<{ index: number; trace: TraceDoc }> {
    return this.json("POST", `/sessions/${id}/replay`, { uri });
  }
}
