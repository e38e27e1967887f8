"""HTTP service exposing the pipeline to scripts and the web console.

One in-memory analysis session per uploaded model. Steps must run in workflow
order (upload, analyze, crawl, select, manifest, replay); calling a step
before its inputs exist is a 409, unknown ids are 404, bad inputs are 400.
All errors share the ``{code, message, detail}`` envelope.

Requests touching the same session are serialized by a per-session lock;
independent sessions run in parallel (threading server). Artifact responses
(report, FTG, manifest, trace) are byte-identical to the CLI's output for the
same inputs.
"""

from __future__ import annotations

import json
import logging
import re
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .crawl import (
    EntryScript,
    FragmentTransitionGraph,
    add_manual_fragment,
    crawl_ftg,
    ftg_to_dot,
    name_fragments,
    parse_entry_script,
    screen_hash_hints,
)
from .errors import DeeplinkerError, NoSuchFragment, ParseError
from .jsonutil import canonical_json
from .linker import (
    ReleaseManifest,
    SelectionEntry,
    build_templates,
    manifest_to_json,
    parse_deep_link,
    parse_selection,
)
from .model import AppModel, count_declared_deep_links, load_app_model
from .navgraph import NavGraph, Path as NavPath, Shortcut, build_nav_graph, compute_shortcuts, nav_graph_to_doc, nav_graph_to_dot
from .replay import ReplayTrace, replay_deep_link
from .report import analysis_report
from .simulator import SimSession
from .treehash import StructureHash, tree_hash

log = logging.getLogger("deeplinker.service")


class StepOrderError(DeeplinkerError):
    code = "step_order"


class UnknownResource(DeeplinkerError):
    code = "not_found"


_STATUS_BY_CODE = {
    "not_found": 404,
    "no_such_fragment": 404,
    "step_order": 409,
    "not_crawled": 409,
}


@dataclass
class AnalysisSession:
    id: str
    model: AppModel
    nav_graph: NavGraph | None = None
    shortcuts: dict[tuple[str, NavPath], Shortcut] | None = None
    ftgs: dict[str, FragmentTransitionGraph] = field(default_factory=dict)
    entry_scripts: dict[str, EntryScript] = field(default_factory=dict)
    selection: tuple[SelectionEntry, ...] | None = None
    manifest: ReleaseManifest | None = None
    traces: list[ReplayTrace] = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock)

    def status_doc(self) -> dict:
        return {
            "id": self.id,
            "packageName": self.model.package_name,
            "mainActivity": self.model.main_activity,
            "activities": [a.name for a in self.model.activities],
            "analyzed": self.nav_graph is not None,
            "crawledActivities": sorted(self.ftgs),
            "selection": self.selection is not None,
            "manifest": self.manifest is not None,
            "traceCount": len(self.traces),
        }

    def require_analyzed(self) -> None:
        if self.nav_graph is None:
            raise StepOrderError("the analyze step has not run for this session")


class ServiceState:
    def __init__(self, corpus: Path | None = None):
        self.corpus = corpus
        self.sessions: dict[str, AnalysisSession] = {}
        self._registry_lock = threading.Lock()

    def create_session(self, model: AppModel) -> AnalysisSession:
        session = AnalysisSession(id=uuid.uuid4().hex, model=model)
        with self._registry_lock:
            self.sessions[session.id] = session
        return session

    def session(self, session_id: str) -> AnalysisSession:
        with self._registry_lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise UnknownResource(f"unknown session {session_id!r}")
        return session

    def corpus_models(self) -> list[str]:
        if self.corpus is None:
            return []
        return sorted(p.name.removesuffix(".app.json")
                      for p in self.corpus.glob("*.app.json"))

    def corpus_model_text(self, name: str) -> str:
        if self.corpus is None or not re.match(r"^[A-Za-z0-9_-]+$", name):
            raise UnknownResource(f"unknown corpus model {name!r}")
        path = self.corpus / f"{name}.app.json"
        if not path.is_file():
            raise UnknownResource(f"unknown corpus model {name!r}")
        return path.read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# Request handling
# ---------------------------------------------------------------------------

_ROUTES: list[tuple[str, re.Pattern, str]] = [
    ("GET", re.compile(r"^/corpus$"), "corpus_list"),
    ("GET", re.compile(r"^/corpus/(?P<name>[^/]+)$"), "corpus_get"),
    ("POST", re.compile(r"^/sessions$"), "session_create"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)$"), "session_status"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/model$"), "session_model"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/analyze$"), "session_analyze"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/navgraph$"), "session_navgraph"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/deep-link-count$"), "session_count"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/activities/(?P<activity>[^/]+)/shortcuts$"),
     "activity_shortcuts"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/activities/(?P<activity>[^/]+)/crawl$"),
     "activity_crawl"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/activities/(?P<activity>[^/]+)/ftg$"),
     "activity_ftg"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/activities/(?P<activity>[^/]+)/ftg/fragments$"),
     "activity_add_fragment"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/simulate$"), "session_simulate"),
    ("PUT", re.compile(r"^/sessions/(?P<sid>[^/]+)/selection$"), "session_selection"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/manifest$"), "session_manifest_build"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/manifest$"), "session_manifest_get"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/replay$"), "session_replay"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/trace/(?P<index>\d+)$"), "session_trace"),
]

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    state: ServiceState
    ui_dir: Path | None = None

    # -- plumbing -------------------------------------------------------------

    def log_message(self, fmt, *args):  # route through logging, not stderr
        log.debug("%s %s", self.address_string(), fmt % args)

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, doc) -> None:
        self._send(status, canonical_json(doc).encode("utf-8"),
                   "application/json; charset=utf-8")

    def _send_text(self, status: int, text: str, content_type="text/plain; charset=utf-8") -> None:
        self._send(status, text.encode("utf-8"), content_type)

    def _send_error_envelope(self, exc: DeeplinkerError) -> None:
        status = _STATUS_BY_CODE.get(exc.code, 400)
        self._send_json(status, exc.envelope())

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"request body is not valid JSON: {exc}")

    def _dispatch(self, method: str) -> None:
        path, _, query = self.path.partition("?")
        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            match = pattern.match(path)
            if match:
                try:
                    getattr(self, name)(query=query, **match.groupdict())
                except DeeplinkerError as exc:
                    self._send_error_envelope(exc)
                except Exception:  # pragma: no cover - last-resort guard
                    log.exception("unhandled error for %s %s", method, path)
                    self._send_json(500, {"code": "internal", "message": "internal error",
                                          "detail": {}})
                return
        if method == "GET" and self._serve_static(path):
            return
        self._send_json(404, {"code": "not_found",
                              "message": f"no route for {method} {path}", "detail": {}})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_OPTIONS(self):
        self._send(204, b"", "text/plain")

    # -- corpus ---------------------------------------------------------------

    def corpus_list(self, query: str) -> None:
        self._send_json(200, {"models": self.state.corpus_models()})

    def corpus_get(self, query: str, name: str) -> None:
        text = self.state.corpus_model_text(name)
        self._send_text(200, text, "application/json; charset=utf-8")

    # -- sessions ---------------------------------------------------------------

    def session_create(self, query: str) -> None:
        body = self._body()
        if "corpus" in body and "formatVersion" not in body:
            model = load_app_model(self.state.corpus_model_text(body["corpus"]))
        else:
            model = load_app_model(body)
        session = self.state.create_session(model)
        self._send_json(201, session.status_doc())

    def session_status(self, query: str, sid: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            self._send_json(200, session.status_doc())

    def session_model(self, query: str, sid: str) -> None:
        session = self.state.session(sid)
        self._send_json(200, session.model.to_doc())

    def session_analyze(self, query: str, sid: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            session.nav_graph = build_nav_graph(session.model)
            session.shortcuts = compute_shortcuts(session.nav_graph)
            report = analysis_report(session.model, session.nav_graph, session.shortcuts)
        self._send_json(200, report)

    def session_navgraph(self, query: str, sid: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            session.require_analyzed()
            if query == "format=dot":
                self._send_text(200, nav_graph_to_dot(session.nav_graph))
            else:
                self._send_json(200, nav_graph_to_doc(session.nav_graph))

    def session_count(self, query: str, sid: str) -> None:
        session = self.state.session(sid)
        self._send_json(200, {"count": count_declared_deep_links(session.model)})

    def _activity(self, session: AnalysisSession, name: str):
        if not session.model.has_activity(name):
            raise UnknownResource(f"unknown activity {name!r}")
        return session.model.activity(name)

    def activity_shortcuts(self, query: str, sid: str, activity: str) -> None:
        from .navgraph import unique_shortcuts
        from .report import path_to_doc

        session = self.state.session(sid)
        with session.lock:
            self._activity(session, activity)
            session.require_analyzed()
            paths = unique_shortcuts(session.shortcuts, activity)
            self._send_json(200, {
                "activity": activity,
                "uniqueShortcuts": [path_to_doc(p) for p in paths],
                "replayable": bool(paths),
            })

    def activity_crawl(self, query: str, sid: str, activity: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            self._activity(session, activity)
            session.require_analyzed()
            body = self._body()
            entry = parse_entry_script(body.get("entry", body))
            ftg = crawl_ftg(
                lambda: SimSession.launch(session.model),
                activity,
                entry,
                budget=int(body.get("budget", 10_000)),
                record_cross_edges=bool(body.get("crossEdges", False)),
                position_fallback=bool(body.get("positionFallback", False)),
            )
            hints = screen_hash_hints(session.model, activity)
            for hex_hash, name in body.get("names", {}).items():
                hints[StructureHash.from_hex(hex_hash)] = name
            name_fragments(ftg, hints)
            session.ftgs[activity] = ftg
            session.entry_scripts[activity] = entry
            self._send_json(200, ftg.to_doc())

    def activity_add_fragment(self, query: str, sid: str, activity: str) -> None:
        """Manually record a fragment the crawler missed, by its click route."""
        session = self.state.session(sid)
        with session.lock:
            self._activity(session, activity)
            ftg = session.ftgs.get(activity)
            if ftg is None:
                raise StepOrderError(f"activity {activity!r} has not been crawled")
            body = self._body()
            name = body.get("name")
            if not isinstance(name, str) or not name:
                raise ParseError("manual fragment body must carry a 'name' string")
            entry = (parse_entry_script(body["entry"]) if "entry" in body
                     else session.entry_scripts.get(activity, EntryScript()))
            add_manual_fragment(
                ftg, lambda: SimSession.launch(session.model),
                entry, list(body.get("actions", [])), name,
            )
            self._send_json(200, ftg.to_doc())

    def activity_ftg(self, query: str, sid: str, activity: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            self._activity(session, activity)
            ftg = session.ftgs.get(activity)
            if ftg is None:
                raise StepOrderError(f"activity {activity!r} has not been crawled")
            if query == "format=dot":
                self._send_text(200, ftg_to_dot(ftg))
            else:
                self._send_json(200, ftg.to_doc())

    def session_simulate(self, query: str, sid: str) -> None:
        """Stateless preview: run an entry script on a throwaway session."""
        session = self.state.session(sid)
        with session.lock:
            entry = parse_entry_script(self._body())
            sim = SimSession.launch(session.model)
            for intent, values in entry.intents:
                sim.send_intent(intent, values)
            for ref in entry.actions:
                sim.click(ref)
            tree = sim.current_view_tree()
            self._send_json(200, {
                "activity": sim.current_activity(),
                "screen": sim.top.current_screen,
                "treeHash": tree_hash(tree).hex,
                "viewTree": tree.to_doc(),
            })

    def session_selection(self, query: str, sid: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            session.require_analyzed()
            selection = parse_selection(self._body())
            for entry in selection:
                if not session.model.has_activity(entry.activity):
                    raise UnknownResource(f"unknown activity {entry.activity!r}")
                if entry.fragment is not None:
                    ftg = session.ftgs.get(entry.activity)
                    if ftg is None:
                        raise StepOrderError(
                            f"fragment selected but activity {entry.activity!r} "
                            "has not been crawled"
                        )
                    if entry.fragment not in ftg.names.values():
                        raise NoSuchFragment(
                            f"activity {entry.activity!r} has no fragment named "
                            f"{entry.fragment!r}"
                        )
            session.selection = selection
            session.manifest = None  # selection changed; prior manifest is stale
            self._send_json(200, {"targets": len(selection)})

    def session_manifest_build(self, query: str, sid: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            session.require_analyzed()
            if session.selection is None:
                raise StepOrderError("no selection has been put for this session")
            session.manifest = build_templates(
                session.model, session.shortcuts, session.ftgs, session.selection
            )
            self._send_text(200, manifest_to_json(session.manifest),
                            "application/json; charset=utf-8")

    def session_manifest_get(self, query: str, sid: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            if session.manifest is None:
                raise StepOrderError("the manifest has not been built for this session")
            self._send_text(200, manifest_to_json(session.manifest),
                            "application/json; charset=utf-8")

    def session_replay(self, query: str, sid: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            if session.manifest is None:
                raise StepOrderError("the manifest has not been built for this session")
            body = self._body()
            uri = body.get("uri")
            if not isinstance(uri, str):
                raise ParseError("replay body must carry a 'uri' string")
            link = parse_deep_link(session.manifest, uri)
            trace = replay_deep_link(session.model, session.manifest, link)
            session.traces.append(trace)
            self._send_json(200, {"index": len(session.traces) - 1,
                                  "trace": trace.to_doc()})

    def session_trace(self, query: str, sid: str, index: str) -> None:
        session = self.state.session(sid)
        with session.lock:
            n = int(index)
            if n >= len(session.traces):
                raise UnknownResource(f"no trace {n} in session {sid!r}")
            self._send_json(200, session.traces[n].to_doc())

    # -- static UI -------------------------------------------------------------

    def _serve_static(self, path: str) -> bool:
        if path == "/":
            if self.ui_dir is not None:
                self.send_response(302)
                self.send_header("Location", "/ui/")
                self.send_header("Content-Length", "0")
                self.end_headers()
            else:
                self._send_json(200, {"service": "deeplinker", "ui": False})
            return True
        if not path.startswith("/ui"):
            return False
        if self.ui_dir is None:
            self._send_json(404, {"code": "not_found",
                                  "message": "no UI directory configured (serve --ui-dir)",
                                  "detail": {}})
            return True
        rel = path.removeprefix("/ui").lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            self._send_json(404, {"code": "not_found", "message": f"no file {rel!r}",
                                  "detail": {}})
            return True
        content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), content_type)
        return True


def create_server(host: str = "127.0.0.1", port: int = 0,
                  corpus: Path | None = None,
                  ui_dir: Path | None = None) -> ThreadingHTTPServer:
    state = ServiceState(corpus=corpus)
    handler = type("BoundApiHandler", (ApiHandler,), {"state": state, "ui_dir": ui_dir})
    return ThreadingHTTPServer((host, port), handler)


def run_server(host: str, port: int, corpus: Path | None = None,
               ui_dir: Path | None = None) -> None:
    server = create_server(host, port, corpus, ui_dir)
    log.info("serving on http://%s:%d/", *server.server_address)
    print(f"deeplinker service on http://{server.server_address[0]}:"
          f"{server.server_address[1]}/", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
