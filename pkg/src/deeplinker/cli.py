"""Command-line frontend for the deep-link pipeline.

Subcommands mirror the release workflow: ``analyze`` a model, ``crawl`` an
activity for fragments, ``link`` a selection into a release manifest,
``replay`` a concrete link, ``count-manifest`` the deep links an app already
declares, and ``serve`` the HTTP API. Errors are written to stderr as a JSON
envelope and exit nonzero; ``replay`` exits 0 only when the link verifiably
reached its target.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .corpus import corpus_dir
from .crawl import (
    crawl_ftg,
    ftg_from_doc,
    ftg_to_dot,
    name_fragments,
    parse_entry_script,
    screen_hash_hints,
)
from .errors import DeeplinkerError, ParseError
from .jsonutil import canonical_json
from .linker import build_templates, import_manifest, manifest_to_json, parse_deep_link, parse_selection
from .model import count_declared_deep_links, load_app_model
from .navgraph import build_nav_graph, compute_shortcuts, nav_graph_to_dot
from .replay import replay_deep_link
from .report import analysis_report
from .simulator import SimSession


def _read_json(path: str, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"{what} file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} file {path} is not valid JSON: {exc}")


def _load_model(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"model file not found: {path}")
    return load_app_model(text)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    model = _load_model(args.model)
    graph = build_nav_graph(model)
    if args.format == "dot":
        _emit(nav_graph_to_dot(graph), args.out)
        return 0
    shortcuts = compute_shortcuts(graph, args.max_len)
    _emit(canonical_json(analysis_report(model, graph, shortcuts)), args.out)
    return 0


def cmd_count_manifest(args) -> int:
    model = _load_model(args.model)
    print(count_declared_deep_links(model))
    return 0


def cmd_crawl(args) -> int:
    model = _load_model(args.model)
    entry = parse_entry_script(_read_json(args.entry, "entry script") if args.entry else {})
    ftg = crawl_ftg(
        lambda: SimSession.launch(model),
        args.activity,
        entry,
        budget=args.budget,
        record_cross_edges=args.cross_edges,
        position_fallback=args.position_fallback,
    )
    name_fragments(ftg, screen_hash_hints(model, args.activity))
    if args.format == "dot":
        _emit(ftg_to_dot(ftg), args.out)
    else:
        _emit(canonical_json(ftg.to_doc()), args.out)
    return 0


def cmd_link(args) -> int:
    model = _load_model(args.model)
    graph = build_nav_graph(model)
    shortcuts = compute_shortcuts(graph, args.max_len)
    selection = parse_selection(_read_json(args.select, "selection"))
    ftgs = {}
    for path in args.ftg or []:
        ftg = ftg_from_doc(_read_json(path, "FTG"))
        ftgs[ftg.activity] = ftg
    manifest = build_templates(model, shortcuts, ftgs, selection)
    _emit(manifest_to_json(manifest), args.out)
    return 0


def cmd_replay(args) -> int:
    model = _load_model(args.model)
    manifest = import_manifest(_read_json(args.manifest, "manifest"), model=model)
    link = parse_deep_link(manifest, args.uri)
    trace = replay_deep_link(model, manifest, link)
    if args.lines:
        _emit(trace.to_json_lines() + "\n", args.out)
    else:
        _emit(canonical_json(trace.to_doc()), args.out)
    return 0 if trace.verdict.reached else 1


def cmd_serve(args) -> int:
    from .service import run_server

    run_server(
        host=args.host,
        port=args.port,
        corpus=Path(args.corpus_dir) if args.corpus_dir else corpus_dir(),
        ui_dir=Path(args.ui_dir) if args.ui_dir else None,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deeplinker",
        description="Derive, release, and replay deep links for declarative app models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="build the navigation graph and shortcuts")
    p.add_argument("model")
    p.add_argument("--max-len", type=int, default=None, help="path length bound (default: vertex count)")
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("count-manifest", help="count activities already declaring deep-link filters")
    p.add_argument("model")
    p.set_defaults(func=cmd_count_manifest)

    p = sub.add_parser("crawl", help="discover an activity's fragments by exhaustive clicking")
    p.add_argument("model")
    p.add_argument("--activity", required=True)
    p.add_argument("--entry", help="entry script JSON file (omit for the main activity)")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--cross-edges", action="store_true",
                   help="also record transitions into already-known fragments")
    p.add_argument("--position-fallback", action="store_true",
                   help="identify id-less trigger views by tree position")
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_crawl)

    p = sub.add_parser("link", help="build the release manifest for a selection")
    p.add_argument("model")
    p.add_argument("--select", required=True, help="selection JSON file")
    p.add_argument("--ftg", action="append", help="crawled FTG JSON file (repeatable)")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("replay", help="execute a concrete deep link against the simulator")
    p.add_argument("model")
    p.add_argument("manifest")
    p.add_argument("uri")
    p.add_argument("--lines", action="store_true", help="emit the trace as JSON lines")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP analysis service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8675)
    p.add_argument("--corpus-dir", help="directory of *.app.json models (default: bundled corpus)")
    p.add_argument("--ui-dir", help="static directory to serve at /ui/")
    p.set_defaults(func=cmd_serve)

    return parser


def cli_run(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("DEEPLINKER_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DeeplinkerError as exc:
        sys.stderr.write(json.dumps(exc.envelope(), sort_keys=True) + "\n")
        return 2


def main() -> None:
    sys.exit(cli_run())


if __name__ == "__main__":
    main()
