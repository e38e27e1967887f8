"""Fragment discovery by exhaustive clicking with restart-based backtracking.

Starting from an entry script that lands the simulator on the activity under
analysis, the crawler clicks every view of the current fragment in document
order. A click that switches activities is undone with back navigation; a
click that changes the structure hash of the view tree has found a fragment
transition. New fragments are recorded with their trigger and explored
recursively. There is no generic "back to previous fragment" operation, so
returning to the parent means restarting the app, replaying the entry script,
and re-clicking the trigger path.

Views without a resource id are still clicked, but a transition they trigger
cannot be replayed by id, so by default it is reported separately as
unidentifiable instead of entering the graph. ``position_fallback`` records a
positional reference instead, trading portability for coverage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import (
    CrawlBudgetExceeded,
    DuplicateName,
    EntryScriptFailed,
    NoSuchFragment,
    SimulationError,
)
from .model import AppModel, IntentDecl, ViewNode, iter_views, view_ref
from .simulator import SimSession
from .treehash import StructureHash, tree_hash

DEFAULT_CLICK_BUDGET = 10_000


@dataclass(frozen=True)
class EntryScript:
    """Intents and clicks that take a fresh session to the crawl entry point."""

    intents: tuple[tuple[IntentDecl, dict], ...] = ()
    actions: tuple[str, ...] = ()

    def to_doc(self) -> dict:
        return {
            "intents": [
                {"intent": intent.to_doc(), "values": dict(values)}
                for intent, values in self.intents
            ],
            "actions": list(self.actions),
        }


def parse_entry_script(doc: dict) -> EntryScript:
    from .model import parse_intent_decl

    intents = []
    for step in doc.get("intents", []):
        intents.append((parse_intent_decl(step["intent"], "entry script"),
                        dict(step.get("values", {}))))
    return EntryScript(intents=tuple(intents), actions=tuple(doc.get("actions", [])))


@dataclass(frozen=True)
class FragmentNode:
    hash: StructureHash
    example_tree: ViewNode
    discovered_at: int


@dataclass(frozen=True)
class FtgEdge:
    source: StructureHash
    target: StructureHash
    trigger: str
    kind: str = "discovery"  # "discovery" | "cross"


@dataclass
class FragmentTransitionGraph:
    activity: str
    start: StructureHash
    vertices: dict[StructureHash, FragmentNode]
    edges: list[FtgEdge] = field(default_factory=list)
    unidentified: list[tuple[StructureHash, StructureHash]] = field(default_factory=list)
    names: dict[StructureHash, str] = field(default_factory=dict)

    def hash_for_name(self, name: str) -> StructureHash:
        for h, n in self.names.items():
            if n == name:
                return h
        raise NoSuchFragment(f"no fragment named {name!r} in activity {self.activity!r}")

    def to_doc(self) -> dict:
        return {
            "activity": self.activity,
            "start": self.start.hex,
            "vertices": [
                {
                    "hash": node.hash.hex,
                    "name": self.names.get(node.hash),
                    "discoveredAt": node.discovered_at,
                    "exampleTree": node.example_tree.to_doc(),
                }
                for node in sorted(self.vertices.values(), key=lambda n: n.discovered_at)
            ],
            "edges": [
                {"source": e.source.hex, "target": e.target.hex,
                 "trigger": e.trigger, "kind": e.kind}
                for e in self.edges
            ],
            "unidentified": [
                {"source": s.hex, "target": t.hex} for s, t in self.unidentified
            ],
        }


def crawl_ftg(session_factory: Callable[[], SimSession], activity: str,
              entry: EntryScript, *, budget: int = DEFAULT_CLICK_BUDGET,
              record_cross_edges: bool = False,
              position_fallback: bool = False) -> FragmentTransitionGraph:
    """Build the fragment transition graph of one activity.

    ``session_factory`` must return a freshly launched session each call; the
    crawl owns the session it gets and restarts it freely.
    """
    session = session_factory()
    _run_entry(session, entry, activity)
    start_tree = session.current_view_tree()
    start_hash = tree_hash(start_tree)
    ftg = FragmentTransitionGraph(
        activity=activity,
        start=start_hash,
        vertices={start_hash: FragmentNode(start_hash, start_tree, 0)},
    )
    clicks = 0

    def spend_click() -> None:
        nonlocal clicks
        clicks += 1
        if clicks > budget:
            raise CrawlBudgetExceeded(
                f"crawl of {activity!r} exceeded the {budget}-click budget"
            )

    def recover(trigger_path: tuple[str, ...], expected: StructureHash) -> None:
        session.reset()
        _run_entry(session, entry, activity)
        for ref in trigger_path:
            spend_click()
            session.click(ref)
        now = tree_hash(session.current_view_tree())
        if now != expected:
            raise EntryScriptFailed(
                f"recovery did not return to fragment {expected.hex}; landed on {now.hex}"
            )

    def explore(frag: FragmentNode, trigger_path: tuple[str, ...]) -> None:
        refs = [view_ref(node, path) for node, path in iter_views(frag.example_tree)]
        for ref in refs:
            spend_click()
            try:
                session.click(ref)
            except SimulationError:
                continue  # failed transitions leave the session unchanged
            if session.current_activity() != activity:
                session.do_back()
                continue
            current = session.current_view_tree()
            h = tree_hash(current)
            if h == frag.hash:
                continue
            identifiable = not ref.startswith("@") or position_fallback
            if h not in ftg.vertices:
                if identifiable:
                    node = FragmentNode(h, current, clicks)
                    ftg.vertices[h] = node
                    ftg.edges.append(FtgEdge(frag.hash, h, ref))
                    explore(node, trigger_path + (ref,))
                else:
                    if (frag.hash, h) not in ftg.unidentified:
                        ftg.unidentified.append((frag.hash, h))
            elif record_cross_edges and identifiable:
                cross = FtgEdge(frag.hash, h, ref, kind="cross")
                if cross not in ftg.edges:
                    ftg.edges.append(cross)
            recover(trigger_path, frag.hash)

    explore(ftg.vertices[start_hash], ())
    return ftg


def _run_entry(session: SimSession, entry: EntryScript, activity: str) -> None:
    try:
        for intent, values in entry.intents:
            session.send_intent(intent, values)
        for ref in entry.actions:
            session.click(ref)
    except SimulationError as exc:
        raise EntryScriptFailed(f"entry script failed: {exc}") from exc
    landed = session.current_activity()
    if landed != activity:
        raise EntryScriptFailed(
            f"entry script landed on {landed!r}, expected {activity!r}"
        )


def fragment_path(ftg: FragmentTransitionGraph, target: StructureHash) -> list[str]:
    """Trigger sequence along discovery edges from the start fragment to ``target``."""
    if target not in ftg.vertices:
        raise NoSuchFragment(f"fragment {target.hex} was not discovered in {ftg.activity!r}")
    parents = {
        e.target: (e.source, e.trigger) for e in ftg.edges if e.kind == "discovery"
    }
    triggers: list[str] = []
    node = target
    while node != ftg.start:
        source, trigger = parents[node]
        triggers.append(trigger)
        node = source
    triggers.reverse()
    return triggers


def name_fragments(ftg: FragmentTransitionGraph,
                   hints: dict[StructureHash, str] | None = None
                   ) -> dict[StructureHash, str]:
    """Assign a name to each fragment: the hint when given, else frag-<hash8>."""
    hints = hints or {}
    names: dict[StructureHash, str] = {}
    used: dict[str, StructureHash] = {}
    for h in sorted(ftg.vertices):
        name = hints.get(h, f"frag-{h.hex[:8]}")
        if name in used:
            raise DuplicateName(
                f"fragments {used[name].hex} and {h.hex} would both be named {name!r}"
            )
        used[name] = h
        names[h] = name
    ftg.names = names
    return names


def add_manual_fragment(ftg: FragmentTransitionGraph,
                        session_factory: Callable[[], SimSession],
                        entry: EntryScript, actions: list[str], name: str,
                        ) -> StructureHash:
    """Record a fragment the crawler missed by replaying a hand-performed route.

    The clicks are executed from the entry point; every hash change along the
    way that reaches an unknown fragment is recorded as a discovery edge, and
    the landing fragment gets ``name``. Returns the landing hash.
    """
    session = session_factory()
    _run_entry(session, entry, ftg.activity)
    current = tree_hash(session.current_view_tree())
    if current != ftg.start:
        raise EntryScriptFailed(
            f"entry script landed on fragment {current.hex}, not the crawl start "
            f"{ftg.start.hex}"
        )
    next_index = max((n.discovered_at for n in ftg.vertices.values()), default=0) + 1
    for ref in actions:
        session.click(ref)
        if session.current_activity() != ftg.activity:
            raise EntryScriptFailed(f"action {ref!r} left activity {ftg.activity!r}")
        landed = tree_hash(session.current_view_tree())
        if landed == current:
            continue
        if landed not in ftg.vertices:
            ftg.vertices[landed] = FragmentNode(landed, session.current_view_tree(),
                                                next_index)
            next_index += 1
            ftg.edges.append(FtgEdge(current, landed, ref))
        current = landed
    other = ftg.names.get(current)
    if other != name:
        if name in ftg.names.values():
            raise DuplicateName(f"another fragment is already named {name!r}")
        ftg.names[current] = name
    for h in ftg.vertices:
        ftg.names.setdefault(h, f"frag-{h.hex[:8]}")
    return current


def screen_hash_hints(model: AppModel, activity: str) -> dict[StructureHash, str]:
    """Map crawled hashes back to declared screen names, root screen winning ties."""
    decl = model.activity(activity)
    hints: dict[StructureHash, str] = {}
    ordered = [decl.root_screen] + [s for s in decl.screens if s != decl.root_screen]
    for sname in ordered:
        h = tree_hash(decl.screens[sname].view_tree)
        hints.setdefault(h, sname)
    return hints


def ftg_from_doc(doc: dict) -> FragmentTransitionGraph:
    """Rebuild a crawled graph from its exported document."""
    from .model import _parse_view

    vertices = {}
    names = {}
    for vdoc in doc["vertices"]:
        h = StructureHash.from_hex(vdoc["hash"])
        vertices[h] = FragmentNode(
            hash=h,
            example_tree=_parse_view(vdoc["exampleTree"], "ftg vertex"),
            discovered_at=vdoc["discoveredAt"],
        )
        if vdoc.get("name"):
            names[h] = vdoc["name"]
    return FragmentTransitionGraph(
        activity=doc["activity"],
        start=StructureHash.from_hex(doc["start"]),
        vertices=vertices,
        edges=[
            FtgEdge(StructureHash.from_hex(e["source"]),
                    StructureHash.from_hex(e["target"]),
                    e["trigger"], e.get("kind", "discovery"))
            for e in doc.get("edges", [])
        ],
        unidentified=[
            (StructureHash.from_hex(u["source"]), StructureHash.from_hex(u["target"]))
            for u in doc.get("unidentified", [])
        ],
        names=names,
    )


def ftg_to_dot(ftg: FragmentTransitionGraph) -> str:
    lines = ["digraph fragments {", "  rankdir=LR;"]
    for node in sorted(ftg.vertices.values(), key=lambda n: n.discovered_at):
        label = ftg.names.get(node.hash, node.hash.hex[:8])
        shape = "doublecircle" if node.hash == ftg.start else "ellipse"
        lines.append(f'  "{node.hash.hex}" [label="{label}" shape={shape}];')
    for e in ftg.edges:
        style = ' style=dashed' if e.kind == "cross" else ""
        lines.append(f'  "{e.source.hex}" -> "{e.target.hex}" [label="{e.trigger}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
