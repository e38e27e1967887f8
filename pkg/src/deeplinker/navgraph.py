"""Navigation graph construction, path enumeration, and shortcut computation.

Activities form a labeled directed multigraph: one vertex per activity, one
edge per distinct (source, target, label set) intent declaration, rooted at
the main activity. Every path to an activity starts with the synthetic
app-launching transition, so following it in order re-creates whatever
internal state the target depends on.

A path can stand in for a longer one when its label set is contained in the
longer path's label set: it needs no information the longer route did not
already need. The shortcut of a path is the shortest such replacement. The
search scans candidate paths in canonical length-ascending order and takes
the first replacement, so results do not depend on declaration order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DifferentTargets, UnreachableActivity
from .model import (
    AppModel,
    IntentDecl,
    Label,
    LAUNCH_ACTION,
    LAUNCH_CATEGORY,
)

LAUNCH_SOURCE = ""  # sentinel "from" of the synthetic launch transition

LAUNCH_LABELS = frozenset({
    Label("action", LAUNCH_ACTION),
    Label("category", LAUNCH_CATEGORY),
})


@dataclass(frozen=True)
class NavEdge:
    frm: str
    to: str
    labels: frozenset[Label]
    intent: IntentDecl
    external_entry: bool = False

    @property
    def is_launch(self) -> bool:
        return self.frm == LAUNCH_SOURCE

    def render_labels(self) -> str:
        return ",".join(sorted(l.render() for l in self.labels))

    def sort_key(self) -> tuple:
        return (self.render_labels(), self.frm, self.to)


@dataclass(frozen=True)
class Path:
    """Launch transition followed by chained edges; length counts both."""

    transitions: tuple[NavEdge, ...]

    @property
    def length(self) -> int:
        return len(self.transitions)

    @property
    def target(self) -> str:
        return self.transitions[-1].to

    def sort_key(self) -> tuple:
        return (self.length, tuple(e.sort_key() for e in self.transitions))

    def describe(self) -> list[str]:
        out = []
        for e in self.transitions:
            src = "(launch)" if e.is_launch else e.frm
            out.append(f"{src} -> {e.to} [{e.render_labels()}]")
        return out


@dataclass(frozen=True)
class Shortcut:
    target: str
    original: Path
    chosen: Path


@dataclass(frozen=True)
class NavGraph:
    vertices: frozenset[str]
    edges: tuple[NavEdge, ...]
    start: str

    def launch_edge(self) -> NavEdge:
        intent = IntentDecl(target=self.start, labels=LAUNCH_LABELS)
        return NavEdge(LAUNCH_SOURCE, self.start, LAUNCH_LABELS, intent)

    def out_edges(self, vertex: str, include_opaque: bool = False) -> list[NavEdge]:
        return [
            e for e in self.edges
            if e.frm == vertex and (include_opaque or not e.intent.has_opaque)
        ]


def build_nav_graph(model: AppModel) -> NavGraph:
    """Derive the navigation graph from the model's declared intents.

    Externally launchable activities that no in-app flow reaches get a
    synthetic entry edge from the main activity, carrying their required
    params as extras, so every vertex stays reachable from the start.
    """
    vertices = frozenset(a.name for a in model.activities)
    edges: list[NavEdge] = []
    seen: set[tuple[str, str, frozenset[Label]]] = set()
    for source, intent in model.declared_intents():
        key = (source, intent.target, intent.labels)
        if key in seen:
            continue
        seen.add(key)
        edges.append(NavEdge(source, intent.target, intent.labels, intent))

    has_inbound = {e.to for e in edges}
    for a in model.activities:
        if a.name == model.main_activity:
            continue
        if a.externally_launchable and a.name not in has_inbound:
            labels = frozenset(Label("extra", n, t) for n, t in a.required_params)
            intent = IntentDecl(target=a.name, labels=labels)
            edges.append(NavEdge(model.main_activity, a.name, labels, intent,
                                 external_entry=True))

    graph = NavGraph(vertices=vertices, edges=tuple(edges), start=model.main_activity)
    unreachable = vertices - _reachable(graph)
    if unreachable:
        raise UnreachableActivity(
            f"activities not reachable from {graph.start!r}: {sorted(unreachable)}"
        )
    return graph


def _reachable(graph: NavGraph) -> set[str]:
    seen = {graph.start}
    frontier = [graph.start]
    while frontier:
        v = frontier.pop()
        for e in graph.out_edges(v, include_opaque=True):
            if e.to not in seen:
                seen.add(e.to)
                frontier.append(e.to)
    return seen


def enumerate_paths(graph: NavGraph, vertex: str, max_len: int | None = None,
                    include_opaque: bool = False) -> list[Path]:
    """All vertex-simple paths from the start to ``vertex``, launch included.

    Parallel edges are expanded; opaque-payload edges are skipped unless asked
    for, since those transitions cannot be driven from outside the app. The
    result is sorted by length, ties broken by the rendered label sets, which
    makes the ordering canonical.
    """
    if vertex not in graph.vertices:
        raise KeyError(vertex)
    if max_len is None:
        max_len = len(graph.vertices)
    launch = graph.launch_edge()
    found: list[Path] = []

    def walk(current: str, visited: set[str], trail: tuple[NavEdge, ...]) -> None:
        if current == vertex:
            found.append(Path((launch,) + trail))
            return  # simple paths cannot revisit the target
        if len(trail) + 1 >= max_len:
            return
        for edge in graph.out_edges(current, include_opaque):
            if edge.to in visited:
                continue
            walk(edge.to, visited | {edge.to}, trail + (edge,))

    walk(graph.start, {graph.start}, ())
    found.sort(key=Path.sort_key)
    return found


def path_labels(path: Path) -> frozenset[Label]:
    labels: set[Label] = set()
    for edge in path.transitions:
        labels |= edge.labels
    return frozenset(labels)


def can_replace(p1: Path, p2: Path) -> bool:
    """True when ``p1`` can stand in for ``p2``: same target, labels contained.

    Containment is subset-or-equal, so an equal-label shorter path qualifies.
    """
    if p1.target != p2.target:
        raise DifferentTargets(
            f"paths end at different activities: {p1.target!r} vs {p2.target!r}"
        )
    return path_labels(p1) <= path_labels(p2)


def compute_shortcuts(graph: NavGraph, max_len: int | None = None
                      ) -> dict[tuple[str, Path], Shortcut]:
    """For every (vertex, enumerated path), the shortest replacement path.

    Candidate paths are scanned in canonical order; the first earlier path
    whose labels are contained in the current one wins, else the path keeps
    itself as its own shortcut.
    """
    shortcuts: dict[tuple[str, Path], Shortcut] = {}
    for vertex in sorted(graph.vertices):
        plist = enumerate_paths(graph, vertex, max_len)
        label_sets = [path_labels(p) for p in plist]
        for i, p_i in enumerate(plist):
            chosen = p_i
            for j in range(i):
                if label_sets[j] <= label_sets[i]:
                    chosen = plist[j]
                    break
            shortcuts[(vertex, p_i)] = Shortcut(vertex, p_i, chosen)
    return shortcuts


def unique_shortcuts(shortcuts: dict[tuple[str, Path], Shortcut], vertex: str) -> list[Path]:
    """Deduplicated chosen shortcuts leading to ``vertex``, shortest first."""
    chosen = {s.chosen for (v, _), s in shortcuts.items() if v == vertex}
    return sorted(chosen, key=Path.sort_key)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def nav_graph_to_doc(graph: NavGraph) -> dict:
    return {
        "start": graph.start,
        "vertices": sorted(graph.vertices),
        "edges": [
            {
                "from": e.frm,
                "to": e.to,
                "labels": sorted(l.render() for l in e.labels),
                "intent": e.intent.to_doc(),
                "externalEntry": e.external_entry,
            }
            for e in sorted(graph.edges, key=lambda e: (e.frm, e.to, e.render_labels()))
        ],
    }


def nav_graph_to_dot(graph: NavGraph) -> str:
    lines = ["digraph navigation {", "  rankdir=LR;"]
    for v in sorted(graph.vertices):
        shape = "doublecircle" if v == graph.start else "ellipse"
        lines.append(f'  "{v}" [shape={shape}];')
    for e in sorted(graph.edges, key=lambda e: (e.frm, e.to, e.render_labels())):
        style = ' style=dashed' if e.external_entry else ""
        lines.append(f'  "{e.frm}" -> "{e.to}" [label="{e.render_labels()}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
