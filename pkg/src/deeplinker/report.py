"""Analysis report shared by the CLI and the HTTP service.

The report carries everything a release console needs to drive the next
steps: the navigation graph, each activity's unique shortcuts with their
parameter slots and full intent declarations (so an entry script can be
assembled from a shortcut), and the activities that cannot be linked at all.
"""

from __future__ import annotations

from .model import AppModel, count_declared_deep_links, validate_replayability
from .navgraph import (
    NavGraph,
    Path,
    Shortcut,
    compute_shortcuts,
    nav_graph_to_doc,
    path_labels,
    unique_shortcuts,
)


def path_to_doc(path: Path) -> dict:
    transitions = []
    for edge in path.transitions:
        if edge.is_launch:
            transitions.append({"launch": True, "to": edge.to,
                                "labels": sorted(l.render() for l in edge.labels)})
        else:
            transitions.append({
                "from": edge.frm,
                "to": edge.to,
                "labels": sorted(l.render() for l in edge.labels),
                "intent": edge.intent.to_doc(),
                "externalEntry": edge.external_entry,
            })
    extras = sorted(
        (l for l in path_labels(path) if l.kind == "extra"), key=lambda l: l.name
    )
    return {
        "length": path.length,
        "transitions": transitions,
        "labels": sorted(l.render() for l in path_labels(path)),
        "parameters": [{"name": l.name, "type": l.value_type} for l in extras],
    }


def analysis_report(model: AppModel, graph: NavGraph,
                    shortcuts: dict[tuple[str, Path], Shortcut]) -> dict:
    activities = {}
    for a in model.activities:
        paths = unique_shortcuts(shortcuts, a.name)
        activities[a.name] = {
            "uniqueShortcuts": [path_to_doc(p) for p in paths],
            "replayable": bool(paths),
            "screens": sorted(a.screens),
            "rootScreen": a.root_screen,
        }
    return {
        "packageName": model.package_name,
        "mainActivity": model.main_activity,
        "declaredDeepLinks": count_declared_deep_links(model),
        "unreplayableActivities": validate_replayability(model),
        "navGraph": nav_graph_to_doc(graph),
        "activities": activities,
    }


def analyze(model: AppModel, max_len: int | None = None) -> dict:
    from .navgraph import build_nav_graph

    graph = build_nav_graph(model)
    shortcuts = compute_shortcuts(graph, max_len)
    return analysis_report(model, graph, shortcuts)
