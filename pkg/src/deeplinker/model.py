"""Declarative app models: types, loader, validator, and serializer.

A model document is a JSON object describing a multi-page app: its activities,
the screens (candidate sub-pages) inside each activity, the view trees of
those screens, and the click handlers that either start another activity via
an intent, swap the visible screen, or open a popup overlay.

Document layout (UTF-8, ``formatVersion`` 1)::

    {
      "formatVersion": 1,
      "packageName": "com.example.demo",
      "mainActivity": "Main",
      "stateVariables": ["fooList"],
      "activities": [
        {
          "name": "Main",
          "manifestFilters": [{"action": ..., "categories": [...],
                               "dataScheme": ..., "dataHost": ...}],
          "requiredParams": [{"name": "p1", "type": "text"}],
          "readsState": [], "setsState": [],
          "externallyLaunchable": false,
          "rootScreen": "root",
          "screens": {
            "root": {
              "viewTree": {"tag": "LinearLayout", "id": "box", "children": [...]},
              "handlers": {
                "button1": {"effect": "startActivity",
                            "intent": {"target": "A",
                                       "extras": {"p1": "text"},
                                       "bindings": {"p1": {"const": "hi"}}}},
                "button2": {"effect": "showScreen", "screen": "child"}
              }
            }
          }
        }
      ]
    }

Handler keys and click references name a view either by its resource id or,
for views that have none, by a positional reference like ``"@0/2"`` (child
indices from the root; ``"@"`` is the root itself).

Extra payloads carry one of the basic types ``int``, ``long``, ``double``,
``boolean``, ``text``; anything else must be declared ``opaque``, which marks
the transition as impossible to replay from outside the app.

A machine-readable schema for the format lives in ``docs/app-model.schema.json``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterator

from .errors import ParseError, ValidationError
from .jsonutil import sha256_digest

FORMAT_VERSION = 1

BASIC_TYPES = ("int", "long", "double", "boolean", "text")
OPAQUE_TYPE = "opaque"

DEEP_LINK_ACTION = "android.intent.action.VIEW"
BROWSABLE_CATEGORY = "android.intent.category.BROWSABLE"
LAUNCH_ACTION = "android.intent.action.MAIN"
LAUNCH_CATEGORY = "android.intent.category.LAUNCHER"

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_DOTTED = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Label:
    """One abstract intent field: action, category, data, or a typed extra."""

    kind: str
    name: str
    value_type: str | None = None

    def render(self) -> str:
        if self.value_type is not None:
            return f"{self.kind}:{self.name}:{self.value_type}"
        return f"{self.kind}:{self.name}"


@dataclass(frozen=True)
class Binding:
    """Value source for one extra when a click handler fires an intent."""

    kind: str  # "const" | "param"
    value: object = None  # constant value, or the incoming param name

    def to_doc(self) -> dict:
        return {self.kind: self.value}


@dataclass(frozen=True)
class IntentDecl:
    target: str
    labels: frozenset[Label]
    bindings: tuple[tuple[str, Binding], ...] = ()

    @property
    def extra_labels(self) -> tuple[Label, ...]:
        return tuple(sorted((l for l in self.labels if l.kind == "extra"),
                            key=lambda l: l.name))

    @property
    def basic_extras(self) -> tuple[Label, ...]:
        return tuple(l for l in self.extra_labels if l.value_type != OPAQUE_TYPE)

    @property
    def has_opaque(self) -> bool:
        return any(l.value_type == OPAQUE_TYPE for l in self.extra_labels)

    def binding_for(self, name: str) -> Binding | None:
        for bound, binding in self.bindings:
            if bound == name:
                return binding
        return None

    def to_doc(self) -> dict:
        doc: dict = {"target": self.target}
        actions = sorted(l.name for l in self.labels if l.kind == "action")
        if actions:
            doc["action"] = actions[0]
        categories = sorted(l.name for l in self.labels if l.kind == "category")
        if categories:
            doc["categories"] = categories
        data = sorted(l.name for l in self.labels if l.kind == "data")
        if data:
            doc["data"] = data[0]
        extras = {l.name: l.value_type for l in self.extra_labels}
        if extras:
            doc["extras"] = extras
        if self.bindings:
            doc["bindings"] = {name: b.to_doc() for name, b in self.bindings}
        return doc


@dataclass(frozen=True)
class ViewNode:
    tag: str
    resource_id: str | None = None
    children: tuple["ViewNode", ...] = ()

    def to_doc(self) -> dict:
        doc: dict = {"tag": self.tag}
        if self.resource_id is not None:
            doc["id"] = self.resource_id
        if self.children:
            doc["children"] = [c.to_doc() for c in self.children]
        return doc


@dataclass(frozen=True)
class ClickEffect:
    kind: str  # "startActivity" | "showScreen" | "openPopup" | "noop"
    intent: IntentDecl | None = None
    screen: str | None = None
    overlay: ViewNode | None = None

    def to_doc(self) -> dict:
        doc: dict = {"effect": self.kind}
        if self.intent is not None:
            doc["intent"] = self.intent.to_doc()
        if self.screen is not None:
            doc["screen"] = self.screen
        if self.overlay is not None:
            doc["view"] = self.overlay.to_doc()
        return doc


@dataclass(frozen=True)
class IntentFilterDecl:
    action: str
    categories: frozenset[str] = frozenset()
    data_scheme: str | None = None
    data_host: str | None = None

    def to_doc(self) -> dict:
        doc: dict = {"action": self.action, "categories": sorted(self.categories)}
        if self.data_scheme is not None:
            doc["dataScheme"] = self.data_scheme
        if self.data_host is not None:
            doc["dataHost"] = self.data_host
        return doc


@dataclass(frozen=True)
class ScreenDecl:
    name: str
    view_tree: ViewNode
    handlers: dict[str, ClickEffect] = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {
            "viewTree": self.view_tree.to_doc(),
            "handlers": {ref: eff.to_doc() for ref, eff in self.handlers.items()},
        }


@dataclass(frozen=True)
class ActivityDecl:
    name: str
    manifest_filters: tuple[IntentFilterDecl, ...] = ()
    required_params: tuple[tuple[str, str], ...] = ()
    reads_state: frozenset[str] = frozenset()
    sets_state: frozenset[str] = frozenset()
    root_screen: str = "root"
    screens: dict[str, ScreenDecl] = field(default_factory=dict)
    externally_launchable: bool = False

    @property
    def simple_name(self) -> str:
        return self.name.rsplit(".", 1)[-1]

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "manifestFilters": [f.to_doc() for f in self.manifest_filters],
            "requiredParams": [{"name": n, "type": t} for n, t in self.required_params],
            "readsState": sorted(self.reads_state),
            "setsState": sorted(self.sets_state),
            "externallyLaunchable": self.externally_launchable,
            "rootScreen": self.root_screen,
            "screens": {name: s.to_doc() for name, s in self.screens.items()},
        }


@dataclass(frozen=True)
class AppModel:
    package_name: str
    main_activity: str
    state_variables: frozenset[str]
    activities: tuple[ActivityDecl, ...]

    def activity(self, name: str) -> ActivityDecl:
        for a in self.activities:
            if a.name == name:
                return a
        raise KeyError(name)

    def has_activity(self, name: str) -> bool:
        return any(a.name == name for a in self.activities)

    def declared_intents(self) -> Iterator[tuple[str, IntentDecl]]:
        """Yield (declaring activity, intent) for every startActivity handler."""
        for a in self.activities:
            for screen in a.screens.values():
                for effect in screen.handlers.values():
                    if effect.kind == "startActivity":
                        yield a.name, effect.intent

    def to_doc(self) -> dict:
        return {
            "formatVersion": FORMAT_VERSION,
            "packageName": self.package_name,
            "mainActivity": self.main_activity,
            "stateVariables": sorted(self.state_variables),
            "activities": [a.to_doc() for a in self.activities],
        }

    def digest(self) -> str:
        return sha256_digest(self.to_doc())


# ---------------------------------------------------------------------------
# View tree helpers
# ---------------------------------------------------------------------------

def iter_views(root: ViewNode) -> Iterator[tuple[ViewNode, tuple[int, ...]]]:
    """Walk a tree depth-first in document order, yielding (node, index path)."""
    stack: list[tuple[ViewNode, tuple[int, ...]]] = [(root, ())]
    while stack:
        node, path = stack.pop()
        yield node, path
        for i in reversed(range(len(node.children))):
            stack.append((node.children[i], path + (i,)))


def position_ref(path: tuple[int, ...]) -> str:
    return "@" + "/".join(str(i) for i in path)


def view_ref(node: ViewNode, path: tuple[int, ...]) -> str:
    """Preferred click reference for a view: its resource id, else its position."""
    return node.resource_id if node.resource_id is not None else position_ref(path)


def find_view(root: ViewNode, ref: str) -> ViewNode | None:
    if ref.startswith("@"):
        node = root
        spec = ref[1:]
        if spec:
            for part in spec.split("/"):
                try:
                    node = node.children[int(part)]
                except (IndexError, ValueError):
                    return None
        return node
    for node, _ in iter_views(root):
        if node.resource_id == ref:
            return node
    return None


def collect_resource_ids(root: ViewNode) -> list[str]:
    return [n.resource_id for n, _ in iter_views(root) if n.resource_id is not None]


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ParseError(f"missing {key!r} in {where}")
    return doc[key]


def _parse_view(doc, where: str) -> ViewNode:
    if not isinstance(doc, dict):
        raise ParseError(f"view node in {where} must be an object")
    tag = _require(doc, "tag", where)
    if not isinstance(tag, str) or not tag:
        raise ParseError(f"view tag in {where} must be a non-empty string")
    rid = doc.get("id")
    if rid is not None and not (isinstance(rid, str) and _IDENT.match(rid)):
        raise ParseError(f"view id {rid!r} in {where} is not an identifier")
    children = tuple(
        _parse_view(c, f"{where}/{tag}") for c in doc.get("children", [])
    )
    return ViewNode(tag=tag, resource_id=rid, children=children)


def _parse_intent(doc, where: str) -> IntentDecl:
    if not isinstance(doc, dict):
        raise ParseError(f"intent in {where} must be an object")
    target = _require(doc, "target", where)
    labels: set[Label] = set()
    if doc.get("action") is not None:
        labels.add(Label("action", doc["action"]))
    for cat in doc.get("categories", []):
        labels.add(Label("category", cat))
    if doc.get("data") is not None:
        labels.add(Label("data", doc["data"]))
    extras = doc.get("extras", {})
    if not isinstance(extras, dict):
        raise ParseError(f"extras in {where} must be an object")
    for name, vtype in extras.items():
        if vtype not in BASIC_TYPES and vtype != OPAQUE_TYPE:
            raise ParseError(
                f"extra {name!r} in {where} has unknown type {vtype!r}; "
                f"expected one of {BASIC_TYPES + (OPAQUE_TYPE,)}"
            )
        labels.add(Label("extra", name, vtype))
    bindings = []
    for name, bdoc in doc.get("bindings", {}).items():
        if name not in extras:
            raise ParseError(f"binding for undeclared extra {name!r} in {where}")
        if not isinstance(bdoc, dict) or len(bdoc) != 1:
            raise ParseError(f"binding for {name!r} in {where} must be a single-key object")
        kind, value = next(iter(bdoc.items()))
        if kind not in ("const", "param"):
            raise ParseError(f"binding kind {kind!r} for {name!r} in {where}")
        bindings.append((name, Binding(kind, value)))
    return IntentDecl(
        target=target,
        labels=frozenset(labels),
        bindings=tuple(sorted(bindings)),
    )


def parse_intent_decl(doc, where: str = "intent") -> IntentDecl:
    """Parse a standalone intent declaration (entry scripts, manifests)."""
    return _parse_intent(doc, where)


def _parse_effect(doc, where: str) -> ClickEffect:
    kind = _require(doc, "effect", where)
    if kind == "startActivity":
        return ClickEffect("startActivity", intent=_parse_intent(_require(doc, "intent", where), where))
    if kind == "showScreen":
        return ClickEffect("showScreen", screen=_require(doc, "screen", where))
    if kind == "openPopup":
        return ClickEffect("openPopup", overlay=_parse_view(_require(doc, "view", where), where))
    if kind == "noop":
        return ClickEffect("noop")
    raise ParseError(f"unknown effect kind {kind!r} in {where}")


def _parse_screen(name: str, doc, where: str) -> ScreenDecl:
    if not isinstance(doc, dict):
        raise ParseError(f"screen {name!r} in {where} must be an object")
    tree = _parse_view(_require(doc, "viewTree", f"{where}/{name}"), f"{where}/{name}")
    handlers = {}
    for ref, edoc in doc.get("handlers", {}).items():
        handlers[ref] = _parse_effect(edoc, f"{where}/{name}/handlers/{ref}")
    return ScreenDecl(name=name, view_tree=tree, handlers=handlers)


def _parse_activity(doc, where: str) -> ActivityDecl:
    name = _require(doc, "name", where)
    if not isinstance(name, str) or not _DOTTED.match(name):
        raise ParseError(f"activity name {name!r} is not an identifier")
    filters = []
    for fdoc in doc.get("manifestFilters", []):
        filters.append(IntentFilterDecl(
            action=_require(fdoc, "action", f"{name} filter"),
            categories=frozenset(fdoc.get("categories", [])),
            data_scheme=fdoc.get("dataScheme"),
            data_host=fdoc.get("dataHost"),
        ))
    params = []
    for pdoc in doc.get("requiredParams", []):
        pname = _require(pdoc, "name", f"{name} requiredParams")
        ptype = _require(pdoc, "type", f"{name} requiredParams")
        if ptype not in BASIC_TYPES:
            raise ParseError(f"required param {pname!r} of {name!r} has non-basic type {ptype!r}")
        params.append((pname, ptype))
    screens = {}
    for sname, sdoc in _require(doc, "screens", name).items():
        if not _IDENT.match(sname):
            raise ParseError(f"screen name {sname!r} in {name!r} is not an identifier")
        screens[sname] = _parse_screen(sname, sdoc, name)
    return ActivityDecl(
        name=name,
        manifest_filters=tuple(filters),
        required_params=tuple(params),
        reads_state=frozenset(doc.get("readsState", [])),
        sets_state=frozenset(doc.get("setsState", [])),
        root_screen=_require(doc, "rootScreen", name),
        screens=screens,
        externally_launchable=bool(doc.get("externallyLaunchable", False)),
    )


def load_app_model(source) -> AppModel:
    """Parse and validate a model document.

    ``source`` may be a JSON string or an already-decoded document object.
    Raises ParseError for malformed documents and ValidationError for
    documents that parse but break a cross-reference rule.
    """
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"not valid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")

    version = _require(doc, "formatVersion", "model")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported formatVersion {version!r}")
    package = _require(doc, "packageName", "model")
    if not isinstance(package, str) or not _DOTTED.match(package):
        raise ParseError(f"packageName {package!r} is not a dotted identifier")

    activities = tuple(
        _parse_activity(adoc, "activities") for adoc in _require(doc, "activities", "model")
    )
    model = AppModel(
        package_name=package,
        main_activity=_require(doc, "mainActivity", "model"),
        state_variables=frozenset(doc.get("stateVariables", [])),
        activities=activities,
    )
    _validate(model)
    return model


def _validate(model: AppModel) -> None:
    names = [a.name for a in model.activities]
    if len(names) != len(set(names)):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ValidationError(f"duplicate activity names: {dupes}")
    if not model.has_activity(model.main_activity):
        raise ValidationError(f"main activity {model.main_activity!r} is not declared")
    main = model.activity(model.main_activity)
    if main.required_params:
        raise ValidationError(
            f"main activity {main.name!r} must not require params; "
            "the launching intent carries none"
        )

    for a in model.activities:
        if a.root_screen not in a.screens:
            raise ValidationError(f"rootScreen {a.root_screen!r} of {a.name!r} is not a declared screen")
        for var in a.reads_state | a.sets_state:
            if var not in model.state_variables:
                raise ValidationError(f"activity {a.name!r} references undeclared state variable {var!r}")
        for screen in a.screens.values():
            rids = collect_resource_ids(screen.view_tree)
            if len(rids) != len(set(rids)):
                dupes = sorted({r for r in rids if rids.count(r) > 1})
                raise ValidationError(
                    f"duplicate view ids {dupes} in screen {screen.name!r} of {a.name!r}"
                )
            for ref, effect in screen.handlers.items():
                if find_view(screen.view_tree, ref) is None:
                    raise ValidationError(
                        f"handler key {ref!r} in screen {screen.name!r} of {a.name!r} "
                        "does not reference a view in its tree"
                    )
                if effect.kind == "showScreen" and effect.screen not in a.screens:
                    raise ValidationError(
                        f"showScreen target {effect.screen!r} in {a.name!r} is not a declared screen"
                    )
                if effect.kind == "startActivity":
                    intent = effect.intent
                    if not model.has_activity(intent.target):
                        raise ValidationError(
                            f"intent in {a.name!r}/{screen.name!r} targets undeclared activity "
                            f"{intent.target!r}"
                        )
                if effect.kind == "openPopup":
                    base = set(rids)
                    for overlay_rid in collect_resource_ids(effect.overlay):
                        if overlay_rid in base:
                            raise ValidationError(
                                f"popup view id {overlay_rid!r} in {a.name!r}/{screen.name!r} "
                                "collides with the screen tree"
                            )


# ---------------------------------------------------------------------------
# Manifest-based deep-link detection
# ---------------------------------------------------------------------------

def count_declared_deep_links(model: AppModel) -> int:
    """Number of activities whose manifest filters already mark them deep-linkable.

    An activity counts when at least one of its filters pairs the VIEW action
    with the BROWSABLE category.
    """
    count = 0
    for a in model.activities:
        if any(
            f.action == DEEP_LINK_ACTION and BROWSABLE_CATEGORY in f.categories
            for f in a.manifest_filters
        ):
            count += 1
    return count


def validate_replayability(model: AppModel) -> list[str]:
    """Activities that cannot be linked because every way in carries an opaque payload.

    The main activity and externally launchable activities always have a
    replayable entry (the launch itself, or a direct external intent), so they
    are never reported.
    """
    inbound: dict[str, list[IntentDecl]] = {a.name: [] for a in model.activities}
    for _, intent in model.declared_intents():
        inbound[intent.target].append(intent)
    report = []
    for a in model.activities:
        if a.name == model.main_activity or a.externally_launchable:
            continue
        intents = inbound[a.name]
        if intents and all(i.has_opaque for i in intents):
            report.append(a.name)
    return sorted(report)


# ---------------------------------------------------------------------------
# Typed values
# ---------------------------------------------------------------------------

def coerce_value(value, value_type: str, where: str):
    """Check ``value`` against a basic type, returning its canonical form."""
    from .errors import TypeMismatch  # local import keeps module deps one-way

    if value_type in ("int", "long"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeMismatch(f"{where}: expected {value_type}, got {value!r}")
        return value
    if value_type == "double":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeMismatch(f"{where}: expected double, got {value!r}")
        return float(value)
    if value_type == "boolean":
        if not isinstance(value, bool):
            raise TypeMismatch(f"{where}: expected boolean, got {value!r}")
        return value
    if value_type == "text":
        if not isinstance(value, str):
            raise TypeMismatch(f"{where}: expected text, got {value!r}")
        return value
    raise TypeMismatch(f"{where}: values of type {value_type!r} cannot be supplied")
