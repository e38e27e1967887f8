"""Turning shortcuts and fragment paths into URI schemas and link templates.

A template packages everything needed to reach one location: the intent
sequence of a shortcut path (launch first), the click sequence to a fragment
when one is targeted, and a URI schema whose query parameters are the extras
the developer left unpinned. Rendering a template with concrete values gives
a link like ``http://anki.ichi2.com/NoteEditor?CALLER=3#tags``: the host is
the reversed package name, the path names the activity, and the fragment
names the sub-page.

Templates in one release manifest are told apart by (target, parameter-name
set, fragment); two templates that collide on that key would make concrete
links ambiguous, so the build rejects them outright.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from urllib.parse import quote, unquote, urlsplit

from .crawl import FragmentTransitionGraph, fragment_path
from .errors import (
    AmbiguousMatch,
    AmbiguousTarget,
    DigestMismatch,
    FormatError,
    NoMatchingTemplate,
    NotCrawled,
    NotReplayable,
    TemplateCollision,
    TypeMismatch,
    ValidationError,
)
from .jsonutil import canonical_json
from .model import AppModel, Binding, IntentDecl, coerce_value, parse_intent_decl
from .navgraph import Path, Shortcut, path_labels, unique_shortcuts
from .treehash import StructureHash

MANIFEST_VERSION = 1

_INT_RE = re.compile(r"^[+-]?[0-9]+$")


# ---------------------------------------------------------------------------
# URI schemas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UriSchema:
    host: str
    target: str
    parameter_names: tuple[str, ...]
    fragment: str | None = None

    def render(self) -> str:
        uri = f"http://{self.host}/{self.target}"
        if self.parameter_names:
            uri += "?" + "&".join(f"{n}={{{n}}}" for n in self.parameter_names)
        if self.fragment is not None:
            uri += f"#{self.fragment}"
        return uri


def reverse_package(package_name: str) -> str:
    return ".".join(reversed(package_name.split(".")))


def make_uri_schema(package_name: str, activity: str, params: list[str] | tuple[str, ...],
                    fragment: str | None = None,
                    all_activities: list[str] | None = None) -> UriSchema:
    """Schema for one activity: reversed package as host, simple name as target."""
    simple = activity.rsplit(".", 1)[-1]
    if all_activities is not None:
        simples = [a.rsplit(".", 1)[-1] for a in all_activities]
        if simples.count(simple) > 1:
            raise AmbiguousTarget(
                f"activity simple name {simple!r} is shared by several activities; "
                "schemas would be indistinguishable"
            )
    return UriSchema(
        host=reverse_package(package_name),
        target=simple,
        parameter_names=tuple(sorted(params)),
        fragment=fragment,
    )


# ---------------------------------------------------------------------------
# Templates and manifests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntentStep:
    kind: str  # "launch" | "intent"
    intent: IntentDecl | None = None
    assign: tuple[tuple[str, Binding], ...] = ()

    def to_doc(self) -> dict:
        if self.kind == "launch":
            return {"kind": "launch"}
        return {
            "kind": "intent",
            "intent": self.intent.to_doc(),
            "assign": {name: b.to_doc() for name, b in self.assign},
        }


@dataclass(frozen=True)
class DeepLinkTemplate:
    activity: str
    schema: UriSchema
    intent_sequence: tuple[IntentStep, ...]
    action_sequence: tuple[str, ...] = ()
    fragment: str | None = None
    fragment_hash: StructureHash | None = None
    parameters: tuple[tuple[str, str], ...] = ()

    @property
    def uri_schema(self) -> str:
        return self.schema.render()

    @property
    def key(self) -> tuple:
        return (self.schema.target, frozenset(n for n, _ in self.parameters), self.fragment)

    @property
    def template_id(self) -> str:
        names = ",".join(n for n, _ in self.parameters)
        frag = f"#{self.fragment}" if self.fragment else ""
        return f"{self.schema.target}({names}){frag}"

    def parameter_type(self, name: str) -> str:
        for n, t in self.parameters:
            if n == name:
                return t
        raise KeyError(name)

    def to_doc(self) -> dict:
        return {
            "activity": self.activity,
            "uriSchema": self.uri_schema,
            "host": self.schema.host,
            "target": self.schema.target,
            "fragment": self.fragment,
            "fragmentHash": self.fragment_hash.hex if self.fragment_hash else None,
            "parameters": [{"name": n, "type": t} for n, t in self.parameters],
            "intentSequence": [s.to_doc() for s in self.intent_sequence],
            "actionSequence": list(self.action_sequence),
        }


@dataclass(frozen=True)
class DeepLink:
    uri: str
    values: dict
    fragment: str | None
    template: DeepLinkTemplate


@dataclass(frozen=True)
class ReleaseManifest:
    package_name: str
    model_digest: str
    templates: tuple[DeepLinkTemplate, ...]

    def to_doc(self) -> dict:
        return {
            "formatVersion": MANIFEST_VERSION,
            "packageName": self.package_name,
            "modelDigest": self.model_digest,
            "templates": [t.to_doc() for t in self.templates],
        }


@dataclass(frozen=True)
class SelectionEntry:
    activity: str
    fragment: str | None = None
    pins: tuple[tuple[str, object], ...] = ()


def parse_selection(doc: dict) -> tuple[SelectionEntry, ...]:
    entries = []
    for item in doc.get("targets", []):
        entries.append(SelectionEntry(
            activity=item["activity"],
            fragment=item.get("fragment"),
            pins=tuple(sorted(item.get("pins", {}).items())),
        ))
    return tuple(entries)


def template_for_path(model: AppModel, path: Path, *, fragment: str | None = None,
                      actions: tuple[str, ...] = (),
                      fragment_hash: StructureHash | None = None,
                      pins: dict[str, object] | None = None) -> DeepLinkTemplate:
    """Build one template from an explicit path (and optional fragment route)."""
    pins = dict(pins or {})
    activity = path.target
    extras = sorted(
        (l for l in path_labels(path) if l.kind == "extra"), key=lambda l: l.name
    )
    by_name: dict[str, str] = {}
    for label in extras:
        if label.name in by_name and by_name[label.name] != label.value_type:
            raise TemplateCollision(
                f"extra {label.name!r} appears with types {by_name[label.name]!r} "
                f"and {label.value_type!r} along the path to {activity!r}"
            )
        by_name[label.name] = label.value_type
    for name, value in pins.items():
        if name not in by_name:
            raise FormatError(f"pinned value {name!r} does not match any extra on the path")
        coerce_value(value, by_name[name], f"pinned value {name!r}")

    parameters = tuple(
        (name, by_name[name]) for name in sorted(by_name) if name not in pins
    )
    steps: list[IntentStep] = []
    for edge in path.transitions:
        if edge.is_launch:
            steps.append(IntentStep("launch"))
            continue
        assign = []
        for label in edge.intent.basic_extras:
            if label.name in pins:
                assign.append((label.name, Binding("const", pins[label.name])))
            else:
                assign.append((label.name, Binding("param", label.name)))
        steps.append(IntentStep("intent", edge.intent, tuple(assign)))

    schema = make_uri_schema(
        model.package_name, activity, [n for n, _ in parameters], fragment,
        all_activities=[a.name for a in model.activities],
    )
    return DeepLinkTemplate(
        activity=activity,
        schema=schema,
        intent_sequence=tuple(steps),
        action_sequence=actions,
        fragment=fragment,
        fragment_hash=fragment_hash,
        parameters=parameters,
    )


def build_templates(model: AppModel,
                    shortcuts: dict[tuple[str, Path], Shortcut],
                    ftgs: dict[str, FragmentTransitionGraph],
                    selection: tuple[SelectionEntry, ...]) -> ReleaseManifest:
    """One template per unique shortcut for every selected location."""
    templates: list[DeepLinkTemplate] = []
    seen_keys: dict[tuple, str] = {}
    for entry in selection:
        if not model.has_activity(entry.activity):
            raise ValidationError(f"selection names undeclared activity {entry.activity!r}")
        paths = unique_shortcuts(shortcuts, entry.activity)
        if not paths:
            raise NotReplayable(
                f"activity {entry.activity!r} is reachable only through transitions "
                "that cannot be replayed"
            )
        fragment = entry.fragment
        actions: tuple[str, ...] = ()
        fragment_hash: StructureHash | None = None
        if fragment is not None:
            ftg = ftgs.get(entry.activity)
            if ftg is None:
                raise NotCrawled(
                    f"fragment {fragment!r} selected but activity {entry.activity!r} "
                    "has not been crawled"
                )
            target_hash = ftg.hash_for_name(fragment)
            if target_hash == ftg.start:
                fragment = None  # the entry fragment needs no actions
            else:
                actions = tuple(fragment_path(ftg, target_hash))
                fragment_hash = target_hash
        for path in paths:
            template = template_for_path(
                model, path, fragment=fragment, actions=actions,
                fragment_hash=fragment_hash, pins=dict(entry.pins),
            )
            if template.key in seen_keys:
                raise TemplateCollision(
                    f"template {template.template_id!r} collides with "
                    f"{seen_keys[template.key]!r}; same target, parameters, and fragment"
                )
            seen_keys[template.key] = template.template_id
            templates.append(template)
    return ReleaseManifest(
        package_name=model.package_name,
        model_digest=model.digest(),
        templates=tuple(templates),
    )


# ---------------------------------------------------------------------------
# Concrete links
# ---------------------------------------------------------------------------

def value_to_text(value, value_type: str) -> str:
    if value_type in ("int", "long"):
        return str(value)
    if value_type == "double":
        if not math.isfinite(value):
            raise TypeMismatch(f"double value {value!r} is not finite")
        return repr(float(value))
    if value_type == "boolean":
        return "true" if value else "false"
    return str(value)


def text_to_value(text: str, value_type: str, name: str):
    if value_type in ("int", "long"):
        if not _INT_RE.match(text):
            raise TypeMismatch(f"parameter {name!r} expects {value_type}, got {text!r}")
        return int(text)
    if value_type == "double":
        try:
            value = float(text)
        except ValueError:
            raise TypeMismatch(f"parameter {name!r} expects double, got {text!r}") from None
        if not math.isfinite(value):
            raise TypeMismatch(f"parameter {name!r} expects a finite double, got {text!r}")
        return value
    if value_type == "boolean":
        if text == "true":
            return True
        if text == "false":
            return False
        raise TypeMismatch(f"parameter {name!r} expects boolean, got {text!r}")
    return text


def render_deep_link(template: DeepLinkTemplate, values: dict) -> DeepLink:
    """Instantiate a template into a concrete link, checking value types."""
    expected = {n for n, _ in template.parameters}
    given = set(values)
    if given != expected:
        missing, extra = sorted(expected - given), sorted(given - expected)
        raise TypeMismatch(
            f"template {template.template_id!r} takes parameters {sorted(expected)}; "
            f"missing {missing}, unexpected {extra}"
        )
    coerced = {
        name: coerce_value(values[name], vtype, f"parameter {name!r}")
        for name, vtype in template.parameters
    }
    uri = f"http://{template.schema.host}/{template.schema.target}"
    if template.parameters:
        uri += "?" + "&".join(
            f"{quote(name, safe='')}={quote(value_to_text(coerced[name], vtype), safe='')}"
            for name, vtype in template.parameters
        )
    if template.fragment is not None:
        uri += "#" + quote(template.fragment, safe="")
    return DeepLink(uri=uri, values=coerced, fragment=template.fragment, template=template)


def parse_deep_link(manifest: ReleaseManifest, uri: str) -> DeepLink:
    """Match a concrete URI to the unique manifest template it instantiates."""
    parts = urlsplit(uri)
    if parts.scheme != "http" or not parts.netloc or not parts.path.startswith("/"):
        raise NoMatchingTemplate(f"{uri!r} is not an http://host/Target link")
    host = parts.netloc
    target = unquote(parts.path[1:])
    fragment = unquote(parts.fragment) if parts.fragment else None

    pairs: dict[str, str] = {}
    if parts.query:
        for chunk in parts.query.split("&"):
            name, sep, raw = chunk.partition("=")
            name = unquote(name)
            if not sep:
                raise NoMatchingTemplate(f"query term {chunk!r} is not name=value")
            if name in pairs:
                raise NoMatchingTemplate(f"duplicate query parameter {name!r}")
            pairs[name] = unquote(raw)

    candidates = [
        t for t in manifest.templates
        if t.schema.host == host
        and t.schema.target == target
        and t.fragment == fragment
        and {n for n, _ in t.parameters} == set(pairs)
    ]
    if not candidates:
        raise NoMatchingTemplate(f"no template of {manifest.package_name!r} matches {uri!r}")
    if len(candidates) > 1:
        raise AmbiguousMatch(f"{uri!r} matches {len(candidates)} templates")
    template = candidates[0]
    values = {
        name: text_to_value(pairs[name], vtype, name)
        for name, vtype in template.parameters
    }
    return DeepLink(uri=uri, values=values, fragment=fragment, template=template)


# ---------------------------------------------------------------------------
# Manifest import/export
# ---------------------------------------------------------------------------

def export_manifest(manifest: ReleaseManifest) -> dict:
    return manifest.to_doc()


def manifest_to_json(manifest: ReleaseManifest) -> str:
    return canonical_json(export_manifest(manifest))


def _parse_intent_step(doc: dict) -> IntentStep:
    if doc.get("kind") == "launch":
        return IntentStep("launch")
    if doc.get("kind") != "intent":
        raise FormatError(f"unknown intent step kind {doc.get('kind')!r}")
    intent = parse_intent_decl(doc["intent"], "manifest template")
    assign = []
    for name, bdoc in doc.get("assign", {}).items():
        kind, value = next(iter(bdoc.items()))
        if kind not in ("const", "param"):
            raise FormatError(f"bad assignment {bdoc!r} for extra {name!r}")
        assign.append((name, Binding(kind, value)))
    return IntentStep("intent", intent, tuple(sorted(assign)))


def import_manifest(document, model: AppModel | None = None) -> ReleaseManifest:
    """Load a manifest document, checking invariants and, if given, the model digest."""
    import json as _json

    if isinstance(document, (str, bytes)):
        try:
            document = _json.loads(document)
        except _json.JSONDecodeError as exc:
            raise FormatError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise FormatError("manifest document must be a JSON object")
    if document.get("formatVersion") != MANIFEST_VERSION:
        raise FormatError(f"unsupported manifest formatVersion {document.get('formatVersion')!r}")
    try:
        templates = []
        for tdoc in document["templates"]:
            schema = UriSchema(
                host=tdoc["host"],
                target=tdoc["target"],
                parameter_names=tuple(p["name"] for p in tdoc["parameters"]),
                fragment=tdoc["fragment"],
            )
            template = DeepLinkTemplate(
                activity=tdoc["activity"],
                schema=schema,
                intent_sequence=tuple(_parse_intent_step(s) for s in tdoc["intentSequence"]),
                action_sequence=tuple(tdoc["actionSequence"]),
                fragment=tdoc["fragment"],
                fragment_hash=(StructureHash.from_hex(tdoc["fragmentHash"])
                               if tdoc.get("fragmentHash") else None),
                parameters=tuple((p["name"], p["type"]) for p in tdoc["parameters"]),
            )
            if template.uri_schema != tdoc["uriSchema"]:
                raise FormatError(
                    f"uriSchema {tdoc['uriSchema']!r} does not match its own parts "
                    f"(expected {template.uri_schema!r})"
                )
            templates.append(template)
        manifest = ReleaseManifest(
            package_name=document["packageName"],
            model_digest=document["modelDigest"],
            templates=tuple(templates),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed manifest document: {exc!r}") from exc

    keys = [t.key for t in manifest.templates]
    if len(keys) != len(set(keys)):
        raise FormatError("manifest contains templates with duplicate "
                          "(target, parameters, fragment) schemas")
    if model is not None and model.digest() != manifest.model_digest:
        raise DigestMismatch(
            "manifest was built from a different model "
            f"(expected digest {manifest.model_digest[:12]}…, "
            f"model has {model.digest()[:12]}…)"
        )
    return manifest
