"""Deterministic execution of an app model: launch, intents, clicks, back.

A session is a back stack of activity instances over a set of global state
variables. Entering an activity first checks that every variable it reads is
already set (the classic broken-deep-link failure: jumping straight to a page
that depends on data a previous page builds), then marks the variables it
sets. State survives back navigation within a session and clears on reset.

Sessions are single-threaded: they may be handed between threads but must
never be mutated concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import (
    NoSuchTarget,
    NoSuchView,
    TerminatedSession,
    TypeMismatch,
    UnsetDependency,
)
from .model import (
    AppModel,
    ClickEffect,
    IntentDecl,
    ViewNode,
    coerce_value,
    find_view,
    position_ref,
)


@dataclass
class ActivityInstance:
    activity: str
    params: dict[str, object]
    current_screen: str
    overlay: ViewNode | None = None

    def snapshot(self) -> tuple:
        return (
            self.activity,
            tuple(sorted(self.params.items(), key=lambda kv: kv[0])),
            self.current_screen,
            self.overlay,
        )


@dataclass
class SimEvent:
    kind: str
    detail: dict
    activity: str | None
    screen: str | None

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "detail": self.detail,
            "activity": self.activity,
            "screen": self.screen,
        }


OPAQUE_VALUE = "<opaque>"


class SimSession:
    """One run of the app, from launch until the back stack empties."""

    def __init__(self, model: AppModel):
        self.model = model
        self.back_stack: list[ActivityInstance] = []
        self.set_variables: set[str] = set()
        self.event_log: list[SimEvent] = []
        self.terminated = False
        self._launch()

    @classmethod
    def launch(cls, model: AppModel) -> "SimSession":
        return cls(model)

    def _launch(self) -> None:
        main = self.model.activity(self.model.main_activity)
        self._check_reads(main.name, main.reads_state)
        self.back_stack = [ActivityInstance(main.name, {}, main.root_screen)]
        self.set_variables |= main.sets_state
        self._log("launch", {})

    def reset(self) -> None:
        """Relaunch from scratch; equivalent to a fresh launch of the model."""
        self.back_stack = []
        self.set_variables = set()
        self.event_log = []
        self.terminated = False
        self._launch()

    # -- reads ---------------------------------------------------------------

    @property
    def top(self) -> ActivityInstance:
        self._require_live()
        return self.back_stack[-1]

    def current_activity(self) -> str:
        return self.top.activity

    def current_view_tree(self) -> ViewNode:
        """View tree of the visible screen, with any popup overlay applied."""
        instance = self.top
        screen = self.model.activity(instance.activity).screens[instance.current_screen]
        tree = screen.view_tree
        if instance.overlay is not None:
            tree = ViewNode(tree.tag, tree.resource_id, tree.children + (instance.overlay,))
        return tree

    def snapshot(self) -> tuple:
        """Comparable digest of back stack and state; two sessions that ran the
        same operations from launch produce equal snapshots."""
        return (
            tuple(inst.snapshot() for inst in self.back_stack),
            frozenset(self.set_variables),
            self.terminated,
        )

    # -- transitions ---------------------------------------------------------

    def send_intent(self, intent: IntentDecl, values: dict[str, object]) -> None:
        """Dispatch an intent: push its target activity with the given extras."""
        self._require_live()
        if not self.model.has_activity(intent.target):
            raise NoSuchTarget(f"intent targets undeclared activity {intent.target!r}")
        target = self.model.activity(intent.target)

        params: dict[str, object] = {}
        declared = {l.name: l.value_type for l in intent.extra_labels}
        for name, value in values.items():
            if name not in declared:
                raise TypeMismatch(
                    f"value for {name!r} does not match an extra of the intent to {target.name!r}"
                )
        for label in intent.extra_labels:
            if label.value_type == "opaque":
                params[label.name] = OPAQUE_VALUE
                continue
            if label.name not in values:
                raise TypeMismatch(
                    f"missing value for extra {label.name!r} of the intent to {target.name!r}"
                )
            params[label.name] = coerce_value(
                values[label.name], label.value_type, f"extra {label.name!r}"
            )
        for pname, ptype in target.required_params:
            if pname not in params:
                raise TypeMismatch(
                    f"activity {target.name!r} requires param {pname!r} which the intent does not carry"
                )
            coerce_value(params[pname], ptype, f"required param {pname!r} of {target.name!r}")

        self._check_reads(target.name, target.reads_state)
        self.back_stack.append(ActivityInstance(target.name, params, target.root_screen))
        self.set_variables |= target.sets_state
        self._log("intent", {"target": target.name, "values": _printable(params)})

    def click(self, ref: str) -> None:
        """Click the view named by ``ref`` (a resource id, or ``@i/j`` position).

        Views without a handler are a no-op; handled views apply their effect.
        """
        instance = self.top
        tree = self.current_view_tree()
        node = find_view(tree, ref)
        if node is None:
            raise NoSuchView(f"no view {ref!r} on screen {instance.current_screen!r} "
                             f"of {instance.activity!r}")
        effect = self._handler_for(instance, ref)
        if effect is None or effect.kind == "noop":
            self._log("click", {"view": ref, "effect": "noop"})
            return
        if effect.kind == "startActivity":
            values = self._resolve_bindings(instance, effect.intent)
            self._log("click", {"view": ref, "effect": "startActivity"})
            self.send_intent(effect.intent, values)
            return
        if effect.kind == "showScreen":
            instance.current_screen = effect.screen
            instance.overlay = None
            self._log("click", {"view": ref, "effect": "showScreen", "screen": effect.screen})
            return
        if effect.kind == "openPopup":
            instance.overlay = effect.overlay
            self._log("click", {"view": ref, "effect": "openPopup"})
            return
        raise AssertionError(f"unhandled effect kind {effect.kind!r}")

    def do_back(self) -> None:
        """Pop the top activity; the session terminates when the stack empties."""
        self._require_live()
        popped = self.back_stack.pop()
        if not self.back_stack:
            self.terminated = True
        self._log("back", {"popped": popped.activity})

    # -- internals -------------------------------------------------------------

    def _handler_for(self, instance: ActivityInstance, ref: str) -> ClickEffect | None:
        # Handlers belong to the screen tree; views that exist only in a popup
        # overlay never have one. Resolve both the clicked ref and the handler
        # keys against the base tree so rid and positional forms interchange.
        screen = self.model.activity(instance.activity).screens[instance.current_screen]
        target = find_view(screen.view_tree, ref)
        if target is None:
            return None
        if target.resource_id is not None and target.resource_id in screen.handlers:
            return screen.handlers[target.resource_id]
        for key, effect in screen.handlers.items():
            if find_view(screen.view_tree, key) is target:
                return effect
        return None

    def _resolve_bindings(self, instance: ActivityInstance, intent: IntentDecl) -> dict[str, object]:
        values: dict[str, object] = {}
        for label in intent.basic_extras:
            binding = intent.binding_for(label.name)
            if binding is None:
                raise TypeMismatch(
                    f"extra {label.name!r} of the intent to {intent.target!r} has no binding"
                )
            if binding.kind == "const":
                values[label.name] = binding.value
            else:
                if binding.value not in instance.params:
                    raise TypeMismatch(
                        f"binding forwards missing incoming param {binding.value!r} "
                        f"from {instance.activity!r}"
                    )
                values[label.name] = instance.params[binding.value]
        return values

    def _check_reads(self, activity: str, reads: frozenset[str]) -> None:
        for var in sorted(reads):
            if var not in self.set_variables:
                raise UnsetDependency(var, activity)

    def _require_live(self) -> None:
        if self.terminated or not self.back_stack:
            raise TerminatedSession("session has terminated; launch or reset it first")

    def _log(self, kind: str, detail: dict) -> None:
        if self.back_stack:
            activity = self.back_stack[-1].activity
            screen = self.back_stack[-1].current_screen
        else:
            activity = screen = None
        self.event_log.append(SimEvent(kind, detail, activity, screen))

    def export_event_log(self) -> str:
        """Event log as JSON lines, one event per line."""
        return "\n".join(json.dumps(e.to_doc(), sort_keys=True) for e in self.event_log)


def _printable(params: dict[str, object]) -> dict[str, object]:
    return {k: params[k] for k in sorted(params)}


def effective_refs(tree: ViewNode) -> list[str]:
    """Click references for every view of a tree, in document order."""
    from .model import iter_views, view_ref

    return [view_ref(node, path) for node, path in iter_views(tree)]
