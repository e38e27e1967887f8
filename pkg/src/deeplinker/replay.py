"""Executing concrete deep links against the simulator and checking the landing.

A replay always starts from a fresh session, issues the template's intents in
order with the link's parameter values substituted, then performs the click
sequence. Anything that goes wrong is captured in the trace verdict rather
than raised: callers (CLI, service, UI) need failures as renderable data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import SimulationError, TypeMismatch
from .linker import DeepLink, DeepLinkTemplate, ReleaseManifest
from .model import AppModel
from .simulator import SimSession
from .treehash import StructureHash, tree_hash


@dataclass(frozen=True)
class Verdict:
    kind: str  # "ReachedActivity" | "ReachedFragment" | "Failed"
    reason: str | None = None

    @property
    def reached(self) -> bool:
        return self.kind in ("ReachedActivity", "ReachedFragment")

    def to_doc(self) -> dict:
        return {"kind": self.kind, "reason": self.reason}


@dataclass(frozen=True)
class ReplayStep:
    kind: str  # "launch" | "intent" | "action"
    detail: dict
    activity: str
    screen: str

    def to_doc(self) -> dict:
        return {"kind": self.kind, "detail": self.detail,
                "activity": self.activity, "screen": self.screen}


@dataclass(frozen=True)
class ReplayTrace:
    steps: tuple[ReplayStep, ...]
    final_activity: str | None
    final_tree_hash: StructureHash | None
    verdict: Verdict
    step_count: int

    def to_doc(self) -> dict:
        return {
            "steps": [s.to_doc() for s in self.steps],
            "finalActivity": self.final_activity,
            "finalTreeHash": self.final_tree_hash.hex if self.final_tree_hash else None,
            "verdict": self.verdict.to_doc(),
            "stepCount": self.step_count,
        }

    def to_json_lines(self) -> str:
        lines = [json.dumps(s.to_doc(), sort_keys=True) for s in self.steps]
        lines.append(json.dumps(
            {"kind": "verdict", "verdict": self.verdict.to_doc(),
             "finalActivity": self.final_activity,
             "finalTreeHash": self.final_tree_hash.hex if self.final_tree_hash else None,
             "stepCount": self.step_count},
            sort_keys=True,
        ))
        return "\n".join(lines)


def replay_deep_link(model: AppModel, manifest: ReleaseManifest, link: DeepLink) -> ReplayTrace:
    """Run one link end to end and record every step with its landing state."""
    template = link.template
    steps: list[ReplayStep] = []
    session: SimSession | None = None

    def record(kind: str, detail: dict) -> None:
        steps.append(ReplayStep(
            kind, detail, session.current_activity(), session.top.current_screen,
        ))

    try:
        for step in template.intent_sequence:
            if step.kind == "launch":
                session = SimSession.launch(model)
                record("launch", {})
                continue
            if session is None:
                raise TypeMismatch("intent sequence does not start with a launch step")
            values = {}
            for name, binding in step.assign:
                if binding.kind == "const":
                    values[name] = binding.value
                else:
                    if binding.value not in link.values:
                        raise TypeMismatch(
                            f"assignment references unknown parameter {binding.value!r}"
                        )
                    values[name] = link.values[binding.value]
            session.send_intent(step.intent, values)
            record("intent", {"target": step.intent.target,
                              "values": {k: values[k] for k in sorted(values)}})
        for ref in template.action_sequence:
            session.click(ref)
            record("action", {"view": ref})
    except SimulationError as exc:
        return _finish(steps, session, template, Verdict("Failed", f"{exc.code}: {exc.message}"))

    return _finish(steps, session, template, None)


def _finish(steps: list[ReplayStep], session: SimSession | None,
            template: DeepLinkTemplate, failure: Verdict | None) -> ReplayTrace:
    final_activity = None
    final_hash = None
    if session is not None and not session.terminated:
        final_activity = session.current_activity()
        final_hash = tree_hash(session.current_view_tree())

    if failure is not None:
        verdict = failure
    elif final_activity != template.activity:
        verdict = Verdict("Failed", f"landed on {final_activity!r}, "
                                    f"expected {template.activity!r}")
    elif template.fragment is not None:
        if template.fragment_hash is not None and final_hash != template.fragment_hash:
            verdict = Verdict("Failed",
                              f"final tree hash {final_hash.hex} does not match the "
                              f"recorded fragment hash {template.fragment_hash.hex}")
        else:
            verdict = Verdict("ReachedFragment")
    else:
        verdict = Verdict("ReachedActivity")

    return ReplayTrace(
        steps=tuple(steps),
        final_activity=final_activity,
        final_tree_hash=final_hash,
        verdict=verdict,
        step_count=len(steps),
    )


def verify_target(trace: ReplayTrace, template: DeepLinkTemplate,
                  expected_hash: StructureHash | None = None) -> bool:
    """Did the trace land where the template points?

    With a fragment target the final tree hash must equal the recorded one
    (``expected_hash`` overrides the hash stored on the template).
    """
    if trace.final_activity != template.activity:
        return False
    if template.fragment is None:
        return True
    wanted = expected_hash if expected_hash is not None else template.fragment_hash
    if wanted is None:
        return False
    return trace.final_tree_hash == wanted
