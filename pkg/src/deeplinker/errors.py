"""Exception hierarchy shared by every layer of the toolkit.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP service can emit uniform ``{code, message, detail}`` envelopes.
"""

from __future__ import annotations


class DeeplinkerError(Exception):
    """Base class for all toolkit errors."""

    code = "error"

    def __init__(self, message: str, detail: dict | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}

    def envelope(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


# -- app model ---------------------------------------------------------------

class ParseError(DeeplinkerError):
    code = "parse_error"


class ValidationError(DeeplinkerError):
    code = "validation_error"


# -- simulator ---------------------------------------------------------------

class SimulationError(DeeplinkerError):
    """Base for runtime failures while driving a simulated session."""

    code = "simulation_error"


class UnsetDependency(SimulationError):
    code = "unset_dependency"

    def __init__(self, variable: str, activity: str):
        super().__init__(
            f"activity {activity!r} reads state variable {variable!r} before it is set",
            {"variable": variable, "activity": activity},
        )
        self.variable = variable
        self.activity = activity


class TypeMismatch(SimulationError):
    code = "type_mismatch"


class NoSuchTarget(SimulationError):
    code = "no_such_target"


class NoSuchView(SimulationError):
    code = "no_such_view"


class TerminatedSession(SimulationError):
    code = "terminated_session"


# -- navigation analysis -----------------------------------------------------

class UnreachableActivity(DeeplinkerError):
    code = "unreachable_activity"


class DifferentTargets(DeeplinkerError):
    code = "different_targets"


# -- crawling ----------------------------------------------------------------

class EntryScriptFailed(DeeplinkerError):
    code = "entry_script_failed"


class CrawlBudgetExceeded(DeeplinkerError):
    code = "crawl_budget_exceeded"


class NoSuchFragment(DeeplinkerError):
    code = "no_such_fragment"


class DuplicateName(DeeplinkerError):
    code = "duplicate_name"


# -- linking -----------------------------------------------------------------

class AmbiguousTarget(DeeplinkerError):
    code = "ambiguous_target"


class NotCrawled(DeeplinkerError):
    code = "not_crawled"


class NotReplayable(DeeplinkerError):
    code = "not_replayable"


class TemplateCollision(DeeplinkerError):
    code = "template_collision"


class NoMatchingTemplate(DeeplinkerError):
    code = "no_matching_template"


class AmbiguousMatch(DeeplinkerError):
    code = "ambiguous_match"


class FormatError(DeeplinkerError):
    code = "format_error"


class DigestMismatch(DeeplinkerError):
    code = "digest_mismatch"
