"""Canonical JSON encoding used for all exported artifacts.

The CLI and the HTTP service must produce byte-identical documents, so every
artifact goes through this single encoder.
"""

from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> str:
    """Render ``obj`` as pretty, key-sorted JSON with a trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def compact_json(obj) -> str:
    """Minified, key-sorted rendering used for digests and log lines."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_digest(obj) -> str:
    return hashlib.sha256(compact_json(obj).encode("utf-8")).hexdigest()
