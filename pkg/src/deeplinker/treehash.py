"""Order-invariant structure hashing of view trees.

A fragment has no stable identifier at runtime, so it is fingerprinted by the
shape of its view tree: a leaf hashes its tag, an inner node hashes its tag
followed by its children's hashes sorted ascending. Sorting makes the result
independent of sibling order, which is not stable between renders.

The hash is FNV-1a 64-bit over UTF-8 bytes, with child hashes concatenated as
16-digit lowercase hex strings. The exact byte layout is part of the artifact
format: release manifests store fragment hashes, so they must be reproducible
bit-for-bit across runs and machines.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import ViewNode

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK
    return h


@dataclass(frozen=True, order=True)
class StructureHash:
    value: int

    @property
    def hex(self) -> str:
        return format(self.value, "016x")

    def __str__(self) -> str:
        return self.hex

    @classmethod
    def from_hex(cls, text: str) -> "StructureHash":
        return cls(int(text, 16))


def tree_hash(root: ViewNode) -> StructureHash:
    """Structure hash of a view tree; resource ids do not participate."""
    child_hex = sorted(tree_hash(c).hex for c in root.children)
    payload = root.tag + "".join(child_hex)
    return StructureHash(fnv1a64(payload.encode("utf-8")))
