"""Deterministic canonical encoding.

Every byte string that gets signed, MACed, used as AEAD associated data, or
hashed into a table index is produced here, so both sides of the protocol
derive identical bytes from structurally equal values.

Rules: UTF-8 JSON, lexicographically sorted keys, no insignificant
whitespace, byte fields rendered as unpadded base64url text. Allowed value
shapes: maps with text keys, sequences, text, integers, booleans, and bytes.
Floats and None are rejected.
"""

from __future__ import annotations

import base64
import json
from typing import Any


class CanonicalEncodeError(ValueError):
    """The value contains a shape the canonical encoding does not admit."""


class CanonicalDecodeError(ValueError):
    """The byte sequence is not a canonical encoding of any value."""


def b64u(raw: bytes) -> str:
    """Unpadded base64url text for a byte field."""
    return base64.urlsafe_b64encode(bytes(raw)).rstrip(b"=").decode("ascii")


def b64u_decode(text: str) -> bytes:
    try:
        padded = text.encode("ascii") + b"=" * (-len(text) % 4)
        return base64.b64decode(padded, altchars=b"-_", validate=True)
    except (ValueError, TypeError, UnicodeEncodeError) as exc:
        raise CanonicalDecodeError(f"invalid base64url field: {text!r}") from exc


def _normalize(value: Any) -> Any:
    # bool first: it is a subclass of int
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        return value
    if isinstance(value, (bytes, bytearray, memoryview)):
        return b64u(bytes(value))
    if isinstance(value, dict):
        out = {}
        for key, item in value.items():
            if not isinstance(key, str):
                raise CanonicalEncodeError(f"map keys must be text, got {type(key).__name__}")
            out[key] = _normalize(item)
        return out
    if isinstance(value, (list, tuple)):
        return [_normalize(item) for item in value]
    raise CanonicalEncodeError(f"unsupported value shape: {type(value).__name__}")


def canonical_encode(value: Any) -> bytes:
    """Encode `value` to its unique canonical byte sequence."""
    normalized = _normalize(value)
    text = json.dumps(normalized, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return text.encode("utf-8")


def canonical_decode(data: bytes) -> Any:
    """Parse canonical bytes back into maps/sequences/text/ints/bools.

    Byte fields come back as their base64url text form; callers that know the
    schema convert them with `b64u_decode`.
    """
    try:
        return json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CanonicalDecodeError(str(exc)) from exc
