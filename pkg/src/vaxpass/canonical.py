"""Canonical byte encodings shared across the package.

Every hash, signature and transcript in the system operates on bytes
produced here, so the rules are deliberately small and rigid:

- JSON: keys sorted, no insignificant whitespace, UTF-8, integers in
  base 10, no floats.
- Integers: minimal big-endian ("minimal" meaning no leading zero byte;
  zero encodes as the empty string).
- Group elements: fixed-width big-endian, width taken from the modulus.
- Framing: a 4-byte big-endian length prefix before each variable-length
  item absorbed into a transcript.
"""

from __future__ import annotations

import base64
import json
from typing import Any


def canonical_json(obj: Any) -> bytes:
    """Serialize ``obj`` to canonical JSON bytes."""
    _reject_floats(obj)
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def _reject_floats(obj: Any) -> None:
    if isinstance(obj, float):
        raise ValueError("floats are not allowed in canonical JSON")
    if isinstance(obj, dict):
        for k, v in obj.items():
            if not isinstance(k, str):
                raise ValueError("canonical JSON object keys must be strings")
            _reject_floats(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _reject_floats(v)


def int_to_bytes(x: int) -> bytes:
    """Minimal big-endian encoding of a non-negative integer."""
    if x < 0:
        raise ValueError("int_to_bytes requires a non-negative integer")
    return x.to_bytes((x.bit_length() + 7) // 8, "big")


def bytes_to_int(b: bytes) -> int:
    return int.from_bytes(b, "big")


def element_to_bytes(x: int, modulus: int) -> bytes:
    """Fixed-width big-endian encoding of a group element mod ``modulus``."""
    if not 0 <= x < modulus:
        raise ValueError("element out of range for its modulus")
    width = (modulus.bit_length() + 7) // 8
    return x.to_bytes(width, "big")


def frame(payload: bytes) -> bytes:
    """Length-prefix ``payload`` with a 4-byte big-endian count."""
    if len(payload) >= 1 << 32:
        raise ValueError("payload too large to frame")
    return len(payload).to_bytes(4, "big") + payload


def b64url_encode(raw: bytes) -> str:
    """Unpadded URL-safe base64."""
    return base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii")


def b64url_decode(text: str) -> bytes:
    pad = -len(text) % 4
    return base64.urlsafe_b64decode(text + "=" * pad)
