"""Fiat-Shamir transcripts.

A transcript is an order-sensitive SHA-256 absorption of labelled items.
Each item is framed (label, then payload, each with a 4-byte big-endian
length prefix) so that no two distinct absorption sequences collide by
concatenation. Challenges are 256-bit integers squeezed from the running
state; squeezing also re-absorbs a marker so later challenges differ.
"""

from __future__ import annotations

import hashlib

from ..canonical import element_to_bytes, frame, int_to_bytes


class Transcript:
    def __init__(self, protocol_label: bytes):
        self._hash = hashlib.sha256()
        self._absorb_raw(b"vaxpass/transcript/v1")
        self._absorb_raw(protocol_label)

    def _absorb_raw(self, payload: bytes) -> None:
        self._hash.update(frame(payload))

    def absorb(self, label: bytes, payload: bytes) -> None:
        self._absorb_raw(label)
        self._absorb_raw(payload)

    def absorb_int(self, label: bytes, x: int) -> None:
        if x < 0:
            # sign marker keeps -x and x distinct
            self.absorb(label, b"-" + int_to_bytes(-x))
        else:
            self.absorb(label, int_to_bytes(x))

    def absorb_element(self, label: bytes, x: int, modulus: int) -> None:
        self.absorb(label, element_to_bytes(x, modulus))

    def clone(self) -> "Transcript":
        t = Transcript.__new__(Transcript)
        t._hash = self._hash.copy()
        return t

    def challenge_bytes(self, label: bytes) -> bytes:
        self._absorb_raw(b"challenge")
        self._absorb_raw(label)
        out = self._hash.copy().digest()
        self._absorb_raw(out)
        return out

    def challenge(self, label: bytes = b"c") -> int:
        """256-bit Fiat-Shamir challenge."""
        return int.from_bytes(self.challenge_bytes(label), "big")
