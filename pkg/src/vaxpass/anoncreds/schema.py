"""Credential schemas and attribute encodings.

A schema fixes an ordered attribute vector. Position 0 is always the
holder's link secret and the last position is always the revocation
handle; neither is ever disclosable. The claims in between carry the
vaccination record itself.

Raw claim values are strings; they enter the algebra through one of
three encodings:

- ``hash``: first 31 bytes of SHA-256, as an integer (248 bits, safely
  under the 256-bit message bound). Supports equality only.
- ``days``: ISO date mapped to days since 1970-01-01. Order-preserving,
  so date predicates reduce to integer comparisons.
- ``small_int``: the decimal value itself, required to fit 32 bits.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import date

from ..errors import SchemaViolation

LINK_SECRET = "link_secret"
REVOCATION_HANDLE = "revocation_handle"
RESERVED = frozenset({LINK_SECRET, REVOCATION_HANDLE})

ENCODINGS = ("hash", "days", "small_int")

_EPOCH = date(1970, 1, 1)


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    encoding: str


@dataclass(frozen=True)
class CredentialSchema:
    schema_id: str
    claims: tuple[AttributeSpec, ...]

    def __post_init__(self):
        names = [c.name for c in self.claims]
        if len(set(names)) != len(names):
            raise SchemaViolation("duplicate claim names")
        for c in self.claims:
            if c.name in RESERVED:
                raise SchemaViolation(f"{c.name} is a reserved attribute name")
            if c.encoding not in ENCODINGS:
                raise SchemaViolation(f"unknown encoding {c.encoding!r}")
        if not self.claims:
            raise SchemaViolation("schema needs at least one claim")

    def attribute_names(self) -> tuple[str, ...]:
        """Full signed vector order: link secret, claims, handle."""
        return (LINK_SECRET, *(c.name for c in self.claims), REVOCATION_HANDLE)

    @property
    def arity(self) -> int:
        return len(self.claims) + 2

    def claim_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.claims)

    def spec_for(self, name: str) -> AttributeSpec:
        for c in self.claims:
            if c.name == name:
                return c
        raise SchemaViolation(f"no claim named {name!r} in {self.schema_id}")

    def to_dict(self) -> dict:
        return {
            "schema_id": self.schema_id,
            "claims": [{"name": c.name, "encoding": c.encoding} for c in self.claims],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CredentialSchema":
        return cls(
            schema_id=d["schema_id"],
            claims=tuple(AttributeSpec(c["name"], c["encoding"]) for c in d["claims"]),
        )


VACCINATION_SCHEMA = CredentialSchema(
    schema_id="vaxpass/vaccination/1.0",
    claims=(
        AttributeSpec("full_name", "hash"),
        AttributeSpec("birth_date", "days"),
        AttributeSpec("pathogen", "hash"),
        AttributeSpec("laboratory", "hash"),
        AttributeSpec("dose", "small_int"),
        AttributeSpec("vaccination_date", "days"),
        AttributeSpec("location", "hash"),
    ),
)


def days_since_epoch(iso_date: str) -> int:
    try:
        d = date.fromisoformat(iso_date)
    except ValueError as exc:
        raise SchemaViolation(f"bad date {iso_date!r}: {exc}") from exc
    days = (d - _EPOCH).days
    if days < 0:
        raise SchemaViolation("dates before 1970-01-01 are not encodable")
    return days


def encode_attribute(spec: AttributeSpec, raw: str | int) -> int:
    if spec.encoding == "hash":
        return int.from_bytes(hashlib.sha256(str(raw).encode("utf-8")).digest()[:31], "big")
    if spec.encoding == "days":
        return days_since_epoch(str(raw))
    if spec.encoding == "small_int":
        try:
            value = int(raw)
        except (TypeError, ValueError) as exc:
            raise SchemaViolation(f"{spec.name} must be an integer") from exc
        if not 0 <= value < (1 << 32):
            raise SchemaViolation(f"{spec.name} outside [0, 2^32)")
        return value
    raise SchemaViolation(f"unknown encoding {spec.encoding!r}")


def encode_claims(schema: CredentialSchema, raw: dict) -> dict[str, int]:
    """Encode a full raw claim dict; the claim set must match exactly."""
    expected = set(schema.claim_names())
    got = set(raw)
    if got != expected:
        missing, extra = sorted(expected - got), sorted(got - expected)
        raise SchemaViolation(f"claims mismatch: missing={missing} extra={extra}")
    return {name: encode_attribute(schema.spec_for(name), raw[name]) for name in raw}
