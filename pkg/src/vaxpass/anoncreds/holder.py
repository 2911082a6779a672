"""Holder side of issuance: blinding, unblinding, credential storage.

The holder contributes the link secret (never revealed to anyone) and
its share v' of the blinding exponent; after the issuer answers with
(A, e, v''), the completed credential is checked against the public key
before being accepted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..crypto.arith import Rng, make_rng
from ..crypto.params import MSG_BITS
from ..errors import InvalidSignature
from ..revocation import MembershipWitness
from .issuer import (
    E_HI,
    E_LO,
    IssuancePartial,
    IssuerPublicKey,
    make_issuance_request,
    signature_holds,
)
from .schema import LINK_SECRET, REVOCATION_HANDLE, CredentialSchema, encode_claims


def create_link_secret(rng: Rng | None = None) -> int:
    rng = rng or make_rng()
    return rng.below(1 << MSG_BITS)


@dataclass(frozen=True)
class PendingIssuance:
    """Holder-side state kept between request and completion."""

    nonce: str
    v_prime: int


def begin_issuance(
    pub: IssuerPublicKey, link_secret: int, nonce: str, rng: Rng | None = None
):
    """Returns (request to send, state to keep)."""
    request, v_prime = make_issuance_request(pub, link_secret, nonce, rng)
    return request, PendingIssuance(nonce=nonce, v_prime=v_prime)


@dataclass(frozen=True)
class Credential:
    schema_id: str
    cred_def_id: str
    issuer_did: str
    registry_id: str
    serial: str
    raw: dict
    attrs: dict[str, int]
    a: int
    e: int
    v: int
    witness: MembershipWitness

    def with_witness(self, witness: MembershipWitness) -> "Credential":
        return replace(self, witness=witness)

    def to_dict(self) -> dict:
        return {
            "schema_id": self.schema_id,
            "cred_def_id": self.cred_def_id,
            "issuer_did": self.issuer_did,
            "registry_id": self.registry_id,
            "serial": self.serial,
            "raw": dict(self.raw),
            "attrs": {k: str(v) for k, v in self.attrs.items()},
            "a": str(self.a),
            "e": str(self.e),
            "v": str(self.v),
            "witness": self.witness.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Credential":
        return cls(
            schema_id=d["schema_id"],
            cred_def_id=d["cred_def_id"],
            issuer_did=d["issuer_did"],
            registry_id=d["registry_id"],
            serial=d["serial"],
            raw=dict(d["raw"]),
            attrs={k: int(v) for k, v in d["attrs"].items()},
            a=int(d["a"]),
            e=int(d["e"]),
            v=int(d["v"]),
            witness=MembershipWitness.from_dict(d["witness"]),
        )


def complete_credential(
    pub: IssuerPublicKey,
    schema: CredentialSchema,
    pending: PendingIssuance,
    partial: IssuancePartial,
    raw_claims: dict,
    link_secret: int,
    issuer_did: str,
) -> Credential:
    """Combine both halves and verify the signature before accepting."""
    if not E_LO <= partial.e < E_HI:
        raise InvalidSignature("signing exponent outside its prime window")
    attrs = dict(encode_claims(schema, raw_claims))
    attrs[LINK_SECRET] = link_secret
    attrs[REVOCATION_HANDLE] = partial.witness.handle
    v = pending.v_prime + partial.v_issuer
    if not signature_holds(pub, schema, attrs, partial.a, partial.e, v):
        raise InvalidSignature("credential equation does not hold")
    return Credential(
        schema_id=schema.schema_id,
        cred_def_id=pub.cred_def_id,
        issuer_did=issuer_did,
        registry_id=partial.witness.registry_id,
        serial=partial.serial,
        raw=dict(raw_claims),
        attrs=attrs,
        a=partial.a,
        e=partial.e,
        v=v,
        witness=partial.witness,
    )
