"""Out-of-band invitations and pairwise connection establishment.

The inviter publishes a signed invitation (usually rendered as a QR code).
The acceptor replies with a connection request carrying its DID document
and a fresh ephemeral key. Both sides derive the same session key from

    HKDF(ephemeral-static DH || static-static DH,
         salt = invitation nonce, info = both DIDs)

so the key is bound to the invitation and to both long-term identities.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field

from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.hashes import SHA256
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from ..canonical import b64url_decode, b64url_encode, canonical_json
from ..errors import BadKey, BadRequest, Declined, NonceReused
from .dids import AgentIdentity, check_did_document, verify_signature

INVITATION_TYPE = "vaxpass/invitation"
CONNECTION_REQUEST_TYPE = "vaxpass/connection-request"


def new_nonce() -> str:
    return secrets.token_hex(16)


def _raw_public(private: X25519PrivateKey) -> bytes:
    return private.public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )


def _invitation_signing_bytes(inv: dict) -> bytes:
    unsigned = {k: v for k, v in inv.items() if k != "signature"}
    return canonical_json(unsigned)


def create_invitation(identity: AgentIdentity, endpoint: str) -> dict:
    if not endpoint:
        raise BadRequest("invitation endpoint must be non-empty")
    inv = {
        "type": INVITATION_TYPE,
        "inviter": identity.did,
        "endpoint": endpoint,
        "nonce": new_nonce(),
        "verification_key": identity.verification_key.hex(),
        "key_agreement_key": identity.key_agreement_key.hex(),
    }
    inv["signature"] = identity.sign(_invitation_signing_bytes(inv)).hex()
    return inv


def qr_payload(invitation: dict) -> bytes:
    """What actually goes in the QR code."""
    return b64url_encode(canonical_json(invitation)).encode("ascii")


def decode_qr(payload: bytes | str) -> dict:
    import json

    if isinstance(payload, bytes):
        payload = payload.decode("ascii")
    try:
        return json.loads(b64url_decode(payload))
    except Exception as exc:
        raise BadRequest(f"undecodable invitation payload: {exc}") from exc


def verify_invitation(invitation: dict) -> None:
    for f in ("type", "inviter", "endpoint", "nonce", "verification_key",
              "key_agreement_key", "signature"):
        if f not in invitation:
            raise BadRequest(f"invitation missing {f!r}")
    if invitation["type"] != INVITATION_TYPE:
        raise BadRequest("not an invitation")
    verify_signature(
        invitation["verification_key"],
        _invitation_signing_bytes(invitation),
        bytes.fromhex(invitation["signature"]),
    )


@dataclass
class Connection:
    connection_id: str
    local_did: str
    remote_did: str
    role: str  # "inviter" or "acceptor"
    key: bytes
    remote_endpoint: str
    remote_verification_key: str
    invitation_nonce: str = ""
    send_counter: int = 0
    seen_ids: set = field(default_factory=set)

    @property
    def send_prefix(self) -> str:
        return "i" if self.role == "inviter" else "a"

    @property
    def recv_prefix(self) -> str:
        return "a" if self.role == "inviter" else "i"

    def to_dict(self) -> dict:
        return {
            "connection_id": self.connection_id,
            "local_did": self.local_did,
            "remote_did": self.remote_did,
            "role": self.role,
            "key": self.key.hex(),
            "remote_endpoint": self.remote_endpoint,
            "remote_verification_key": self.remote_verification_key,
            "invitation_nonce": self.invitation_nonce,
            "send_counter": self.send_counter,
            "seen_ids": sorted(self.seen_ids),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Connection":
        return cls(
            connection_id=d["connection_id"],
            local_did=d["local_did"],
            remote_did=d["remote_did"],
            role=d["role"],
            key=bytes.fromhex(d["key"]),
            remote_endpoint=d["remote_endpoint"],
            remote_verification_key=d["remote_verification_key"],
            invitation_nonce=d.get("invitation_nonce", ""),
            send_counter=d["send_counter"],
            seen_ids=set(d["seen_ids"]),
        )


def _session_key(eph_ss: bytes, static_ss: bytes, nonce: str, dids: list[str]) -> bytes:
    return HKDF(
        algorithm=SHA256(),
        length=32,
        salt=bytes.fromhex(nonce),
        info=b"vaxpass/session" + canonical_json(sorted(dids)),
    ).derive(eph_ss + static_ss)


def _connection_id(nonce: str, dids: list[str]) -> str:
    material = b"vaxpass/connection" + bytes.fromhex(nonce) + canonical_json(sorted(dids))
    return hashlib.sha256(material).hexdigest()[:32]


def accept_invitation(
    invitation: dict,
    identity: AgentIdentity,
    endpoint: str,
    seen_nonces: set,
    consent: bool = True,
) -> tuple[Connection, dict]:
    """Acceptor side. Returns the local connection and the connection
    request to deliver to the inviter's endpoint."""
    verify_invitation(invitation)
    if invitation["nonce"] in seen_nonces:
        raise NonceReused("invitation was already used")
    if not consent:
        raise Declined("connection refused")
    seen_nonces.add(invitation["nonce"])

    ephemeral = X25519PrivateKey.generate()
    inviter_kx = X25519PublicKey.from_public_bytes(
        bytes.fromhex(invitation["key_agreement_key"])
    )
    eph_ss = ephemeral.exchange(inviter_kx)
    static_ss = identity.dh(bytes.fromhex(invitation["key_agreement_key"]))
    dids = [identity.did, invitation["inviter"]]
    key = _session_key(eph_ss, static_ss, invitation["nonce"], dids)

    request = {
        "type": CONNECTION_REQUEST_TYPE,
        "from": identity.did,
        "to": invitation["inviter"],
        "nonce": invitation["nonce"],
        "did_document": identity.document(endpoint),
        "ephemeral_key": _raw_public(ephemeral).hex(),
    }
    request["signature"] = identity.sign(_request_signing_bytes(request)).hex()

    conn = Connection(
        connection_id=_connection_id(invitation["nonce"], dids),
        local_did=identity.did,
        remote_did=invitation["inviter"],
        role="acceptor",
        key=key,
        remote_endpoint=invitation["endpoint"],
        remote_verification_key=invitation["verification_key"],
        invitation_nonce=invitation["nonce"],
    )
    return conn, request


def _request_signing_bytes(req: dict) -> bytes:
    unsigned = {k: v for k, v in req.items() if k != "signature"}
    return canonical_json(unsigned)


def receive_connection_request(
    identity: AgentIdentity,
    request: dict,
    open_nonces: set,
) -> Connection:
    """Inviter side. ``open_nonces`` holds nonces of invitations this agent
    issued that have not been used yet; the matching nonce is consumed."""
    for f in ("type", "from", "to", "nonce", "did_document", "ephemeral_key", "signature"):
        if f not in request:
            raise BadRequest(f"connection request missing {f!r}")
    if request["type"] != CONNECTION_REQUEST_TYPE:
        raise BadRequest("not a connection request")
    if request["to"] != identity.did:
        raise BadRequest("connection request addressed to a different agent")
    if request["nonce"] not in open_nonces:
        raise NonceReused("invitation nonce unknown or already used")
    doc = request["did_document"]
    try:
        check_did_document(doc)
    except BadKey as exc:
        raise BadRequest(str(exc)) from exc
    if doc["did"] != request["from"]:
        raise BadRequest("DID document does not belong to the sender")
    verify_signature(
        doc["verification_key"],
        _request_signing_bytes(request),
        bytes.fromhex(request["signature"]),
    )
    open_nonces.discard(request["nonce"])

    eph_ss = identity.dh(bytes.fromhex(request["ephemeral_key"]))
    static_ss = identity.dh(bytes.fromhex(doc["key_agreement_key"]))
    dids = [identity.did, request["from"]]
    key = _session_key(eph_ss, static_ss, request["nonce"], dids)

    return Connection(
        connection_id=_connection_id(request["nonce"], dids),
        local_did=identity.did,
        remote_did=request["from"],
        role="inviter",
        key=key,
        remote_endpoint=doc["endpoint"],
        remote_verification_key=doc["verification_key"],
        invitation_nonce=request["nonce"],
    )
