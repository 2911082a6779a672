"""Holder wallet: encrypted persistence plus the holder/prover behavior.

The store is one file: a magic/version header, a random scrypt salt, an
AESGCM nonce, then the sealed canonical-JSON state. The key never touches
disk; it is re-derived from the passphrase on every open, and the header
bytes are bound into the AEAD so nothing about the file can be swapped
without failing decryption. Credentials are re-verified against their
issuer keys on every load.
"""

from __future__ import annotations

import json
import os

import httpx
from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt
from filelock import FileLock

from ..agent.connections import Connection, decode_qr
from ..agent.dids import AgentIdentity
from ..agent.protocols import ProtocolSession
from ..agent.runtime import Peer
from ..anoncreds.holder import (
    Credential,
    PendingIssuance,
    begin_issuance,
    complete_credential,
    create_link_secret,
)
from ..anoncreds.issuer import IssuancePartial, IssuerPublicKey, signature_holds
from ..anoncreds.presentation import PresentationRequest, build_presentation
from ..anoncreds.schema import VACCINATION_SCHEMA
from ..canonical import canonical_json
from ..crypto.params import SystemParams
from ..errors import (
    BadFormat,
    BadPayload,
    BadRequest,
    CannotSatisfy,
    InvalidSignature,
    LedgerUnavailable,
    NoQuorum,
    Revoked,
    SchemaViolation,
    UnknownItem,
    VaxPassError,
    WalletLocked,
)
from ..revocation import RegistryDelta, RegistryPublic, witness_update
from .trust import TrustConfig

MAGIC = b"VAXW"
VERSION = 1
_SALT_BYTES = 16
_NONCE_BYTES = 12
# memory-hard by construction; fixed per format version
_SCRYPT_N = 2**14
_SCRYPT_R = 8
_SCRYPT_P = 1


def _derive_key(passphrase: str, salt: bytes) -> bytes:
    kdf = Scrypt(salt=salt, length=32, n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P)
    return kdf.derive(passphrase.encode("utf-8"))


def _lock_for(path: str) -> FileLock:
    return FileLock(str(path) + ".lock", timeout=10)


def save_wallet(path: str, passphrase: str, state: dict) -> None:
    salt = os.urandom(_SALT_BYTES)
    nonce = os.urandom(_NONCE_BYTES)
    header = MAGIC + bytes([VERSION]) + salt + nonce
    sealed = AESGCM(_derive_key(passphrase, salt)).encrypt(
        nonce, canonical_json(state), header
    )
    tmp = str(path) + ".tmp"
    with _lock_for(path):
        with open(tmp, "wb") as fh:
            fh.write(header + sealed)
        os.replace(tmp, path)


def load_wallet(path: str, passphrase: str) -> dict:
    with _lock_for(path):
        try:
            with open(path, "rb") as fh:
                blob = fh.read()
        except FileNotFoundError as exc:
            raise BadFormat(f"no wallet store at {path}") from exc
    header_len = len(MAGIC) + 1 + _SALT_BYTES + _NONCE_BYTES
    if len(blob) < header_len + 16 or not blob.startswith(MAGIC):
        raise BadFormat("not a wallet store")
    if blob[len(MAGIC)] != VERSION:
        raise BadFormat(f"unsupported wallet store version {blob[len(MAGIC)]}")
    salt = blob[len(MAGIC) + 1 : len(MAGIC) + 1 + _SALT_BYTES]
    nonce = blob[len(MAGIC) + 1 + _SALT_BYTES : header_len]
    try:
        plain = AESGCM(_derive_key(passphrase, salt)).decrypt(
            nonce, blob[header_len:], blob[:header_len]
        )
    except InvalidTag as exc:
        raise WalletLocked("wrong passphrase or tampered store") from exc
    state = json.loads(plain)
    for entry in state.get("credentials", []):
        cred = Credential.from_dict(entry["credential"])
        pub = IssuerPublicKey.from_dict(entry["cred_def"])
        if not signature_holds(pub, VACCINATION_SCHEMA, cred.attrs, cred.a, cred.e, cred.v):
            raise InvalidSignature(f"stored credential {cred.serial} fails verification")
    return state


def new_wallet_state(params: dict, trust: TrustConfig | None = None) -> dict:
    identity = AgentIdentity.generate()
    return {
        "params": dict(params),
        "identity": identity.private_bytes(),
        "link_secret": str(create_link_secret()),
        "credentials": [],
        "connections": [],
        "sessions": [],
        "accepted_nonces": [],
        "trust": trust.to_dict() if trust else None,
    }


class _HolderActions:
    def __init__(self, wallet: "Wallet"):
        self.wallet = wallet

    def build_request(self, offer: dict):
        if offer.get("schema_id") != VACCINATION_SCHEMA.schema_id:
            raise SchemaViolation(f"wallet does not understand {offer.get('schema_id')!r}")
        pub = IssuerPublicKey.from_dict(offer["cred_def"])
        if pub.cred_def_id != offer.get("cred_def_id"):
            raise SchemaViolation("offered key does not match its advertised definition")
        request, pending = begin_issuance(pub, self.wallet.link_secret, offer["nonce"])
        return request.to_dict(), {"v_prime": str(pending.v_prime), "nonce": offer["nonce"]}

    def complete(self, body: dict, pending_map: dict) -> None:
        offer = pending_map["offer"]
        stash = pending_map["issuance"]
        pub = IssuerPublicKey.from_dict(offer["cred_def"])
        cred = complete_credential(
            pub,
            VACCINATION_SCHEMA,
            PendingIssuance(nonce=stash["nonce"], v_prime=int(stash["v_prime"])),
            IssuancePartial.from_dict(body),
            offer["claims"],
            self.wallet.link_secret,
            offer["issuer_did"],
        )
        self.wallet.credentials.append(
            {
                "credential": cred,
                "cred_def": offer["cred_def"],
                "registry": offer["registry"],
                "revoked": False,
            }
        )


class _ProverActions:
    def __init__(self, wallet: "Wallet"):
        self.wallet = wallet

    def build_presentation(self, request_body: dict) -> dict:
        request = PresentationRequest.from_dict(request_body["request"])
        last: CannotSatisfy | None = None
        for entry in self.wallet.credentials:
            cred = entry["credential"]
            if cred.schema_id != request.schema_id:
                continue
            if entry["revoked"]:
                last = CannotSatisfy("credential has been revoked")
                continue
            try:
                self.wallet._refresh_witness(entry)
            except Revoked:
                last = CannotSatisfy("credential has been revoked")
                continue
            cred = entry["credential"]
            acc_value, acc_epoch = self.wallet._current_accumulator(cred.registry_id)
            try:
                return build_presentation(
                    self.wallet.params,
                    IssuerPublicKey.from_dict(entry["cred_def"]),
                    VACCINATION_SCHEMA,
                    cred,
                    request,
                    RegistryPublic.from_dict(entry["registry"]),
                    acc_value,
                    acc_epoch,
                )
            except CannotSatisfy as exc:
                last = exc
        raise last or CannotSatisfy("no credential matches the requested schema")


class Wallet:
    """Live wallet over a decrypted state dict. Mutations stay in memory
    until the owner serializes with :meth:`to_state` and saves."""

    def __init__(self, state: dict, transport, ledger=None, endpoint: str = "inproc://wallet"):
        self.params = SystemParams.from_dict(state["params"])
        self.identity = AgentIdentity.from_private_bytes(state["identity"])
        self.link_secret = int(state["link_secret"])
        self.trust = TrustConfig.from_dict(state["trust"]) if state.get("trust") else None
        self.credentials = [
            {**entry, "credential": Credential.from_dict(entry["credential"])}
            for entry in state.get("credentials", [])
        ]
        self.ledger = ledger
        self.peer = Peer(self.identity, endpoint, transport)
        self.peer.accepted_nonces = set(state.get("accepted_nonces", []))
        for cd in state.get("connections", []):
            conn = Connection.from_dict(cd)
            self.peer.connections[conn.connection_id] = conn
        for sd in state.get("sessions", []):
            session = ProtocolSession.from_dict(sd["session"])
            self.peer.sessions[(sd["connection_id"], session.thread)] = session
        self.peer.set_actions("issue-credential", "holder", _HolderActions(self))
        self.peer.set_actions("present-proof", "prover", _ProverActions(self))

    def to_state(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "identity": self.identity.private_bytes(),
            "link_secret": str(self.link_secret),
            "credentials": [
                {**entry, "credential": entry["credential"].to_dict()}
                for entry in self.credentials
            ],
            "connections": [c.to_dict() for c in self.peer.connections.values()],
            "sessions": [
                {"connection_id": cid, "session": s.to_dict()}
                for (cid, _thread), s in sorted(self.peer.sessions.items())
            ],
            "accepted_nonces": sorted(self.peer.accepted_nonces),
            "trust": self.trust.to_dict() if self.trust else None,
        }

    # ------------------------------------------------------------ actions

    def connect(self, payload: bytes | str, consent: bool = True) -> dict:
        try:
            invitation = decode_qr(payload)
        except VaxPassError as exc:
            raise BadPayload(exc.detail or str(exc)) from exc
        try:
            conn = self.peer.connect(invitation, consent=consent)
        except BadRequest as exc:
            raise BadPayload(exc.detail) from exc
        return {
            "connection_id": conn.connection_id,
            "remote_did": conn.remote_did,
            "remote_endpoint": conn.remote_endpoint,
        }

    def list_connections(self) -> list[dict]:
        return [
            {
                "connection_id": c.connection_id,
                "remote_did": c.remote_did,
                "remote_endpoint": c.remote_endpoint,
            }
            for c in self.peer.connections.values()
        ]

    def list_credentials(self) -> list[dict]:
        return [
            {
                "serial": entry["credential"].serial,
                "issuer_did": entry["credential"].issuer_did,
                "claims": dict(entry["credential"].raw),
                "witness_epoch": entry["credential"].witness.epoch,
                "revoked": entry["revoked"],
            }
            for entry in self.credentials
        ]

    def pending_items(self) -> list[dict]:
        items = []
        for (cid, thread), s in self.peer.sessions.items():
            conn = self.peer.connections.get(cid)
            sender = conn.remote_did if conn else ""
            if s.protocol == "issue-credential" and s.role == "holder" and s.state == "offered":
                offer = s.pending.get("offer", {})
                items.append(
                    {
                        "id": thread,
                        "kind": "credential-offer",
                        "connection_id": cid,
                        "from": sender,
                        "claims": offer.get("claims", {}),
                    }
                )
            elif s.protocol == "present-proof" and s.role == "prover" and s.state == "requested":
                items.append(
                    {
                        "id": thread,
                        "kind": "proof-request",
                        "connection_id": cid,
                        "from": sender,
                        "request": s.pending.get("request", {}).get("request", {}),
                    }
                )
        return sorted(items, key=lambda x: x["id"])

    def respond(self, item_id: str, decision: str) -> dict:
        if decision not in ("accept", "decline"):
            raise BadRequest(f"decision must be accept or decline, not {decision!r}")
        target = None
        for (cid, thread), s in self.peer.sessions.items():
            if thread == item_id and s.state in ("offered", "requested") and s.role in (
                "holder",
                "prover",
            ):
                target = (cid, thread, s)
                break
        if target is None:
            raise UnknownItem(f"no pending item {item_id!r}")
        cid, thread, _ = target
        session = self.peer.process_local(cid, thread, f"local/{decision}")
        outcome = {"id": item_id, "kind": session.protocol, "state": session.state}
        if session.state == "acked":
            outcome["detail"] = "credential stored"
        decline = session.pending.get("decline")
        problem = session.pending.get("problem")
        result = session.pending.get("result")
        if decline:
            outcome["code"] = decline.get("code", "")
        elif problem:
            outcome["code"] = problem.get("code", "")
        elif result is not None and not result.get("accepted"):
            outcome["code"] = result.get("reason", "")
        return outcome

    # --------------------------------------------------------- revocation

    def _ledger(self):
        if self.ledger is None:
            raise LedgerUnavailable("wallet has no ledger access configured")
        return self.ledger

    def _current_accumulator(self, registry_id: str) -> tuple[int, int]:
        try:
            entry = self._ledger().query("REV_REG_ENTRY", registry_id)["entry"]
        except (NoQuorum, httpx.HTTPError, OSError) as exc:
            raise LedgerUnavailable(str(exc)) from exc
        return int(entry["value_after"]), int(entry["epoch_to"])

    def _refresh_witness(self, entry: dict):
        cred = entry["credential"]
        try:
            raw = self._ledger().deltas(cred.registry_id, cred.witness.epoch)
        except (NoQuorum, httpx.HTTPError, OSError) as exc:
            raise LedgerUnavailable(str(exc)) from exc
        if raw:
            deltas = [RegistryDelta.from_dict(d) for d in raw]
            public = RegistryPublic.from_dict(entry["registry"])
            witness = witness_update(public, cred.witness, deltas)
            entry["credential"] = cred.with_witness(witness)
        return entry["credential"].witness

    def sync_revocation(self) -> list[dict]:
        out = []
        for entry in self.credentials:
            cred = entry["credential"]
            status = {
                "serial": cred.serial,
                "witness_epoch": cred.witness.epoch,
                "revoked": entry["revoked"],
            }
            if not entry["revoked"]:
                try:
                    witness = self._refresh_witness(entry)
                    status["witness_epoch"] = witness.epoch
                except Revoked:
                    entry["revoked"] = True
                    status["revoked"] = True
            out.append(status)
        return out
