"""Issuer (vaccinator) service: intake, credential issuance, revocation.

One service instance owns one signing key, one revocation registry and one
ledger identity. A vaccination intake creates a pending issuance and an
invitation; as soon as the holder's wallet connects, the credential offer
is pushed over that connection, and the rest of the issue-credential
protocol runs on the wallet's synchronous replies.
"""

from __future__ import annotations

import itertools
import secrets
import threading

import httpx
from fastapi import FastAPI

from ..agent.runtime import Peer
from ..anoncreds.issuer import (
    IssuanceRequest,
    IssuerKeyPair,
    issue_credential,
    issuer_keygen,
)
from ..anoncreds.presentation import new_nonce
from ..anoncreds.schema import VACCINATION_SCHEMA, encode_claims
from ..agent.connections import qr_payload
from ..crypto.params import SystemParams
from ..errors import (
    BadBlinding,
    DuplicateId,
    LedgerUnavailable,
    NoQuorum,
    UnknownItem,
)
from ..httperrors import install_error_handler
from ..ledger.chain import make_tx
from ..revocation import RegistryState, registry_init, registry_revoke
from .records import parse_record

SCHEMA = VACCINATION_SCHEMA


class _IssuerActions:
    def __init__(self, service: "IssuerService"):
        self.service = service

    def issue(self, request_body: dict, offer: dict) -> dict:
        return self.service._issue(request_body, offer)


class IssuerService:
    def __init__(
        self,
        params: SystemParams,
        identity,
        ledger,
        transport,
        endpoint: str,
        registry_capacity: int = 1024,
    ):
        self.params = params
        self.identity = identity
        self.ledger = ledger
        self.endpoint = endpoint
        self.keypair: IssuerKeyPair | None = None
        self.registry: RegistryState | None = None
        self.issuances: dict[str, dict] = {}
        self._registry_capacity = registry_capacity
        self._serials: dict[str, str] = {}  # serial -> issuance id
        self._by_invitation: dict[str, str] = {}  # invitation nonce -> issuance id
        self._by_offer: dict[str, str] = {}  # offer nonce -> issuance id
        self._seq = itertools.count()
        self._lock = threading.Lock()
        self.peer = Peer(identity, endpoint, transport)
        self.peer.set_actions("issue-credential", "issuer", _IssuerActions(self))
        self.peer.on_connected = self._on_connected

    # ---------------------------------------------------------- bootstrap

    def _submit(self, kind: str, payload: dict) -> dict:
        tx = make_tx(kind, payload, self.identity.did, next(self._seq), sign=self.identity.sign)
        try:
            return self.ledger.submit(tx)
        except (NoQuorum, httpx.HTTPError, OSError) as exc:
            raise LedgerUnavailable(str(exc)) from exc

    def register_identity(self) -> None:
        """Put this issuer's DID document and the schema on the ledger."""
        try:
            self._submit("DID_DOC", self.identity.document(self.endpoint))
        except DuplicateId:
            pass
        try:
            self._submit("SCHEMA", SCHEMA.to_dict())
        except DuplicateId:
            pass  # any earlier issuer already registered the shared schema

    def publish_definitions(self, rng=None) -> None:
        """Generate keys and registry, then publish both definitions.

        Requires this DID to already be on the ledger trust list; the
        authority grants that between registration and this call.
        """
        if self.keypair is None:
            self.keypair = issuer_keygen(self.params, SCHEMA, rng)
        cred_def_id = self.keypair.public.cred_def_id
        if self.registry is None:
            self.registry = registry_init(
                self.params, f"{cred_def_id}:rev0", rng, capacity=self._registry_capacity
            )
        try:
            self._submit(
                "CRED_DEF",
                {"cred_def_id": cred_def_id, "key": self.keypair.public.to_dict()},
            )
        except DuplicateId:
            pass
        try:
            self._submit(
                "REV_REG_DEF",
                {
                    "registry_id": self.registry.public.registry_id,
                    "public": self.registry.public.to_dict(),
                    "accumulator": str(self.registry.value),
                },
            )
        except DuplicateId:
            pass

    @property
    def ready(self) -> bool:
        return self.keypair is not None and self.registry is not None

    # ----------------------------------------------------------- intake

    def create_issuance(self, record_data: dict) -> dict:
        record = parse_record(record_data)
        if not self.ready:
            raise LedgerUnavailable("issuer definitions are not on the ledger yet")
        try:
            self.ledger.tip()
        except (NoQuorum, httpx.HTTPError, OSError) as exc:
            raise LedgerUnavailable(str(exc)) from exc
        issuance_id = secrets.token_hex(8)
        invitation = self.peer.invite()
        self.issuances[issuance_id] = {
            "record": record,
            "serial": f"vax-{secrets.token_hex(12)}",
            "status": "pending",
            "connection_id": None,
        }
        self._by_invitation[invitation["nonce"]] = issuance_id
        return {
            "issuance_id": issuance_id,
            "invitation": qr_payload(invitation).decode("ascii"),
        }

    def issuance_status(self, issuance_id: str) -> dict:
        issuance = self.issuances.get(issuance_id)
        if issuance is None:
            raise UnknownItem(f"no issuance {issuance_id!r}")
        return {
            "issuance_id": issuance_id,
            "status": issuance["status"],
            "serial": issuance["serial"],
        }

    def _on_connected(self, conn) -> list[dict]:
        issuance_id = self._by_invitation.pop(conn.invitation_nonce, None)
        if issuance_id is None:
            return []
        issuance = self.issuances[issuance_id]
        offer_nonce = new_nonce()
        offer = {
            "schema_id": SCHEMA.schema_id,
            "cred_def_id": self.keypair.public.cred_def_id,
            "cred_def": self.keypair.public.to_dict(),
            "issuer_did": self.identity.did,
            "registry": self.registry.public.to_dict(),
            "claims": issuance["record"].claims(),
            "nonce": offer_nonce,
        }
        issuance["status"] = "connected"
        issuance["connection_id"] = conn.connection_id
        self._by_offer[offer_nonce] = issuance_id
        _thread, outs = self.peer.open_exchange(
            conn.connection_id, "issue-credential", "issuer", "local/offer", offer
        )
        return outs

    # ---------------------------------------------------------- issuance

    def _issue(self, request_body: dict, offer: dict) -> dict:
        issuance_id = self._by_offer.get(offer.get("nonce", ""))
        if issuance_id is None:
            raise BadBlinding("request does not answer any live offer")
        request = IssuanceRequest.from_dict(request_body)
        if request.nonce != offer["nonce"]:
            raise BadBlinding("issuance request answers a different offer")
        issuance = self.issuances[issuance_id]
        with self._lock:
            claims = encode_claims(SCHEMA, issuance["record"].claims())
            partial, advanced, delta = issue_credential(
                self.keypair, SCHEMA, claims, request, issuance["serial"], self.registry
            )
            # the registry only advances once the delta is actually public
            self._submit("REV_REG_ENTRY", delta.to_dict())
            self.registry = advanced
        self._by_offer.pop(offer["nonce"], None)
        issuance["status"] = "issued"
        self._serials[issuance["serial"]] = issuance_id
        return partial.to_dict()

    # -------------------------------------------------------- revocation

    def revoke(self, serial: str | None = None, issuance_id: str | None = None) -> dict:
        if serial is None:
            if issuance_id is None:
                raise UnknownItem("revocation needs a serial or an issuance id")
            issuance = self.issuances.get(issuance_id)
            if issuance is None:
                raise UnknownItem(f"no issuance {issuance_id!r}")
            serial = issuance["serial"]
        with self._lock:
            advanced, delta = registry_revoke(self.registry, serial)
            self._submit("REV_REG_ENTRY", delta.to_dict())
            self.registry = advanced
        linked = self._serials.get(serial)
        if linked is not None:
            self.issuances[linked]["status"] = "revoked"
        return {"serial": serial, "epoch": advanced.epoch}


def create_issuer_app(service: IssuerService) -> FastAPI:
    app = FastAPI(title="vaxpass issuer", docs_url=None, redoc_url=None)
    install_error_handler(app)

    @app.post("/vaccinations", status_code=201)
    def vaccinations(body: dict):
        return service.create_issuance(body)

    @app.get("/issuances/{issuance_id}")
    def issuance(issuance_id: str):
        return service.issuance_status(issuance_id)

    @app.post("/revocations")
    def revocations(body: dict):
        return service.revoke(body.get("serial"), body.get("issuance_id"))

    @app.post("/inbox")
    def inbox(payload: dict):
        return {"replies": service.peer.receive(payload)}

    @app.get("/health")
    def health():
        return {"status": "ok", "did": service.identity.did, "ready": service.ready}

    return app
