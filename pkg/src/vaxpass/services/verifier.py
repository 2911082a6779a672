"""Verifier service: proof-request templates, live status, verification.

A proof request is created from a template, carried to the prover inside
an invitation, and pushed as a present-proof opener the moment the wallet
connects. The stored record never holds more than the template, the
verdict, the decline reason and the revealed values; presentations are
checked and dropped.
"""

from __future__ import annotations

import secrets
import time

import httpx
from fastapi import FastAPI

from ..agent.connections import qr_payload
from ..agent.runtime import Peer
from ..anoncreds.issuer import IssuerPublicKey
from ..anoncreds.presentation import (
    AllowedList,
    Predicate,
    PresentationRequest,
    UNTRUSTED_ISSUER,
    STALE_ACCUMULATOR,
    VerificationResult,
    new_nonce,
    verify_presentation,
)
from ..anoncreds.schema import VACCINATION_SCHEMA, encode_attribute
from ..crypto.params import SystemParams
from ..errors import (
    BadTemplate,
    LedgerUnavailable,
    NoQuorum,
    NotFound,
    UnknownItem,
)
from ..httperrors import install_error_handler
from ..revocation import RegistryPublic
from .trust import TrustConfig, trust_check

SCHEMA = VACCINATION_SCHEMA


class _VerifierActions:
    def __init__(self, service: "VerifierService"):
        self.service = service

    def verify(self, presentation: dict, request_body: dict) -> dict:
        request = PresentationRequest.from_dict(request_body["request"])
        result = self.service.evaluate(presentation, request)
        self.service._finish(
            request.request_id,
            "verified" if result.accepted else "declined",
            reason=result.reason,
            revealed=dict(presentation.get("revealed", {})) if result.accepted else None,
        )
        return {"accepted": result.accepted, "reason": result.reason or ""}


class VerifierService:
    def __init__(self, params: SystemParams, identity, ledger, transport, endpoint: str,
                 trust: TrustConfig):
        self.params = params
        self.identity = identity
        self.ledger = ledger
        self.trust = trust
        self.requests: dict[str, dict] = {}
        self._by_invitation: dict[str, str] = {}  # invitation nonce -> request id
        self._by_thread: dict[tuple[str, str], str] = {}
        self.peer = Peer(identity, endpoint, transport)
        self.peer.set_actions("present-proof", "verifier", _VerifierActions(self))
        self.peer.on_connected = self._on_connected
        self.peer.on_session_update = self._on_session_update

    # ----------------------------------------------------------- intake

    def create_request(self, template: dict) -> dict:
        if not isinstance(template, dict):
            raise BadTemplate("template must be a JSON object")
        try:
            revealed = tuple(str(x) for x in template.get("revealed", ()))
            predicates = tuple(self._predicate(p) for p in template.get("predicates", ()))
            allowed = tuple(AllowedList.from_dict(a) for a in template.get("allowed", ()))
            ttl = int(template.get("ttl_seconds", 600))
        except BadTemplate:
            raise
        except Exception as exc:
            raise BadTemplate(f"malformed template: {exc}") from exc
        if not (revealed or predicates or allowed):
            raise BadTemplate("template constrains nothing")
        request = PresentationRequest(
            request_id=secrets.token_hex(8),
            nonce=new_nonce(),
            schema_id=SCHEMA.schema_id,
            revealed=revealed,
            predicates=predicates,
            allowed=allowed,
            created_at=int(time.time()),
            ttl_seconds=ttl,
        )
        request.validate(SCHEMA)
        invitation = self.peer.invite()
        self.requests[request.request_id] = {
            "status": "pending",
            "reason": None,
            "revealed": None,
            "request": request.to_dict(),
        }
        self._by_invitation[invitation["nonce"]] = request.request_id
        return {
            "request_id": request.request_id,
            "invitation": qr_payload(invitation).decode("ascii"),
        }

    @staticmethod
    def _predicate(p: dict) -> Predicate:
        """Templates may give the bound in the raw domain ("value": a date
        string or dose count) or pre-encoded ("bound")."""
        if "bound" in p:
            return Predicate.from_dict(p)
        attr = str(p["attr"])
        try:
            spec = SCHEMA.spec_for(attr)
        except Exception as exc:
            raise BadTemplate(f"unknown attribute {attr!r}") from exc
        return Predicate(attr=attr, op=str(p["op"]), bound=encode_attribute(spec, p["value"]))

    def request_status(self, request_id: str) -> dict:
        record = self.requests.get(request_id)
        if record is None:
            raise UnknownItem(f"no proof request {request_id!r}")
        out = {"request_id": request_id, "status": record["status"]}
        if record["reason"]:
            out["reason"] = record["reason"]
        if record["revealed"] is not None:
            out["revealed"] = record["revealed"]
        return out

    def _finish(self, request_id: str, status: str, reason=None, revealed=None) -> None:
        record = self.requests.get(request_id)
        if record is None or record["status"] != "pending":
            return  # status transitions exactly once
        record["status"] = status
        record["reason"] = reason or None
        record["revealed"] = revealed

    # ------------------------------------------------------- connections

    def _on_connected(self, conn) -> list[dict]:
        request_id = self._by_invitation.pop(conn.invitation_nonce, None)
        if request_id is None:
            return []
        thread, outs = self.peer.open_exchange(
            conn.connection_id,
            "present-proof",
            "verifier",
            "local/request",
            {"request": self.requests[request_id]["request"]},
        )
        self._by_thread[(conn.connection_id, thread)] = request_id
        return outs

    def _on_session_update(self, connection_id: str, session) -> None:
        request_id = self._by_thread.get((connection_id, session.thread))
        if request_id is None or not session.terminal:
            return
        if session.state == "declined":
            body = session.pending.get("decline") or session.pending.get("problem") or {}
            self._finish(request_id, "declined", reason=body.get("code", "DECLINED"))
        elif session.state == "failed":
            body = session.pending.get("problem") or {}
            self._finish(request_id, "failed", reason=body.get("code", "PROTOCOL_ERROR"))

    # ------------------------------------------------------ verification

    def evaluate(self, presentation: dict, request: PresentationRequest) -> VerificationResult:
        """Judge one presentation against the ledger's current view."""
        try:
            try:
                cred_def = self.ledger.query("CRED_DEF", str(presentation.get("cred_def_id", "")))
            except NotFound:
                return VerificationResult(False, UNTRUSTED_ISSUER)
            issuer_did = cred_def["tx"]["author"]
            if not trust_check(self.trust, self.ledger, issuer_did):
                return VerificationResult(False, UNTRUSTED_ISSUER)
            registry_id = str(presentation.get("registry_id", ""))
            try:
                reg_def = self.ledger.query("REV_REG_DEF", registry_id)
                current = self.ledger.query("REV_REG_ENTRY", registry_id)["entry"]
            except NotFound:
                return VerificationResult(False, STALE_ACCUMULATOR)
            if reg_def["tx"]["author"] != issuer_did:
                return VerificationResult(False, UNTRUSTED_ISSUER)
        except (NoQuorum, httpx.HTTPError, OSError) as exc:
            raise LedgerUnavailable(str(exc)) from exc
        return verify_presentation(
            self.params,
            IssuerPublicKey.from_dict(cred_def["entry"]["key"]),
            SCHEMA,
            request,
            presentation,
            RegistryPublic.from_dict(reg_def["entry"]["public"]),
            int(current["value_after"]),
            int(current["epoch_to"]),
        )


def create_verifier_app(service: VerifierService) -> FastAPI:
    app = FastAPI(title="vaxpass verifier", docs_url=None, redoc_url=None)
    install_error_handler(app)

    @app.post("/proof-requests", status_code=201)
    def proof_requests(body: dict):
        return service.create_request(body)

    @app.get("/proof-requests/{request_id}")
    def proof_request_status(request_id: str):
        return service.request_status(request_id)

    @app.post("/inbox")
    def inbox(payload: dict):
        return {"replies": service.peer.receive(payload)}

    @app.get("/health")
    def health():
        return {"status": "ok", "did": service.identity.did}

    return app
