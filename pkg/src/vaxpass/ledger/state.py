"""Deterministic transaction state machine.

``apply_tx`` is a pure transition: it never mutates its input and the same
(state, tx) pair always yields byte-identical output, so replaying the
committed log from genesis reproduces the live state exactly. Rejections
raise; they are recorded off-chain by the node, never on the chain.

Authorization rules:
  DID_DOC        self-signed (payload key for new DIDs, current key to replace)
  SCHEMA         any registered DID
  CRED_DEF       trusted DIDs only; id must match the key material
  REV_REG_DEF    trusted DIDs only
  REV_REG_ENTRY  the registry owner only; epoch advances by exactly one
  TRUST_LIST     the genesis authority only (whole-list replacement)
"""

from __future__ import annotations

import copy
import hashlib
from dataclasses import dataclass, field

from ..canonical import canonical_json
from ..agent.dids import check_did_document, verify_signature
from ..anoncreds.issuer import IssuerPublicKey
from ..anoncreds.schema import CredentialSchema
from ..errors import (
    BadBlock,
    BadKey,
    BadRequest,
    BadSignature,
    DuplicateId,
    EpochGap,
    NotFound,
    RejectedUnauthorized,
)
from ..revocation import RegistryPublic
from .chain import Block, tx_is_well_formed, tx_signing_bytes, validate_chain


@dataclass
class LedgerState:
    height: int = -1
    authority_did: str | None = None
    authority_verkey: str | None = None
    trusted: set = field(default_factory=set)
    dids: dict = field(default_factory=dict)
    schemas: dict = field(default_factory=dict)
    cred_defs: dict = field(default_factory=dict)
    registries: dict = field(default_factory=dict)
    trust_entry: dict | None = None
    applied: set = field(default_factory=set)

    def clone(self) -> "LedgerState":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "height": self.height,
            "authority_did": self.authority_did or "",
            "authority_verkey": self.authority_verkey or "",
            "trusted": sorted(self.trusted),
            "dids": self.dids,
            "schemas": self.schemas,
            "cred_defs": self.cred_defs,
            "registries": self.registries,
            "trust_entry": self.trust_entry or {},
            "applied": sorted(self.applied),
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict())).hexdigest()


def _entry(tx: dict, height: int) -> dict:
    return {"payload": tx["payload"], "height": height, "tx_id": tx["id"]}


def _check_author_signature(state: LedgerState, tx: dict, verkey: str) -> None:
    body = tx_signing_bytes(tx["kind"], tx["payload"], tx["author"], tx["seq"])
    try:
        verify_signature(verkey, body, bytes.fromhex(tx["signature"]))
    except (BadSignature, ValueError) as exc:
        raise RejectedUnauthorized(f"signature check failed: {exc}") from exc


def _registered_verkey(state: LedgerState, did: str) -> str:
    if did not in state.dids:
        raise RejectedUnauthorized(f"author {did} has no registered DID document")
    return state.dids[did]["payload"]["verification_key"]


def _apply_did_doc(state: LedgerState, tx: dict, height: int) -> None:
    doc = tx["payload"]
    try:
        check_did_document(doc)
    except BadKey as exc:
        raise BadRequest(str(exc)) from exc
    if tx["author"] != doc["did"]:
        raise RejectedUnauthorized("DID document author must be its subject")
    if doc["did"] in state.dids:
        current = state.dids[doc["did"]]["payload"]
        if current == doc:
            raise DuplicateId(f"{doc['did']} already registered with this document")
        # replacement must be authorized by the key on record, not the new one
        _check_author_signature(state, tx, current["verification_key"])
    else:
        _check_author_signature(state, tx, doc["verification_key"])
    state.dids[doc["did"]] = _entry(tx, height)


def _apply_schema(state: LedgerState, tx: dict, height: int) -> None:
    _check_author_signature(state, tx, _registered_verkey(state, tx["author"]))
    try:
        schema = CredentialSchema.from_dict(tx["payload"])
    except Exception as exc:
        raise BadRequest(f"invalid schema payload: {exc}") from exc
    if schema.schema_id in state.schemas:
        raise DuplicateId(f"schema {schema.schema_id} already registered")
    state.schemas[schema.schema_id] = _entry(tx, height)


def _apply_cred_def(state: LedgerState, tx: dict, height: int) -> None:
    _check_author_signature(state, tx, _registered_verkey(state, tx["author"]))
    if tx["author"] not in state.trusted:
        raise RejectedUnauthorized(f"{tx['author']} is not on the trust list")
    payload = tx["payload"]
    try:
        key = IssuerPublicKey.from_dict(payload["key"])
        cred_def_id = payload["cred_def_id"]
    except Exception as exc:
        raise BadRequest(f"invalid credential definition payload: {exc}") from exc
    if cred_def_id != key.cred_def_id:
        raise BadRequest("credential definition id does not match its key material")
    if key.schema_id not in state.schemas:
        raise NotFound(f"schema {key.schema_id} not on the ledger")
    if cred_def_id in state.cred_defs:
        raise DuplicateId(f"credential definition {cred_def_id} already registered")
    state.cred_defs[cred_def_id] = _entry(tx, height)


def _apply_rev_reg_def(state: LedgerState, tx: dict, height: int) -> None:
    _check_author_signature(state, tx, _registered_verkey(state, tx["author"]))
    if tx["author"] not in state.trusted:
        raise RejectedUnauthorized(f"{tx['author']} is not on the trust list")
    payload = tx["payload"]
    try:
        public = RegistryPublic.from_dict(payload["public"])
        registry_id = payload["registry_id"]
        initial = int(payload["accumulator"])
    except Exception as exc:
        raise BadRequest(f"invalid registry definition payload: {exc}") from exc
    if registry_id != public.registry_id:
        raise BadRequest("registry id does not match its public parameters")
    if not 1 < initial < public.modulus:
        raise BadRequest("initial accumulator out of group range")
    if registry_id in state.registries:
        raise DuplicateId(f"registry {registry_id} already registered")
    # epoch 0 gets a synthetic empty delta so per-epoch queries are uniform
    epoch0 = {
        "registry_id": registry_id,
        "epoch_from": 0,
        "epoch_to": 0,
        "added": [],
        "revoked": [],
        "value_after": payload["accumulator"],
    }
    state.registries[registry_id] = {
        "definition": _entry(tx, height),
        "owner": tx["author"],
        "epoch": 0,
        "entries": {"0": {"payload": epoch0, "height": height, "tx_id": tx["id"]}},
    }


def _apply_rev_reg_entry(state: LedgerState, tx: dict, height: int) -> None:
    _check_author_signature(state, tx, _registered_verkey(state, tx["author"]))
    payload = tx["payload"]
    try:
        registry_id = payload["registry_id"]
        epoch_from = int(payload["epoch_from"])
        epoch_to = int(payload["epoch_to"])
        int(payload["value_after"])
        list(payload["added"])
        list(payload["revoked"])
    except Exception as exc:
        raise BadRequest(f"invalid registry entry payload: {exc}") from exc
    if registry_id not in state.registries:
        raise NotFound(f"registry {registry_id} not on the ledger")
    reg = state.registries[registry_id]
    if tx["author"] != reg["owner"]:
        raise RejectedUnauthorized("only the registry owner may publish entries")
    if epoch_from != reg["epoch"] or epoch_to != reg["epoch"] + 1:
        raise EpochGap(
            f"registry at epoch {reg['epoch']}, entry covers {epoch_from}->{epoch_to}"
        )
    reg["epoch"] = epoch_to
    reg["entries"][str(epoch_to)] = {"payload": payload, "height": height, "tx_id": tx["id"]}


def _apply_trust_list(state: LedgerState, tx: dict, height: int) -> None:
    payload = tx["payload"]
    if state.authority_did is None:
        # genesis bootstrap: the authority key comes from the pinned block,
        # so there is nothing on the ledger yet to verify against
        for f in ("authority_did", "authority_verkey", "trusted"):
            if f not in payload:
                raise BadRequest(f"genesis trust list missing {f!r}")
        if tx["author"] != payload["authority_did"]:
            raise RejectedUnauthorized("genesis trust list author must be the authority")
        state.authority_did = payload["authority_did"]
        state.authority_verkey = payload["authority_verkey"]
        state.trusted = set(payload["trusted"])
        state.trust_entry = _entry(tx, height)
        return
    if tx["author"] != state.authority_did:
        raise RejectedUnauthorized("only the genesis authority may edit the trust list")
    _check_author_signature(state, tx, state.authority_verkey)
    try:
        trusted = list(payload["trusted"])
    except Exception as exc:
        raise BadRequest(f"invalid trust list payload: {exc}") from exc
    for did in trusted:
        if did not in state.dids:
            raise NotFound(f"trusted DID {did} has no registered document")
    state.trusted = set(trusted)
    state.trust_entry = _entry(tx, height)


_HANDLERS = {
    "DID_DOC": _apply_did_doc,
    "SCHEMA": _apply_schema,
    "CRED_DEF": _apply_cred_def,
    "REV_REG_DEF": _apply_rev_reg_def,
    "REV_REG_ENTRY": _apply_rev_reg_entry,
    "TRUST_LIST": _apply_trust_list,
}


def apply_tx(state: LedgerState, tx: dict, height: int) -> LedgerState:
    """Validate and apply one transaction, returning the successor state."""
    if not tx_is_well_formed(tx):
        raise BadRequest("transaction is malformed or its id does not match")
    if tx["id"] in state.applied:
        raise DuplicateId(f"transaction {tx['id'][:16]} already committed")
    nxt = state.clone()
    _HANDLERS[tx["kind"]](nxt, tx, height)
    nxt.applied.add(tx["id"])
    nxt.height = height
    return nxt


def apply_block(state: LedgerState, block: Block) -> LedgerState:
    for tx in block.txs:
        state = apply_tx(state, tx, block.height)
    if not block.txs:
        state = state.clone()
        state.height = block.height
    return state


def replay(blocks: list[Block]) -> LedgerState:
    """Replay a committed chain from genesis; the result must equal any
    incrementally maintained state byte-for-byte."""
    ok, bad_height = validate_chain(blocks)
    if not ok:
        raise BadBlock(f"chain invalid at height {bad_height}")
    state = LedgerState()
    for block in blocks:
        state = apply_block(state, block)
    return state
