"""Authenticated message envelopes over an established connection.

Wire format (canonical JSON): connection id, message id, 24-byte nonce as
hex, ciphertext and auth tag as unpadded base64url. The header triple is
bound into the AEAD as associated data, so moving a ciphertext to another
message id or connection fails authentication outright.

Message ids are counters, partitioned by direction ("i-" for the inviter,
"a-" for the acceptor), and each end keeps the set of ids it has already
accepted: redelivery and reflection both surface as REPLAY.
"""

from __future__ import annotations

import json
import secrets

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ..canonical import b64url_decode, b64url_encode, canonical_json
from ..errors import AuthFail, Replay, UnknownConnection
from .connections import Connection

NONCE_BYTES = 24
TAG_BYTES = 16


def _aad(connection_id: str, message_id: str, nonce_hex: str) -> bytes:
    return canonical_json(
        {"connection_id": connection_id, "message_id": message_id, "nonce": nonce_hex}
    )


def pack_envelope(conn: Connection, message: dict) -> dict:
    conn.send_counter += 1
    message_id = f"{conn.send_prefix}-{conn.send_counter}"
    nonce = secrets.token_bytes(NONCE_BYTES)
    sealed = AESGCM(conn.key).encrypt(
        nonce, canonical_json(message), _aad(conn.connection_id, message_id, nonce.hex())
    )
    return {
        "connection_id": conn.connection_id,
        "message_id": message_id,
        "nonce": nonce.hex(),
        "ciphertext": b64url_encode(sealed[:-TAG_BYTES]),
        "tag": b64url_encode(sealed[-TAG_BYTES:]),
    }


def unpack_envelope(conn: Connection, envelope: dict) -> dict:
    try:
        connection_id = envelope["connection_id"]
        message_id = envelope["message_id"]
        nonce = bytes.fromhex(envelope["nonce"])
        sealed = b64url_decode(envelope["ciphertext"]) + b64url_decode(envelope["tag"])
    except (KeyError, TypeError, ValueError) as exc:
        raise AuthFail(f"malformed envelope: {exc}") from exc
    if connection_id != conn.connection_id:
        raise UnknownConnection(f"envelope for connection {connection_id[:8]}...")
    if len(nonce) != NONCE_BYTES:
        raise AuthFail("bad nonce length")
    if not message_id.startswith(conn.recv_prefix + "-"):
        raise Replay("message id from the wrong direction")
    if message_id in conn.seen_ids:
        raise Replay(f"message id {message_id} already accepted")
    try:
        plain = AESGCM(conn.key).decrypt(
            nonce, sealed, _aad(connection_id, message_id, envelope["nonce"])
        )
    except InvalidTag as exc:
        raise AuthFail("envelope failed authentication") from exc
    conn.seen_ids.add(message_id)
    return json.loads(plain)
