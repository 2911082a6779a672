"""Agent identities and the did:vax method.

An identity owns two keys: Ed25519 for signatures and X25519 for key
agreement. The DID is derived from the signing key alone:

    did:vax:<base58btc(sha256(verification_key)[:16])>

so possession of the signing key proves control of the DID, and DID
documents published to the ledger can be checked for consistency.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.exceptions import InvalidSignature as _CryptoBadSig

from ..errors import BadKey, BadSignature

_B58 = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_RAW = serialization.Encoding.Raw
_PUB = serialization.PublicFormat.Raw
_PRIV = serialization.PrivateFormat.Raw
_NOENC = serialization.NoEncryption()

DID_PREFIX = "did:vax:"


def b58encode(raw: bytes) -> str:
    x = int.from_bytes(raw, "big")
    out = []
    while x > 0:
        x, rem = divmod(x, 58)
        out.append(_B58[rem])
    pad = 0
    for b in raw:
        if b == 0:
            pad += 1
        else:
            break
    return "1" * pad + "".join(reversed(out))


def b58decode(text: str) -> bytes:
    x = 0
    for ch in text:
        idx = _B58.find(ch)
        if idx < 0:
            raise BadKey(f"invalid base58 character {ch!r}")
        x = x * 58 + idx
    raw = x.to_bytes((x.bit_length() + 7) // 8, "big")
    pad = 0
    for ch in text:
        if ch == "1":
            pad += 1
        else:
            break
    return b"\x00" * pad + raw


def did_from_verkey(verkey: bytes) -> str:
    if len(verkey) != 32:
        raise BadKey("verification key must be 32 bytes")
    return DID_PREFIX + b58encode(hashlib.sha256(verkey).digest()[:16])


@dataclass
class AgentIdentity:
    signing_key: Ed25519PrivateKey
    agreement_key: X25519PrivateKey

    @classmethod
    def generate(cls) -> "AgentIdentity":
        return cls(Ed25519PrivateKey.generate(), X25519PrivateKey.generate())

    @classmethod
    def from_seed(cls, seed: bytes) -> "AgentIdentity":
        """Deterministic identity; the agreement key gets its own
        domain-separated seed so the two keys stay independent."""
        if len(seed) != 32:
            raise BadKey("seed must be 32 bytes")
        kx_seed = hashlib.sha256(b"vaxpass/agreement-key" + seed).digest()
        return cls(
            Ed25519PrivateKey.from_private_bytes(seed),
            X25519PrivateKey.from_private_bytes(kx_seed),
        )

    @property
    def verification_key(self) -> bytes:
        return self.signing_key.public_key().public_bytes(_RAW, _PUB)

    @property
    def key_agreement_key(self) -> bytes:
        return self.agreement_key.public_key().public_bytes(_RAW, _PUB)

    @property
    def did(self) -> str:
        return did_from_verkey(self.verification_key)

    def sign(self, data: bytes) -> bytes:
        return self.signing_key.sign(data)

    def dh(self, peer_agreement_key: bytes) -> bytes:
        return self.agreement_key.exchange(X25519PublicKey.from_public_bytes(peer_agreement_key))

    def document(self, endpoint: str) -> dict:
        return {
            "did": self.did,
            "verification_key": self.verification_key.hex(),
            "key_agreement_key": self.key_agreement_key.hex(),
            "endpoint": endpoint,
        }

    def private_bytes(self) -> dict:
        """Key material for encrypted wallet storage."""
        return {
            "signing_key": self.signing_key.private_bytes(_RAW, _PRIV, _NOENC).hex(),
            "agreement_key": self.agreement_key.private_bytes(_RAW, _PRIV, _NOENC).hex(),
        }

    @classmethod
    def from_private_bytes(cls, d: dict) -> "AgentIdentity":
        return cls(
            Ed25519PrivateKey.from_private_bytes(bytes.fromhex(d["signing_key"])),
            X25519PrivateKey.from_private_bytes(bytes.fromhex(d["agreement_key"])),
        )


def verify_signature(verkey: bytes | str, data: bytes, signature: bytes) -> None:
    """Raises :class:`BadSignature` unless ``signature`` checks out."""
    if isinstance(verkey, str):
        verkey = bytes.fromhex(verkey)
    try:
        Ed25519PublicKey.from_public_bytes(verkey).verify(signature, data)
    except (_CryptoBadSig, ValueError) as exc:
        raise BadSignature(str(exc)) from exc


def check_did_document(doc: dict) -> None:
    """Structural check plus DID/verkey consistency."""
    for field in ("did", "verification_key", "key_agreement_key", "endpoint"):
        if field not in doc:
            raise BadKey(f"DID document missing {field!r}")
    try:
        verkey = bytes.fromhex(doc["verification_key"])
        kx = bytes.fromhex(doc["key_agreement_key"])
    except ValueError as exc:
        raise BadKey(f"non-hex key material: {exc}") from exc
    if len(kx) != 32:
        raise BadKey("key agreement key must be 32 bytes")
    if did_from_verkey(verkey) != doc["did"]:
        raise BadKey("DID does not match the verification key")
