"""Error taxonomy.

Every failure that crosses a module or wire boundary carries a stable
machine-readable ``code`` so services and tests can match on it without
parsing prose. The hierarchy is intentionally flat: one exception class
per code, all rooted at :class:`VaxPassError`.
"""

from __future__ import annotations


class VaxPassError(Exception):
    """Base class; ``code`` identifies the failure across the wire."""

    code = "INTERNAL"

    def __init__(self, detail: str = ""):
        self.detail = detail
        super().__init__(f"{self.code}: {detail}" if detail else self.code)


def _make(name: str, code: str, doc: str) -> type[VaxPassError]:
    cls = type(name, (VaxPassError,), {"code": code, "__doc__": doc})
    cls.__module__ = __name__
    return cls


# crypto
OutOfRange = _make("OutOfRange", "OUT_OF_RANGE", "Value outside its declared range.")
PrimeGenFailure = _make(
    "PrimeGenFailure", "PRIME_GEN_FAILURE", "Prime search exhausted its attempt budget."
)
WitnessMismatch = _make(
    "WitnessMismatch", "WITNESS_MISMATCH", "Supplied secrets do not satisfy the statement."
)
MalformedProof = _make("MalformedProof", "MALFORMED_PROOF", "Proof structure is invalid.")

# anoncreds
BadBlinding = _make(
    "BadBlinding", "BAD_BLINDING", "Blinded issuance request proof failed."
)
InvalidSignature = _make(
    "InvalidSignature", "INVALID_SIGNATURE", "Credential signature equation does not hold."
)
CannotSatisfy = _make(
    "CannotSatisfy", "CANNOT_SATISFY", "Holder cannot satisfy the presentation request."
)
StaleWitness = _make(
    "StaleWitness", "STALE_WITNESS", "Membership witness lags the accumulator epoch."
)
BadTemplate = _make(
    "BadTemplate", "BAD_TEMPLATE", "Presentation request template is invalid."
)
SchemaViolation = _make(
    "SchemaViolation", "SCHEMA_VIOLATION", "Attributes do not match the schema."
)

# revocation
DuplicateHandle = _make(
    "DuplicateHandle", "DUPLICATE_HANDLE", "Handle already present in the registry."
)
NotMember = _make("NotMember", "NOT_MEMBER", "Handle is not in the registry.")
Revoked = _make("Revoked", "REVOKED", "Handle was revoked; no valid witness exists.")
EpochGap = _make(
    "EpochGap", "EPOCH_GAP", "Delta sequence does not start at the witness epoch."
)
RegistryFull = _make("RegistryFull", "REGISTRY_FULL", "Registry reached capacity.")

# ledger
RejectedUnauthorized = _make(
    "RejectedUnauthorized", "REJECTED_UNAUTHORIZED", "Transaction author lacks authority."
)
DuplicateId = _make("DuplicateId", "DUPLICATE_ID", "Identifier already registered.")
NoQuorum = _make("NoQuorum", "NO_QUORUM", "Not enough replicas acknowledged the block.")
NotFound = _make("NotFound", "NOT_FOUND", "Requested item is not on the ledger.")
ForkDetected = _make(
    "ForkDetected", "FORK_DETECTED", "Peer chain conflicts with local committed blocks."
)
BadBlock = _make("BadBlock", "BAD_BLOCK", "Block fails hash-chain or content checks.")

# agent
BadKey = _make("BadKey", "BAD_KEY", "Key material is malformed.")
BadSignature = _make("BadSignature", "BAD_SIGNATURE", "Signature check failed.")
NonceReused = _make("NonceReused", "NONCE_REUSED", "Single-use nonce was seen before.")
AuthFail = _make("AuthFail", "AUTH_FAIL", "Envelope failed to authenticate or decrypt.")
Replay = _make("Replay", "REPLAY", "Message id replayed on this connection.")
Declined = _make("Declined", "DECLINED", "Counterparty declined the exchange.")
ProtocolViolation = _make(
    "ProtocolViolation", "PROTOCOL_ERROR", "Message not valid in the current state."
)
UnknownConnection = _make(
    "UnknownConnection", "UNKNOWN_CONNECTION", "No such connection is established."
)

# services
BadRequest = _make("BadRequest", "BAD_REQUEST", "Request payload failed validation.")
MissingField = _make("MissingField", "MISSING_FIELD", "Required record field absent.")
BadFormat = _make("BadFormat", "BAD_FORMAT", "Record field fails format or range checks.")
BadPayload = _make("BadPayload", "BAD_PAYLOAD", "Invitation payload is not decodable.")
LedgerUnavailable = _make(
    "LedgerUnavailable", "LEDGER_UNAVAILABLE", "No ledger node reachable or quorum lost."
)
UnknownItem = _make("UnknownItem", "UNKNOWN_ITEM", "No such record, request or credential.")
UntrustedIssuer = _make(
    "UntrustedIssuer", "UNTRUSTED_ISSUER", "Issuer DID is not on the trusted list."
)
WalletLocked = _make("WalletLocked", "WALLET_LOCKED", "Wallet store is locked or key is wrong.")


def by_code(code: str) -> type[VaxPassError]:
    """Map a wire code back to its exception class (base class if unknown)."""
    for obj in globals().values():
        if isinstance(obj, type) and issubclass(obj, VaxPassError) and obj.code == code:
            return obj
    return VaxPassError
