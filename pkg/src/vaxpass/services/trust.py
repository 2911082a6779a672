"""Trust anchoring: which issuer DIDs a verifier accepts, and why.

The trusted set lives on the ledger; a service pins the genesis hash at
configuration time and refuses to read from any chain that does not grow
out of that block. The set is cached locally and re-fetched once it is
older than the freshness window.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import httpx

from ..errors import ForkDetected, LedgerUnavailable, NoQuorum


@dataclass
class TrustConfig:
    node_endpoints: list[str]
    genesis_hash: str
    freshness_seconds: int = 300
    trusted: set[str] = field(default_factory=set)
    authority_did: str = ""
    fetched_at: float = -1.0

    @property
    def stale(self) -> bool:
        if self.fetched_at < 0:
            return True
        return time.time() - self.fetched_at > self.freshness_seconds

    def to_dict(self) -> dict:
        return {
            "node_endpoints": list(self.node_endpoints),
            "genesis_hash": self.genesis_hash,
            "freshness_seconds": self.freshness_seconds,
            "trusted": sorted(self.trusted),
            "authority_did": self.authority_did,
            # seconds precision; canonical JSON carries no floats
            "fetched_at": int(self.fetched_at),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrustConfig":
        return cls(
            node_endpoints=list(d["node_endpoints"]),
            genesis_hash=d["genesis_hash"],
            freshness_seconds=int(d.get("freshness_seconds", 300)),
            trusted=set(d.get("trusted", ())),
            authority_did=d.get("authority_did", ""),
            fetched_at=float(d.get("fetched_at", -1.0)),
        )


def refresh_trust(config: TrustConfig, ledger) -> TrustConfig:
    """Re-derive the trusted set from the ledger, in place."""
    try:
        genesis = ledger.genesis_hash()
        result = ledger.query("TRUST_LIST", "")
    except (NoQuorum, httpx.HTTPError, OSError) as exc:
        raise LedgerUnavailable(str(exc)) from exc
    if config.genesis_hash and genesis != config.genesis_hash:
        raise ForkDetected(
            f"ledger genesis {genesis[:12]} does not match pinned {config.genesis_hash[:12]}"
        )
    config.trusted = set(result["entry"]["trusted"])
    config.authority_did = result["tx"]["author"]
    config.fetched_at = time.time()
    return config


def trust_check(config: TrustConfig, ledger, did: str) -> bool:
    if config.stale:
        refresh_trust(config, ledger)
    return did in config.trusted
