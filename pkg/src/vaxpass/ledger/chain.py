"""Blocks, transactions, and chain verification.

A block's hash is the hash of its canonical header. The header commits to
the body through ``tx_root``, a Merkle root over transaction ids, so header
segments alone are enough to re-verify linkage while a Merkle path ties any
single transaction to its block.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Sequence

from ..canonical import canonical_json
from ..errors import BadBlock, BadRequest

TX_KINDS = ("DID_DOC", "SCHEMA", "CRED_DEF", "REV_REG_DEF", "REV_REG_ENTRY", "TRUST_LIST")
GENESIS_PREV = "0" * 64


def _h(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------- transactions

def tx_signing_bytes(kind: str, payload: dict, author: str, seq: int) -> bytes:
    return canonical_json({"kind": kind, "payload": payload, "author": author, "seq": seq})


def make_tx(
    kind: str,
    payload: dict,
    author: str,
    seq: int,
    sign: Callable[[bytes], bytes] | None = None,
) -> dict:
    """Assemble a transaction; ``sign`` is the author's signing callback.

    The genesis trust-list transaction is the only one built without a
    signature (its authority key is the trust anchor itself).
    """
    if kind not in TX_KINDS:
        raise BadRequest(f"unknown transaction kind {kind!r}")
    body = tx_signing_bytes(kind, payload, author, seq)
    signature = sign(body).hex() if sign else ""
    return {
        "kind": kind,
        "payload": payload,
        "author": author,
        "seq": seq,
        # the id covers the signature too, so every byte of the transaction
        # is committed by the block's Merkle root
        "id": _tx_id(kind, payload, author, seq, signature),
        "signature": signature,
    }


def _tx_id(kind: str, payload: dict, author: str, seq: int, signature: str) -> str:
    return _h(
        canonical_json(
            {"kind": kind, "payload": payload, "author": author, "seq": seq, "signature": signature}
        )
    )


def tx_is_well_formed(tx: dict) -> bool:
    try:
        if tx["kind"] not in TX_KINDS or not isinstance(tx["payload"], dict):
            return False
        return tx["id"] == _tx_id(
            tx["kind"], tx["payload"], tx["author"], tx["seq"], tx["signature"]
        )
    except (KeyError, TypeError, ValueError):
        return False


# ---------------------------------------------------------------- merkle tree

def _leaf(tx_id: str) -> bytes:
    # domain-separated leaf/node hashing blocks second-preimage splices
    return hashlib.sha256(b"\x00" + bytes.fromhex(tx_id)).digest()


def _node(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(b"\x01" + left + right).digest()


def merkle_root(tx_ids: Sequence[str]) -> str:
    if not tx_ids:
        return hashlib.sha256(b"\x00").hexdigest()
    level = [_leaf(t) for t in tx_ids]
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [_node(level[i], level[i + 1]) for i in range(0, len(level), 2)]
    return level[0].hex()


def merkle_path(tx_ids: Sequence[str], index: int) -> list[dict]:
    """Sibling hashes from leaf ``index`` up to the root."""
    if not 0 <= index < len(tx_ids):
        raise BadRequest("merkle index out of range")
    path = []
    level = [_leaf(t) for t in tx_ids]
    pos = index
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        sibling = pos ^ 1
        side = "l" if sibling < pos else "r"
        path.append({"side": side, "hash": level[sibling].hex()})
        level = [_node(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        pos //= 2
    return path


def merkle_verify(tx_id: str, path: Sequence[dict], root: str) -> bool:
    try:
        acc = _leaf(tx_id)
        for step in path:
            sib = bytes.fromhex(step["hash"])
            acc = _node(sib, acc) if step["side"] == "l" else _node(acc, sib)
        return acc.hex() == root
    except (KeyError, TypeError, ValueError):
        return False


# --------------------------------------------------------------------- blocks

@dataclass(frozen=True)
class Block:
    header: dict  # height, prev_hash, timestamp, tx_root
    txs: tuple

    @property
    def height(self) -> int:
        return self.header["height"]

    @property
    def hash(self) -> str:
        return _h(canonical_json(self.header))

    def to_dict(self) -> dict:
        return {"header": self.header, "txs": list(self.txs)}

    @classmethod
    def from_dict(cls, d: dict) -> "Block":
        try:
            header = {
                "height": d["header"]["height"],
                "prev_hash": d["header"]["prev_hash"],
                "timestamp": d["header"]["timestamp"],
                "tx_root": d["header"]["tx_root"],
            }
            return cls(header=header, txs=tuple(d["txs"]))
        except (KeyError, TypeError) as exc:
            raise BadBlock(f"malformed block: {exc}") from exc


def make_block(height: int, prev_hash: str, timestamp: int, txs: Sequence[dict]) -> Block:
    header = {
        "height": height,
        "prev_hash": prev_hash,
        "timestamp": timestamp,
        "tx_root": merkle_root([t["id"] for t in txs]),
    }
    return Block(header=header, txs=tuple(txs))


def make_genesis_block(config: dict) -> Block:
    """Height-0 block holding the network configuration as an unsigned
    trust-list transaction. Pinning the genesis hash pins the authority key."""
    for field in ("authority_did", "authority_verkey", "trusted", "node_endpoints"):
        if field not in config:
            raise BadRequest(f"genesis config missing {field!r}")
    tx = make_tx("TRUST_LIST", dict(config), config["authority_did"], seq=0)
    return make_block(0, GENESIS_PREV, 0, [tx])


def validate_chain(blocks: Sequence[Block]) -> tuple[bool, int | None]:
    """(True, None) if every block recomputes and links; else (False, height
    of the first break)."""
    prev_hash = GENESIS_PREV
    for i, block in enumerate(blocks):
        h = block.header
        try:
            ok = (
                h["height"] == i
                and h["prev_hash"] == prev_hash
                and h["tx_root"] == merkle_root([t["id"] for t in block.txs])
                and all(tx_is_well_formed(t) for t in block.txs)
            )
        except (KeyError, TypeError, ValueError):
            # malformed headers or non-hex ids count as a break, not a crash
            ok = False
        if not ok:
            return False, i
        prev_hash = block.hash
    return True, None


def verify_inclusion(result: dict, known_tip_hash: str | None = None) -> bool:
    """Check a query proof: the transaction sits in the first header via its
    Merkle path, headers re-hash and link pairwise, and (optionally) the last
    header matches a tip hash the caller already trusts."""
    try:
        tx = result["tx"]
        headers = result["headers"]
        if not tx_is_well_formed(tx):
            return False
        if not merkle_verify(tx["id"], result["merkle_path"], headers[0]["tx_root"]):
            return False
        if _h(canonical_json(headers[0])) != result["block_hash"]:
            return False
        for prev, nxt in zip(headers, headers[1:]):
            if nxt["prev_hash"] != _h(canonical_json(prev)):
                return False
        if known_tip_hash is not None and _h(canonical_json(headers[-1])) != known_tip_hash:
            return False
        return True
    except (KeyError, TypeError, ValueError, IndexError):
        return False
