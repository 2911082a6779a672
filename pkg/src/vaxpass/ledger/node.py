"""Quorum-replicated nodes with a static leader.

Crash-fault model only: nodes either respond honestly or not at all. The
leader serializes writes; a transaction commits when at least half the
nodes plus one (leader included) acknowledge the proposed block. A node
that was down catches up by syncing a verified prefix extension from a
live peer; divergent histories halt with FORK_DETECTED rather than being
resolved.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from ..canonical import canonical_json
from ..errors import BadBlock, BadRequest, ForkDetected, NoQuorum, NotFound, VaxPassError
from .chain import Block, make_block, make_genesis_block, merkle_path, validate_chain
from .state import LedgerState, apply_block, apply_tx


class BlockStore:
    """Append-only block persistence, one canonical-JSON block per line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def load(self) -> list[Block]:
        if not self.path.exists():
            return []
        blocks = []
        with self.path.open("rb") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    blocks.append(Block.from_dict(json.loads(line)))
        return blocks

    def append(self, block: Block) -> None:
        with self.path.open("ab") as fh:
            fh.write(canonical_json(block.to_dict()) + b"\n")


class Node:
    def __init__(self, node_id: str, genesis: Block, store: BlockStore | None = None):
        self.node_id = node_id
        self.store = store
        self.alive = True
        stored = store.load() if store else []
        if stored:
            if stored[0].hash != genesis.hash:
                raise ForkDetected("stored chain starts from a different genesis")
            ok, bad = validate_chain(stored)
            if not ok:
                raise BadBlock(f"stored chain invalid at height {bad}")
            self.blocks = stored
            self.state = LedgerState()
            for b in self.blocks:
                self.state = apply_block(self.state, b)
        else:
            self.blocks = []
            self.state = LedgerState()
            self._append(genesis)

    def _append(self, block: Block) -> None:
        self.state = apply_block(self.state, block)
        self.blocks.append(block)
        if self.store:
            self.store.append(block)

    @property
    def tip_hash(self) -> str:
        return self.blocks[-1].hash

    @property
    def height(self) -> int:
        return self.blocks[-1].height

    def crash(self) -> None:
        self.alive = False

    def recover(self) -> None:
        self.alive = True

    def propose(self, block: Block) -> bool:
        """Phase one: a crashed node never answers; a live one acks only a
        block that extends its tip and applies cleanly."""
        if not self.alive:
            return False
        if block.height != len(self.blocks) or block.header["prev_hash"] != self.tip_hash:
            return False
        ok, _ = validate_chain(self.blocks + [block])
        if not ok:
            return False
        try:
            apply_block(self.state, block)
        except VaxPassError:
            return False
        return True

    def commit(self, block: Block) -> None:
        if not self.alive:
            return
        if block.height != len(self.blocks):
            return  # stale or duplicate commit; sync will reconcile
        self._append(block)

    # ------------------------------------------------------------- queries

    def _locate(self, kind: str, key: str, at_epoch: int | None):
        s = self.state
        if kind == "DID_DOC":
            entry = s.dids.get(key)
        elif kind == "SCHEMA":
            entry = s.schemas.get(key)
        elif kind == "CRED_DEF":
            entry = s.cred_defs.get(key)
        elif kind == "REV_REG_DEF":
            reg = s.registries.get(key)
            entry = reg["definition"] if reg else None
        elif kind == "REV_REG_ENTRY":
            reg = s.registries.get(key)
            if reg is None:
                entry = None
            else:
                epoch = reg["epoch"] if at_epoch is None else at_epoch
                entry = reg["entries"].get(str(epoch))
        elif kind == "TRUST_LIST":
            entry = s.trust_entry
        else:
            raise BadRequest(f"unknown query kind {kind!r}")
        if entry is None:
            raise NotFound(f"{kind} {key!r} is not on the ledger")
        return entry

    def query(self, kind: str, key: str, at_epoch: int | None = None) -> dict:
        """Entry plus an inclusion proof: the containing transaction, its
        Merkle path, and every header from that block to the tip."""
        entry = self._locate(kind, key, at_epoch)
        block = self.blocks[entry["height"]]
        tx_ids = [t["id"] for t in block.txs]
        idx = tx_ids.index(entry["tx_id"])
        return {
            "kind": kind,
            "key": key,
            "entry": entry["payload"],
            "height": entry["height"],
            "block_hash": block.hash,
            "tx": block.txs[idx],
            "tx_index": idx,
            "merkle_path": merkle_path(tx_ids, idx),
            "headers": [b.header for b in self.blocks[entry["height"] :]],
        }

    def deltas(self, registry_id: str, after_epoch: int = 0) -> list[dict]:
        reg = self.state.registries.get(registry_id)
        if reg is None:
            raise NotFound(f"registry {registry_id!r} is not on the ledger")
        out = []
        for epoch in range(after_epoch + 1, reg["epoch"] + 1):
            out.append(reg["entries"][str(epoch)]["payload"])
        return out


class Network:
    """A fixed set of nodes; nodes[0] is the permanent leader."""

    def __init__(
        self,
        genesis_config: dict,
        n_nodes: int = 4,
        store_dir: str | Path | None = None,
    ):
        if n_nodes < 1:
            raise BadRequest("need at least one node")
        genesis = make_genesis_block(genesis_config)
        self.genesis_hash = genesis.hash
        self.nodes = []
        for i in range(n_nodes):
            store = BlockStore(Path(store_dir) / f"node{i}.blocks") if store_dir else None
            self.nodes.append(Node(f"node{i}", genesis, store))
        self.quorum = n_nodes // 2 + 1
        self.clock = 0
        self.rejections: list[dict] = []
        self._write_lock = threading.Lock()

    @property
    def leader(self) -> Node:
        return self.nodes[0]

    def _reject(self, tx: dict, exc: VaxPassError) -> None:
        self.rejections.append(
            {"tx_id": tx.get("id", ""), "code": exc.code, "detail": exc.detail}
        )

    def submit(self, tx: dict) -> dict:
        with self._write_lock:
            leader = self.leader
            if not leader.alive:
                exc = NoQuorum("leader is offline")
                self._reject(tx, exc)
                raise exc
            try:
                apply_tx(leader.state, tx, len(leader.blocks))
            except VaxPassError as exc:
                self._reject(tx, exc)
                raise
            self.clock += 1
            block = make_block(len(leader.blocks), leader.tip_hash, self.clock, [tx])
            acks = [leader] + [f for f in self.nodes[1:] if f.propose(block)]
            if len(acks) < self.quorum:
                self.clock -= 1
                exc = NoQuorum(f"{len(acks)} of {len(self.nodes)} nodes acknowledged")
                self._reject(tx, exc)
                raise exc
            for node in acks:
                node.commit(block)
            return {"height": block.height, "tx_index": 0, "block_hash": block.hash}

    def _read_node(self) -> Node:
        if self.leader.alive:
            return self.leader
        live = [n for n in self.nodes if n.alive]
        if not live:
            raise NoQuorum("no live nodes")
        return max(live, key=lambda n: n.height)

    def query(self, kind: str, key: str, at_epoch: int | None = None) -> dict:
        return self._read_node().query(kind, key, at_epoch)

    def deltas(self, registry_id: str, after_epoch: int = 0) -> list[dict]:
        return self._read_node().deltas(registry_id, after_epoch)

    def blocks(self, start: int = 0, end: int | None = None) -> list[Block]:
        chain = self._read_node().blocks
        return chain[start : end if end is not None else len(chain)]

    def tip(self) -> dict:
        node = self._read_node()
        return {"height": node.height, "block_hash": node.tip_hash}

    def sync_followers(self) -> None:
        for node in self.nodes[1:]:
            if node.alive:
                node_sync(node, self.leader)


def node_sync(follower: Node, source: Node) -> int:
    """Bring ``follower`` up to ``source``'s tip; returns blocks applied.

    The follower accepts only a verified extension of its own prefix.
    """
    if len(source.blocks) < len(follower.blocks):
        raise ForkDetected("peer chain is shorter than the local committed log")
    for mine, theirs in zip(follower.blocks, source.blocks):
        if mine.hash != theirs.hash:
            raise ForkDetected(f"histories diverge at height {mine.height}")
    missing = source.blocks[len(follower.blocks) :]
    if missing:
        ok, bad = validate_chain(follower.blocks + missing)
        if not ok:
            raise BadBlock(f"peer served an invalid block at height {bad}")
    for block in missing:
        follower._append(block)
    return len(missing)
