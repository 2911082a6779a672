"""Ledger access for services and wallets.

Both clients expose the same surface, so callers are indifferent to
whether the ledger lives in-process (tests, demo) or behind HTTP.
"""

from __future__ import annotations

import httpx

from .. import errors
from .chain import Block
from .node import Network


class InProcLedgerClient:
    def __init__(self, network: Network):
        self.network = network

    def submit(self, tx: dict) -> dict:
        return self.network.submit(tx)

    def query(self, kind: str, key: str, at_epoch: int | None = None) -> dict:
        return self.network.query(kind, key, at_epoch)

    def deltas(self, registry_id: str, after_epoch: int = 0) -> list[dict]:
        return self.network.deltas(registry_id, after_epoch)

    def blocks(self, start: int = 0, end: int | None = None) -> list[dict]:
        return [b.to_dict() for b in self.network.blocks(start, end)]

    def tip(self) -> dict:
        return self.network.tip()

    def genesis_hash(self) -> str:
        return self.network.genesis_hash

    def genesis_config(self) -> dict:
        return dict(self.blocks(0, 1)[0]["txs"][0]["payload"])

    def trusted(self) -> list[str]:
        return list(self.query("TRUST_LIST", "")["entry"]["trusted"])


def _raise_for_error(resp: httpx.Response) -> None:
    if resp.status_code < 400:
        return
    try:
        body = resp.json()
        code, detail = body["error"], body.get("detail", "")
    except Exception:
        code, detail = "INTERNAL", resp.text
    raise errors.by_code(code)(detail)


class HttpLedgerClient:
    def __init__(self, base_url: str, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.http = client or httpx.Client(timeout=30.0)

    def _get(self, path: str, **params) -> dict:
        resp = self.http.get(self.base_url + path, params={k: v for k, v in params.items() if v is not None})
        _raise_for_error(resp)
        return resp.json()

    def submit(self, tx: dict) -> dict:
        resp = self.http.post(self.base_url + "/txs", json=tx)
        _raise_for_error(resp)
        return resp.json()

    def query(self, kind: str, key: str, at_epoch: int | None = None) -> dict:
        return self._get("/query", kind=kind, key=key, at_epoch=at_epoch)

    def deltas(self, registry_id: str, after_epoch: int = 0) -> list[dict]:
        return self._get("/deltas", registry_id=registry_id, after=after_epoch)["deltas"]

    def blocks(self, start: int = 0, end: int | None = None) -> list[dict]:
        return self._get("/blocks", start=start, end=end)["blocks"]

    def tip(self) -> dict:
        return self._get("/tip")

    def genesis_hash(self) -> str:
        return Block.from_dict(self.blocks(0, 1)[0]).hash

    def genesis_config(self) -> dict:
        return dict(self.blocks(0, 1)[0]["txs"][0]["payload"])

    def trusted(self) -> list[str]:
        return list(self.query("TRUST_LIST", "")["entry"]["trusted"])
