"""HTTP/JSON node API: submit, query, block fetch, health."""

from __future__ import annotations

from fastapi import FastAPI

from ..httperrors import error_response, install_error_handler
from .node import Network

__all__ = ["create_ledger_app", "error_response"]


def create_ledger_app(network: Network) -> FastAPI:
    app = FastAPI(title="vaxpass ledger node", docs_url=None, redoc_url=None)
    install_error_handler(app)

    @app.post("/txs")
    async def submit(tx: dict):
        return network.submit(tx)

    @app.get("/query")
    async def query(kind: str, key: str = "", at_epoch: int | None = None):
        return network.query(kind, key, at_epoch)

    @app.get("/deltas")
    async def deltas(registry_id: str, after: int = 0):
        return {"deltas": network.deltas(registry_id, after)}

    @app.get("/blocks")
    async def blocks(start: int = 0, end: int | None = None):
        return {"blocks": [b.to_dict() for b in network.blocks(start, end)]}

    @app.get("/tip")
    async def tip():
        return network.tip()

    @app.get("/health")
    async def health():
        t = network.tip()
        return {"status": "ok", "height": t["height"], "block_hash": t["block_hash"]}

    return app
