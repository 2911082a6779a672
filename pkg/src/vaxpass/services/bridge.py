"""Local HTTP bridge for the wallet, meant for the browser consent view.

Keys and credentials stay in the wallet process; the bridge only exposes
summaries and accept/decline actions over localhost.
"""

from __future__ import annotations

from fastapi import FastAPI

from ..httperrors import install_error_handler
from .wallet import Wallet


def create_bridge_app(wallet: Wallet, save=None) -> FastAPI:
    app = FastAPI(title="vaxpass wallet bridge", docs_url=None, redoc_url=None)
    install_error_handler(app)

    def _persist():
        if save is not None:
            save()

    @app.get("/credentials")
    def credentials():
        return {"credentials": wallet.list_credentials()}

    @app.get("/pending")
    def pending():
        return {"pending": wallet.pending_items()}

    @app.get("/connections")
    def connections():
        return {"connections": wallet.list_connections()}

    @app.post("/connect")
    def connect(body: dict):
        summary = wallet.connect(body.get("payload", ""), consent=bool(body.get("consent", True)))
        _persist()
        return summary

    @app.post("/respond")
    def respond(body: dict):
        outcome = wallet.respond(str(body.get("id", "")), str(body.get("decision", "")))
        _persist()
        return outcome

    @app.post("/sync")
    def sync():
        result = wallet.sync_revocation()
        _persist()
        return {"credentials": result}

    @app.get("/health")
    def health():
        return {"status": "ok", "did": wallet.identity.did}

    return app
