"""Shared HTTP mapping for the package error taxonomy.

Every service returns errors as ``{"error": code, "detail": text}`` with a
status drawn from this table, so clients can rehydrate typed exceptions
regardless of which service produced them.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import VaxPassError

STATUS_BY_CODE = {
    "REJECTED_UNAUTHORIZED": 403,
    "DUPLICATE_ID": 409,
    "NO_QUORUM": 503,
    "NOT_FOUND": 404,
    "FORK_DETECTED": 409,
    "LEDGER_UNAVAILABLE": 503,
    "UNKNOWN_ITEM": 404,
    "UNKNOWN_CONNECTION": 404,
    "NOT_MEMBER": 404,
    "REPLAY": 409,
    "NONCE_REUSED": 409,
    "AUTH_FAIL": 401,
    "BAD_SIGNATURE": 401,
    "WALLET_LOCKED": 401,
}


def error_response(exc: VaxPassError) -> JSONResponse:
    status = STATUS_BY_CODE.get(exc.code, 400)
    return JSONResponse(status_code=status, content={"error": exc.code, "detail": exc.detail})


def install_error_handler(app: FastAPI) -> None:
    @app.exception_handler(VaxPassError)
    async def _vaxpass_error(_request: Request, exc: VaxPassError):
        return error_response(exc)
