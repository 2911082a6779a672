"""Message delivery: in-process for tests and simulation, HTTP for real
deployments. Both carry identical payload bytes; a delivery returns the
peer's synchronous replies (possibly several, possibly none), which is the
only return route a listener-less wallet needs.
"""

from __future__ import annotations

import httpx

from .. import errors
from ..errors import BadRequest, UnknownConnection


class InProcTransport:
    """Endpoint registry for everything living in one process."""

    def __init__(self):
        self._handlers = {}

    def register(self, endpoint: str, handler) -> None:
        if not endpoint.startswith("inproc://"):
            raise BadRequest(f"not an in-process endpoint: {endpoint!r}")
        self._handlers[endpoint] = handler

    def deliver(self, endpoint: str, payload: dict) -> list[dict]:
        handler = self._handlers.get(endpoint)
        if handler is None:
            raise UnknownConnection(f"no agent listening on {endpoint!r}")
        return handler(payload) or []


class HttpTransport:
    """POSTs each payload to the peer's inbox endpoint."""

    def __init__(self, client: httpx.Client | None = None):
        self.http = client or httpx.Client(timeout=60.0)

    def deliver(self, endpoint: str, payload: dict) -> list[dict]:
        resp = self.http.post(endpoint, json=payload)
        if resp.status_code >= 400:
            try:
                body = resp.json()
                raise errors.by_code(body["error"])(body.get("detail", ""))
            except (KeyError, ValueError):
                raise errors.VaxPassError(f"delivery failed: HTTP {resp.status_code}")
        return resp.json().get("replies", [])
