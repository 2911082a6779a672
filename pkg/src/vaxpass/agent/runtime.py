"""The agent peer: connections, sessions, and message routing in one place.

A peer owns one identity and one inbox endpoint. Incoming payloads are
either connection requests (handshakes) or envelopes; ``receive`` returns
the reply payloads to hand back on the same delivery, which lets services
piggyback protocol openers (a credential offer, a proof request) on the
connection response itself. That synchronous return route is the only
channel a listener-less wallet needs.

Per-connection processing is serialized with a lock; distinct connections
progress independently.
"""

from __future__ import annotations

import secrets
import threading
from collections import defaultdict

from ..errors import ProtocolViolation, UnknownConnection
from .connections import (
    CONNECTION_REQUEST_TYPE,
    Connection,
    accept_invitation,
    create_invitation,
    receive_connection_request,
)
from .dids import AgentIdentity
from .envelopes import pack_envelope, unpack_envelope
from .protocols import ProtocolSession, message, step

CONNECTION_RESPONSE_TYPE = "vaxpass/connection-response"

# role this peer assumes when the remote side opens an exchange
_OPENER_ROLES = {
    "issue/offer": ("issue-credential", "holder"),
    "present/request": ("present-proof", "prover"),
}


class Peer:
    def __init__(self, identity: AgentIdentity, endpoint: str, transport):
        self.identity = identity
        self.endpoint = endpoint
        self.transport = transport
        self.open_nonces: set = set()  # invitations issued, not yet used
        self.accepted_nonces: set = set()  # invitations this peer accepted
        self.connections: dict[str, Connection] = {}
        self.sessions: dict[tuple[str, str], ProtocolSession] = {}
        self.actions: dict[tuple[str, str], object] = {}
        self.on_connected = None  # callback(conn) -> opener messages to piggyback
        self.on_session_update = None  # callback(connection_id, session)
        self._locks: defaultdict = defaultdict(threading.Lock)
        if hasattr(transport, "register"):
            transport.register(endpoint, self.receive)

    def set_actions(self, protocol: str, role: str, actions_obj) -> None:
        self.actions[(protocol, role)] = actions_obj

    def _store_session(self, connection_id: str, session: ProtocolSession) -> None:
        self.sessions[(connection_id, session.thread)] = session
        if self.on_session_update is not None:
            self.on_session_update(connection_id, session)

    def _actions_for(self, session: ProtocolSession):
        try:
            return self.actions[(session.protocol, session.role)]
        except KeyError:
            raise ProtocolViolation(
                f"no handler registered for {session.protocol} as {session.role}"
            )

    # ------------------------------------------------------- invitations

    def invite(self) -> dict:
        invitation = create_invitation(self.identity, self.endpoint)
        self.open_nonces.add(invitation["nonce"])
        return invitation

    def connect(self, invitation: dict, consent: bool = True) -> Connection:
        """Accept an invitation, run the handshake, and process everything
        the peer piggybacks on the connection response."""
        conn, request = accept_invitation(
            invitation, self.identity, self.endpoint, self.accepted_nonces, consent
        )
        replies = self.transport.deliver(invitation["endpoint"], request)
        if not replies:
            raise ProtocolViolation("peer sent no connection response")
        confirmation = unpack_envelope(conn, replies[0])
        if (
            confirmation.get("type") != CONNECTION_RESPONSE_TYPE
            or confirmation.get("connection_id") != conn.connection_id
        ):
            raise ProtocolViolation("connection response mismatch")
        self.connections[conn.connection_id] = conn
        self._pump([(conn, payload) for payload in replies[1:]])
        return conn

    # ----------------------------------------------------------- receive

    def receive(self, payload: dict) -> list[dict]:
        """Inbox entry point; returns reply payloads for the same delivery."""
        if payload.get("type") == CONNECTION_REQUEST_TYPE:
            return self._receive_handshake(payload)
        conn = self.connections.get(payload.get("connection_id", ""))
        if conn is None:
            raise UnknownConnection("envelope for an unknown connection")
        with self._locks[conn.connection_id]:
            msg = unpack_envelope(conn, payload)
            outs = self._dispatch(conn, msg)
            return [pack_envelope(conn, m) for m in outs]

    def _receive_handshake(self, request: dict) -> list[dict]:
        conn = receive_connection_request(self.identity, request, self.open_nonces)
        self.connections[conn.connection_id] = conn
        replies = [
            pack_envelope(
                conn,
                {"type": CONNECTION_RESPONSE_TYPE, "connection_id": conn.connection_id},
            )
        ]
        if self.on_connected is not None:
            for opener in self.on_connected(conn):
                replies.append(pack_envelope(conn, opener))
        return replies

    def _dispatch(self, conn: Connection, msg: dict) -> list[dict]:
        thread = msg.get("thread")
        if not isinstance(thread, str) or not thread:
            raise ProtocolViolation("message carries no thread id")
        key = (conn.connection_id, thread)
        session = self.sessions.get(key)
        if session is None:
            opener = _OPENER_ROLES.get(msg.get("type"))
            if opener is None:
                raise ProtocolViolation(f"{msg.get('type')!r} cannot open a new exchange")
            session = ProtocolSession(protocol=opener[0], role=opener[1], thread=thread)
        session, outs = step(session, msg, self._actions_for(session))
        self._store_session(conn.connection_id, session)
        return outs

    # ------------------------------------------------------------- sends

    def open_exchange(
        self, connection_id: str, protocol: str, role: str, opener_kind: str, body: dict
    ) -> tuple[str, list[dict]]:
        """Create a session from a local opener event; returns the thread id
        and the messages to send (caller decides the channel)."""
        self._require_connection(connection_id)
        thread = secrets.token_hex(16)
        session = ProtocolSession(protocol=protocol, role=role, thread=thread)
        session, outs = step(
            session, message(opener_kind, thread, body), self._actions_for(session)
        )
        self._store_session(connection_id, session)
        return thread, outs

    def start_protocol(
        self, connection_id: str, protocol: str, role: str, opener_kind: str, body: dict
    ) -> str:
        conn = self._require_connection(connection_id)
        thread, outs = self.open_exchange(connection_id, protocol, role, opener_kind, body)
        self._pump([(conn, pack_envelope(conn, m)) for m in outs])
        return thread

    def process_local(self, connection_id: str, thread: str, decision: str) -> ProtocolSession:
        """Inject "local/accept" or "local/decline" and drive the exchange
        until it goes quiet."""
        conn = self._require_connection(connection_id)
        key = (connection_id, thread)
        session = self.sessions.get(key)
        if session is None:
            raise UnknownConnection(f"no session for thread {thread}")
        with self._locks[connection_id]:
            session, outs = step(
                session, message(decision, thread), self._actions_for(session)
            )
            self._store_session(connection_id, session)
            envelopes = [(conn, pack_envelope(conn, m)) for m in outs]
        self._pump(envelopes)
        return self.sessions[key]

    def _require_connection(self, connection_id: str) -> Connection:
        conn = self.connections.get(connection_id)
        if conn is None:
            raise UnknownConnection(f"no connection {connection_id[:8]}...")
        return conn

    def _pump(self, queue: list[tuple[Connection, dict]]) -> None:
        """Deliver outbound envelopes and feed the peers' synchronous replies
        back through dispatch until nothing more wants to go out."""
        queue = list(queue)
        while queue:
            conn, payload = queue.pop(0)
            if payload.get("message_id", "").startswith(conn.send_prefix + "-"):
                replies = self.transport.deliver(conn.remote_endpoint, payload)
                queue.extend((conn, r) for r in replies)
            else:
                target = self.connections.get(payload.get("connection_id", ""))
                if target is None:
                    raise UnknownConnection("reply for an unknown connection")
                with self._locks[target.connection_id]:
                    msg = unpack_envelope(target, payload)
                    outs = self._dispatch(target, msg)
                    queue.extend((target, pack_envelope(target, m)) for m in outs)
