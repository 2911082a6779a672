"""Issue-credential and present-proof state machines.

Steps are pure: (session, message) maps to (new session, outgoing messages)
with all crypto work delegated to an injected ``actions`` object, so every
transition is replayable and the full (state, kind) grid has a defined
reaction. Messages the user produces locally (accepting an offer, starting
an exchange) enter as ``local/*`` kinds and never cross the wire.

issue-credential   start -> offered -> requested -> issued -> acked
present-proof      start -> requested -> presented -> verified | declined

Unexpected wire messages yield a problem-report and the failed state;
terminal states absorb nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..errors import CannotSatisfy, ProtocolViolation, VaxPassError

TERMINAL_STATES = {"acked", "verified", "declined", "failed"}

ISSUE_KINDS = ("issue/offer", "issue/request", "issue/issue", "issue/ack")
PRESENT_KINDS = (
    "present/request",
    "present/presentation",
    "present/result",
    "present/decline",
)
LOCAL_KINDS = ("local/offer", "local/request", "local/accept", "local/decline")
PROBLEM_REPORT = "problem-report"


@dataclass(frozen=True)
class ProtocolSession:
    protocol: str  # "issue-credential" | "present-proof"
    role: str  # issue: "issuer"/"holder"; present: "verifier"/"prover"
    thread: str
    state: str = "start"
    pending: dict = field(default_factory=dict)

    @property
    def terminal(self) -> bool:
        return self.state in TERMINAL_STATES

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "role": self.role,
            "thread": self.thread,
            "state": self.state,
            "pending": self.pending,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProtocolSession":
        return cls(
            protocol=d["protocol"],
            role=d["role"],
            thread=d["thread"],
            state=d["state"],
            pending=dict(d["pending"]),
        )


def message(kind: str, thread: str, body: dict | None = None) -> dict:
    return {"type": kind, "thread": thread, "body": body or {}}


def _problem(session: ProtocolSession, code: str, reason: str):
    out = message(PROBLEM_REPORT, session.thread, {"code": code, "reason": reason})
    return replace(session, state="failed"), [out]


def _absorb_problem(session: ProtocolSession, body: dict):
    state = "declined" if body.get("code") in ("DECLINED", "CANNOT_SATISFY") else "failed"
    return replace(session, state=state, pending={**session.pending, "problem": body}), []


def _check(session: ProtocolSession, msg: dict) -> None:
    if session.terminal:
        raise ProtocolViolation(f"session already terminal in state {session.state!r}")
    if msg.get("thread") != session.thread:
        raise ProtocolViolation("message belongs to a different thread")


def issue_step(session: ProtocolSession, msg: dict, actions):
    """One issue-credential transition; returns (session', outgoing)."""
    _check(session, msg)
    kind, body = msg["type"], msg.get("body", {})
    role, state = session.role, session.state

    if kind == PROBLEM_REPORT:
        return _absorb_problem(session, body)

    if role == "issuer":
        if state == "start" and kind == "local/offer":
            out = message("issue/offer", session.thread, body)
            return replace(session, state="offered", pending={"offer": body}), [out]
        if state == "offered" and kind == "issue/request":
            try:
                issued = actions.issue(body, session.pending["offer"])
            except VaxPassError as exc:
                return _problem(session, exc.code, exc.detail)
            out = message("issue/issue", session.thread, issued)
            return replace(session, state="issued"), [out]
        if state == "issued" and kind == "issue/ack":
            return replace(session, state="acked"), []

    if role == "holder":
        if state == "start" and kind == "issue/offer":
            return replace(session, state="offered", pending={"offer": body}), []
        if state == "offered" and kind == "local/accept":
            request_body, stash = actions.build_request(session.pending["offer"])
            out = message("issue/request", session.thread, request_body)
            pending = {**session.pending, "issuance": stash}
            return replace(session, state="requested", pending=pending), [out]
        if state == "offered" and kind == "local/decline":
            out = message(
                PROBLEM_REPORT, session.thread, {"code": "DECLINED", "reason": "offer refused"}
            )
            return replace(session, state="declined"), [out]
        if state == "requested" and kind == "issue/issue":
            try:
                actions.complete(body, session.pending)
            except VaxPassError as exc:
                return _problem(session, exc.code, exc.detail)
            out = message("issue/ack", session.thread, {})
            return replace(session, state="acked"), [out]

    return _problem(session, ProtocolViolation.code, f"{kind} not valid in state {state}")


def present_step(session: ProtocolSession, msg: dict, actions):
    """One present-proof transition; returns (session', outgoing)."""
    _check(session, msg)
    kind, body = msg["type"], msg.get("body", {})
    role, state = session.role, session.state

    if kind == PROBLEM_REPORT:
        return _absorb_problem(session, body)

    if role == "verifier":
        if state == "start" and kind == "local/request":
            out = message("present/request", session.thread, body)
            return replace(session, state="requested", pending={"request": body}), [out]
        if state == "requested" and kind == "present/presentation":
            try:
                result = actions.verify(body, session.pending["request"])
            except VaxPassError as exc:
                return _problem(session, exc.code, exc.detail)
            out = message("present/result", session.thread, result)
            new_state = "verified" if result.get("accepted") else "declined"
            pending = {**session.pending, "result": result}
            return replace(session, state=new_state, pending=pending), [out]
        if state == "requested" and kind == "present/decline":
            pending = {**session.pending, "decline": body}
            return replace(session, state="declined", pending=pending), []

    if role == "prover":
        if state == "start" and kind == "present/request":
            return replace(session, state="requested", pending={"request": body}), []
        if state == "requested" and kind == "local/accept":
            try:
                presentation = actions.build_presentation(session.pending["request"])
            except CannotSatisfy as exc:
                decline = {"code": exc.code, "reason": exc.detail}
                out = message("present/decline", session.thread, decline)
                pending = {**session.pending, "decline": decline}
                return replace(session, state="declined", pending=pending), [out]
            out = message("present/presentation", session.thread, presentation)
            return replace(session, state="presented"), [out]
        if state == "requested" and kind == "local/decline":
            decline = {"code": "DECLINED", "reason": "request refused"}
            out = message("present/decline", session.thread, decline)
            pending = {**session.pending, "decline": decline}
            return replace(session, state="declined", pending=pending), [out]
        if state == "presented" and kind == "present/result":
            new_state = "verified" if body.get("accepted") else "declined"
            pending = {**session.pending, "result": body}
            return replace(session, state=new_state, pending=pending), []

    return _problem(session, ProtocolViolation.code, f"{kind} not valid in state {state}")


def step(session: ProtocolSession, msg: dict, actions):
    if session.protocol == "issue-credential":
        return issue_step(session, msg, actions)
    if session.protocol == "present-proof":
        return present_step(session, msg, actions)
    raise ProtocolViolation(f"unknown protocol {session.protocol!r}")
