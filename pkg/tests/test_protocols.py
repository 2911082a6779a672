import itertools

import pytest

from vaxpass.agent.protocols import (
    ISSUE_KINDS,
    LOCAL_KINDS,
    PRESENT_KINDS,
    PROBLEM_REPORT,
    TERMINAL_STATES,
    ProtocolSession,
    issue_step,
    message,
    present_step,
)
from vaxpass.errors import BadBlinding, CannotSatisfy, ProtocolViolation


class ScriptedIssuer:
    def __init__(self, fail=False):
        self.fail = fail

    def issue(self, request_body, offer_body):
        if self.fail:
            raise BadBlinding("request proof failed")
        return {"partial": "sig", "for": request_body["u"], "claims": offer_body["claims"]}


class ScriptedHolder:
    def __init__(self):
        self.stored = None

    def build_request(self, offer_body):
        return {"u": 123, "nonce": offer_body["nonce"]}, {"v_prime": 7}

    def complete(self, issue_body, pending):
        self.stored = (issue_body, pending["issuance"])


class ScriptedVerifier:
    def __init__(self, accepted=True):
        self.accepted = accepted

    def verify(self, presentation_body, request_body):
        return {"accepted": self.accepted, "reason": "" if self.accepted else "PROOF_INVALID"}


class ScriptedProver:
    def __init__(self, satisfiable=True):
        self.satisfiable = satisfiable

    def build_presentation(self, request_body):
        if not self.satisfiable:
            raise CannotSatisfy("dose below bound")
        return {"proof": "blob", "request_id": request_body["request_id"]}


def drive(issuer_session, holder_session, opener_body):
    """Run a full issue exchange by relaying messages between two sessions."""
    issuer_actions, holder_actions = ScriptedIssuer(), ScriptedHolder()
    issuer_session, outs = issue_step(
        issuer_session, message("local/offer", "t", opener_body), issuer_actions
    )
    assert issuer_session.state == "offered"
    holder_session, _ = issue_step(holder_session, outs[0], holder_actions)
    assert holder_session.state == "offered"
    holder_session, outs = issue_step(
        holder_session, message("local/accept", "t"), holder_actions
    )
    assert holder_session.state == "requested"
    issuer_session, outs = issue_step(issuer_session, outs[0], issuer_actions)
    assert issuer_session.state == "issued"
    holder_session, outs = issue_step(holder_session, outs[0], holder_actions)
    assert holder_session.state == "acked"
    issuer_session, outs = issue_step(issuer_session, outs[0], issuer_actions)
    assert issuer_session.state == "acked" and outs == []
    return issuer_session, holder_session, holder_actions


def test_issue_happy_path_reaches_acked_both_sides():
    issuer = ProtocolSession("issue-credential", "issuer", "t")
    holder = ProtocolSession("issue-credential", "holder", "t")
    _i, _h, actions = drive(issuer, holder, {"claims": {"dose": 2}, "nonce": "n1"})
    issue_body, stash = actions.stored
    assert issue_body["for"] == 123
    assert stash == {"v_prime": 7}


def test_holder_decline_sends_problem_report():
    holder = ProtocolSession("issue-credential", "holder", "t")
    holder, _ = issue_step(
        holder, message("issue/offer", "t", {"claims": {}}), ScriptedHolder()
    )
    holder, outs = issue_step(holder, message("local/decline", "t"), ScriptedHolder())
    assert holder.state == "declined"
    assert outs[0]["type"] == PROBLEM_REPORT
    assert outs[0]["body"]["code"] == "DECLINED"

    issuer = ProtocolSession("issue-credential", "issuer", "t", state="offered")
    issuer, outs = issue_step(issuer, outs[0], ScriptedIssuer())
    assert issuer.state == "declined" and outs == []


def test_issuer_failure_becomes_problem_report():
    issuer = ProtocolSession(
        "issue-credential", "issuer", "t", state="offered", pending={"offer": {"claims": {}}}
    )
    issuer, outs = issue_step(
        issuer, message("issue/request", "t", {"u": 5}), ScriptedIssuer(fail=True)
    )
    assert issuer.state == "failed"
    assert outs[0]["body"]["code"] == "BAD_BLINDING"


def test_issue_in_start_is_protocol_error():
    issuer = ProtocolSession("issue-credential", "issuer", "t")
    issuer, outs = issue_step(issuer, message("issue/issue", "t", {}), ScriptedIssuer())
    assert issuer.state == "failed"
    assert outs[0]["type"] == PROBLEM_REPORT
    assert outs[0]["body"]["code"] == "PROTOCOL_ERROR"


def test_present_happy_path():
    verifier = ProtocolSession("present-proof", "verifier", "p")
    prover = ProtocolSession("present-proof", "prover", "p")
    verifier, outs = present_step(
        verifier, message("local/request", "p", {"request_id": "r1"}), ScriptedVerifier()
    )
    prover, _ = present_step(prover, outs[0], ScriptedProver())
    assert prover.state == "requested"
    prover, outs = present_step(prover, message("local/accept", "p"), ScriptedProver())
    assert prover.state == "presented"
    verifier, outs = present_step(verifier, outs[0], ScriptedVerifier())
    assert verifier.state == "verified"
    assert verifier.pending["result"]["accepted"] is True
    prover, outs = present_step(prover, outs[0], ScriptedProver())
    assert prover.state == "verified" and outs == []


def test_present_cannot_satisfy_becomes_decline():
    verifier = ProtocolSession("present-proof", "verifier", "p")
    prover = ProtocolSession("present-proof", "prover", "p")
    verifier, outs = present_step(
        verifier, message("local/request", "p", {"request_id": "r1"}),
        ScriptedVerifier(),
    )
    prover, _ = present_step(prover, outs[0], ScriptedProver(satisfiable=False))
    prover, outs = present_step(
        prover, message("local/accept", "p"), ScriptedProver(satisfiable=False)
    )
    assert prover.state == "declined"
    assert outs[0]["type"] == "present/decline"
    assert outs[0]["body"]["code"] == "CANNOT_SATISFY"
    verifier, outs = present_step(verifier, outs[0], ScriptedVerifier())
    assert verifier.state == "declined" and outs == []
    assert verifier.pending["decline"]["code"] == "CANNOT_SATISFY"


def test_user_refusal_declines_request():
    prover = ProtocolSession(
        "present-proof", "prover", "p", state="requested", pending={"request": {}}
    )
    prover, outs = present_step(prover, message("local/decline", "p"), ScriptedProver())
    assert prover.state == "declined"
    assert outs[0]["body"]["code"] == "DECLINED"


def test_presentation_without_request_is_protocol_error():
    verifier = ProtocolSession("present-proof", "verifier", "p")
    verifier, outs = present_step(
        verifier, message("present/presentation", "p", {}), ScriptedVerifier()
    )
    assert verifier.state == "failed"
    assert outs[0]["body"]["code"] == "PROTOCOL_ERROR"


def test_rejected_presentation_declines_both_sides():
    verifier = ProtocolSession(
        "present-proof", "verifier", "p", state="requested", pending={"request": {}}
    )
    verifier, outs = present_step(
        verifier, message("present/presentation", "p", {"proof": "junk"}),
        ScriptedVerifier(accepted=False),
    )
    assert verifier.state == "declined"
    prover = ProtocolSession("present-proof", "prover", "p", state="presented")
    prover, _ = present_step(prover, outs[0], ScriptedProver())
    assert prover.state == "declined"


def test_terminal_states_absorb_nothing():
    for state in TERMINAL_STATES:
        session = ProtocolSession("issue-credential", "issuer", "t", state=state)
        with pytest.raises(ProtocolViolation):
            issue_step(session, message("issue/ack", "t"), ScriptedIssuer())


def test_thread_mismatch_raises():
    session = ProtocolSession("issue-credential", "issuer", "t1")
    with pytest.raises(ProtocolViolation):
        issue_step(session, message("local/offer", "t2", {}), ScriptedIssuer())


def test_steps_are_pure():
    session = ProtocolSession(
        "issue-credential", "holder", "t", state="offered",
        pending={"offer": {"claims": {}, "nonce": "n"}},
    )
    msg = message("local/accept", "t")
    first = issue_step(session, msg, ScriptedHolder())
    second = issue_step(session, msg, ScriptedHolder())
    assert first == second
    assert session.state == "offered"  # input untouched


NON_TERMINAL = {
    ("issue-credential", "issuer"): ["start", "offered", "requested", "issued"],
    ("issue-credential", "holder"): ["start", "offered", "requested", "issued"],
    ("present-proof", "verifier"): ["start", "requested", "presented"],
    ("present-proof", "prover"): ["start", "requested", "presented"],
}

ACTIONS = {
    ("issue-credential", "issuer"): ScriptedIssuer(),
    ("issue-credential", "holder"): ScriptedHolder(),
    ("present-proof", "verifier"): ScriptedVerifier(),
    ("present-proof", "prover"): ScriptedProver(),
}


def test_every_nonterminal_state_reacts_to_every_kind():
    """Exhaustiveness by enumeration: any (state, kind) pair yields a new
    session and well-formed outputs, never an unhandled exception."""
    kinds = list(ISSUE_KINDS + PRESENT_KINDS + LOCAL_KINDS) + [PROBLEM_REPORT]
    for (protocol, role), states in NON_TERMINAL.items():
        stepper = issue_step if protocol == "issue-credential" else present_step
        for state, kind in itertools.product(states, kinds):
            pending = {
                "offer": {"claims": {}, "nonce": "n"},
                "request": {"request_id": "r"},
                "issuance": {"v_prime": 7},
            }
            session = ProtocolSession(protocol, role, "t", state=state, pending=pending)
            new_session, outs = stepper(
                session, message(kind, "t", {"u": 1, "accepted": True}),
                ACTIONS[(protocol, role)],
            )
            assert new_session.state in TERMINAL_STATES or new_session.state in states
            for out in outs:
                assert set(out) == {"type", "thread", "body"}
