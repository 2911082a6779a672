import pytest

from vaxpass.agent.dids import AgentIdentity
from vaxpass.agent.envelopes import pack_envelope
from vaxpass.agent.runtime import Peer
from vaxpass.agent.transport import InProcTransport
from vaxpass.errors import CannotSatisfy, Replay, UnknownConnection


class IssuerActions:
    def issue(self, request_body, offer_body):
        return {"signature": "sig-over-" + str(request_body["u"])}


class HolderActions:
    def __init__(self, accept=True):
        self.accept = accept
        self.received = None

    def build_request(self, offer_body):
        return {"u": 42}, {"stash": "blinding"}

    def complete(self, issue_body, pending):
        self.received = (issue_body, pending["issuance"])


class VerifierActions:
    def __init__(self, accepted=True):
        self.accepted = accepted
        self.presented = None

    def verify(self, presentation_body, request_body):
        self.presented = presentation_body
        return {"accepted": self.accepted, "reason": ""}


class ProverActions:
    def __init__(self, satisfiable=True):
        self.satisfiable = satisfiable

    def build_presentation(self, request_body):
        if not self.satisfiable:
            raise CannotSatisfy("cannot meet bound")
        return {"proof": "zk", "echo": request_body["nonce"]}


def make_peer(tag, transport):
    identity = AgentIdentity.from_seed(tag.encode().ljust(32, b"\0"))
    return Peer(identity, f"inproc://{tag}", transport)


def connected_pair(on_connected=None):
    transport = InProcTransport()
    alice = make_peer("alice", transport)
    bob = make_peer("bob", transport)
    if on_connected is not None:
        alice.on_connected = on_connected
    invitation = alice.invite()
    conn_bob = bob.connect(invitation)
    return alice, bob, conn_bob


def test_handshake_establishes_matching_connections():
    alice, bob, conn_bob = connected_pair()
    assert conn_bob.connection_id in alice.connections
    conn_alice = alice.connections[conn_bob.connection_id]
    assert conn_alice.key == conn_bob.key
    assert conn_alice.remote_did == bob.identity.did
    assert conn_bob.remote_did == alice.identity.did
    assert conn_alice.role == "inviter" and conn_bob.role == "acceptor"


def test_two_invitations_give_distinct_connections():
    transport = InProcTransport()
    alice = make_peer("alice", transport)
    bob = make_peer("bob", transport)
    first = bob.connect(alice.invite())
    second = bob.connect(alice.invite())
    assert first.connection_id != second.connection_id
    assert first.key != second.key


def test_issue_flow_over_transport():
    def push_offer(peer, conn):
        return peer.open_exchange(
            conn.connection_id, "issue-credential", "issuer", "local/offer",
            {"claims": {"dose": 2}, "nonce": "n-1"},
        )[1]

    transport = InProcTransport()
    issuer = make_peer("issuer", transport)
    holder = make_peer("holder", transport)
    issuer.set_actions("issue-credential", "issuer", IssuerActions())
    holder_actions = HolderActions()
    holder.set_actions("issue-credential", "holder", holder_actions)
    issuer.on_connected = lambda conn: push_offer(issuer, conn)

    conn = holder.connect(issuer.invite())
    # the offer rode back on the handshake reply
    pending = [s for s in holder.sessions.values() if s.state == "offered"]
    assert len(pending) == 1
    thread = pending[0].thread

    session = holder.process_local(conn.connection_id, thread, "local/accept")
    assert session.state == "acked"
    issue_body, stash = holder_actions.received
    assert issue_body == {"signature": "sig-over-42"}
    assert stash == {"stash": "blinding"}
    assert issuer.sessions[(conn.connection_id, thread)].state == "acked"


def present_pair(verifier_actions, prover_actions):
    transport = InProcTransport()
    verifier = make_peer("verifier", transport)
    prover = make_peer("prover", transport)
    verifier.set_actions("present-proof", "verifier", verifier_actions)
    prover.set_actions("present-proof", "prover", prover_actions)
    verifier.on_connected = lambda conn: verifier.open_exchange(
        conn.connection_id, "present-proof", "verifier", "local/request",
        {"nonce": "rq-7", "predicates": []},
    )[1]
    conn = prover.connect(verifier.invite())
    thread = next(iter(prover.sessions))[1]
    return verifier, prover, conn, thread


def test_present_flow_verified():
    verifier_actions = VerifierActions()
    verifier, prover, conn, thread = present_pair(verifier_actions, ProverActions())
    session = prover.process_local(conn.connection_id, thread, "local/accept")
    assert session.state == "verified"
    assert verifier.sessions[(conn.connection_id, thread)].state == "verified"
    assert verifier_actions.presented["echo"] == "rq-7"


def test_present_flow_cannot_satisfy():
    verifier, prover, conn, thread = present_pair(
        VerifierActions(), ProverActions(satisfiable=False)
    )
    session = prover.process_local(conn.connection_id, thread, "local/accept")
    assert session.state == "declined"
    verifier_session = verifier.sessions[(conn.connection_id, thread)]
    assert verifier_session.state == "declined"
    assert verifier_session.pending["decline"]["code"] == "CANNOT_SATISFY"


def test_present_flow_user_decline():
    verifier, prover, conn, thread = present_pair(VerifierActions(), ProverActions())
    session = prover.process_local(conn.connection_id, thread, "local/decline")
    assert session.state == "declined"
    assert verifier.sessions[(conn.connection_id, thread)].state == "declined"


def test_envelope_for_unknown_connection_rejected():
    alice, bob, conn_bob = connected_pair()
    stranger = make_peer("mallory", InProcTransport())
    with pytest.raises(UnknownConnection):
        stranger.receive(pack_envelope(conn_bob, {"type": "x", "thread": "t", "body": {}}))


def test_redelivered_envelope_rejected():
    verifier, prover, conn, thread = present_pair(VerifierActions(), ProverActions())
    envelope = pack_envelope(conn, {"type": "present/decline", "thread": thread,
                                    "body": {"code": "DECLINED", "reason": ""}})
    verifier.receive(envelope)
    with pytest.raises(Replay):
        verifier.receive(envelope)


def test_local_decision_on_unknown_session_rejected():
    alice, bob, conn_bob = connected_pair()
    with pytest.raises(UnknownConnection):
        bob.process_local(conn_bob.connection_id, "no-such-thread", "local/accept")
