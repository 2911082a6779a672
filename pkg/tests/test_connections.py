import pytest

from ledgertools import ident
from vaxpass.agent.connections import (
    Connection,
    accept_invitation,
    create_invitation,
    decode_qr,
    qr_payload,
    receive_connection_request,
    verify_invitation,
)
from vaxpass.canonical import canonical_json
from vaxpass.errors import (
    BadRequest,
    BadSignature,
    Declined,
    NonceReused,
)

INVITER = ident("conn-inviter")
ACCEPTOR = ident("conn-acceptor")


def _handshake(consent=True):
    inv = create_invitation(INVITER, "inproc://inviter")
    conn_a, request = accept_invitation(inv, ACCEPTOR, "inproc://acceptor", set(), consent)
    conn_i = receive_connection_request(INVITER, request, {inv["nonce"]})
    return conn_a, conn_i


def test_qr_payload_roundtrip_is_byte_identical():
    inv = create_invitation(INVITER, "inproc://inviter")
    payload = qr_payload(inv)
    decoded = decode_qr(payload)
    assert canonical_json(decoded) == canonical_json(inv)
    assert qr_payload(decoded) == payload


def test_truncated_qr_payload_rejected():
    inv = create_invitation(INVITER, "inproc://inviter")
    with pytest.raises(BadRequest):
        decode_qr(qr_payload(inv)[:10])


def test_invitation_signature_covers_all_fields():
    inv = create_invitation(INVITER, "inproc://inviter")
    verify_invitation(inv)
    for f in ("inviter", "endpoint", "nonce", "verification_key", "key_agreement_key"):
        tampered = dict(inv, **{f: inv[f][:-1] + ("0" if inv[f][-1] != "0" else "1")})
        with pytest.raises(BadSignature):
            verify_invitation(tampered)


def test_empty_endpoint_rejected():
    with pytest.raises(BadRequest):
        create_invitation(INVITER, "")


def test_both_ends_derive_the_same_session_key():
    conn_a, conn_i = _handshake()
    assert conn_a.key == conn_i.key
    assert len(conn_a.key) == 32
    assert conn_a.connection_id == conn_i.connection_id
    assert conn_a.role == "acceptor" and conn_i.role == "inviter"
    assert conn_i.remote_endpoint == "inproc://acceptor"


def test_fresh_handshakes_have_distinct_keys():
    (a1, _), (a2, _) = _handshake(), _handshake()
    assert a1.key != a2.key
    assert a1.connection_id != a2.connection_id


def test_acceptor_rejects_reused_invitation():
    inv = create_invitation(INVITER, "inproc://inviter")
    seen = set()
    accept_invitation(inv, ACCEPTOR, "inproc://acceptor", seen)
    with pytest.raises(NonceReused):
        accept_invitation(inv, ACCEPTOR, "inproc://acceptor", seen)


def test_declined_invitation_leaves_no_trace():
    inv = create_invitation(INVITER, "inproc://inviter")
    seen = set()
    with pytest.raises(Declined):
        accept_invitation(inv, ACCEPTOR, "inproc://acceptor", seen, consent=False)
    assert inv["nonce"] not in seen  # a later "y" must still work
    accept_invitation(inv, ACCEPTOR, "inproc://acceptor", seen)


def test_inviter_rejects_unknown_or_spent_nonce():
    inv = create_invitation(INVITER, "inproc://inviter")
    _conn, request = accept_invitation(inv, ACCEPTOR, "inproc://acceptor", set())
    open_nonces = {inv["nonce"]}
    receive_connection_request(INVITER, request, open_nonces)
    with pytest.raises(NonceReused):
        receive_connection_request(INVITER, request, open_nonces)


def test_inviter_rejects_tampered_request():
    inv = create_invitation(INVITER, "inproc://inviter")
    _conn, request = accept_invitation(inv, ACCEPTOR, "inproc://acceptor", set())
    evil = dict(request, did_document=dict(request["did_document"], endpoint="inproc://evil"))
    with pytest.raises(BadSignature):
        receive_connection_request(INVITER, evil, {inv["nonce"]})
    wrong_doc = dict(request, did_document=INVITER.document("inproc://x"))
    with pytest.raises(BadRequest):
        receive_connection_request(INVITER, wrong_doc, {inv["nonce"]})


def test_connection_dict_roundtrip():
    conn_a, _ = _handshake()
    conn_a.send_counter = 4
    conn_a.seen_ids = {"i-1", "i-2"}
    clone = Connection.from_dict(conn_a.to_dict())
    assert clone == conn_a
