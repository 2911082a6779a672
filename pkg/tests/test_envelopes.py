import secrets

import pytest

from ledgertools import ident
from vaxpass.agent.connections import (
    accept_invitation,
    create_invitation,
    receive_connection_request,
)
from vaxpass.agent.envelopes import pack_envelope, unpack_envelope
from vaxpass.canonical import b64url_decode, b64url_encode, canonical_json
from vaxpass.errors import AuthFail, Replay, UnknownConnection


def _pair(tag: str):
    inviter, acceptor = ident(f"env-i-{tag}"), ident(f"env-a-{tag}")
    inv = create_invitation(inviter, "inproc://i")
    conn_a, request = accept_invitation(inv, acceptor, "inproc://a", set())
    conn_i = receive_connection_request(inviter, request, {inv["nonce"]})
    return conn_a, conn_i


def test_roundtrip_both_directions():
    conn_a, conn_i = _pair("rt")
    msg = {"type": "issue/offer", "thread": "t1", "body": {"dose": 2}}
    assert unpack_envelope(conn_i, pack_envelope(conn_a, msg)) == msg
    reply = {"type": "issue/request", "thread": "t1", "body": {}}
    assert unpack_envelope(conn_a, pack_envelope(conn_i, reply)) == reply


def test_message_ids_are_monotone_and_direction_tagged():
    conn_a, _conn_i = _pair("ids")
    ids = [pack_envelope(conn_a, {"n": i})["message_id"] for i in range(5)]
    assert ids == [f"a-{i}" for i in range(1, 6)]


def test_ciphertext_tamper_fails_auth():
    conn_a, conn_i = _pair("tamper")
    env = pack_envelope(conn_a, {"secret": "x" * 40})
    raw = bytearray(b64url_decode(env["ciphertext"]))
    raw[3] ^= 0x01
    with pytest.raises(AuthFail):
        unpack_envelope(conn_i, dict(env, ciphertext=b64url_encode(bytes(raw))))
    with pytest.raises(AuthFail):
        unpack_envelope(conn_i, dict(env, tag=b64url_encode(secrets.token_bytes(16))))
    with pytest.raises(AuthFail):
        unpack_envelope(conn_i, dict(env, nonce=secrets.token_bytes(24).hex()))


def test_header_is_bound_into_the_aead():
    conn_a, conn_i = _pair("aad")
    env = pack_envelope(conn_a, {"k": 1})
    moved = dict(env, message_id="a-9")
    with pytest.raises(AuthFail):
        unpack_envelope(conn_i, moved)


def test_redelivery_is_replay():
    conn_a, conn_i = _pair("replay")
    env = pack_envelope(conn_a, {"k": 1})
    unpack_envelope(conn_i, env)
    with pytest.raises(Replay):
        unpack_envelope(conn_i, env)


def test_reflection_is_replay():
    conn_a, _conn_i = _pair("reflect")
    env = pack_envelope(conn_a, {"k": 1})
    with pytest.raises(Replay):
        unpack_envelope(conn_a, env)  # own envelope bounced back


def test_cross_connection_injection_rejected():
    conn_a1, conn_i1 = _pair("x1")
    conn_a2, conn_i2 = _pair("x2")
    env = pack_envelope(conn_a1, {"k": 1})
    with pytest.raises(UnknownConnection):
        unpack_envelope(conn_i2, env)
    forced = dict(env, connection_id=conn_i2.connection_id)
    with pytest.raises(AuthFail):
        unpack_envelope(conn_i2, forced)


def test_ciphertext_shares_no_plaintext_window():
    # 64 random messages here; the full 1000-message sweep runs in the
    # acceptance suite
    conn_a, conn_i = _pair("conf")
    for _ in range(64):
        body = secrets.token_hex(24)
        plain = canonical_json({"body": body})
        env = pack_envelope(conn_a, {"body": body})
        blob = b64url_decode(env["ciphertext"]) + b64url_decode(env["tag"])
        for i in range(len(plain) - 8):
            assert plain[i : i + 8] not in blob
        unpack_envelope(conn_i, env)


def test_malformed_envelope_fails_cleanly():
    conn_a, conn_i = _pair("malformed")
    env = pack_envelope(conn_a, {"k": 1})
    with pytest.raises(AuthFail):
        unpack_envelope(conn_i, {k: v for k, v in env.items() if k != "nonce"})
    with pytest.raises(AuthFail):
        unpack_envelope(conn_i, dict(env, nonce="zz"))
    with pytest.raises(AuthFail):
        unpack_envelope(conn_i, dict(env, nonce="ab" * 12))  # 12 bytes, not 24
