import pytest

from oracles import mr_is_prime, qr_set
from vaxpass.anoncreds.holder import begin_issuance, complete_credential, create_link_secret
from vaxpass.anoncreds.issuer import (
    E_HI,
    E_LO,
    IssuancePartial,
    IssuerPublicKey,
    issue_credential,
    issuer_keygen,
    verify_issuance_request,
    signature_holds,
)
from vaxpass.anoncreds.schema import VACCINATION_SCHEMA, encode_claims
from vaxpass.crypto.arith import DeterministicRng
from vaxpass.errors import BadBlinding, InvalidSignature, OutOfRange
from vaxpass.revocation import registry_init, verify_witness

RAW_CLAIMS = {
    "full_name": "Ana Lima",
    "birth_date": "2000-01-01",
    "pathogen": "SARS-CoV-2",
    "laboratory": "LabX",
    "dose": 2,
    "vaccination_date": "2021-06-15",
    "location": "Clinic 7",
}


def test_toy_keygen_lands_in_qr(toy):
    pair = issuer_keygen(toy, VACCINATION_SCHEMA, DeterministicRng(b"kg"))
    residues = qr_set(1081)
    assert pair.public.modulus == 1081
    assert pair.public.s in residues
    assert pair.public.z in residues
    assert len(pair.public.r) == VACCINATION_SCHEMA.arity
    for r in pair.public.r:
        assert r in residues


@pytest.fixture(scope="module")
def issuer(tparams):
    return issuer_keygen(tparams, VACCINATION_SCHEMA, DeterministicRng(b"issuer"))


@pytest.fixture(scope="module")
def registry(tparams):
    return registry_init(tparams, "reg-1", DeterministicRng(b"registry"))


def test_keygen_structure(issuer, tparams):
    pub = issuer.public
    assert pub.modulus.bit_length() == tparams.modulus_bits
    assert pub.modulus == issuer.p * issuer.q
    assert mr_is_prime(issuer.p) and mr_is_prime(issuer.q)
    assert len(pub.r) == 9
    assert pub.cred_def_id.startswith("creddef:")
    assert IssuerPublicKey.from_dict(pub.to_dict()) == pub


def _issue_once(issuer, registry, rng_tag=b"flow", claims=RAW_CLAIMS, serial="serial-1"):
    rng = DeterministicRng(rng_tag)
    ls = create_link_secret(rng)
    request, pending = begin_issuance(issuer.public, ls, nonce="6e6f6e6365" * 4, rng=rng)
    encoded = encode_claims(VACCINATION_SCHEMA, claims)
    partial, registry2, delta = issue_credential(
        issuer, VACCINATION_SCHEMA, encoded, request, serial, registry, rng
    )
    cred = complete_credential(
        issuer.public, VACCINATION_SCHEMA, pending, partial, claims, ls, "did:vax:issuer"
    )
    return cred, registry2, delta


def test_blind_issuance_roundtrip(issuer, registry):
    cred, registry2, delta = _issue_once(issuer, registry)
    assert signature_holds(
        issuer.public, VACCINATION_SCHEMA, cred.attrs, cred.a, cred.e, cred.v
    )
    assert E_LO <= cred.e < E_HI
    assert mr_is_prime(cred.e)
    assert cred.raw["dose"] == 2
    assert verify_witness(registry2.public, registry2.value, cred.witness)
    assert delta.added == (cred.witness.handle,)
    assert cred.attrs["revocation_handle"] == cred.witness.handle
    assert cred.witness.handle.bit_length() == 128


def test_issuer_never_sees_link_secret(issuer, registry):
    # the request exposes only U and a proof; replaying issuance with a
    # different link secret gives a different U
    rng = DeterministicRng(b"ls")
    ls1, ls2 = create_link_secret(rng), create_link_secret(rng)
    r1, _ = begin_issuance(issuer.public, ls1, "6e" * 32, rng=DeterministicRng(b"r"))
    r2, _ = begin_issuance(issuer.public, ls2, "6e" * 32, rng=DeterministicRng(b"r"))
    assert ls1 != ls2
    assert r1.u != r2.u
    d = r1.to_dict()
    assert set(d) == {"u", "proof", "nonce"}


def test_bad_blinding_proof_rejected(issuer, registry):
    rng = DeterministicRng(b"bad")
    ls = create_link_secret(rng)
    request, _ = begin_issuance(issuer.public, ls, "6e" * 32, rng=rng)
    forged = type(request)(
        u=request.u * issuer.public.s % issuer.public.modulus,
        proof=request.proof,
        nonce=request.nonce,
    )
    with pytest.raises(BadBlinding):
        verify_issuance_request(issuer.public, forged)
    # nonce substitution also breaks the proof binding
    renonced = type(request)(u=request.u, proof=request.proof, nonce="ff" * 32)
    with pytest.raises(BadBlinding):
        verify_issuance_request(issuer.public, renonced)


def test_issue_rejects_out_of_range_claims(issuer, registry):
    rng = DeterministicRng(b"range")
    ls = create_link_secret(rng)
    request, _ = begin_issuance(issuer.public, ls, "6e" * 32, rng=rng)
    encoded = encode_claims(VACCINATION_SCHEMA, RAW_CLAIMS)
    encoded["dose"] = 1 << 256
    with pytest.raises(OutOfRange):
        issue_credential(issuer, VACCINATION_SCHEMA, encoded, request, "s-r", registry, rng)


def test_tampered_partial_rejected(issuer, registry):
    rng = DeterministicRng(b"tamper")
    ls = create_link_secret(rng)
    request, pending = begin_issuance(issuer.public, ls, "6e" * 32, rng=rng)
    encoded = encode_claims(VACCINATION_SCHEMA, RAW_CLAIMS)
    partial, _, _ = issue_credential(
        issuer, VACCINATION_SCHEMA, encoded, request, "serial-t", registry, rng
    )
    wrong = IssuancePartial(
        a=partial.a * issuer.public.s % issuer.public.modulus,
        e=partial.e,
        v_issuer=partial.v_issuer,
        serial=partial.serial,
        witness=partial.witness,
    )
    with pytest.raises(InvalidSignature):
        complete_credential(
            issuer.public, VACCINATION_SCHEMA, pending, wrong, RAW_CLAIMS, ls, "did:vax:i"
        )
    # e outside the prime window is rejected before any algebra
    wrong_e = IssuancePartial(
        a=partial.a, e=17, v_issuer=partial.v_issuer,
        serial=partial.serial, witness=partial.witness,
    )
    with pytest.raises(InvalidSignature):
        complete_credential(
            issuer.public, VACCINATION_SCHEMA, pending, wrong_e, RAW_CLAIMS, ls, "did:vax:i"
        )


def test_credential_dict_roundtrip(issuer, registry):
    from vaxpass.anoncreds.holder import Credential

    cred, _, _ = _issue_once(issuer, registry)
    again = Credential.from_dict(cred.to_dict())
    assert again == cred


def test_two_credentials_share_no_signature_material(issuer, registry):
    cred1, registry2, _ = _issue_once(issuer, registry, b"c1", serial="serial-a")
    cred2, _, _ = _issue_once(issuer, registry2, b"c2", serial="serial-b")
    assert cred1.e != cred2.e
    assert cred1.a != cred2.a
    assert cred1.witness.handle != cred2.witness.handle
