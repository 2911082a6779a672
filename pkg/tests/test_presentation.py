import pytest

from vaxpass.anoncreds.holder import begin_issuance, complete_credential, create_link_secret
from vaxpass.anoncreds.issuer import issue_credential, issuer_keygen
from vaxpass.anoncreds.presentation import (
    LIST_CHECK_FAILED,
    MISSING_REVEALED,
    NONCE_MISMATCH,
    PROOF_INVALID,
    SCHEMA_MISMATCH,
    STALE_ACCUMULATOR,
    AllowedList,
    Predicate,
    PresentationRequest,
    build_presentation,
    verify_presentation,
)
from vaxpass.anoncreds.schema import VACCINATION_SCHEMA, days_since_epoch
from vaxpass.canonical import canonical_json
from vaxpass.crypto.arith import DeterministicRng
from vaxpass.errors import BadTemplate, CannotSatisfy, StaleWitness
from vaxpass.revocation import registry_init, registry_revoke, witness_update

RAW_CLAIMS = {
    "full_name": "Ana Lima",
    "birth_date": "2000-01-01",
    "pathogen": "SARS-CoV-2",
    "laboratory": "LabX",
    "dose": 2,
    "vaccination_date": "2021-06-15",
    "location": "Clinic 7",
}


@pytest.fixture(scope="module")
def world(tparams):
    """One issuer, one registry, one issued credential."""
    rng = DeterministicRng(b"world")
    issuer = issuer_keygen(tparams, VACCINATION_SCHEMA, rng)
    registry = registry_init(tparams, "reg-main", rng)
    ls = create_link_secret(rng)
    request, pending = begin_issuance(issuer.public, ls, "ab" * 32, rng=rng)
    from vaxpass.anoncreds.schema import encode_claims

    partial, registry, delta = issue_credential(
        issuer, VACCINATION_SCHEMA, encode_claims(VACCINATION_SCHEMA, RAW_CLAIMS),
        request, "serial-100", registry, rng,
    )
    cred = complete_credential(
        issuer.public, VACCINATION_SCHEMA, pending, partial, RAW_CLAIMS, ls, "did:vax:abc"
    )
    return {"issuer": issuer, "registry": registry, "cred": cred}


def _request(**kw):
    defaults = dict(
        request_id="req-1",
        nonce="cd" * 32,
        schema_id=VACCINATION_SCHEMA.schema_id,
        revealed=("pathogen",),
        predicates=(Predicate("dose", "ge", 1),),
        allowed=(),
        created_at=1_700_000_000,
        ttl_seconds=600,
    )
    defaults.update(kw)
    return PresentationRequest(**defaults)


def _build(world, tparams, request, rng_tag=b"pres"):
    registry = world["registry"]
    return build_presentation(
        tparams,
        world["issuer"].public,
        VACCINATION_SCHEMA,
        world["cred"],
        request,
        registry.public,
        registry.value,
        registry.epoch,
        DeterministicRng(rng_tag),
    )


def _verify(world, tparams, request, pres):
    registry = world["registry"]
    return verify_presentation(
        tparams,
        world["issuer"].public,
        VACCINATION_SCHEMA,
        request,
        pres,
        registry.public,
        registry.value,
        registry.epoch,
    )


def test_reveal_and_dose_predicate(world, tparams):
    request = _request()
    pres = _build(world, tparams, request)
    result = _verify(world, tparams, request, pres)
    assert result.accepted, result.reason
    assert result.revealed == {"pathogen": "SARS-CoV-2"}


def test_unsatisfiable_dose_predicate(world, tparams):
    request = _request(predicates=(Predicate("dose", "ge", 3),))
    with pytest.raises(CannotSatisfy):
        _build(world, tparams, request)


def test_date_window_predicates(world, tparams):
    request = _request(
        revealed=(),
        predicates=(
            Predicate("vaccination_date", "ge", days_since_epoch("2021-01-01")),
            Predicate("vaccination_date", "le", days_since_epoch("2021-12-31")),
            Predicate("birth_date", "le", days_since_epoch("2003-06-15")),
        ),
    )
    pres = _build(world, tparams, request)
    result = _verify(world, tparams, request, pres)
    assert result.accepted, result.reason
    assert result.revealed == {}


def test_allowed_laboratory_list_hides_which(world, tparams):
    request = _request(
        revealed=(),
        predicates=(),
        allowed=(AllowedList("laboratory", ("LabX", "LabY", "LabZ")),),
    )
    pres = _build(world, tparams, request)
    result = _verify(world, tparams, request, pres)
    assert result.accepted, result.reason
    # the presentation must not leak which laboratory matched
    blob = canonical_json(pres)
    assert b"LabX" not in blob
    from vaxpass.anoncreds.schema import AttributeSpec, encode_attribute

    enc = encode_attribute(AttributeSpec("laboratory", "hash"), "LabX")
    assert str(enc).encode() not in blob


def test_value_outside_allowed_list(world, tparams):
    request = _request(
        revealed=(), predicates=(),
        allowed=(AllowedList("laboratory", ("LabY", "LabZ")),),
    )
    with pytest.raises(CannotSatisfy):
        _build(world, tparams, request)


def test_combined_request(world, tparams):
    request = _request(
        revealed=("pathogen",),
        predicates=(
            Predicate("dose", "ge", 1),
            Predicate("vaccination_date", "ge", days_since_epoch("2021-01-01")),
        ),
        allowed=(AllowedList("laboratory", ("LabX", "LabY")),),
    )
    pres = _build(world, tparams, request)
    result = _verify(world, tparams, request, pres)
    assert result.accepted, result.reason


def test_presentations_are_unlinkable(world, tparams):
    request = _request()
    p1 = _build(world, tparams, request, b"pres-1")
    p2 = _build(world, tparams, request, b"pres-2")
    assert p1["a_prime"] != p2["a_prime"]
    assert p1["proof"] != p2["proof"]
    assert _verify(world, tparams, request, p1).accepted
    assert _verify(world, tparams, request, p2).accepted


def test_hidden_attributes_never_serialized(world, tparams):
    request = _request()
    pres = _build(world, tparams, request)
    blob = canonical_json(pres)
    cred = world["cred"]
    # raw values of hidden claims; one-digit values like the dose count
    # are skipped because any digit appears inside serialized big numbers
    for name, raw in RAW_CLAIMS.items():
        if name == "pathogen" or len(str(raw)) < 3:
            continue
        assert str(raw).encode() not in blob, name
    # encoded values, decimal and hex; scanning is only meaningful for
    # values long enough that an accidental substring match is unlikely
    for name, m in cred.attrs.items():
        if name == "pathogen" or m <= 1 << 64:
            continue
        assert str(m).encode() not in blob, name
        assert format(m, "x").encode() not in blob, name
    assert str(cred.a).encode() not in blob
    assert str(cred.e).encode() not in blob
    assert str(cred.v).encode() not in blob


def test_nonce_mismatch_rejected(world, tparams):
    request = _request()
    pres = _build(world, tparams, request)
    other = _request(nonce="ee" * 32)
    result = _verify(world, tparams, other, pres)
    assert not result.accepted and result.reason == NONCE_MISMATCH


def test_replayed_presentation_fails_fresh_request(world, tparams):
    request = _request()
    pres = _build(world, tparams, request)
    fresh = _request(request_id="req-2", nonce="ff" * 32)
    result = _verify(world, tparams, fresh, pres)
    assert not result.accepted and result.reason == NONCE_MISMATCH


def test_tampered_revealed_value_rejected(world, tparams):
    request = _request()
    pres = _build(world, tparams, request)
    pres = dict(pres, revealed={"pathogen": "MERS-CoV"})
    result = _verify(world, tparams, request, pres)
    assert not result.accepted and result.reason == PROOF_INVALID


def test_missing_revealed_rejected(world, tparams):
    request = _request()
    pres = _build(world, tparams, request)
    pres = dict(pres, revealed={})
    result = _verify(world, tparams, request, pres)
    assert not result.accepted and result.reason == MISSING_REVEALED


def test_stale_accumulator_rejected(world, tparams):
    request = _request()
    pres = _build(world, tparams, request)
    registry = world["registry"]
    result = verify_presentation(
        tparams, world["issuer"].public, VACCINATION_SCHEMA, request, pres,
        registry.public, registry.value, registry.epoch + 1,
    )
    assert not result.accepted and result.reason == STALE_ACCUMULATOR


def test_schema_mismatch_rejected(world, tparams):
    request = _request()
    pres = dict(_build(world, tparams, request), schema_id="other/1.0")
    result = _verify(world, tparams, request, pres)
    assert not result.accepted and result.reason == SCHEMA_MISMATCH


def test_tampered_proof_parts_rejected(world, tparams):
    import copy

    request = _request(
        allowed=(AllowedList("laboratory", ("LabX", "LabY")),),
    )
    pres = _build(world, tparams, request)

    bad = copy.deepcopy(pres)
    bad["lists"][0]["aux"] = int(bad["lists"][0]["aux"]) * 2
    result = _verify(world, tparams, request, bad)
    assert not result.accepted

    bad = copy.deepcopy(pres)
    bad["proof"]["challenge"] ^= 1
    result = _verify(world, tparams, request, bad)
    assert not result.accepted

    bad = copy.deepcopy(pres)
    bad["nonrev"]["c_w"] = int(bad["nonrev"]["c_w"]) * 3
    result = _verify(world, tparams, request, bad)
    assert not result.accepted


def test_revoked_credential_cannot_present(world, tparams):
    registry = world["registry"]
    cred = world["cred"]
    registry2, delta = registry_revoke(registry, "serial-100")
    # witness update refuses: the handle was revoked
    from vaxpass.errors import Revoked

    with pytest.raises(Revoked):
        witness_update(registry2.public, cred.witness, [delta])
    # building against the new accumulator with a stale witness fails
    with pytest.raises(StaleWitness):
        build_presentation(
            tparams, world["issuer"].public, VACCINATION_SCHEMA, cred, _request(),
            registry2.public, registry2.value, registry2.epoch, DeterministicRng(b"x"),
        )
    # replaying an old presentation fails the verifier's fresh view
    old = _build(world, tparams, _request())
    result = verify_presentation(
        tparams, world["issuer"].public, VACCINATION_SCHEMA, _request(), old,
        registry2.public, registry2.value, registry2.epoch,
    )
    assert not result.accepted and result.reason == STALE_ACCUMULATOR


def test_bad_templates_rejected(world, tparams):
    with pytest.raises(BadTemplate):
        _request(revealed=("link_secret",)).validate(VACCINATION_SCHEMA)
    with pytest.raises(BadTemplate):
        _request(predicates=(Predicate("laboratory", "ge", 1),)).validate(VACCINATION_SCHEMA)
    with pytest.raises(BadTemplate):
        _request(predicates=(Predicate("dose", "gt", 1),)).validate(VACCINATION_SCHEMA)
    with pytest.raises(BadTemplate):
        _request(allowed=(AllowedList("laboratory", ()),)).validate(VACCINATION_SCHEMA)
    with pytest.raises(BadTemplate):
        _request(revealed=("no_such",)).validate(VACCINATION_SCHEMA)
    with pytest.raises(BadTemplate):
        _request(nonce="short").validate(VACCINATION_SCHEMA)


def test_request_dict_roundtrip():
    request = _request(
        allowed=(AllowedList("laboratory", ("LabX",)),),
        predicates=(Predicate("dose", "ge", 2), Predicate("birth_date", "le", 20000)),
    )
    assert PresentationRequest.from_dict(request.to_dict()) == request
