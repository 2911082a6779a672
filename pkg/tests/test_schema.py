import hashlib

import pytest

from oracles import days_from_civil
from vaxpass.anoncreds.schema import (
    LINK_SECRET,
    REVOCATION_HANDLE,
    VACCINATION_SCHEMA,
    AttributeSpec,
    CredentialSchema,
    days_since_epoch,
    encode_attribute,
    encode_claims,
)
from vaxpass.errors import SchemaViolation


def test_vaccination_schema_shape():
    names = VACCINATION_SCHEMA.attribute_names()
    assert names[0] == LINK_SECRET
    assert names[-1] == REVOCATION_HANDLE
    assert names[1:-1] == (
        "full_name",
        "birth_date",
        "pathogen",
        "laboratory",
        "dose",
        "vaccination_date",
        "location",
    )
    assert VACCINATION_SCHEMA.arity == 9


def test_days_encoding_known_value():
    # 2000-01-01 is 10957 days after the epoch
    assert days_since_epoch("2000-01-01") == 10957
    assert days_since_epoch("1970-01-01") == 0


def test_days_encoding_matches_independent_calendar():
    cases = [(1970, 1, 2), (1999, 12, 31), (2021, 6, 15), (2100, 3, 1), (2024, 2, 29)]
    for y, m, d in cases:
        iso = f"{y:04d}-{m:02d}-{d:02d}"
        assert days_since_epoch(iso) == days_from_civil(y, m, d)


def test_days_encoding_rejects_bad_input():
    with pytest.raises(SchemaViolation):
        days_since_epoch("not-a-date")
    with pytest.raises(SchemaViolation):
        days_since_epoch("2021-02-30")
    with pytest.raises(SchemaViolation):
        days_since_epoch("1969-12-31")


def test_hash_encoding_known_value():
    spec = AttributeSpec("laboratory", "hash")
    want = int.from_bytes(hashlib.sha256(b"LabX").digest()[:31], "big")
    assert want == 272116626067890037650345033776845886643511877457263356469662566378116547758
    assert encode_attribute(spec, "LabX") == want
    assert encode_attribute(spec, "LabX").bit_length() <= 248


def test_small_int_encoding_bounds():
    spec = AttributeSpec("dose", "small_int")
    assert encode_attribute(spec, 2) == 2
    assert encode_attribute(spec, "3") == 3
    with pytest.raises(SchemaViolation):
        encode_attribute(spec, -1)
    with pytest.raises(SchemaViolation):
        encode_attribute(spec, 1 << 32)
    with pytest.raises(SchemaViolation):
        encode_attribute(spec, "two")


def test_encode_claims_requires_exact_claim_set():
    raw = {
        "full_name": "Ana Lima",
        "birth_date": "2000-01-01",
        "pathogen": "SARS-CoV-2",
        "laboratory": "LabX",
        "dose": 2,
        "vaccination_date": "2021-06-15",
        "location": "Clinic 7",
    }
    encoded = encode_claims(VACCINATION_SCHEMA, raw)
    assert encoded["birth_date"] == 10957
    assert encoded["dose"] == 2
    with pytest.raises(SchemaViolation):
        encode_claims(VACCINATION_SCHEMA, {**raw, "extra": "x"})
    missing = dict(raw)
    del missing["dose"]
    with pytest.raises(SchemaViolation):
        encode_claims(VACCINATION_SCHEMA, missing)


def test_schema_validation_rules():
    with pytest.raises(SchemaViolation):
        CredentialSchema("s", (AttributeSpec("a", "hash"), AttributeSpec("a", "hash")))
    with pytest.raises(SchemaViolation):
        CredentialSchema("s", (AttributeSpec(LINK_SECRET, "hash"),))
    with pytest.raises(SchemaViolation):
        CredentialSchema("s", (AttributeSpec("a", "float"),))
    with pytest.raises(SchemaViolation):
        CredentialSchema("s", ())


def test_schema_dict_roundtrip():
    again = CredentialSchema.from_dict(VACCINATION_SCHEMA.to_dict())
    assert again == VACCINATION_SCHEMA
