"""Vaccination record intake and validation."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..anoncreds.schema import VACCINATION_SCHEMA, encode_claims
from ..errors import BadFormat, MissingField, VaxPassError

FIELDS = VACCINATION_SCHEMA.claim_names()
_STRING_FIELDS = tuple(name for name in FIELDS if name != "dose")


@dataclass(frozen=True)
class VaccinationRecord:
    full_name: str
    birth_date: str
    pathogen: str
    laboratory: str
    dose: int
    vaccination_date: str
    location: str

    def claims(self) -> dict:
        return asdict(self)


def parse_record(data) -> VaccinationRecord:
    """Validate raw intake data; the serial is assigned later, at issuance."""
    if not isinstance(data, dict):
        raise BadFormat("record must be a JSON object")
    for name in FIELDS:
        if name not in data or data[name] is None or data[name] == "":
            raise MissingField(name)
    for name in _STRING_FIELDS:
        if not isinstance(data[name], str):
            raise BadFormat(f"{name} must be a string")
    dose = data["dose"]
    if isinstance(dose, bool) or not isinstance(dose, int):
        raise BadFormat("dose must be an integer")
    if dose < 1:
        raise BadFormat("dose must be at least 1")
    record = VaccinationRecord(**{name: data[name] for name in FIELDS})
    try:
        encode_claims(VACCINATION_SCHEMA, record.claims())
    except (VaxPassError, ValueError, TypeError) as exc:
        raise BadFormat(str(exc)) from exc
    return record
