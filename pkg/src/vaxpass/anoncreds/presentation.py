"""Zero-knowledge presentations of vaccination credentials.

A presentation answers a verifier's request using one aggregated proof:

- knowledge of a credential signature (randomized so repeated
  presentations are unlinkable), with requested claims revealed and
  everything else hidden;
- one inequality proof per predicate (date windows, dose counts);
- one OR proof per allowed-value list (e.g. approved laboratories);
- non-revocation of the credential's handle against the accumulator.

All sub-proofs share one Fiat-Shamir challenge bound to the verifier's
nonce, so no part can be replayed or remixed on its own. The hidden
attributes appear only inside statistically blinded responses.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

from ..canonical import canonical_json
from ..crypto.arith import Rng, make_rng
from ..crypto.params import MSG_BITS, SystemParams
from ..crypto.sigma import ProofBuilder, Relation, SigmaProof, Statement
from ..crypto.transcript import Transcript
from ..errors import BadTemplate, CannotSatisfy, StaleWitness
from ..revocation import HANDLE_BITS, RegistryPublic, nonrevocation_parts, verify_witness
from .holder import Credential
from .issuer import E_BITS, IssuerPublicKey
from .predicates import PREDICATE_BITS, compare_parts, membership_parts
from .schema import (
    LINK_SECRET,
    RESERVED,
    REVOCATION_HANDLE,
    CredentialSchema,
    encode_attribute,
)

# verifier-reported failure reasons
UNTRUSTED_ISSUER = "UNTRUSTED_ISSUER"
SCHEMA_MISMATCH = "SCHEMA_MISMATCH"
NONCE_MISMATCH = "NONCE_MISMATCH"
MISSING_REVEALED = "MISSING_REVEALED"
RESERVED_ATTRIBUTE = "RESERVED_ATTRIBUTE"
STALE_ACCUMULATOR = "STALE_ACCUMULATOR"
SIGNATURE_CHECK_FAILED = "SIGNATURE_CHECK_FAILED"
PREDICATE_CHECK_FAILED = "PREDICATE_CHECK_FAILED"
LIST_CHECK_FAILED = "LIST_CHECK_FAILED"
NONREVOCATION_CHECK_FAILED = "NONREVOCATION_CHECK_FAILED"
PROOF_INVALID = "PROOF_INVALID"


@dataclass(frozen=True)
class Predicate:
    attr: str
    op: str  # "ge" | "le"
    bound: int  # encoded-domain integer

    def to_dict(self) -> dict:
        return {"attr": self.attr, "op": self.op, "bound": self.bound}

    @classmethod
    def from_dict(cls, d: dict) -> "Predicate":
        return cls(attr=d["attr"], op=d["op"], bound=int(d["bound"]))


@dataclass(frozen=True)
class AllowedList:
    attr: str
    values: tuple[str, ...]  # raw-domain values

    def to_dict(self) -> dict:
        return {"attr": self.attr, "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "AllowedList":
        return cls(attr=d["attr"], values=tuple(str(v) for v in d["values"]))


def new_nonce() -> str:
    return secrets.token_hex(32)


@dataclass(frozen=True)
class PresentationRequest:
    request_id: str
    nonce: str
    schema_id: str
    revealed: tuple[str, ...] = ()
    predicates: tuple[Predicate, ...] = ()
    allowed: tuple[AllowedList, ...] = ()
    created_at: int = 0
    ttl_seconds: int = 600

    def validate(self, schema: CredentialSchema) -> None:
        if schema.schema_id != self.schema_id:
            raise BadTemplate(f"request targets schema {self.schema_id!r}")
        claims = set(schema.claim_names())
        seen = set()
        for name in self.revealed:
            if name in RESERVED:
                raise BadTemplate(f"{name} can never be revealed")
            if name not in claims:
                raise BadTemplate(f"unknown attribute {name!r}")
            if name in seen:
                raise BadTemplate(f"duplicate revealed attribute {name!r}")
            seen.add(name)
        for pred in self.predicates:
            if pred.attr in RESERVED or pred.attr not in claims:
                raise BadTemplate(f"predicate over unavailable attribute {pred.attr!r}")
            if schema.spec_for(pred.attr).encoding not in ("days", "small_int"):
                raise BadTemplate(f"{pred.attr!r} is not an ordered attribute")
            if pred.op not in ("ge", "le"):
                raise BadTemplate(f"unknown predicate op {pred.op!r}")
            if not 0 <= pred.bound < (1 << PREDICATE_BITS):
                raise BadTemplate("predicate bound outside the 32-bit window")
        for lst in self.allowed:
            if lst.attr in RESERVED or lst.attr not in claims:
                raise BadTemplate(f"list over unavailable attribute {lst.attr!r}")
            if not lst.values:
                raise BadTemplate("empty allowed list")
            if len(lst.values) > 64:
                raise BadTemplate("allowed list too long")
        if not self.nonce or len(self.nonce) < 32:
            raise BadTemplate("nonce too short")

    def is_expired(self, now: int) -> bool:
        return now > self.created_at + self.ttl_seconds

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "nonce": self.nonce,
            "schema_id": self.schema_id,
            "revealed": list(self.revealed),
            "predicates": [p.to_dict() for p in self.predicates],
            "allowed": [a.to_dict() for a in self.allowed],
            "created_at": self.created_at,
            "ttl_seconds": self.ttl_seconds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PresentationRequest":
        return cls(
            request_id=str(d["request_id"]),
            nonce=str(d["nonce"]),
            schema_id=str(d["schema_id"]),
            revealed=tuple(str(x) for x in d.get("revealed", ())),
            predicates=tuple(Predicate.from_dict(p) for p in d.get("predicates", ())),
            allowed=tuple(AllowedList.from_dict(a) for a in d.get("allowed", ())),
            created_at=int(d.get("created_at", 0)),
            ttl_seconds=int(d.get("ttl_seconds", 600)),
        )


@dataclass(frozen=True)
class VerificationResult:
    accepted: bool
    reason: str | None = None
    revealed: dict = field(default_factory=dict)


def _attr_bits(name: str) -> int:
    return HANDLE_BITS if name == REVOCATION_HANDLE else MSG_BITS


def _vt_bits(modulus_bits: int) -> int:
    # v' + v'' is modulus_bits+81 wide; subtracting e*rho adds e's 337
    # bits on top of the randomizer's modulus_bits+80
    return modulus_bits + 418


def _presentation_transcript(
    ipub: IssuerPublicKey,
    registry: RegistryPublic,
    acc_value: int,
    acc_epoch: int,
    request: PresentationRequest,
    revealed_raw: dict,
) -> Transcript:
    t = Transcript(b"vaxpass/presentation")
    t.absorb(b"cred_def", ipub.cred_def_id.encode())
    t.absorb(b"registry", registry.registry_id.encode())
    t.absorb_int(b"acc_epoch", acc_epoch)
    t.absorb_int(b"acc_value", acc_value)
    t.absorb(b"request", canonical_json(request.to_dict()))
    t.absorb(b"revealed", canonical_json({k: str(v) for k, v in revealed_raw.items()}))
    return t


def _signature_statement(
    ipub: IssuerPublicKey,
    schema: CredentialSchema,
    a_prime: int,
    revealed_encoded: dict[str, int],
) -> Statement:
    n = ipub.modulus
    names = schema.attribute_names()
    target = ipub.z
    bases = [a_prime, ipub.s]
    secrets = ["sig.e", "sig.v"]
    secret_bits = {"sig.e": E_BITS, "sig.v": _vt_bits(n.bit_length())}
    for idx, name in enumerate(names):
        if name in revealed_encoded:
            target = target * pow(ipub.r[idx], -revealed_encoded[name], n) % n
        else:
            bases.append(ipub.r[idx])
            secrets.append(f"attr.{name}")
            secret_bits[f"attr.{name}"] = _attr_bits(name)
    return Statement(
        relations=(Relation(n, target, tuple(bases), tuple(secrets)),),
        secret_bits=secret_bits,
    )


def _assemble(
    builder: ProofBuilder,
    params: SystemParams,
    ipub: IssuerPublicKey,
    schema: CredentialSchema,
    request: PresentationRequest,
    registry: RegistryPublic,
    acc_value: int,
    publics: dict,
    credential: Credential | None = None,
    rho: int | None = None,
    rng: Rng | None = None,
) -> dict:
    """Build the aggregate statement; identical on both sides.

    Prover passes the credential (plus its signature randomizer rho);
    the verifier passes the presentation's public pieces instead.
    """
    n = ipub.modulus
    issuer_rand_bits = n.bit_length() + params.stat_slack
    proving = credential is not None

    revealed_encoded = {
        name: encode_attribute(schema.spec_for(name), publics["revealed"][name])
        for name in request.revealed
    }

    sig_witness = None
    if proving:
        a_prime = credential.a * pow(ipub.s, rho, n) % n
        publics["a_prime"] = a_prime
        sig_witness = {
            "sig.e": credential.e,
            "sig.v": credential.v - credential.e * rho,
        }
        for name in schema.attribute_names():
            if name not in revealed_encoded:
                sig_witness[f"attr.{name}"] = credential.attrs[name]
    a_prime = int(publics["a_prime"])
    builder.add(
        "signature",
        _signature_statement(ipub, schema, a_prime, revealed_encoded),
        sig_witness,
    )

    pred_publics = publics.setdefault("predicates", [])
    for i, pred in enumerate(request.predicates):
        r_idx = schema.attribute_names().index(pred.attr)
        kwargs = dict(
            builder=builder,
            label=f"pred{i}",
            modulus=n,
            base_value=ipub.r[r_idx],
            base_rand=ipub.s,
            rand_bits=issuer_rand_bits,
            op=pred.op,
            bound=pred.bound,
            value_name=f"attr.{pred.attr}",
            value_bits=_attr_bits(pred.attr),
        )
        if proving:
            out = compare_parts(**kwargs, value=credential.attrs[pred.attr], rng=rng)
            pred_publics.append(out)
        else:
            compare_parts(**kwargs, publics=pred_publics[i])

    list_publics = publics.setdefault("lists", [])
    for i, lst in enumerate(request.allowed):
        r_idx = schema.attribute_names().index(lst.attr)
        spec = schema.spec_for(lst.attr)
        encoded_allowed = [encode_attribute(spec, v) for v in lst.values]
        kwargs = dict(
            builder=builder,
            label=f"list{i}",
            modulus=n,
            base_value=ipub.r[r_idx],
            base_rand=ipub.s,
            rand_bits=issuer_rand_bits,
            allowed=encoded_allowed,
            value_name=f"attr.{lst.attr}",
            value_bits=_attr_bits(lst.attr),
        )
        if proving:
            out = membership_parts(**kwargs, value=credential.attrs[lst.attr], rng=rng)
            list_publics.append(out)
        else:
            membership_parts(**kwargs, publics=list_publics[i])

    nonrev = nonrevocation_parts(
        builder,
        params,
        registry,
        acc_value,
        handle_name=f"attr.{REVOCATION_HANDLE}",
        publics=None if proving else publics["nonrev"],
        witness=credential.witness if proving else None,
        rng=rng,
    )
    if proving:
        publics["nonrev"] = nonrev
    return publics


def build_presentation(
    params: SystemParams,
    ipub: IssuerPublicKey,
    schema: CredentialSchema,
    credential: Credential,
    request: PresentationRequest,
    registry: RegistryPublic,
    acc_value: int,
    acc_epoch: int,
    rng: Rng | None = None,
) -> dict:
    """Produce a presentation answering ``request``, or raise
    :class:`CannotSatisfy` / :class:`StaleWitness` when impossible."""
    rng = rng or make_rng()
    request.validate(schema)
    if credential.schema_id != request.schema_id:
        raise CannotSatisfy("credential schema does not match the request")
    if credential.cred_def_id != ipub.cred_def_id:
        raise CannotSatisfy("credential was signed under a different key")
    if credential.witness.epoch != acc_epoch:
        raise StaleWitness(
            f"witness at epoch {credential.witness.epoch}, registry at {acc_epoch}"
        )
    if not verify_witness(registry, acc_value, credential.witness):
        raise StaleWitness("witness does not open the current accumulator")

    revealed_raw = {name: str(credential.raw[name]) for name in request.revealed}
    publics: dict = {"revealed": revealed_raw}
    transcript = _presentation_transcript(
        ipub, registry, acc_value, acc_epoch, request, revealed_raw
    )
    builder = ProofBuilder(params)
    rho = rng.below(1 << (ipub.modulus.bit_length() + params.stat_slack))
    _assemble(
        builder, params, ipub, schema, request, registry, acc_value,
        publics, credential=credential, rho=rho, rng=rng,
    )
    proof = builder.prove(transcript, rng)

    return {
        "request_id": request.request_id,
        "nonce": request.nonce,
        "schema_id": request.schema_id,
        "cred_def_id": ipub.cred_def_id,
        "registry_id": registry.registry_id,
        "acc_epoch": acc_epoch,
        "acc_value": acc_value,
        "a_prime": publics["a_prime"],
        "revealed": revealed_raw,
        "predicates": publics.get("predicates", []),
        "lists": publics.get("lists", []),
        "nonrev": publics["nonrev"],
        "proof": proof.to_dict(),
    }


_LABEL_REASONS = (
    ("signature", SIGNATURE_CHECK_FAILED),
    ("pred", PREDICATE_CHECK_FAILED),
    ("list", LIST_CHECK_FAILED),
    ("nonrev", NONREVOCATION_CHECK_FAILED),
)


def verify_presentation(
    params: SystemParams,
    ipub: IssuerPublicKey,
    schema: CredentialSchema,
    request: PresentationRequest,
    presentation: dict,
    registry: RegistryPublic,
    acc_value: int,
    acc_epoch: int,
) -> VerificationResult:
    """Check a presentation against the verifier's own view of the world.

    ``acc_value``/``acc_epoch`` are what the verifier considers current;
    a presentation built against anything else is rejected as stale.
    """
    try:
        request.validate(schema)
        if presentation.get("schema_id") != request.schema_id:
            return VerificationResult(False, SCHEMA_MISMATCH)
        if presentation.get("cred_def_id") != ipub.cred_def_id:
            return VerificationResult(False, SCHEMA_MISMATCH)
        if (
            presentation.get("request_id") != request.request_id
            or presentation.get("nonce") != request.nonce
        ):
            return VerificationResult(False, NONCE_MISMATCH)
        revealed = presentation.get("revealed", {})
        if set(revealed) != set(request.revealed):
            return VerificationResult(False, MISSING_REVEALED)
        if set(revealed) & RESERVED:
            return VerificationResult(False, RESERVED_ATTRIBUTE)
        if (
            int(presentation.get("acc_epoch", -1)) != acc_epoch
            or int(presentation.get("acc_value", 0)) != acc_value
            or presentation.get("registry_id") != registry.registry_id
        ):
            return VerificationResult(False, STALE_ACCUMULATOR)

        revealed_raw = {k: str(v) for k, v in revealed.items()}
        publics = {
            "revealed": revealed_raw,
            "a_prime": int(presentation["a_prime"]),
            "predicates": [
                {"aux": int(p["aux"]), "bits": [int(b) for b in p["bits"]]}
                for p in presentation.get("predicates", [])
            ],
            "lists": [{"aux": int(p["aux"])} for p in presentation.get("lists", [])],
            "nonrev": presentation["nonrev"],
        }
        if len(publics["predicates"]) != len(request.predicates):
            return VerificationResult(False, PREDICATE_CHECK_FAILED)
        if len(publics["lists"]) != len(request.allowed):
            return VerificationResult(False, LIST_CHECK_FAILED)

        transcript = _presentation_transcript(
            ipub, registry, acc_value, acc_epoch, request, revealed_raw
        )
        builder = ProofBuilder(params)
        _assemble(
            builder, params, ipub, schema, request, registry, acc_value, publics,
        )
        proof = SigmaProof.from_dict(presentation["proof"])
    except Exception:
        return VerificationResult(False, PROOF_INVALID)

    ok, label = builder.verify(proof, transcript)
    if ok:
        return VerificationResult(True, None, revealed_raw)
    reason = PROOF_INVALID
    for prefix, mapped in _LABEL_REASONS:
        if label and label.startswith(prefix):
            reason = mapped
            break
    return VerificationResult(False, reason)
