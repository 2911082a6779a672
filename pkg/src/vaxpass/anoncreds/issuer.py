"""Issuer side of the credential signature scheme.

A credential is a triple (A, e, v) over the issuer's own hidden-order
modulus satisfying

    Z == A**e * S**v * prod(R_i ** m_i)   (mod n)

for the encoded attribute vector m. Issuance is blind in the link
secret: the holder sends U = R_0**ls * S**v' with a proof of knowledge,
and the issuer completes the signature without ever seeing ls. The
signing exponent e is a fresh prime from a fixed window chosen so that
e exceeds any attribute value with statistical margin; v is split
between holder (v') and issuer (v'') so neither controls it alone.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from ..canonical import canonical_json
from ..crypto import arith
from ..crypto.arith import Rng, make_rng
from ..crypto.params import MSG_BITS, SystemParams
from ..crypto.sigma import Relation, SigmaProof, Statement, prove, verify
from ..crypto.transcript import Transcript
from ..errors import BadBlinding, OutOfRange
from ..revocation import (
    MembershipWitness,
    RegistryDelta,
    RegistryState,
    registry_add,
)
from .schema import LINK_SECRET, REVOCATION_HANDLE, CredentialSchema

# signing exponents: primes in [2**336, 2**336 + 2**120)
E_LO = 1 << 336
E_HI = E_LO + (1 << 120)
E_BITS = 337


def v_bits(modulus_bits: int) -> int:
    """Width of each blinding share; the sum v' + v'' gains one bit."""
    return modulus_bits + 80


@dataclass(frozen=True)
class IssuerPublicKey:
    schema_id: str
    modulus: int
    s: int
    z: int
    r: tuple[int, ...]

    @property
    def cred_def_id(self) -> str:
        digest = hashlib.sha256(canonical_json(self.to_dict())).hexdigest()[:32]
        return f"creddef:{digest}"

    def r_for(self, schema: CredentialSchema, name: str) -> int:
        return self.r[schema.attribute_names().index(name)]

    def to_dict(self) -> dict:
        return {
            "schema_id": self.schema_id,
            "modulus": str(self.modulus),
            "s": str(self.s),
            "z": str(self.z),
            "r": [str(x) for x in self.r],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IssuerPublicKey":
        return cls(
            schema_id=d["schema_id"],
            modulus=int(d["modulus"]),
            s=int(d["s"]),
            z=int(d["z"]),
            r=tuple(int(x) for x in d["r"]),
        )


@dataclass(frozen=True)
class IssuerKeyPair:
    public: IssuerPublicKey
    p: int
    q: int

    @property
    def group_order(self) -> int:
        return (self.p - 1) // 2 * ((self.q - 1) // 2)


@dataclass(frozen=True)
class IssuanceRequest:
    """Holder's blinded contribution plus its proof of well-formedness."""

    u: int
    proof: dict
    nonce: str

    def to_dict(self) -> dict:
        return {"u": str(self.u), "proof": self.proof, "nonce": self.nonce}

    @classmethod
    def from_dict(cls, d: dict) -> "IssuanceRequest":
        return cls(u=int(d["u"]), proof=d["proof"], nonce=str(d["nonce"]))


@dataclass(frozen=True)
class IssuancePartial:
    """Issuer's half of a credential, sent back to the holder."""

    a: int
    e: int
    v_issuer: int
    serial: str
    witness: MembershipWitness

    def to_dict(self) -> dict:
        return {
            "a": str(self.a),
            "e": str(self.e),
            "v_issuer": str(self.v_issuer),
            "serial": self.serial,
            "witness": self.witness.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IssuancePartial":
        return cls(
            a=int(d["a"]),
            e=int(d["e"]),
            v_issuer=int(d["v_issuer"]),
            serial=str(d["serial"]),
            witness=MembershipWitness.from_dict(d["witness"]),
        )


def issuer_keygen(
    params: SystemParams, schema: CredentialSchema, rng: Rng | None = None
) -> IssuerKeyPair:
    """Fresh issuer key over its own modulus; one R base per attribute.

    Every public element is a power of the quadratic residue S, with
    exponents uniform modulo the group order (which the issuer knows),
    so Z and all R_i land in the same cyclic subgroup.
    """
    rng = rng or make_rng()
    if params.profile == "toy-fixed":
        n, p, q = params.n, 23, 47
    else:
        from ..crypto.params import generate_modulus

        n, p, q = generate_modulus(params.modulus_bits, rng)
    order = (p - 1) // 2 * ((q - 1) // 2)
    s = arith.random_qr(n, rng)
    z = pow(s, 2 + rng.below(order), n)
    r = tuple(pow(s, 2 + rng.below(order), n) for _ in range(schema.arity))
    public = IssuerPublicKey(schema_id=schema.schema_id, modulus=n, s=s, z=z, r=r)
    return IssuerKeyPair(public=public, p=p, q=q)


def _request_statement(pub: IssuerPublicKey, u: int) -> Statement:
    return Statement(
        relations=(
            Relation(pub.modulus, u % pub.modulus, (pub.r[0], pub.s), ("ls", "v'")),
        ),
        secret_bits={"ls": MSG_BITS, "v'": v_bits(pub.modulus.bit_length())},
    )


def _request_transcript(pub: IssuerPublicKey, nonce: str) -> Transcript:
    t = Transcript(b"vaxpass/issuance-request")
    t.absorb(b"cred_def", pub.cred_def_id.encode())
    t.absorb(b"nonce", nonce.encode())
    return t


def make_issuance_request(
    pub: IssuerPublicKey, link_secret: int, nonce: str, rng: Rng | None = None
) -> tuple[IssuanceRequest, int]:
    """Holder-side: blind the link secret. Returns (request, v') and the
    holder must keep v' for :func:`complete_credential`."""
    rng = rng or make_rng()
    if not 0 <= link_secret < (1 << MSG_BITS):
        raise OutOfRange("link secret outside the message bound")
    n = pub.modulus
    v_prime = rng.below(1 << v_bits(n.bit_length()))
    u = pow(pub.r[0], link_secret, n) * pow(pub.s, v_prime, n) % n
    proof = prove(
        None,
        _request_statement(pub, u),
        {"ls": link_secret, "v'": v_prime},
        _request_transcript(pub, nonce),
        rng,
    )
    return IssuanceRequest(u=u, proof=proof.to_dict(), nonce=nonce), v_prime


def verify_issuance_request(pub: IssuerPublicKey, request: IssuanceRequest) -> None:
    if not 0 < request.u < pub.modulus:
        raise BadBlinding("U outside the issuer group")
    try:
        proof = SigmaProof.from_dict(request.proof)
    except Exception as exc:
        raise BadBlinding(f"unparseable blinding proof: {exc}") from exc
    ok = verify(
        None,
        _request_statement(pub, request.u),
        proof,
        _request_transcript(pub, request.nonce),
    )
    if not ok:
        raise BadBlinding("blinding proof failed")


def issue_credential(
    keypair: IssuerKeyPair,
    schema: CredentialSchema,
    claims_encoded: dict[str, int],
    request: IssuanceRequest,
    serial: str,
    registry: RegistryState,
    rng: Rng | None = None,
) -> tuple[IssuancePartial, RegistryState, RegistryDelta]:
    """Sign the attribute vector blindly and register its handle.

    Returns the partial credential (with the fresh membership witness
    inside), the advanced registry state, and the delta to publish.
    """
    rng = rng or make_rng()
    pub = keypair.public
    n = pub.modulus
    verify_issuance_request(pub, request)

    names = schema.attribute_names()
    for name in names[1:-1]:
        if name not in claims_encoded:
            raise OutOfRange(f"missing encoded claim {name!r}")
        if not 0 <= claims_encoded[name] < (1 << MSG_BITS):
            raise OutOfRange(f"claim {name!r} outside the message bound")

    registry2, witness, delta = registry_add(registry, serial)
    handle = witness.handle

    e = arith.random_prime_in(E_LO, E_HI, rng)
    v_issuer = rng.below(1 << v_bits(n.bit_length()))

    acc = request.u % n
    acc = acc * pow(pub.s, v_issuer, n) % n
    for idx, name in enumerate(names):
        if name == LINK_SECRET:
            continue
        m = handle if name == REVOCATION_HANDLE else claims_encoded[name]
        acc = acc * pow(pub.r[idx], m, n) % n
    base = pub.z * pow(acc, -1, n) % n
    a = pow(base, pow(e, -1, keypair.group_order), n)

    partial = IssuancePartial(a=a, e=e, v_issuer=v_issuer, serial=serial, witness=witness)
    return partial, registry2, delta


def signature_holds(
    pub: IssuerPublicKey,
    schema: CredentialSchema,
    attrs: dict[str, int],
    a: int,
    e: int,
    v: int,
) -> bool:
    """Check Z == A^e S^v prod(R_i^m_i) for a full attribute vector."""
    n = pub.modulus
    lhs = pow(a, e, n) * pow(pub.s, v, n) % n
    for idx, name in enumerate(schema.attribute_names()):
        lhs = lhs * pow(pub.r[idx], attrs[name], n) % n
    return lhs == pub.z % n
