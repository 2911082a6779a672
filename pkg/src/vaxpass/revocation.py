"""Dynamic RSA-accumulator revocation registry.

The registry accumulates one 128-bit prime per credential:
``A = base ** prod(members) mod n``. Holders keep a membership witness
``w`` with ``w ** e == A`` and update it from published deltas; revoking
a member makes its witness impossible to repair (that would need an
e-th root of the new accumulator).

The registry modulus is generated independently of the system group and
its factorization is discarded, so not even the issuer can forge
witnesses; revocation recomputes the accumulator from the member list
instead of using trapdoor division.

Membership is proven in zero knowledge by blinding the witness,
``C_w = w * h**r_w``, and proving the multiplicative relations that tie
``C_w`` back to the accumulator value, plus a range proof pinning the
handle prime to its 128-bit window (which rules out the trivial
exponents an adversary could otherwise use).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .crypto import arith
from .crypto.arith import Rng, make_rng
from .crypto.params import SystemParams
from .crypto.rangeproof import range_parts
from .crypto.sigma import ProofBuilder, Relation, SigmaProof, Statement
from .crypto.transcript import Transcript
from .errors import (
    DuplicateHandle,
    EpochGap,
    NotMember,
    RegistryFull,
    Revoked,
)

HANDLE_BITS = 128


def handle_prime(serial: str) -> int:
    """The registry member for a credential serial: a 128-bit prime."""
    return arith.hash_to_prime(serial.encode("utf-8"), HANDLE_BITS)


@dataclass(frozen=True)
class RegistryPublic:
    registry_id: str
    modulus: int
    base: int
    g: int
    h: int
    capacity: int

    def to_dict(self) -> dict:
        return {
            "registry_id": self.registry_id,
            "modulus": str(self.modulus),
            "base": str(self.base),
            "g": str(self.g),
            "h": str(self.h),
            "capacity": self.capacity,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegistryPublic":
        return cls(
            registry_id=d["registry_id"],
            modulus=int(d["modulus"]),
            base=int(d["base"]),
            g=int(d["g"]),
            h=int(d["h"]),
            capacity=int(d["capacity"]),
        )


@dataclass(frozen=True)
class RegistryState:
    public: RegistryPublic
    value: int
    epoch: int
    members: frozenset[int]


@dataclass(frozen=True)
class MembershipWitness:
    registry_id: str
    handle: int
    value: int
    epoch: int

    def to_dict(self) -> dict:
        return {
            "registry_id": self.registry_id,
            "handle": str(self.handle),
            "value": str(self.value),
            "epoch": self.epoch,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MembershipWitness":
        return cls(
            registry_id=d["registry_id"],
            handle=int(d["handle"]),
            value=int(d["value"]),
            epoch=int(d["epoch"]),
        )


@dataclass(frozen=True)
class RegistryDelta:
    """One published accumulator mutation; big integers travel as strings."""

    registry_id: str
    epoch_from: int
    epoch_to: int
    added: tuple[int, ...]
    revoked: tuple[int, ...]
    value_after: int

    def to_dict(self) -> dict:
        return {
            "registry_id": self.registry_id,
            "epoch_from": self.epoch_from,
            "epoch_to": self.epoch_to,
            "added": [str(p) for p in self.added],
            "revoked": [str(p) for p in self.revoked],
            "value_after": str(self.value_after),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegistryDelta":
        return cls(
            registry_id=d["registry_id"],
            epoch_from=int(d["epoch_from"]),
            epoch_to=int(d["epoch_to"]),
            added=tuple(int(p) for p in d["added"]),
            revoked=tuple(int(p) for p in d["revoked"]),
            value_after=int(d["value_after"]),
        )


def registry_init(
    params: SystemParams,
    registry_id: str,
    rng: Rng | None = None,
    capacity: int = 1024,
) -> RegistryState:
    """Fresh empty registry; the toy profile reuses the fixed toy group."""
    if params.profile == "toy-fixed":
        public = RegistryPublic(
            registry_id=registry_id,
            modulus=params.n,
            base=params.g,
            g=params.g,
            h=params.h,
            capacity=capacity,
        )
    else:
        rng = rng or make_rng()
        from .crypto.params import generate_modulus

        n_acc, p, q = generate_modulus(params.modulus_bits, rng)
        del p, q
        public = RegistryPublic(
            registry_id=registry_id,
            modulus=n_acc,
            base=arith.hash_to_qr(n_acc, b"vaxpass/registry/base"),
            g=arith.hash_to_qr(n_acc, b"vaxpass/registry/g"),
            h=arith.hash_to_qr(n_acc, b"vaxpass/registry/h"),
            capacity=capacity,
        )
    return RegistryState(public=public, value=public.base, epoch=0, members=frozenset())


def registry_add_prime(
    state: RegistryState, prime: int
) -> tuple[RegistryState, MembershipWitness, RegistryDelta]:
    if prime in state.members:
        raise DuplicateHandle(f"prime {prime} already accumulated")
    if len(state.members) >= state.public.capacity:
        raise RegistryFull(f"registry {state.public.registry_id} is at capacity")
    n = state.public.modulus
    new_value = pow(state.value, prime, n)
    new_state = replace(
        state,
        value=new_value,
        epoch=state.epoch + 1,
        members=state.members | {prime},
    )
    # the old accumulator is exactly the product of everyone else
    witness = MembershipWitness(
        registry_id=state.public.registry_id,
        handle=prime,
        value=state.value,
        epoch=new_state.epoch,
    )
    delta = RegistryDelta(
        registry_id=state.public.registry_id,
        epoch_from=state.epoch,
        epoch_to=new_state.epoch,
        added=(prime,),
        revoked=(),
        value_after=new_value,
    )
    return new_state, witness, delta


def registry_add(state: RegistryState, serial: str):
    return registry_add_prime(state, handle_prime(serial))


def registry_revoke_prime(
    state: RegistryState, prime: int
) -> tuple[RegistryState, RegistryDelta]:
    if prime not in state.members:
        raise NotMember(f"prime {prime} is not accumulated")
    n = state.public.modulus
    remaining = state.members - {prime}
    # no trapdoor here: rebuild from the base over the surviving members
    value = state.public.base
    for p in sorted(remaining):
        value = pow(value, p, n)
    new_state = replace(
        state, value=value, epoch=state.epoch + 1, members=frozenset(remaining)
    )
    delta = RegistryDelta(
        registry_id=state.public.registry_id,
        epoch_from=state.epoch,
        epoch_to=new_state.epoch,
        added=(),
        revoked=(prime,),
        value_after=value,
    )
    return new_state, delta


def registry_revoke(state: RegistryState, serial: str):
    return registry_revoke_prime(state, handle_prime(serial))


def verify_witness(public: RegistryPublic, acc_value: int, witness: MembershipWitness) -> bool:
    return pow(witness.value, witness.handle, public.modulus) == acc_value % public.modulus


def witness_update(
    public: RegistryPublic, witness: MembershipWitness, deltas: list[RegistryDelta]
) -> MembershipWitness:
    """Advance a witness across published deltas, in epoch order.

    Deltas must chain gaplessly from the witness epoch. A delta revoking
    the witness's own handle raises :class:`Revoked`: no valid witness
    exists past that point.
    """
    n = public.modulus
    w = witness.value
    epoch = witness.epoch
    e = witness.handle
    for delta in sorted(deltas, key=lambda d: d.epoch_from):
        if delta.epoch_to <= epoch:
            continue
        if delta.epoch_from != epoch:
            raise EpochGap(f"witness at epoch {epoch}, delta starts at {delta.epoch_from}")
        if e in delta.revoked:
            raise Revoked(f"handle was revoked at epoch {delta.epoch_to}")
        for p in delta.added:
            if p != e:
                w = pow(w, p, n)
        for q in delta.revoked:
            # pre-revocation A equals A'**q, so with a*e + b*q == 1:
            # (w**b * A'**a)**e == A'**(q*b) * A'**(a*e) == A'
            g, a, b = arith.ext_gcd(e, q)
            if g != 1:
                raise Revoked("handle shares a factor with a revoked member")
            w = pow(w, b, n) * pow(delta.value_after, a, n) % n
        epoch = delta.epoch_to
    return replace(witness, value=w, epoch=epoch)


# --- zero-knowledge non-revocation -----------------------------------------

def _nonrev_bit_widths(public: RegistryPublic, params: SystemParams) -> dict[str, int]:
    rand_bits = public.modulus.bit_length() + params.stat_slack
    return {
        "e": HANDLE_BITS,
        "rw": rand_bits,
        "rs": rand_bits,
        "re": rand_bits,
        "delta": HANDLE_BITS + rand_bits,
        "eps": HANDLE_BITS + rand_bits,
    }


def nonrevocation_parts(
    builder: ProofBuilder,
    params: SystemParams,
    public: RegistryPublic,
    acc_value: int,
    *,
    label: str = "nonrev",
    handle_name: str,
    publics: dict | None = None,
    witness: MembershipWitness | None = None,
    rng: Rng | None = None,
) -> dict:
    """Add non-revocation statements to an aggregate proof.

    The handle prime enters under ``handle_name`` so callers can bind it
    to other statements (a credential signature, typically). Returns the
    public pieces (blinded witness, helper commitments, range bits) that
    the message must carry; on the verifier side pass them back in as
    ``publics``.
    """
    n = public.modulus
    g, h = public.g, public.h
    widths = _nonrev_bit_widths(public, params)
    rand_bound = 1 << (widths["rw"])

    names = {
        "rw": f"{label}.rw",
        "rs": f"{label}.rs",
        "re": f"{label}.re",
        "delta": f"{label}.delta",
        "eps": f"{label}.eps",
    }

    wit: dict[str, int] | None = None
    if witness is not None:
        rng = rng or make_rng()
        e = witness.handle
        r_w = rng.below(rand_bound)
        r_s = rng.below(rand_bound)
        r_e = rng.below(rand_bound)
        c_w = witness.value * pow(h, r_w, n) % n
        c_r = pow(g, r_w, n) * pow(h, r_s, n) % n
        c_e = pow(g, e, n) * pow(h, r_e, n) % n
        publics = {"c_w": c_w, "c_r": c_r, "c_e": c_e}
        wit = {
            handle_name: e,
            names["rw"]: r_w,
            names["rs"]: r_s,
            names["re"]: r_e,
            names["delta"]: e * r_w,
            names["eps"]: e * r_s,
        }
    elif publics is None:
        raise ValueError("verifier side needs the proof's public pieces")
    c_w, c_r, c_e = int(publics["c_w"]), int(publics["c_r"]), int(publics["c_e"])

    inv_g, inv_h = pow(g, -1, n), pow(h, -1, n)
    secret_bits = {
        handle_name: widths["e"],
        names["rw"]: widths["rw"],
        names["rs"]: widths["rs"],
        names["re"]: widths["re"],
        names["delta"]: widths["delta"],
        names["eps"]: widths["eps"],
    }
    statement = Statement(
        relations=(
            # A == C_w^e * h^(-e*r_w): the blinded witness really opens A
            Relation(n, acc_value % n, (c_w, inv_h), (handle_name, names["delta"])),
            # helper commitment to r_w, fixing delta and eps consistently
            Relation(n, c_r, (g, h), (names["rw"], names["rs"])),
            Relation(n, 1, (c_r, inv_g, inv_h), (handle_name, names["delta"], names["eps"])),
            # commitment to the handle prime, feeding the range proof
            Relation(n, c_e, (g, h), (handle_name, names["re"])),
        ),
        secret_bits=secret_bits,
    )
    builder.add(f"{label}.acc", statement, wit)

    bit_commitments = range_parts(
        builder,
        params,
        label=f"{label}.range",
        modulus=n,
        base_value=g,
        base_rand=h,
        commitment=c_e,
        shift=1 << (HANDLE_BITS - 1),
        width=HANDLE_BITS - 1,
        rand_bits=widths["rw"],
        bit_commitments=None if witness is not None else [int(x) for x in publics["bits"]],
        opening=(witness.handle, wit[names["re"]]) if witness is not None else None,
        rng=rng,
    )
    if witness is not None:
        publics["bits"] = bit_commitments
    return publics


def prove_nonrevoked(
    params: SystemParams,
    public: RegistryPublic,
    acc_value: int,
    witness: MembershipWitness,
    transcript: Transcript,
    rng: Rng | None = None,
) -> dict:
    """Standalone ZK proof that ``witness`` is current for ``acc_value``."""
    if pow(witness.value, witness.handle, public.modulus) != acc_value % public.modulus:
        raise EpochGap("witness does not open this accumulator value; update it first")
    builder = ProofBuilder(params)
    publics = nonrevocation_parts(
        builder,
        params,
        public,
        acc_value,
        handle_name="nonrev.e",
        witness=witness,
        rng=rng,
    )
    proof = builder.prove(transcript, rng)
    return {
        "c_w": str(publics["c_w"]),
        "c_r": str(publics["c_r"]),
        "c_e": str(publics["c_e"]),
        "bits": [str(b) for b in publics["bits"]],
        "proof": proof.to_dict(),
    }


def verify_nonrevoked(
    params: SystemParams,
    public: RegistryPublic,
    acc_value: int,
    bundle: dict,
    transcript: Transcript,
) -> bool:
    try:
        builder = ProofBuilder(params)
        nonrevocation_parts(
            builder,
            params,
            public,
            acc_value,
            handle_name="nonrev.e",
            publics=bundle,
        )
        proof = SigmaProof.from_dict(bundle["proof"])
    except Exception:
        return False
    ok, _ = builder.verify(proof, transcript)
    return ok
