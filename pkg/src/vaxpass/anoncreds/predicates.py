"""Comparison and set-membership proofs over committed attributes.

``prove_geq`` shows a committed value is at least k; ``prove_leq`` at
most k (by committing to k - m and reusing the same machinery);
``prove_set_membership`` shows the value equals one of a public list
without revealing which. All three come in a standalone flavour over
system-parameter commitments (used directly and by unit tests) and a
``*_parts`` flavour that splices the statements into a larger aggregate
proof under one challenge (used by presentations).

Comparisons operate on a 32-bit window: the prover must have
0 <= m - k < 2**32 (respectively k - m), which every encoded day count,
dose count and bounded counter satisfies.
"""

from __future__ import annotations

from ..crypto.arith import Rng, make_rng
from ..crypto.commit import Commitment
from ..crypto.params import MSG_BITS, SystemParams
from ..crypto.rangeproof import range_parts
from ..crypto.sigma import ProofBuilder, Relation, SigmaProof, Statement
from ..crypto.transcript import Transcript
from ..errors import CannotSatisfy, OutOfRange

PREDICATE_BITS = 32


def compare_parts(
    builder: ProofBuilder,
    *,
    label: str,
    modulus: int,
    base_value: int,
    base_rand: int,
    rand_bits: int,
    op: str,
    bound: int,
    value_name: str,
    value_bits: int = MSG_BITS,
    width: int = PREDICATE_BITS,
    publics: dict | None = None,
    value: int | None = None,
    rng: Rng | None = None,
) -> dict:
    """Add an inequality proof for a named secret to ``builder``.

    Prover passes ``value``; verifier passes the ``publics`` produced by
    the prover (auxiliary commitment plus bit commitments). The value
    enters under ``value_name`` so the caller can tie it to other
    statements proving what the value actually is.
    """
    if op not in ("ge", "le"):
        raise OutOfRange(f"unknown comparison {op!r}")
    n = modulus
    rand_name = f"{label}.rand"

    if value is not None:
        rng = rng or make_rng()
        gap = value - bound if op == "ge" else bound - value
        if not 0 <= gap < (1 << width):
            raise CannotSatisfy(f"{op} {bound} fails or exceeds the {width}-bit window")
        r = rng.below(1 << rand_bits)
        committed = value if op == "ge" else gap
        aux = pow(base_value, committed, n) * pow(base_rand, r, n) % n
        publics = {"aux": aux}
        wit = {value_name: value, rand_name: r}
    elif publics is None:
        raise OutOfRange("verifier side needs the proof's public pieces")
    aux = int(publics["aux"])

    if op == "ge":
        # aux commits to m itself; range proof shifts by the bound
        statement = Statement(
            relations=(Relation(n, aux, (base_value, base_rand), (value_name, rand_name)),),
            secret_bits={value_name: value_bits, rand_name: rand_bits},
        )
        shift = bound
    else:
        # aux commits to bound - m: aux * bv^-bound == bv^-m * br^r
        inv_bv = pow(base_value, -1, n)
        target = aux * pow(inv_bv, bound, n) % n
        statement = Statement(
            relations=(Relation(n, target, (inv_bv, base_rand), (value_name, rand_name)),),
            secret_bits={value_name: value_bits, rand_name: rand_bits},
        )
        shift = 0
    builder.add(f"{label}.aux", statement, wit if value is not None else None)

    bits = range_parts(
        builder,
        None,
        label=f"{label}.range",
        modulus=n,
        base_value=base_value,
        base_rand=base_rand,
        commitment=aux,
        shift=shift,
        width=width,
        rand_bits=rand_bits,
        bit_commitments=None if value is not None else [int(x) for x in publics["bits"]],
        opening=((committed, r) if value is not None else None),
        rng=rng,
    )
    if value is not None:
        publics["bits"] = bits
    return publics


def membership_parts(
    builder: ProofBuilder,
    *,
    label: str,
    modulus: int,
    base_value: int,
    base_rand: int,
    rand_bits: int,
    allowed: list[int],
    value_name: str,
    value_bits: int = MSG_BITS,
    publics: dict | None = None,
    value: int | None = None,
    rng: Rng | None = None,
) -> dict:
    """Add a proof that the named secret equals one of ``allowed``.

    The allowed list is canonicalized (sorted, deduplicated) so both
    sides derive identical clause order no matter how the list arrived.
    """
    n = modulus
    members = sorted(set(allowed))
    if not members:
        raise OutOfRange("empty allowed list")
    rand_name = f"{label}.rand"

    if value is not None:
        rng = rng or make_rng()
        if value not in members:
            raise CannotSatisfy("value not in the allowed list")
        r = rng.below(1 << rand_bits)
        aux = pow(base_value, value, n) * pow(base_rand, r, n) % n
        publics = {"aux": aux}
    elif publics is None:
        raise OutOfRange("verifier side needs the proof's public pieces")
    aux = int(publics["aux"])

    statement = Statement(
        relations=(Relation(n, aux, (base_value, base_rand), (value_name, rand_name)),),
        secret_bits={value_name: value_bits, rand_name: rand_bits},
    )
    builder.add(
        f"{label}.aux",
        statement,
        {value_name: value, rand_name: r} if value is not None else None,
    )

    inv_bv = pow(base_value, -1, n)
    clauses = [
        Statement(
            relations=(
                Relation(n, aux * pow(inv_bv, a, n) % n, (base_rand,), ("t",)),
            ),
            secret_bits={"t": rand_bits},
        )
        for a in members
    ]
    if value is not None:
        builder.add_or(f"{label}.or", clauses, members.index(value), {"t": r})
    else:
        builder.add_or(f"{label}.or", clauses)
    return publics


# --- standalone proofs over system-parameter commitments --------------------


def _standalone(
    params: SystemParams,
    kind: str,
    commitment_value: int,
    bound_or_list,
    *,
    publics: dict | None,
    opening: tuple[int, int] | None,
    transcript: Transcript,
    rng: Rng | None,
):
    builder = ProofBuilder(params)
    transcript.absorb_element(b"commitment", commitment_value % params.n, params.n)
    common = dict(
        builder=builder,
        label=kind,
        modulus=params.n,
        base_value=params.g,
        base_rand=params.h,
        rand_bits=params.modulus_bits + params.stat_slack,
        value_name=f"{kind}.m",
    )
    value, rand = opening if opening else (None, None)
    if kind in ("ge", "le"):
        publics = compare_parts(
            **common,
            op=kind,
            bound=bound_or_list,
            publics=publics,
            value=value,
            rng=rng,
        )
    else:
        publics = membership_parts(
            **common,
            allowed=bound_or_list,
            publics=publics,
            value=value,
            rng=rng,
        )
    # tie the auxiliary commitment to the one the caller supplied
    link = Statement(
        relations=(
            Relation(params.n, commitment_value % params.n, (params.g, params.h),
                     (f"{kind}.m", f"{kind}.link_rand")),
        ),
        secret_bits={
            f"{kind}.m": MSG_BITS,
            f"{kind}.link_rand": params.modulus_bits + params.stat_slack,
        },
    )
    builder.add(
        f"{kind}.link",
        link,
        {f"{kind}.m": value, f"{kind}.link_rand": rand} if opening else None,
    )
    return builder, publics


def prove_geq(
    params: SystemParams,
    commitment: Commitment,
    bound: int,
    transcript: Transcript,
    rng: Rng | None = None,
) -> dict:
    """ZK proof that the opened commitment holds m >= bound."""
    if commitment.m is None or commitment.r is None:
        raise OutOfRange("prover needs the commitment opening")
    rng = rng or make_rng()
    builder, publics = _standalone(
        params, "ge", commitment.value, bound, publics=None, transcript=transcript,
        rng=rng, opening=(commitment.m, commitment.r),
    )
    proof = builder.prove(transcript, rng)
    return {"publics": _pub_str(publics), "proof": proof.to_dict()}


def verify_geq(
    params: SystemParams,
    commitment_value: int,
    bound: int,
    bundle: dict,
    transcript: Transcript,
) -> bool:
    return _verify_standalone(params, "ge", commitment_value, bound, bundle, transcript)


def prove_leq(
    params: SystemParams,
    commitment: Commitment,
    bound: int,
    transcript: Transcript,
    rng: Rng | None = None,
) -> dict:
    """ZK proof that the opened commitment holds m <= bound."""
    if commitment.m is None or commitment.r is None:
        raise OutOfRange("prover needs the commitment opening")
    rng = rng or make_rng()
    builder, publics = _standalone(
        params, "le", commitment.value, bound, publics=None, transcript=transcript,
        rng=rng, opening=(commitment.m, commitment.r),
    )
    proof = builder.prove(transcript, rng)
    return {"publics": _pub_str(publics), "proof": proof.to_dict()}


def verify_leq(
    params: SystemParams,
    commitment_value: int,
    bound: int,
    bundle: dict,
    transcript: Transcript,
) -> bool:
    return _verify_standalone(params, "le", commitment_value, bound, bundle, transcript)


def prove_set_membership(
    params: SystemParams,
    commitment: Commitment,
    allowed: list[int],
    transcript: Transcript,
    rng: Rng | None = None,
) -> dict:
    """ZK proof that the opened commitment holds m in ``allowed``."""
    if commitment.m is None or commitment.r is None:
        raise OutOfRange("prover needs the commitment opening")
    rng = rng or make_rng()
    builder, publics = _standalone(
        params, "member", commitment.value, allowed, publics=None, transcript=transcript,
        rng=rng, opening=(commitment.m, commitment.r),
    )
    proof = builder.prove(transcript, rng)
    return {"publics": _pub_str(publics), "proof": proof.to_dict()}


def verify_set_membership(
    params: SystemParams,
    commitment_value: int,
    allowed: list[int],
    bundle: dict,
    transcript: Transcript,
) -> bool:
    return _verify_standalone(params, "member", commitment_value, allowed, bundle, transcript)


def _pub_str(publics: dict) -> dict:
    out = {"aux": str(publics["aux"])}
    if "bits" in publics:
        out["bits"] = [str(b) for b in publics["bits"]]
    return out


def _verify_standalone(params, kind, commitment_value, bound_or_list, bundle, transcript):
    try:
        publics = {"aux": int(bundle["publics"]["aux"])}
        if "bits" in bundle["publics"]:
            publics["bits"] = [int(b) for b in bundle["publics"]["bits"]]
        builder, _ = _standalone(
            params, kind, commitment_value, bound_or_list, publics=publics,
            transcript=transcript, rng=None, opening=None,
        )
        proof = SigmaProof.from_dict(bundle["proof"])
    except Exception:
        return False
    ok, _ = builder.verify(proof, transcript)
    return ok
