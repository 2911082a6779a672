"""Bit-decomposition range proofs over integer commitments.

Given a public commitment C = bv**m * br**r, these parts let a prover
show m - shift lies in [0, 2**width) without revealing m:

- one auxiliary commitment D_j = bv**b_j * br**t_j per bit,
- an OR proof per bit that D_j opens to 0 or to 1,
- a closure relation showing C * bv**(-shift) / prod(D_j ** 2**j) is a
  power of br alone, which forces sum(b_j * 2**j) == m - shift in the
  exponent of bv.

The caller is responsible for separately proving knowledge of C's
opening (that is what ties m to whatever else m means); soundness of the
composition then follows from representation uniqueness in the
hidden-order group.
"""

from __future__ import annotations

from ..errors import MalformedProof, OutOfRange
from .arith import Rng, make_rng
from .params import SystemParams
from .sigma import ProofBuilder, Relation, Statement


def decompose_bits(value: int, width: int) -> list[int]:
    if not 0 <= value < (1 << width):
        raise OutOfRange(f"value does not fit in {width} bits")
    return [(value >> j) & 1 for j in range(width)]


def range_parts(
    builder: ProofBuilder,
    params: SystemParams,
    *,
    label: str,
    modulus: int,
    base_value: int,
    base_rand: int,
    commitment: int,
    shift: int,
    width: int,
    rand_bits: int,
    bit_commitments: list[int] | None = None,
    opening: tuple[int, int] | None = None,
    rng: Rng | None = None,
) -> list[int]:
    """Add range-proof parts to ``builder``; returns the bit commitments.

    Prover side passes ``opening=(m, r)``; verifier side passes the
    ``bit_commitments`` carried in the message being verified.
    """
    n = modulus
    inv_bv = pow(base_value, -1, n)
    t_bits = rand_bits

    witness_bits: list[int] | None = None
    t_vals: list[int] | None = None
    if opening is not None:
        rng = rng or make_rng()
        m, r = opening
        witness_bits = decompose_bits(m - shift, width)
        t_vals = [rng.below(1 << t_bits) for _ in range(width)]
        bit_commitments = [
            pow(base_value, b, n) * pow(base_rand, t, n) % n
            for b, t in zip(witness_bits, t_vals)
        ]
    if bit_commitments is None or len(bit_commitments) != width:
        raise MalformedProof(f"range proof {label!r} needs {width} bit commitments")

    for j, d in enumerate(bit_commitments):
        zero = Statement(
            relations=(Relation(n, d % n, (base_rand,), ("t",)),),
            secret_bits={"t": t_bits},
        )
        one = Statement(
            relations=(Relation(n, d * inv_bv % n, (base_rand,), ("t",)),),
            secret_bits={"t": t_bits},
        )
        if opening is not None:
            builder.add_or(
                f"{label}.bit{j}",
                [zero, one],
                live_index=witness_bits[j],
                witness={"t": t_vals[j]},
            )
        else:
            builder.add_or(f"{label}.bit{j}", [zero, one])

    target = commitment * pow(inv_bv, shift, n) % n
    for j, d in enumerate(bit_commitments):
        target = target * pow(d, -(1 << j), n) % n
    gap_name = f"{label}.gap"
    closure = Statement(
        relations=(Relation(n, target, (base_rand,), (gap_name,)),),
        secret_bits={gap_name: rand_bits + width + 1},
    )
    if opening is not None:
        gap = opening[1] - sum(t << j for j, t in enumerate(t_vals))
        builder.add(f"{label}.close", closure, {gap_name: gap})
    else:
        builder.add(f"{label}.close", closure)
    return list(bit_commitments)
