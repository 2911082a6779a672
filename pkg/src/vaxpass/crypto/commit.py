"""Integer commitments C = g**m * h**r mod n.

Binding rests on the hidden group order; hiding on the width of r,
which ranges over [0, 2**(modulus_bits + stat_slack)) so that r mod
order is statistically close to uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import OutOfRange
from .arith import Rng
from .params import MSG_BITS, SystemParams


@dataclass(frozen=True)
class Commitment:
    """Public commitment value plus, on the committer's side, its opening."""

    value: int
    m: int | None = None
    r: int | None = None

    def public(self) -> "Commitment":
        return Commitment(value=self.value)


def random_opening(params: SystemParams, rng: Rng) -> int:
    return rng.below(params.randomizer_bound())


def commit(params: SystemParams, m: int, r: int) -> Commitment:
    if not 0 <= m < (1 << MSG_BITS):
        raise OutOfRange("committed message outside [0, 2^256)")
    if not 0 <= r < params.randomizer_bound():
        raise OutOfRange("commitment randomizer outside its hiding range")
    value = pow(params.g, m, params.n) * pow(params.h, r, params.n) % params.n
    return Commitment(value=value, m=m, r=r)


def open_commitment(params: SystemParams, c: Commitment, m: int, r: int) -> bool:
    """Check that (m, r) opens ``c``. Range failures are just ``False``."""
    try:
        return commit(params, m, r).value == c.value
    except OutOfRange:
        return False
