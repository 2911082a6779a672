"""System parameters: the shared hidden-order group everyone proves over.

Three profiles:

- ``toy-fixed``: n = 1081 = 23 * 47 with generators g = 4, h = 9. Both
  factors are safe primes and both generators are quadratic residues of
  order 253. Deterministic and cryptographically worthless; it exists so
  that every protocol step can be checked against hand-computed values.
- ``test``: 512-bit modulus, fast enough for full end-to-end suites.
- ``prod``: 2048-bit modulus.

For the non-toy profiles the modulus is a product of two distinct safe
primes generated from the seed (or system randomness), g is a squared
hash of the modulus, and h = g**a for a throwaway exponent. The
factorization and the exponent are discarded before setup returns.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import OutOfRange
from . import arith

CHALLENGE_BITS = 256
STAT_SLACK = 80
MSG_BITS = 256

PROFILE_BITS = {"toy-fixed": 11, "test": 512, "prod": 2048}

_TOY_N = 1081
_TOY_G = 4
_TOY_H = 9


@dataclass(frozen=True)
class SystemParams:
    profile: str
    modulus_bits: int
    n: int
    g: int
    h: int
    challenge_bits: int = CHALLENGE_BITS
    stat_slack: int = STAT_SLACK
    insecure: bool = False

    def randomizer_bound(self) -> int:
        """Upper bound (exclusive) for statistically hiding randomizers."""
        return 1 << (self.modulus_bits + self.stat_slack)

    def to_dict(self) -> dict:
        d = {
            "profile": self.profile,
            "modulus_bits": self.modulus_bits,
            "n": self.n,
            "g": self.g,
            "h": self.h,
            "challenge_bits": self.challenge_bits,
            "stat_slack": self.stat_slack,
        }
        if self.insecure:
            d["insecure"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SystemParams":
        return cls(
            profile=d["profile"],
            modulus_bits=d["modulus_bits"],
            n=d["n"],
            g=d["g"],
            h=d["h"],
            challenge_bits=d.get("challenge_bits", CHALLENGE_BITS),
            stat_slack=d.get("stat_slack", STAT_SLACK),
            insecure=bool(d.get("insecure", False)),
        )


def generate_modulus(bits: int, rng: arith.Rng) -> tuple[int, int, int]:
    """Return ``(n, p, q)`` with n = p*q, p and q distinct safe primes.

    Callers must treat p and q as secrets (or discard them).
    """
    half = bits // 2
    p = arith.safe_prime(half, rng)
    while True:
        q = arith.safe_prime(half, rng)
        # two half-size primes can multiply one bit short; insist on full width
        if q != p and (p * q).bit_length() == bits:
            return p * q, p, q


def setup_params(profile: str = "test", seed: bytes | int | None = None) -> SystemParams:
    """Generate the shared group for ``profile``.

    With a seed the result is reproducible; the toy profile ignores the
    seed entirely and always returns the fixed group.
    """
    if profile not in PROFILE_BITS:
        raise OutOfRange(f"unknown profile {profile!r}")
    bits = PROFILE_BITS[profile]
    if profile == "toy-fixed":
        return SystemParams(
            profile=profile,
            modulus_bits=bits,
            n=_TOY_N,
            g=_TOY_G,
            h=_TOY_H,
            insecure=True,
        )
    rng = arith.make_rng(seed)
    n, p, q = generate_modulus(bits, rng)
    g = arith.hash_to_qr(n, b"vaxpass/params/g")
    # exponent wide enough to be near-uniform modulo the (hidden) group order
    a = 2 + rng.below(1 << (bits + STAT_SLACK))
    h = pow(g, a, n)
    del p, q, a
    return SystemParams(profile=profile, modulus_bits=bits, n=n, g=g, h=h)
