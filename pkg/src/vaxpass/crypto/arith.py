"""Number-theoretic primitives over hidden-order groups.

Primality testing delegates to gmpy2 (BPSW plus extra Miller-Rabin
rounds); everything else is plain Python integers. Randomness flows
through an ``Rng`` object so deterministic profiles can replay exactly.
"""

from __future__ import annotations

import hashlib
import secrets

import gmpy2

from ..errors import OutOfRange, PrimeGenFailure

MR_ROUNDS = 64

_HASH_TO_PRIME_DOMAIN = b"vaxpass/hash-to-prime"
_DRBG_DOMAIN = b"vaxpass/drbg"


def _sieve(limit: int) -> list[int]:
    flags = bytearray([1]) * limit
    flags[0] = flags[1] = 0
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i in range(limit) if flags[i]]


SMALL_PRIMES = _sieve(8192)


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    return gmpy2.is_prime(gmpy2.mpz(n), MR_ROUNDS) != 0


class SystemRng:
    """Randomness from the operating system."""

    def take_bytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)

    def bits(self, k: int) -> int:
        return secrets.randbits(k)

    def below(self, n: int) -> int:
        return secrets.randbelow(n)


class DeterministicRng:
    """SHA-256 counter generator; same seed, same stream. Test use only."""

    def __init__(self, seed: bytes):
        self._key = hashlib.sha256(_DRBG_DOMAIN + seed).digest()
        self._counter = 0

    def take_bytes(self, n: int) -> bytes:
        out = bytearray()
        while len(out) < n:
            block = hashlib.sha256(
                self._key + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            out.extend(block)
        return bytes(out[:n])

    def bits(self, k: int) -> int:
        if k == 0:
            return 0
        nbytes = (k + 7) // 8
        return int.from_bytes(self.take_bytes(nbytes), "big") >> (nbytes * 8 - k)

    def below(self, n: int) -> int:
        if n <= 0:
            raise OutOfRange("below() needs a positive bound")
        k = n.bit_length()
        while True:
            x = self.bits(k)
            if x < n:
                return x


Rng = SystemRng | DeterministicRng


def make_rng(seed: bytes | int | None = None) -> Rng:
    """System randomness when ``seed`` is None, replayable stream otherwise."""
    if seed is None:
        return SystemRng()
    if isinstance(seed, int):
        seed = seed.to_bytes(8, "big")
    return DeterministicRng(seed)


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y == g == gcd(a, b)``."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    return old_r, old_x, old_y


def inv_mod(a: int, n: int) -> int:
    return pow(a, -1, n)


def random_prime_in(lo: int, hi: int, rng: Rng, max_attempts: int = 100_000) -> int:
    """Uniformly sampled probable prime in ``[lo, hi)``."""
    if hi <= lo:
        raise OutOfRange("empty prime window")
    for _ in range(max_attempts):
        x = lo + rng.below(hi - lo)
        x |= 1
        if x >= hi:
            continue
        if is_probable_prime(x):
            return x
    raise PrimeGenFailure(f"no prime found in [{lo}, {hi}) after {max_attempts} draws")


def safe_prime(bits: int, rng: Rng) -> int:
    """Probable safe prime ``p = 2q + 1`` with exactly ``bits`` bits.

    Candidates march through a sieved window: any small prime dividing
    either q or 2q+1 strikes that slot before the expensive tests run.
    """
    if bits < 5:
        raise OutOfRange("safe prime needs at least 5 bits")
    if bits < 32:
        return _safe_prime_tiny(bits, rng)
    span = 4096
    for _ in range(2048):
        q0 = rng.bits(bits - 1) | (1 << (bits - 2)) | 1
        bad = bytearray(span)
        for p in SMALL_PRIMES[1:]:
            inv2 = (p + 1) // 2
            k = (-q0 % p) * inv2 % p
            bad[k::p] = b"\x01" * ((span - k + p - 1) // p)
            inv4 = pow(4, -1, p)
            k = (-(2 * q0 + 1) % p) * inv4 % p
            bad[k::p] = b"\x01" * ((span - k + p - 1) // p)
        for k in range(span):
            if bad[k]:
                continue
            q = q0 + 2 * k
            if q.bit_length() != bits - 1:
                break
            if is_probable_prime(q) and is_probable_prime(2 * q + 1):
                return 2 * q + 1
    raise PrimeGenFailure(f"no {bits}-bit safe prime found")


def _safe_prime_tiny(bits: int, rng: Rng) -> int:
    for _ in range(1_000_000):
        q = rng.bits(bits - 1) | (1 << (bits - 2)) | 1
        if is_probable_prime(q) and is_probable_prime(2 * q + 1):
            return 2 * q + 1
    raise PrimeGenFailure(f"no {bits}-bit safe prime found")


def _expand(domain: bytes, bits: int, counter: int, data: bytes) -> int:
    nbytes = (bits + 7) // 8
    stream = bytearray()
    i = counter
    while len(stream) < nbytes:
        stream.extend(
            hashlib.sha256(
                domain + bits.to_bytes(4, "big") + i.to_bytes(4, "big") + data
            ).digest()
        )
        i += 1
    return int.from_bytes(bytes(stream[:nbytes]), "big") >> (nbytes * 8 - bits)


def hash_to_prime(data: bytes, bits: int) -> int:
    """Deterministically map ``data`` to a probable prime of exactly ``bits`` bits.

    The hash output seeds an odd candidate with the top bit forced, then
    the search walks upward in steps of two. Deterministic: equal inputs
    give equal primes.
    """
    if bits < 8:
        raise OutOfRange("hash_to_prime needs at least 8 bits")
    counter = 0
    for _ in range(64):
        x = _expand(_HASH_TO_PRIME_DOMAIN, bits, counter, data)
        x |= (1 << (bits - 1)) | 1
        top = 1 << bits
        while x < top:
            if is_probable_prime(x):
                return x
            x += 2
        counter += 16
    raise PrimeGenFailure(f"hash_to_prime exhausted its search for {bits} bits")


def hash_to_qr(modulus: int, label: bytes) -> int:
    """Deterministic quadratic residue derived from ``label``.

    Squaring a hash-expanded value lands in QR(modulus); the counter
    advances past the rare degenerate outputs 0 and 1.
    """
    counter = 0
    while True:
        x = _expand(b"vaxpass/hash-to-qr", modulus.bit_length() + 64, counter, label)
        g = pow(x % modulus, 2, modulus)
        if g not in (0, 1):
            return g
        counter += 16


def random_qr(modulus: int, rng: Rng) -> int:
    """Uniform-ish quadratic residue: square of a random element."""
    while True:
        x = 2 + rng.below(modulus - 3)
        g = pow(x, 2, modulus)
        if g not in (0, 1):
            return g
