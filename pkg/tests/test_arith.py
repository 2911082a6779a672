import pytest

from oracles import mr_is_prime, next_prime_from, qr_set
from vaxpass.crypto.arith import (
    DeterministicRng,
    ext_gcd,
    hash_to_prime,
    hash_to_qr,
    inv_mod,
    is_probable_prime,
    make_rng,
    random_prime_in,
    safe_prime,
)
from vaxpass.errors import PrimeGenFailure


def test_deterministic_rng_replays_exactly():
    a = DeterministicRng(b"seed-1")
    b = DeterministicRng(b"seed-1")
    assert [a.bits(64) for _ in range(20)] == [b.bits(64) for _ in range(20)]
    assert a.take_bytes(100) == b.take_bytes(100)


def test_deterministic_rng_seeds_separate_streams():
    a = DeterministicRng(b"seed-1")
    b = DeterministicRng(b"seed-2")
    assert a.take_bytes(32) != b.take_bytes(32)


def test_rng_bits_and_below_ranges():
    rng = DeterministicRng(b"ranges")
    for _ in range(200):
        assert 0 <= rng.bits(13) < 2**13
        assert 0 <= rng.below(1000) < 1000
    # below() hits both halves of its range
    draws = [rng.below(100) for _ in range(200)]
    assert any(d < 50 for d in draws) and any(d >= 50 for d in draws)


def test_make_rng_accepts_int_and_none():
    assert make_rng(7).take_bytes(8) == make_rng(7).take_bytes(8)
    a, b = make_rng().take_bytes(16), make_rng().take_bytes(16)
    assert a != b


def test_is_probable_prime_agrees_with_oracle():
    rng = DeterministicRng(b"primality")
    for _ in range(300):
        n = rng.bits(40)
        assert is_probable_prime(n) == mr_is_prime(n), n


def test_ext_gcd_bezout_identity():
    rng = DeterministicRng(b"bezout")
    for _ in range(200):
        a, b = rng.bits(80), rng.bits(80)
        g, x, y = ext_gcd(a, b)
        assert a * x + b * y == g
        assert a % g == 0 and b % g == 0


def test_inv_mod():
    assert inv_mod(3, 10) == 7
    with pytest.raises(ValueError):
        inv_mod(4, 10)


def test_safe_prime_structure():
    rng = DeterministicRng(b"safe")
    for bits in (64, 128, 256):
        p = safe_prime(bits, rng)
        assert p.bit_length() == bits
        assert mr_is_prime(p)
        assert mr_is_prime((p - 1) // 2)


def test_safe_prime_tiny_path():
    p = safe_prime(16, DeterministicRng(b"tiny"))
    assert p.bit_length() == 16
    assert mr_is_prime(p) and mr_is_prime((p - 1) // 2)


def test_random_prime_in_window():
    rng = DeterministicRng(b"window")
    lo, hi = 1 << 64, (1 << 64) + (1 << 40)
    for _ in range(10):
        p = random_prime_in(lo, hi, rng)
        assert lo <= p < hi
        assert mr_is_prime(p)


def test_random_prime_in_empty_window_fails_fast():
    rng = DeterministicRng(b"empty")
    # window of even numbers only: candidates are all struck by |1 pushing past hi
    with pytest.raises(PrimeGenFailure):
        random_prime_in(24, 28, rng, max_attempts=50)


def test_hash_to_prime_known_values():
    # frozen outputs; independently reproduced by seeding the same hash
    # expansion and walking upward with a from-scratch Miller-Rabin
    assert hash_to_prime(b"serial-1", 64) == 15965908059803753357
    assert hash_to_prime(b"serial-1", 128) == 257101730592208914018968196041547794357


def test_hash_to_prime_matches_next_prime_oracle():
    import hashlib

    data, bits = b"serial-1", 64
    stream = hashlib.sha256(
        b"vaxpass/hash-to-prime" + bits.to_bytes(4, "big") + (0).to_bytes(4, "big") + data
    ).digest()[:8]
    x0 = int.from_bytes(stream, "big") | (1 << 63) | 1
    assert next_prime_from(x0) == hash_to_prime(data, bits)


def test_hash_to_prime_properties():
    for bits in (64, 128):
        seen = set()
        for i in range(20):
            p = hash_to_prime(f"input-{i}".encode(), bits)
            assert p.bit_length() == bits
            assert mr_is_prime(p)
            seen.add(p)
        assert len(seen) == 20
    assert hash_to_prime(b"x", 64) == hash_to_prime(b"x", 64)
    assert hash_to_prime(b"x", 64) != hash_to_prime(b"x", 128)


def test_hash_to_qr_lands_in_qr_1081():
    residues = qr_set(1081)
    for label in (b"a", b"b", b"generator"):
        g = hash_to_qr(1081, label)
        assert g in residues
    assert hash_to_qr(1081, b"a") == hash_to_qr(1081, b"a")
