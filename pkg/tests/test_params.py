import pytest

from oracles import element_order, mr_is_prime, qr_set, trial_division_factors
from vaxpass.crypto.arith import DeterministicRng, hash_to_qr
from vaxpass.crypto.params import generate_modulus, setup_params
from vaxpass.errors import OutOfRange


def test_toy_group_constants(toy):
    assert (toy.n, toy.g, toy.h) == (1081, 4, 9)
    assert toy.modulus_bits == 11
    assert toy.challenge_bits == 256
    assert toy.stat_slack == 80
    assert toy.insecure


def test_toy_modulus_is_product_of_safe_primes():
    factors = trial_division_factors(1081)
    assert factors == [23, 47]
    for p in factors:
        assert mr_is_prime(p) and mr_is_prime((p - 1) // 2)


def test_toy_generators_are_qr_of_order_253():
    residues = qr_set(1081)
    assert 4 in residues and 9 in residues
    assert element_order(4, 1081) == 253
    assert element_order(9, 1081) == 253
    # 253 = 11 * 23 = ((23-1)/2) * ((47-1)/2), the full QR group order
    assert trial_division_factors(253) == [11, 23]


def test_toy_serialized_form_carries_insecure_label(toy):
    d = toy.to_dict()
    assert d["insecure"] is True
    assert d["n"] == 1081


def test_toy_setup_ignores_seed():
    assert setup_params("toy-fixed", seed=b"a") == setup_params("toy-fixed", seed=b"b")


def test_generate_modulus_distinct_safe_primes():
    n, p, q = generate_modulus(128, DeterministicRng(b"mod"))
    assert n == p * q and p != q
    for f in (p, q):
        assert f.bit_length() == 64
        assert mr_is_prime(f) and mr_is_prime((f - 1) // 2)


def test_setup_test_profile_reproducible_from_seed():
    a = setup_params("test", seed=b"s1")
    b = setup_params("test", seed=b"s1")
    c = setup_params("test", seed=b"s2")
    assert a == b
    assert a.n != c.n
    assert not a.insecure
    assert "insecure" not in a.to_dict()


def test_setup_test_profile_structure(tparams):
    assert tparams.n.bit_length() == 512
    assert tparams.n % 2 == 1
    # g is re-derivable from the modulus: a squared hash expansion
    assert tparams.g == hash_to_qr(tparams.n, b"vaxpass/params/g")
    assert 2 <= tparams.h < tparams.n
    assert tparams.h != tparams.g


def test_params_dict_roundtrip(tparams):
    from vaxpass.crypto.params import SystemParams

    assert SystemParams.from_dict(tparams.to_dict()) == tparams


def test_unknown_profile_rejected():
    with pytest.raises(OutOfRange):
        setup_params("nope")
