import random

import pytest

from dieudonne.errors import InputError, PrecisionError
from dieudonne.wittring import (WittElement, frobenius, make_witt_ring,
                                tower_embedding)


def test_prime_field_is_zpn():
    # W(F_p) = Z_p with sigma the identity
    R = make_witt_ring(5, 1, 10)
    x = R.from_int(123456)
    assert frobenius(x) == x
    assert (x * x).coeffs[0] == 123456 ** 2 % 5 ** 10


def test_ring_axioms_random():
    R = make_witt_ring(3, 4, 8)
    rng = random.Random(1)
    for _ in range(60):
        a, b, c = (R.random_element(rng) for _ in range(3))
        assert (a + b) * c == a * c + b * c
        assert a * b == b * a
        assert (a - a).is_zero_at_capacity()


def test_frobenius_is_ring_hom_and_order_m():
    for p, m in [(2, 2), (3, 4), (5, 3)]:
        R = make_witt_ring(p, m, 8)
        rng = random.Random(p * m)
        for _ in range(25):
            a, b = R.random_element(rng), R.random_element(rng)
            assert frobenius(a + b) == frobenius(a) + frobenius(b)
            assert frobenius(a * b) == frobenius(a) * frobenius(b)
            assert frobenius(a, m) == a
        # sigma(x) = x^p mod p
        a = R.random_element(rng)
        diff = frobenius(a) - a ** p
        assert diff.is_zero_at_capacity() or diff.valuation() >= 1


def test_sigma_squared_identity_on_f4():
    R = make_witt_ring(2, 2, 8)
    rng = random.Random(4)
    for _ in range(100):
        x = R.random_element(rng)
        assert frobenius(x, 2) == x


def test_teichmuller_generator_frobenius():
    # tau(g)^sigma = tau(g^3) for a generator of F_{3^4}
    R = make_witt_ring(3, 4, 6)
    g = R.teichmuller((0, 1, 0, 0))
    assert frobenius(g) == g ** 3
    assert (g ** (3 ** 4 - 1)) == R.one()


def test_teichmuller_is_root_of_unity():
    R = make_witt_ring(5, 2, 12)
    t = R.teichmuller((2, 3))
    assert t ** (5 ** 2 - 1) == R.one()


def test_fraction_shift_arithmetic():
    R = make_witt_ring(5, 2, 8)
    x = R.from_int(7).mul_p_power(-2)  # 7/p^2
    y = R.from_int(5)                  # valuation 1
    assert (x * y).valuation() == -1
    assert (x * y.inverse() * y * R.from_int(25)) == R.from_int(7)
    z = x - x
    assert z.is_zero_at_capacity()


def test_inverse_of_unit_and_nonunit():
    R = make_witt_ring(3, 3, 9)
    rng = random.Random(7)
    for _ in range(20):
        u = R.random_unit(rng)
        assert u * u.inverse() == R.one()
    v = R.from_int(3)
    w = v.inverse()
    assert w.shift == 1
    assert v * w == R.one()


def test_valuation_guard_band():
    R = make_witt_ring(2, 1, 6)
    tiny = R.from_int(2 ** 5)
    with pytest.raises(PrecisionError):
        tiny.valuation_checked(need_margin=4)


def test_unsupported_pair_raises():
    with pytest.raises(InputError):
        make_witt_ring(17, 1, 8)
    with pytest.raises(InputError):
        make_witt_ring(2, 13, 8)


def test_serialization_round_trip():
    R = make_witt_ring(7, 3, 8)
    rng = random.Random(11)
    for shift in (0, 1, 3):
        x = R.random_element(rng, shift=shift)
        back = WittElement.from_json(R, x.to_json())
        assert back == x


def test_tower_embedding_hom_and_descend():
    emb = tower_embedding(3, 2, 6, 8)
    rng = random.Random(5)
    small, big = emb.small, emb.big
    for _ in range(20):
        a, b = small.random_element(rng), small.random_element(rng)
        assert emb.embed(a * b) == emb.embed(a) * emb.embed(b)
        assert emb.embed(a + b) == emb.embed(a) + emb.embed(b)
        assert emb.descend(emb.embed(a)) == a
    # embedding commutes with Frobenius
    a = small.random_element(rng)
    assert emb.embed(frobenius(a)) == frobenius(emb.embed(a), 1)


def test_tower_embedding_coordinates():
    emb = tower_embedding(2, 2, 4, 8)
    rng = random.Random(9)
    x = emb.big.random_element(rng)
    coords = emb.coordinates(x)
    t = emb.big.gen()
    acc = emb.big.zero()
    tj = emb.big.one()
    for y in coords:
        acc = acc + emb.embed(y) * tj
        tj = tj * t
    assert acc == x
