import math
import random

import pytest
from sympy import S
from sympy.physics.wigner import wigner_3j as sympy_w3j

from fermitherm.angular import exchange_weights, wigner_3j


def test_known_values():
    assert wigner_3j(0, 0, 0, 0, 0, 0) == pytest.approx(1.0, abs=1e-15)
    assert wigner_3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1.0 / math.sqrt(3), abs=1e-14)
    assert wigner_3j(1, 1, 2, 0, 0, 0) == pytest.approx(math.sqrt(2.0 / 15.0), abs=1e-14)


def test_diagonal_zero_order():
    for l in range(6):
        expected = (-1.0) ** l / math.sqrt(2 * l + 1)
        assert wigner_3j(l, l, 0, 0, 0, 0) == pytest.approx(expected, abs=1e-13)


def test_parity_selection():
    # odd j1+j2+j3 vanishes at m = 0
    assert wigner_3j(1, 2, 2, 0, 0, 0) == 0.0
    assert wigner_3j(0, 1, 1, 0, 0, 0) != 0.0


def test_triangle_and_m_rules():
    assert wigner_3j(1, 1, 3, 0, 0, 0) == 0.0
    assert wigner_3j(2, 2, 4, 1, 0, 0) == 0.0  # m1+m2+m3 != 0
    assert wigner_3j(1, 1, 2, 2, -2, 0) == 0.0  # |m1| > j1


def test_against_sympy():
    rng = random.Random(13)
    count = 0
    while count < 25:
        j1 = rng.randint(0, 6)
        j2 = rng.randint(0, 6)
        j3 = rng.randint(abs(j1 - j2), j1 + j2)
        m1 = rng.randint(-j1, j1)
        m2 = rng.randint(-j2, j2)
        m3 = -m1 - m2
        if abs(m3) > j3:
            continue
        expected = float(sympy_w3j(S(j1), S(j2), S(j3), S(m1), S(m2), S(m3)))
        assert wigner_3j(j1, j2, j3, m1, m2, m3) == pytest.approx(
            expected, abs=1e-12
        )
        count += 1


def test_orthogonality_sum():
    # sum_L (2L+1) w3j(l, L, l'; 0,0,0)^2 = 1
    for l in range(5):
        for lp in range(5):
            total = sum(
                (2 * L + 1) * wigner_3j(l, L, lp, 0, 0, 0) ** 2
                for L in range(abs(l - lp), l + lp + 1)
            )
            assert total == pytest.approx(1.0, abs=1e-13)


def test_exchange_weights_structure():
    table = exchange_weights(2)
    assert table[(0, 0)] == [(0, pytest.approx(1.0, abs=1e-15))]
    # p-p couples through L = 0 and L = 2 only
    orders = [L for L, _ in table[(1, 1)]]
    assert orders == [0, 2]
    # symmetry in the channel pair
    for (l, lp), entries in table.items():
        swapped = dict(table[(lp, l)])
        for L, a in entries:
            assert swapped[L] == pytest.approx(a, abs=1e-14)
