from __future__ import annotations

import random

import pytest

from extnfs.errors import ContractViolation, FieldError
from extnfs.norms import k_mul, k_norm, norm_of, norm_side, relative_norm
from extnfs.poly import IntPoly, RelPoly, resultant
from extnfs.tower import BASE, QUADRATIC, QUARTIC, Tower, TowerElement, ff_ops

H = IntPoly((1, -1, 1))


@pytest.fixture(scope="module")
def tower(toy_setup) -> Tower:
    return Tower(toy_setup.p, toy_setup.h, toy_setup.f0)


def test_multiplicative_group_order(tower: Tower) -> None:
    rng = random.Random(4)
    for _ in range(5):
        a = tower.random(rng)
        assert tower.pow(a, tower.order - 1) == tower.one


def test_inverse(tower: Tower) -> None:
    rng = random.Random(8)
    for _ in range(20):
        a = tower.random(rng)
        assert tower.mul(a, tower.inv(a)) == tower.one
    with pytest.raises(FieldError):
        tower.inv(TowerElement((0, 0, 0, 0)))


def test_negative_power_is_inverse_power(tower: Tower) -> None:
    a = tower.element((3, 1, 4, 1))
    assert tower.mul(tower.pow(a, -5), tower.pow(a, 5)) == tower.one


def test_levels() -> None:
    assert TowerElement((3, 0, 0, 0)).level == BASE
    assert TowerElement((3, 1, 0, 0)).level == QUADRATIC
    assert TowerElement((0, 0, 1, 0)).level == QUARTIC


def test_ff_ops_dispatch(tower: Tower) -> None:
    a = tower.element((5, 0, 1, 0))
    b = tower.element((1, 2, 3, 4))
    assert ff_ops(tower, "mul", a, b) == tower.mul(a, b)
    assert ff_ops(tower, "pow", a, exponent=3) == tower.mul(a, tower.mul(a, a))
    with pytest.raises(FieldError):
        ff_ops(tower, "mul", a)
    with pytest.raises(FieldError):
        ff_ops(tower, "sqrt", a)


def test_subfield_elements_have_order_dividing_p2_minus_1(tower: Tower) -> None:
    p = tower.p
    a = tower.element((12345, 678, 0, 0))
    assert tower.pow(a, p * p - 1) == tower.one


def test_k_norm_is_multiplicative() -> None:
    rng = random.Random(1)
    for _ in range(50):
        u = (rng.randint(-100, 100), rng.randint(-100, 100))
        v = (rng.randint(-100, 100), rng.randint(-100, 100))
        assert k_norm(k_mul(u, v, H), H) == k_norm(u, H) * k_norm(v, H)


def test_norm_matches_resultant_of_absolute_polynomial() -> None:
    f0 = RelPoly(((0, 1), (-3, 0), (0, 1)))
    f = IntPoly((1, -3, 11, -3, 1))
    # for b = d = 0 the element is a + c*x and the norm is |Res(a + c*x, f)|
    for a, c in ((1, 1), (2, -3), (5, 7)):
        assert norm_of(f0, H, (a, 0, c, 0)) == abs(resultant(IntPoly((a, c)), f))


def test_relative_norm_of_base_element() -> None:
    f0 = RelPoly(((0, 1), (-3, 0), (0, 1)))
    assert relative_norm(f0, H, (2, 1, 0, 0)) == k_mul((2, 1), (2, 1), H)


def test_norm_of_zero_is_contract_violation(toy_setup) -> None:
    with pytest.raises(ContractViolation):
        norm_side(toy_setup, 0, (0, 0, 0, 0))
