from __future__ import annotations

import random

import pytest
import sympy

from extnfs.errors import FieldError, PolynomialError
from extnfs.poly import (IntPoly, PolyRing, PrimeField, QuadField, RelPoly, absolute_poly,
                         factor_quadratic_over_extension, hensel_lift, is_irreducible_mod,
                         is_squarefree, resultant, roots_mod)

H = IntPoly((1, -1, 1))


def _sympy_resultant(f: IntPoly, g: IntPoly) -> int:
    x = sympy.Symbol("x")
    fs = sympy.Poly(list(reversed(f.coeffs)), x)
    gs = sympy.Poly(list(reversed(g.coeffs)), x)
    return int(sympy.resultant(fs, gs))


def test_intpoly_parse_dump_and_arithmetic() -> None:
    f = IntPoly.parse("1,0,1")
    assert f.dump() == "1,0,1"
    assert f.degree == 2 and f.lc == 1
    assert f(3) == 10
    assert (f * f).coeffs == (1, 0, 2, 0, 1)
    assert (f - f).is_zero()
    assert f.derivative().coeffs == (0, 2)
    assert IntPoly((4, 6, 8)).content() == 2


def test_relpoly_parts_and_reductions() -> None:
    f0 = RelPoly(((2, 3), (5, 0), (2, 3)))
    p0, p1 = f0.parts()
    assert p0.coeffs == (2, 5, 2)
    assert p1.coeffs == (3, 0, 3)
    assert RelPoly.parse(f0.dump()) == f0
    assert f0.at_root(2, 7) == [(2 + 6) % 7, 5, (2 + 6) % 7]


def test_roots_mod_matches_brute_force() -> None:
    rng = random.Random(3)
    for q in (101, 257, 1009):
        for _ in range(10):
            f = IntPoly(tuple(rng.randrange(q) for _ in range(4)) + (1,))
            expected = [r for r in range(q) if f(r) % q == 0]
            assert roots_mod(f, q) == expected


def test_roots_mod_rejects_vanishing_polynomial() -> None:
    with pytest.raises(PolynomialError):
        roots_mod(IntPoly((7, 14)), 7)


def test_is_irreducible_mod() -> None:
    assert is_irreducible_mod(IntPoly((1, 0, 1)), 7)
    assert not is_irreducible_mod(IntPoly((1, 0, 1)), 5)
    assert is_irreducible_mod(H, 1048991)


def test_quad_field_inverse_and_errors() -> None:
    k = QuadField(1048991, H)
    rng = random.Random(1)
    for _ in range(20):
        a = k.random(rng)
        if a == k.zero:
            continue
        assert k.mul(a, k.inv(a)) == k.one
    with pytest.raises(FieldError):
        k.inv(k.zero)
    with pytest.raises(FieldError):
        PrimeField(7).inv(14)


def test_poly_ring_gcd_and_factor_degrees() -> None:
    ring = PolyRing(PrimeField(13))
    f = ring.mul(ring.mul([1, 1], [2, 1]), [2, 0, 1])  # (x+1)(x+2)(x^2+2) mod 13
    assert ring.gcd(f, [1, 1]) == [1, 1]
    assert ring.factor_degrees(f) == [1, 1, 2]
    assert ring.is_squarefree(f)
    assert not ring.is_squarefree(ring.mul(f, [1, 1]))


def test_poly_ring_over_extension_roots() -> None:
    q = 1048991
    k = QuadField(q, H)
    ring = PolyRing(k)
    rho = (12345, 6789)
    sigma = (42, 1)
    f = ring.mul([k.neg(rho), k.one], [k.neg(sigma), k.one])
    assert ring.roots(f) == sorted([rho, sigma])


def test_resultant_matches_sympy() -> None:
    rng = random.Random(11)
    for _ in range(25):
        f = IntPoly(tuple(rng.randint(-20, 20) for _ in range(rng.randint(2, 5))) + (rng.randint(1, 5),))
        g = IntPoly(tuple(rng.randint(-20, 20) for _ in range(rng.randint(2, 5))) + (rng.randint(1, 5),))
        assert resultant(f, g) == _sympy_resultant(f, g)


def test_resultant_degenerate_inputs() -> None:
    with pytest.raises(PolynomialError):
        resultant(IntPoly(()), IntPoly((1, 1)))
    assert resultant(IntPoly((3,)), IntPoly((1, 0, 1))) == 9


def test_absolute_poly_of_conjugate_pair() -> None:
    f0 = RelPoly(((0, 1), (-3, 0), (0, 1)))
    f = absolute_poly(f0, H)
    assert f.degree == 4
    assert is_squarefree(f)
    assert f.coeffs == (1, -3, 11, -3, 1)


def test_factor_quadratic_over_extension_splits_g0() -> None:
    q = 1048991
    f0 = RelPoly(((1, 0), (3, 0), (1, 0)))
    factors = factor_quadratic_over_extension(f0, q, H)
    k = QuadField(q, H)
    assert len(factors) == 2
    # the constant terms multiply to the constant coefficient of the monic quadratic
    assert k.mul(factors[0], factors[1]) == (1, 0)


def test_hensel_lift() -> None:
    f = IntPoly((-2, 0, 1))
    r = roots_mod(f, 7)[0]
    lifted = hensel_lift(f, r, 7, 5)
    assert f(lifted) % 7**5 == 0
    assert lifted % 7 == r
    with pytest.raises(PolynomialError):
        hensel_lift(IntPoly((0, 0, 1)), 0, 7, 3)
