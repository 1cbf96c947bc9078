"""Norms of sieve elements a + b*alpha + (c + d*alpha)*x on either side."""

from __future__ import annotations

from typing import List, Sequence, Tuple

from .errors import ContractViolation
from .poly import IntPoly, RelPoly

KElement = Tuple[int, int]


def k_mul(u: KElement, v: KElement, h: IntPoly) -> KElement:
    """Product in Z[alpha] with alpha^2 = -h1*alpha - h0."""
    h0, h1 = h.coeffs[0], h.coeffs[1]
    hi = u[1] * v[1]
    return (u[0] * v[0] - h0 * hi, u[0] * v[1] + u[1] * v[0] - h1 * hi)


def k_norm(u: KElement, h: IntPoly) -> int:
    h0, h1 = h.coeffs[0], h.coeffs[1]
    return u[0] * u[0] - h1 * u[0] * u[1] + h0 * u[1] * u[1]


def relative_norm(poly: RelPoly, h: IntPoly, element: Sequence[int]) -> KElement:
    """Res_x(A + B*x, F) = sum F_k * (-A)^k * B^(n-k), an element of Z[alpha].

    For B = 0 the element has degree 0 in x and the resultant is A^n.
    """
    a, b, c, d = element
    n = poly.degree
    if c == 0 and d == 0:
        power: KElement = (1, 0)
        for _ in range(n):
            power = k_mul(power, (a, b), h)
        return power
    minus_a = (-a, -b)
    big_b = (c, d)
    powers_a: List[KElement] = [(1, 0)]
    powers_b: List[KElement] = [(1, 0)]
    for _ in range(n):
        powers_a.append(k_mul(powers_a[-1], minus_a, h))
        powers_b.append(k_mul(powers_b[-1], big_b, h))
    total = (0, 0)
    for k, coeff in enumerate(poly.coeffs):
        term = k_mul(k_mul(coeff, powers_a[k], h), powers_b[n - k], h)
        total = (total[0] + term[0], total[1] + term[1])
    return total


def norm_of(poly: RelPoly, h: IntPoly, element: Sequence[int]) -> int:
    if not any(element):
        raise ContractViolation("norm of the zero element")
    return abs(k_norm(relative_norm(poly, h, element), h))


def norm_side(setup, side: int, element: Sequence[int]) -> int:
    """|Res_y(Res_x(a + b*y + (c + d*y)*x, F_side), h)|."""
    return norm_of(setup.side_poly(side), setup.h, element)
