"""Arithmetic in F_{p^4} = F_{p^2}[x]/(f0 mod p), F_{p^2} = F_p[y]/(h mod p)."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .errors import FieldError, PolynomialError
from .poly import IntPoly, PolyRing, QuadField, RelPoly, is_irreducible_mod

BASE, QUADRATIC, QUARTIC = "base", "quadratic", "quartic"


@dataclass(frozen=True)
class TowerElement:
    """Coordinates on the basis (1, y, x, yx), each in [0, p)."""

    coords: Tuple[int, int, int, int]

    @property
    def level(self) -> str:
        c0, c1, c2, c3 = self.coords
        if c2 == 0 and c3 == 0:
            return BASE if c1 == 0 else QUADRATIC
        return QUARTIC

    def is_zero(self) -> bool:
        return not any(self.coords)

    def dump(self) -> str:
        return ",".join(str(c) for c in self.coords)


class Tower:
    """The two-level tower used for every F_{p^4} computation."""

    def __init__(self, p: int, h: IntPoly, f0: RelPoly, check: bool = True) -> None:
        if check and not is_irreducible_mod(h, p):
            raise FieldError(f"h is reducible mod {p}")
        self.p = p
        self.k = QuadField(p, h)
        ring = PolyRing(self.k)
        coeffs = f0.over_extension(p)
        if len(coeffs) != 3:
            raise PolynomialError("tower needs f0 of degree 2 with a unit leading coefficient mod p")
        if check and not ring.is_irreducible(coeffs):
            raise FieldError(f"f0 is reducible over F_{p}^2")
        c0, c1, c2 = coeffs
        inv = self.k.inv(c2)
        # x^2 = m1*x + m0
        self.m1 = self.k.neg(self.k.mul(c1, inv))
        self.m0 = self.k.neg(self.k.mul(c0, inv))
        self.order = p**4

    def element(self, coords: Sequence[int]) -> TowerElement:
        if len(coords) != 4:
            raise FieldError("tower elements have four coordinates")
        return TowerElement(tuple(int(c) % self.p for c in coords))  # type: ignore[arg-type]

    @property
    def one(self) -> TowerElement:
        return TowerElement((1, 0, 0, 0))

    def _split(self, a: TowerElement):
        c = a.coords
        return (c[0], c[1]), (c[2], c[3])

    def _join(self, lo, hi) -> TowerElement:
        return TowerElement((lo[0], lo[1], hi[0], hi[1]))

    def add(self, a: TowerElement, b: TowerElement) -> TowerElement:
        return TowerElement(tuple((x + y) % self.p for x, y in zip(a.coords, b.coords)))  # type: ignore[arg-type]

    def mul(self, a: TowerElement, b: TowerElement) -> TowerElement:
        k = self.k
        a0, a1 = self._split(a)
        b0, b1 = self._split(b)
        top = k.mul(a1, b1)
        lo = k.add(k.mul(a0, b0), k.mul(top, self.m0))
        hi = k.add(k.add(k.mul(a0, b1), k.mul(a1, b0)), k.mul(top, self.m1))
        return self._join(lo, hi)

    def norm_to_quadratic(self, a: TowerElement):
        """A0^2 + A0*A1*m1 - A1^2*m0 in F_{p^2}."""
        k = self.k
        a0, a1 = self._split(a)
        return k.sub(k.add(k.mul(a0, a0), k.mul(k.mul(a0, a1), self.m1)), k.mul(k.mul(a1, a1), self.m0))

    def inv(self, a: TowerElement) -> TowerElement:
        if a.is_zero():
            raise FieldError("inverse of zero")
        k = self.k
        a0, a1 = self._split(a)
        n_inv = k.inv(self.norm_to_quadratic(a))
        lo = k.mul(k.add(a0, k.mul(a1, self.m1)), n_inv)
        hi = k.mul(k.neg(a1), n_inv)
        return self._join(lo, hi)

    def pow(self, a: TowerElement, e: int) -> TowerElement:
        if e < 0:
            return self.pow(self.inv(a), -e)
        result = self.one
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result

    def random(self, rng: random.Random, nonzero: bool = True) -> TowerElement:
        while True:
            value = TowerElement(tuple(rng.randrange(self.p) for _ in range(4)))  # type: ignore[arg-type]
            if not (nonzero and value.is_zero()):
                return value


def ff_ops(tower: Tower, op: str, a: TowerElement, b: Optional[TowerElement] = None,
           exponent: Optional[int] = None) -> TowerElement:
    """Dispatch mul / inv / pow on tower elements."""
    if op == "mul":
        if b is None:
            raise FieldError("mul needs two operands")
        return tower.mul(a, b)
    if op == "inv":
        return tower.inv(a)
    if op == "pow":
        if exponent is None:
            raise FieldError("pow needs an exponent")
        return tower.pow(a, exponent)
    raise FieldError(f"unknown field operation {op!r}")
