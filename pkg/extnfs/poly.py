"""Polynomials over Z, over K = Q(alpha), and over the finite fields F_q and F_q[alpha]/(h)."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from math import gcd
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import gmpy2

from .errors import FieldError, PolynomialError

logger = logging.getLogger("extnfs.poly")

# Fields this small are searched exhaustively for roots.
BRUTE_FORCE_ORDER = 64


def _trim(coeffs: Iterable[Any], zero: Any = 0) -> Tuple[Any, ...]:
    items = list(coeffs)
    while items and items[-1] == zero:
        items.pop()
    return tuple(items)


@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial, coefficients low degree first."""

    coeffs: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _trim(int(c) for c in self.coeffs))

    @classmethod
    def parse(cls, text: str) -> "IntPoly":
        return cls(tuple(int(part, 0) for part in text.split(",") if part.strip()))

    def dump(self) -> str:
        return ",".join(str(c) for c in self.coeffs) or "0"

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x: int) -> int:
        result = 0
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def __add__(self, other: "IntPoly") -> "IntPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPoly(tuple(x + y for x, y in zip(a, b)))

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        if self.is_zero() or other.is_zero():
            return IntPoly(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(tuple(out))

    def __pow__(self, e: int) -> "IntPoly":
        result = IntPoly((1,))
        for _ in range(e):
            result = result * self
        return result

    def derivative(self) -> "IntPoly":
        return IntPoly(tuple(i * c for i, c in enumerate(self.coeffs) if i))

    def content(self) -> int:
        value = 0
        for c in self.coeffs:
            value = gcd(value, c)
        return value

    def mod(self, q: int) -> List[int]:
        return list(_trim(c % q for c in self.coeffs))

    def __str__(self) -> str:
        terms = []
        for i, c in reversed(list(enumerate(self.coeffs))):
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*x^{i}" if i > 1 else f"{c}*x")
        return " + ".join(terms) or "0"


@dataclass(frozen=True)
class RelPoly:
    """Polynomial in x over Z[alpha]; coefficient i is (c0, c1) meaning c0 + c1*alpha."""

    coeffs: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "coeffs", _trim(((int(c0), int(c1)) for c0, c1 in self.coeffs), (0, 0)))

    @classmethod
    def parse(cls, text: str) -> "RelPoly":
        pairs = []
        for item in text.split(";"):
            if item.strip():
                c0, c1 = (int(part, 0) for part in item.split(","))
                pairs.append((c0, c1))
        return cls(tuple(pairs))

    def dump(self) -> str:
        return ";".join(f"{c0},{c1}" for c0, c1 in self.coeffs) or "0,0"

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Tuple[int, int]:
        return self.coeffs[-1] if self.coeffs else (0, 0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def parts(self) -> Tuple[IntPoly, IntPoly]:
        """(P0, P1) with self = P0(x) + alpha * P1(x)."""
        return (IntPoly(tuple(c0 for c0, _ in self.coeffs)),
                IntPoly(tuple(c1 for _, c1 in self.coeffs)))

    def at_root(self, r: int, q: int) -> List[int]:
        """Reduce mod (q, alpha - r) to a polynomial over F_q."""
        return list(_trim((c0 + c1 * r) % q for c0, c1 in self.coeffs))

    def over_extension(self, q: int) -> List[Tuple[int, int]]:
        """Reduce mod q to a polynomial over F_q[alpha]/(h)."""
        return list(_trim(((c0 % q, c1 % q) for c0, c1 in self.coeffs), (0, 0)))

    def __str__(self) -> str:
        terms = []
        for i, (c0, c1) in reversed(list(enumerate(self.coeffs))):
            if c0 or c1:
                terms.append(f"({c0} + {c1}*a)*x^{i}")
        return " + ".join(terms) or "0"


# ---------------------------------------------------------------- finite fields


class PrimeField:
    """F_q with elements as ints in [0, q)."""

    __slots__ = ("q", "order", "zero", "one")

    def __init__(self, q: int) -> None:
        self.q = q
        self.order = q
        self.zero = 0
        self.one = 1

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def neg(self, a: int) -> int:
        return -a % self.q

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise FieldError("inverse of zero")
        return int(gmpy2.invert(a, self.q))

    def elements(self) -> Iterable[int]:
        return range(self.q)

    def random(self, rng: random.Random) -> int:
        return rng.randrange(self.q)

    def coerce(self, value: Any) -> int:
        return int(value) % self.q


class QuadField:
    """F_q[alpha]/(alpha^2 + h1*alpha + h0); elements (c0, c1) = c0 + c1*alpha."""

    __slots__ = ("q", "h0", "h1", "order", "zero", "one")

    def __init__(self, q: int, h: IntPoly) -> None:
        if h.degree != 2 or h.lc % q == 0:
            raise PolynomialError("extension needs a quadratic h with unit leading coefficient")
        inv = int(gmpy2.invert(h.lc, q))
        self.q = q
        self.h0 = h.coeffs[0] * inv % q
        self.h1 = h.coeffs[1] * inv % q
        self.order = q * q
        self.zero = (0, 0)
        self.one = (1, 0)

    def add(self, a, b):
        return ((a[0] + b[0]) % self.q, (a[1] + b[1]) % self.q)

    def sub(self, a, b):
        return ((a[0] - b[0]) % self.q, (a[1] - b[1]) % self.q)

    def neg(self, a):
        return (-a[0] % self.q, -a[1] % self.q)

    def mul(self, a, b):
        q = self.q
        hi = a[1] * b[1]
        return ((a[0] * b[0] - self.h0 * hi) % q,
                (a[0] * b[1] + a[1] * b[0] - self.h1 * hi) % q)

    def norm(self, a) -> int:
        return (a[0] * a[0] - self.h1 * a[0] * a[1] + self.h0 * a[1] * a[1]) % self.q

    def inv(self, a):
        n = self.norm(a)
        if n == 0:
            raise FieldError("inverse of zero")
        n_inv = int(gmpy2.invert(n, self.q))
        return ((a[0] - self.h1 * a[1]) * n_inv % self.q, -a[1] * n_inv % self.q)

    def elements(self):
        return ((c0, c1) for c1 in range(self.q) for c0 in range(self.q))

    def random(self, rng: random.Random):
        return (rng.randrange(self.q), rng.randrange(self.q))

    def coerce(self, value):
        if isinstance(value, tuple):
            return (value[0] % self.q, value[1] % self.q)
        return (int(value) % self.q, 0)


class PolyRing:
    """Dense univariate polynomials over a PrimeField or QuadField."""

    def __init__(self, field) -> None:
        self.F = field
        self.x = [field.zero, field.one]

    def trim(self, a: Sequence) -> List:
        return list(_trim(a, self.F.zero))

    def deg(self, a: Sequence) -> int:
        return len(a) - 1

    def add(self, a, b):
        F = self.F
        n = max(len(a), len(b))
        return self.trim(F.add(a[i] if i < len(a) else F.zero, b[i] if i < len(b) else F.zero)
                         for i in range(n))

    def sub(self, a, b):
        F = self.F
        n = max(len(a), len(b))
        return self.trim(F.sub(a[i] if i < len(a) else F.zero, b[i] if i < len(b) else F.zero)
                         for i in range(n))

    def mul(self, a, b):
        F = self.F
        if not a or not b:
            return []
        out = [F.zero] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == F.zero:
                continue
            for j, bj in enumerate(b):
                out[i + j] = F.add(out[i + j], F.mul(ai, bj))
        return self.trim(out)

    def scale(self, a, c):
        return self.trim(self.F.mul(c, ai) for ai in a)

    def monic(self, a):
        if not a:
            return []
        return self.scale(a, self.F.inv(a[-1]))

    def divmod(self, a, b):
        F = self.F
        if not b:
            raise FieldError("polynomial division by zero")
        rem = list(a)
        quot = [F.zero] * max(len(a) - len(b) + 1, 0)
        inv_lc = F.inv(b[-1])
        while len(rem) >= len(b) and rem:
            shift = len(rem) - len(b)
            c = F.mul(rem[-1], inv_lc)
            quot[shift] = c
            for j, bj in enumerate(b):
                rem[shift + j] = F.sub(rem[shift + j], F.mul(c, bj))
            rem = self.trim(rem)
        return self.trim(quot), rem

    def rem(self, a, b):
        return self.divmod(a, b)[1]

    def gcd(self, a, b):
        a, b = self.trim(a), self.trim(b)
        while b:
            a, b = b, self.rem(a, b)
        return self.monic(a)

    def powmod(self, base, e: int, mod):
        result = [self.F.one]
        base = self.rem(base, mod)
        while e:
            if e & 1:
                result = self.rem(self.mul(result, base), mod)
            e >>= 1
            if e:
                base = self.rem(self.mul(base, base), mod)
        return self.rem(result, mod)

    def evaluate(self, a, value):
        F = self.F
        result = F.zero
        for c in reversed(a):
            result = F.add(F.mul(result, value), c)
        return result

    def derivative(self, a):
        F = self.F
        return self.trim(F.mul(F.coerce(i), c) for i, c in enumerate(a) if i)

    def frobenius_x(self, f, times: int = 1):
        """x^(Q^times) mod f, Q the field order."""
        h = self.rem(self.x, f)
        for _ in range(times):
            h = self.powmod(h, self.F.order, f)
        return h

    # -- factorization helpers

    def roots(self, f) -> List:
        """Distinct roots of f in the field, sorted."""
        f = self.trim(f)
        if not f:
            raise PolynomialError("vanishing polynomial")
        if len(f) == 1:
            return []
        if self.F.order <= BRUTE_FORCE_ORDER:
            return sorted(v for v in self.F.elements() if self.evaluate(f, v) == self.F.zero)
        f = self.monic(f)
        g = self.gcd(f, self.sub(self.frobenius_x(f), self.x))
        rng = random.Random(self.F.order)
        return sorted(self._split_linear(g, rng))

    def _split_linear(self, g, rng: random.Random) -> List:
        F = self.F
        if len(g) <= 1:
            return []
        if len(g) == 2:
            return [F.neg(F.mul(g[0], F.inv(g[1])))]
        half = (F.order - 1) // 2
        while True:
            shift = [F.random(rng), F.one]
            w = self.sub(self.powmod(shift, half, g), [F.one])
            d = self.gcd(g, w)
            if 0 < self.deg(d) < self.deg(g):
                return self._split_linear(d, rng) + self._split_linear(self.divmod(g, d)[0], rng)

    def is_squarefree(self, f) -> bool:
        f = self.trim(f)
        df = self.derivative(f)
        if not df:
            return len(f) <= 1
        return self.deg(self.gcd(f, df)) == 0

    def is_irreducible(self, f) -> bool:
        """Rabin's test."""
        f = self.trim(f)
        if not f:
            raise PolynomialError("vanishing polynomial")
        n = self.deg(f)
        if n <= 0:
            return False
        if n == 1:
            return True
        f = self.monic(f)
        for r in _prime_divisors(n):
            h = self.frobenius_x(f, n // r)
            if self.deg(self.gcd(f, self.sub(h, self.x))) > 0:
                return False
        return self.frobenius_x(f, n) == self.rem(self.x, f)

    def factor_degrees(self, f) -> List[int]:
        """Degrees of the irreducible factors of a squarefree f (distinct-degree)."""
        f = self.monic(self.trim(f))
        degrees: List[int] = []
        h = self.rem(self.x, f) if self.deg(f) > 0 else []
        i = 1
        while self.deg(f) >= 2 * i:
            h = self.powmod(h, self.F.order, f)
            g = self.gcd(f, self.sub(h, self.x))
            if self.deg(g) > 0:
                degrees.extend([i] * (self.deg(g) // i))
                f = self.divmod(f, g)[0]
                h = self.rem(h, f)
            i += 1
        if self.deg(f) > 0:
            degrees.append(self.deg(f))
        return sorted(degrees)


def _prime_divisors(n: int) -> List[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------- integer-level operations


def roots_mod(f: IntPoly, q: int) -> List[int]:
    """Distinct residues r in [0, q) with f(r) = 0 mod q, ascending."""
    reduced = f.mod(q)
    if not reduced:
        raise PolynomialError("vanishing polynomial")
    return PolyRing(PrimeField(q)).roots(reduced)


def is_irreducible_mod(f: IntPoly, q: int) -> bool:
    reduced = f.mod(q)
    if not reduced:
        raise PolynomialError("vanishing polynomial")
    return PolyRing(PrimeField(q)).is_irreducible(reduced)


def _prem(a: List[int], b: List[int]) -> List[int]:
    """Pseudo-remainder lc(b)^(deg a - deg b + 1) * a mod b over Z."""
    lc_b = b[-1]
    rem = list(a)
    e = len(a) - len(b) + 1
    while rem and len(rem) >= len(b):
        c = rem[-1]
        shift = len(rem) - len(b)
        rem = [lc_b * r for r in rem]
        for j, bj in enumerate(b):
            rem[shift + j] -= c * bj
        rem = list(_trim(rem))
        e -= 1
    factor = lc_b**e
    return [factor * r for r in rem]


def resultant(f: IntPoly, g: IntPoly) -> int:
    """Res(f, g) with the Sylvester determinant sign, by the subresultant PRS."""
    if f.is_zero() or g.is_zero():
        raise PolynomialError("resultant of the zero polynomial")
    if f.degree == 0 and g.degree == 0:
        raise PolynomialError("degenerate resultant")
    if f.degree == 0:
        return f.lc**g.degree
    if g.degree == 0:
        return g.lc**f.degree

    a_cont, b_cont = f.content(), g.content()
    if f.lc < 0:
        a_cont = -a_cont
    if g.lc < 0:
        b_cont = -b_cont
    a = [c // a_cont for c in f.coeffs]
    b = [c // b_cont for c in g.coeffs]
    t = a_cont ** g.degree * b_cont ** f.degree
    s = 1
    if len(a) < len(b):
        a, b = b, a
        if (len(a) - 1) % 2 and (len(b) - 1) % 2:
            s = -1

    big_g, big_h = 1, 1
    while True:
        da, db = len(a) - 1, len(b) - 1
        delta = da - db
        if da % 2 and db % 2:
            s = -s
        r = _prem(a, b)
        a = b
        divisor = big_g * big_h**delta
        b = [c // divisor for c in r]
        big_g = a[-1]
        if delta == 0:
            pass
        elif delta == 1:
            big_h = big_g
        else:
            big_h = big_g**delta // big_h ** (delta - 1)
        if not b:
            return 0
        if len(b) == 1:
            break
    da = len(a) - 1
    big_h = b[-1] ** da // big_h ** (da - 1)
    return s * t * big_h


def is_squarefree(f: IntPoly) -> bool:
    """Squarefree over Q: nonzero discriminant."""
    if f.degree <= 1:
        return True
    return resultant(f, f.derivative()) != 0


def absolute_poly(rel: RelPoly, h: IntPoly) -> IntPoly:
    """Res_alpha(rel, h) for monic quadratic h: P0^2 - h1*P0*P1 + h0*P1^2."""
    if rel.is_zero():
        raise PolynomialError("absolute polynomial of zero")
    if h.degree != 2 or h.lc != 1:
        raise PolynomialError("absolute_poly needs a monic quadratic h")
    h0, h1 = h.coeffs[0], h.coeffs[1]
    p0, p1 = rel.parts()
    result = p0 * p0 - IntPoly((h1,)) * p0 * p1 + IntPoly((h0,)) * p1 * p1
    if not is_squarefree(result):
        logger.warning("Absolute polynomial %s is not squarefree", result)
    return result


def factor_quadratic_over_extension(f0: RelPoly, q: int, h: IntPoly) -> List[Tuple[int, int]]:
    """Linear factors x + a0 + a1*alpha of f0 made monic over F_q[alpha]/(h).

    Returns an empty list when f0 has no root there; a double root is listed twice.
    """
    if not is_irreducible_mod(h, q):
        raise PolynomialError(f"h is not irreducible mod {q}")
    field = QuadField(q, h)
    ring = PolyRing(field)
    coeffs = f0.over_extension(q)
    if len(coeffs) != f0.degree + 1 or field.norm(coeffs[-1]) == 0:
        raise PolynomialError(f"projective case: leading coefficient of f0 vanishes mod {q}")
    monic = ring.monic(coeffs)
    roots = ring.roots(monic)
    factors: List[Tuple[int, int]] = []
    remaining = monic
    for rho in roots:
        linear = [field.neg(rho), field.one]
        while ring.deg(remaining) > 0:
            quot, rem = ring.divmod(remaining, linear)
            if rem:
                break
            factors.append(field.neg(rho))
            remaining = quot
    if ring.deg(remaining) > 0:
        return []
    return factors


def hensel_lift(f: IntPoly, r: int, q: int, k: int) -> int:
    """Lift a simple root r of f mod q to a root mod q^k."""
    deriv = f.derivative()
    if deriv(r) % q == 0:
        raise PolynomialError(f"root {r} of f mod {q} is not simple")
    modulus = q
    root = r % q
    while modulus < q**k:
        modulus = min(modulus * modulus, q**k)
        step = f(root) * int(gmpy2.invert(deriv(root) % modulus, modulus))
        root = (root - step) % modulus
    return root
