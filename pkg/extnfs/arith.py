"""Integer primitives: primality, prime tables, bounded-effort smoothness factoring."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import gmpy2
import numpy as np

from .errors import ContractViolation, NotSmooth

logger = logging.getLogger("extnfs.arith")

TRIAL_LIMIT = 10**6
CHUNK = 512
MR_BASES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
RHO_BATCH = 128


def is_prime(n: int) -> bool:
    """Deterministic below 2^64, 40 Miller-Rabin rounds above."""
    if n < 2:
        return False
    if n in MR_BASES_64:
        return True
    if n % 2 == 0:
        return False
    if n < 1 << 64:
        return all(gmpy2.is_strong_prp(n, a) for a in MR_BASES_64)
    return bool(gmpy2.is_prime(n, 40))


@lru_cache(maxsize=8)
def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for i in range(3, math.isqrt(n) + 1, 2):
        if sieve[i]:
            sieve[i * i::2 * i] = False
    return np.flatnonzero(sieve).astype(np.int64)


def next_prime(n: int) -> int:
    return int(gmpy2.next_prime(n))


def round_log2(n: int) -> int:
    """Nearest integer to log2(n)."""
    return int(round(math.log2(n)))


def invmod(a: int, m: int) -> int:
    return int(gmpy2.invert(a, m))


@dataclass(frozen=True)
class FactoredInteger:
    """sign * prod(q^e); primes strictly increasing."""

    sign: int
    factors: Tuple[Tuple[int, int], ...]

    def value(self) -> int:
        result = self.sign
        for q, e in self.factors:
            result *= q**e
        return result

    @property
    def primes(self) -> List[int]:
        return [q for q, _ in self.factors]

    def largest(self) -> int:
        return self.factors[-1][0] if self.factors else 1

    def __str__(self) -> str:
        if not self.factors:
            return str(self.sign)
        body = " * ".join(f"{q}^{e}" if e > 1 else str(q) for q, e in self.factors)
        return f"-{body}" if self.sign < 0 else body


@lru_cache(maxsize=4)
def _prime_chunks(limit: int) -> Tuple[Tuple[int, Tuple[int, ...]], ...]:
    primes = [int(q) for q in primes_up_to(limit)]
    chunks = []
    for start in range(0, len(primes), CHUNK):
        block = tuple(primes[start:start + CHUNK])
        product = gmpy2.mpz(1)
        for q in block:
            product *= q
        chunks.append((product, block))
    return tuple(chunks)


def _trial_divide(n: int, limit: int, found: Dict[int, int]) -> int:
    """Strip every prime <= limit from n; gcd against chunk products first."""
    m = gmpy2.mpz(n)
    for product, block in _prime_chunks(limit):
        if m == 1:
            break
        g = gmpy2.gcd(m, product)
        if g > 1:
            for q in block:
                if g % q == 0:
                    e = 0
                    while m % q == 0:
                        m //= q
                        e += 1
                    found[q] = found.get(q, 0) + e
        if block[-1] * block[-1] >= m:
            # No factor <= block[-1] remains, so m is 1 or a prime.
            break
    return int(m)


def brent_rho(n: int, budget: Optional[int]) -> Tuple[Optional[int], int]:
    """Deterministic Brent rho on a composite n.

    Tries polynomials x^2 + c for c = 1, 2, ... and returns (factor, iterations used);
    factor is None when the budget runs out.
    """
    n = gmpy2.mpz(n)
    if n % 2 == 0:
        return 2, 1
    used = 0
    c = 0
    while True:
        c += 1
        y, r, q, g = gmpy2.mpz(2), 1, gmpy2.mpz(1), gmpy2.mpz(1)
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                steps = min(RHO_BATCH, r - k)
                for _ in range(steps):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gmpy2.gcd(q, n)
                k += steps
                used += steps
                if budget is not None and used >= budget and g == 1:
                    return None, used
            r *= 2
        if g == n:
            while True:
                ys = (ys * ys + c) % n
                g = gmpy2.gcd(abs(x - ys), n)
                if g > 1:
                    break
        if 1 < g < n:
            return int(g), used
        if budget is not None and used >= budget:
            return None, used


def smooth_factor(n: int, bound: int, budget: Optional[int] = None) -> FactoredInteger:
    """Factor n completely over primes <= bound or raise NotSmooth.

    Trial division runs to min(bound, 10^6); the remainder goes through Brent rho
    with at most ``budget`` iterations in total (None: unlimited).
    """
    if n == 0:
        raise ContractViolation("cannot factor zero")
    sign = -1 if n < 0 else 1
    found: Dict[int, int] = {}
    limit = min(bound, TRIAL_LIMIT)
    m = _trial_divide(abs(n), limit, found) if limit >= 2 else abs(n)

    if m > 1 and (bound <= TRIAL_LIMIT or m < (limit + 1) ** 2):
        # Every prime <= limit is gone: m is prime, or every factor exceeds limit.
        if m > bound or not is_prime(m):
            raise NotSmooth(NotSmooth.EXCEEDS_BOUND, m)
        found[m] = found.get(m, 0) + 1
        m = 1

    used = 0
    stack = [m] if m > 1 else []
    while stack:
        current = stack.pop()
        if is_prime(current):
            if current > bound:
                raise NotSmooth(NotSmooth.EXCEEDS_BOUND, current)
            found[current] = found.get(current, 0) + 1
            continue
        root, exact = gmpy2.iroot(current, 2)
        if exact:
            stack.extend((int(root), int(root)))
            continue
        remaining = None if budget is None else budget - used
        factor, spent = brent_rho(current, remaining)
        used += spent
        if factor is None:
            raise NotSmooth(NotSmooth.BUDGET_EXHAUSTED, current)
        stack.extend((factor, current // factor))

    return FactoredInteger(sign, tuple(sorted(found.items())))
