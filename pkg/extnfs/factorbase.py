"""Prime ideals of both sides up to the large-prime bound and their valuations.

Each prime q splits, ramifies or stays inert in K = Q(alpha). Above every prime
of K the side polynomial reduces to linear factors (degree-1 ideals when q splits,
deg2-type2 ideals when q is inert) and a rootless part (deg2-type1 ideals when it
is an irreducible quadratic over F_q, deg4 ideals on side 0 for inert q). Primes
dividing the leading coefficient norm or where the reduction is not squarefree
are not listed; any element whose norm they divide is unattributable.
"""

from __future__ import annotations

import logging
import multiprocessing
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import gmpy2

from .arith import primes_up_to
from .errors import ContractViolation, PolynomialError, Unattributable
from .norms import k_norm, relative_norm, norm_of
from .poly import PolyRing, PrimeField, QuadField, hensel_lift, roots_mod

logger = logging.getLogger("extnfs.factorbase")

DEG1, DEG2T1, DEG2T2, DEG4, JIDEAL = "deg1", "deg2t1", "deg2t2", "deg4", "J"
KIND_ORDER = {JIDEAL: 0, DEG1: 1, DEG2T1: 2, DEG2T2: 3, DEG4: 4}
DEGREES = {JIDEAL: 0, DEG1: 1, DEG2T1: 2, DEG2T2: 2, DEG4: 4}

SPLIT, RAMIFIED, INERT = "split", "ramified", "inert"
PROJECTIVE, SINGULAR = "projective", "singular"

PRIMES_PER_TASK = 256


@dataclass(frozen=True)
class PrimeIdeal:
    """A prime ideal of one side, or the denominator ideal J (q = 0)."""

    side: int
    q: int
    kind: str
    data: Tuple[int, ...] = ()
    index: int = field(default=-1, compare=False, hash=False)

    @property
    def degree(self) -> int:
        return DEGREES[self.kind]

    @property
    def sort_key(self) -> Tuple[int, int, int, Tuple[int, ...]]:
        return (self.side, self.q, KIND_ORDER[self.kind], self.data)

    def with_index(self, index: int) -> "PrimeIdeal":
        return PrimeIdeal(self.side, self.q, self.kind, self.data, index)

    def token(self) -> str:
        """Relation-file form: q.r.R, q.t1.r, q.t2.a0.a1, q.t4 (hex), or j."""
        if self.kind == JIDEAL:
            return "j"
        return f"{self.q:x}.{self._data_text()}"

    def _data_text(self) -> str:
        if self.kind == DEG1:
            return f"{self.data[0]:x}.{self.data[1]:x}"
        if self.kind == DEG2T1:
            return f"t1.{self.data[0]:x}"
        if self.kind == DEG2T2:
            return f"t2.{self.data[0]:x}.{self.data[1]:x}"
        return "t4"

    @classmethod
    def from_token(cls, side: int, token: str) -> "PrimeIdeal":
        if token == "j":
            return cls(side, 0, JIDEAL)
        parts = token.split(".")
        try:
            q = int(parts[0], 16)
            if parts[1] == "t1" and len(parts) == 3:
                return cls(side, q, DEG2T1, (int(parts[2], 16),))
            if parts[1] == "t2" and len(parts) == 4:
                return cls(side, q, DEG2T2, (int(parts[2], 16), int(parts[3], 16)))
            if parts[1] == "t4" and len(parts) == 2:
                return cls(side, q, DEG4)
            if len(parts) == 3:
                return cls(side, q, DEG1, (int(parts[1], 16), int(parts[2], 16)))
        except (IndexError, ValueError):
            pass
        raise ValueError(f"malformed ideal token {token!r}")

    def fb_line(self) -> str:
        return f"{self.side}:{self.q:x}:{self.degree}:{self._data_text()}"

    @classmethod
    def from_fb_line(cls, line: str) -> "PrimeIdeal":
        side, q, degree, data = line.strip().split(":")
        ideal = cls.from_token(int(side), f"{q}.{data}")
        if ideal.degree != int(degree):
            raise ValueError(f"degree mismatch in factor base line {line!r}")
        return ideal

    def contains(self, element: Sequence[int], h) -> bool:
        """Membership of a + b*alpha + (c + d*alpha)*x in this ideal."""
        a, b, c, d = element
        q = self.q
        if self.kind == DEG1:
            r, big_r = self.data
            return ((a + b * r) + (c + d * r) * big_r) % q == 0
        if self.kind == DEG2T1:
            r = self.data[0]
            return (a + b * r) % q == 0 and (c + d * r) % q == 0
        if self.kind == DEG2T2:
            k = QuadField(q, h)
            lhs = k.coerce((a, b))
            rhs = k.mul(k.coerce((c, d)), self.data)
            return lhs == rhs
        if self.kind == DEG4:
            return all(x % q == 0 for x in element)
        return False

    def __str__(self) -> str:
        return f"side{self.side}:{self.token()}"


def j_ideal(side: int) -> PrimeIdeal:
    return PrimeIdeal(side, 0, JIDEAL)


@dataclass(frozen=True)
class Place:
    """A prime of K above q and the reduction of the side polynomial there."""

    r: Optional[int]
    roots: Tuple
    nonlinear: int


@dataclass(frozen=True)
class PrimeData:
    q: int
    status: str
    places: Tuple[Place, ...] = ()

    @property
    def bad(self) -> bool:
        return self.status in (PROJECTIVE, SINGULAR)


class IdealOracle:
    """Per-prime structure of one side, cached by q."""

    def __init__(self, setup, side: int) -> None:
        self.setup = setup
        self.side = side
        self.poly = setup.side_poly(side)
        self.h = setup.h
        self.n = self.poly.degree
        self.lc_norm = k_norm(self.poly.lc, self.h)
        self._cache: Dict[int, PrimeData] = {}

    def prime(self, q: int, cache: bool = True) -> PrimeData:
        data = self._cache.get(q)
        if data is None:
            data = self._classify(q)
            if cache:
                self._cache[q] = data
        return data

    def _classify(self, q: int) -> PrimeData:
        if self.lc_norm % q == 0:
            return PrimeData(q, PROJECTIVE)
        h_roots = roots_mod(self.h, q)
        if not h_roots:
            ring = PolyRing(QuadField(q, self.h))
            coeffs = self.poly.over_extension(q)
            if not ring.is_squarefree(coeffs):
                return PrimeData(q, SINGULAR)
            # factor x + a0 + a1*alpha for every root -(a0 + a1*alpha)
            roots = tuple(sorted(ring.F.neg(rho) for rho in ring.roots(coeffs)))
            return PrimeData(q, INERT, (Place(None, roots, self.n - len(roots)),))
        ramified = len(h_roots) == 1
        ring = PolyRing(PrimeField(q))
        places = []
        for r in h_roots:
            coeffs = self.poly.at_root(r, q)
            if not ring.is_squarefree(coeffs):
                return PrimeData(q, SINGULAR)
            roots = tuple(ring.roots(coeffs))
            places.append(Place(r, roots, self.n - len(roots)))
        return PrimeData(q, RAMIFIED if ramified else SPLIT, tuple(places))

    def ideals_above(self, q: int) -> List[PrimeIdeal]:
        """Listed ideals above q in (kind, data) order."""
        data = self.prime(q)
        if data.bad:
            return []
        out: List[PrimeIdeal] = []
        if data.status == INERT:
            place = data.places[0]
            out.extend(PrimeIdeal(self.side, q, DEG2T2, rho) for rho in place.roots)
            if self.side == 0 and place.nonlinear == 2:
                out.append(PrimeIdeal(self.side, q, DEG4))
        else:
            for place in data.places:
                out.extend(PrimeIdeal(self.side, q, DEG1, (place.r, big_r)) for big_r in place.roots)
                if data.status == SPLIT and place.nonlinear == 2:
                    out.append(PrimeIdeal(self.side, q, DEG2T1, (place.r,)))
        return sorted(out, key=lambda ideal: ideal.sort_key)


def _valuation(x: int, q: int, cap: int) -> int:
    if x == 0:
        return cap
    _, count = gmpy2.remove(x, q)
    return min(int(count), cap)


def local_factorization(oracle: IdealOracle, element: Sequence[int], q: int,
                        e: Optional[int] = None) -> Dict[PrimeIdeal, int]:
    """Split v_q(N_side(element)) over the listed ideals above q.

    Raises:
        Unattributable: q is not listed, or part of the valuation falls on an unlisted ideal.
    """
    if e is None:
        e = _valuation(norm_of(oracle.poly, oracle.h, element), q, 1 << 30)
    if e == 0:
        return {}
    data = oracle.prime(q)
    if data.bad:
        raise Unattributable(f"q={q} is {data.status} on side {oracle.side}")
    a, b, c, d = element
    side, n = oracle.side, oracle.n
    nu = relative_norm(oracle.poly, oracle.h, element)
    out: Dict[PrimeIdeal, int] = {}

    def add(ideal: PrimeIdeal, value: int) -> None:
        if value:
            out[ideal] = out.get(ideal, 0) + value

    if data.status == SPLIT:
        cap = e + 1
        modulus = q**cap
        for place in data.places:
            r_hat = hensel_lift(oracle.h, place.r, q, cap)
            big_a = (a + b * r_hat) % modulus
            big_b = (c + d * r_hat) % modulus
            m = min(_valuation(big_a, q, cap), _valuation(big_b, q, cap))
            t = _valuation((nu[0] + nu[1] * r_hat) % modulus, q, cap)
            if m:
                if place.nonlinear not in (0, 2):
                    raise Unattributable(f"q={q}: common factor on an unlisted ideal")
                for big_r in place.roots:
                    add(PrimeIdeal(side, q, DEG1, (place.r, big_r)), m)
                if place.nonlinear == 2:
                    add(PrimeIdeal(side, q, DEG2T1, (place.r,)), m)
            extra = t - n * m
            if extra < 0:
                raise Unattributable(f"q={q}: norm valuation below the common factor")
            if extra:
                qm = q**m
                a_red, b_red = (big_a // qm) % q, (big_b // qm) % q
                if b_red == 0:
                    raise Unattributable(f"q={q}: valuation at infinity")
                rho = -a_red * int(gmpy2.invert(b_red, q)) % q
                if rho not in place.roots:
                    raise Unattributable(f"q={q}: {rho} is not a root")
                add(PrimeIdeal(side, q, DEG1, (place.r, rho)), extra)
    elif data.status == RAMIFIED:
        place = data.places[0]
        big_a, big_b = (a + b * place.r) % q, (c + d * place.r) % q
        if big_b == 0:
            raise Unattributable(f"q={q}: ramified prime divides the x coefficient")
        rho = -big_a * int(gmpy2.invert(big_b, q)) % q
        if rho not in place.roots:
            raise Unattributable(f"q={q}: {rho} is not a root")
        add(PrimeIdeal(side, q, DEG1, (place.r, rho)), e)
    else:
        place = data.places[0]
        cap = e + 1
        m = min(_valuation(x, q, cap) for x in element)
        t = min(_valuation(nu[0], q, cap), _valuation(nu[1], q, cap))
        if m:
            if place.nonlinear == 0:
                for rho in place.roots:
                    add(PrimeIdeal(side, q, DEG2T2, rho), m)
            elif place.nonlinear == 2 and side == 0:
                add(PrimeIdeal(side, q, DEG4), m)
            else:
                raise Unattributable(f"q={q}: common factor on an unlisted ideal")
        extra = t - n * m
        if extra < 0:
            raise Unattributable(f"q={q}: norm valuation below the common factor")
        if extra:
            k = QuadField(q, oracle.h)
            qm = q**m
            num = k.coerce((a // qm, b // qm))
            den = k.coerce((c // qm, d // qm))
            if den == k.zero:
                raise Unattributable(f"q={q}: valuation at infinity")
            rho = k.mul(num, k.inv(den))
            if rho not in place.roots:
                raise Unattributable(f"q={q}: {rho} is not a root over F_q^2")
            add(PrimeIdeal(side, q, DEG2T2, rho), extra)

    total = sum(ideal.degree * value for ideal, value in out.items())
    if total != e:
        raise Unattributable(f"q={q}: attributed {total} of {e} on side {side}")
    return out


def ideal_valuation(oracle: IdealOracle, ideal: PrimeIdeal, element: Sequence[int]) -> int:
    if not any(element):
        raise ContractViolation("valuation of the zero element")
    if gmpy2.gcd(gmpy2.gcd(element[0], element[1]), gmpy2.gcd(element[2], element[3])) != 1:
        raise ContractViolation("unnormalized element")
    if ideal.side != oracle.side or ideal.kind == JIDEAL:
        raise ContractViolation(f"ideal {ideal} does not belong to side {oracle.side}")
    return local_factorization(oracle, element, ideal.q).get(ideal, 0)


class FactorBase:
    """Listed ideals of one side up to ``bound``, indexed in sort order."""

    def __init__(self, side: int, bound: int, ideals: Iterable[PrimeIdeal]) -> None:
        self.side = side
        self.bound = bound
        ordered = sorted(set(ideals), key=lambda ideal: ideal.sort_key)
        self.ideals = [ideal.with_index(i) for i, ideal in enumerate(ordered)]
        self._index = {ideal: ideal.index for ideal in self.ideals}

    def __len__(self) -> int:
        return len(self.ideals)

    def __iter__(self) -> Iterator[PrimeIdeal]:
        return iter(self.ideals)

    def __contains__(self, ideal: PrimeIdeal) -> bool:
        return ideal in self._index

    def sieve_base(self, bound: int) -> List[PrimeIdeal]:
        """Degree-1 ideals with q <= bound."""
        return [ideal for ideal in self.ideals if ideal.kind == DEG1 and ideal.q <= bound]

    def degree_counts(self) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for ideal in self.ideals:
            counts[ideal.degree] = counts.get(ideal.degree, 0) + 1
        return counts


_WORKER_ORACLE: Optional[IdealOracle] = None


def _init_worker(setup, side: int) -> None:
    global _WORKER_ORACLE
    _WORKER_ORACLE = IdealOracle(setup, side)


def _ideals_for(primes: Sequence[int]) -> Tuple[List[PrimeIdeal], List[Tuple[int, str]]]:
    oracle = _WORKER_ORACLE
    ideals: List[PrimeIdeal] = []
    skipped: List[Tuple[int, str]] = []
    for q in primes:
        data = oracle.prime(q)
        if data.bad:
            skipped.append((q, data.status))
        else:
            ideals.extend(oracle.ideals_above(q))
    return ideals, skipped


def _prime_tasks(bound: int) -> List[List[int]]:
    primes = [int(q) for q in primes_up_to(bound)]
    return [primes[i:i + PRIMES_PER_TASK] for i in range(0, len(primes), PRIMES_PER_TASK)]


def build_factor_base(setup, side: int, bound: int, workers: int = 1) -> FactorBase:
    """List every ideal of norm prime q <= bound on one side."""
    if bound < 2:
        raise ContractViolation("factor base bound must be at least 2")
    started = time.time()
    tasks = _prime_tasks(bound)
    ideals: List[PrimeIdeal] = []
    skipped: List[Tuple[int, str]] = []
    if workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(workers, initializer=_init_worker, initargs=(setup, side)) as pool:
            for chunk, bad in pool.imap(_ideals_for, tasks):
                ideals.extend(chunk)
                skipped.extend(bad)
    else:
        _init_worker(setup, side)
        for task in tasks:
            chunk, bad = _ideals_for(task)
            ideals.extend(chunk)
            skipped.extend(bad)
    for q, status in skipped:
        logger.info("Side %d: skipping %s prime %d", side, status, q)
    fb = FactorBase(side, bound, ideals)
    logger.info("Side %d factor base to %d: %d ideals %s, %d primes skipped (%.1fs)",
                side, bound, len(fb), fb.degree_counts(), len(skipped), time.time() - started)
    return fb


def count_degree1_ideals(setup, side: int, bound: int) -> int:
    """Number of listed degree-1 ideals with q <= bound, without storing them."""
    oracle = IdealOracle(setup, side)
    total = 0
    for q in primes_up_to(bound):
        data = oracle.prime(int(q), cache=False)
        if not data.bad and data.status != INERT:
            total += sum(len(place.roots) for place in data.places)
    return total


def write_factor_base(path: Path, fb: FactorBase) -> None:
    lines = [f"# side {fb.side} bound {fb.bound} ideals {len(fb)}"]
    lines.extend(ideal.fb_line() for ideal in fb.ideals)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_factor_base(path: Path, setup=None) -> FactorBase:
    """Load a factor base file; with ``setup`` every degree-1 entry is rechecked."""
    side, bound = 0, 0
    ideals: List[PrimeIdeal] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            words = line[1:].split()
            side, bound = int(words[1]), int(words[3])
            continue
        if line.strip():
            ideals.append(PrimeIdeal.from_fb_line(line))
    if setup is not None:
        for ideal in ideals:
            if ideal.kind != DEG1:
                continue
            r, big_r = ideal.data
            poly = setup.side_poly(ideal.side)
            if setup.h(r) % ideal.q or poly_value(poly, r, big_r, ideal.q):
                raise PolynomialError(f"factor base entry {ideal} fails its root check")
    return FactorBase(side, bound, ideals)


def poly_value(poly, r: int, x: int, q: int) -> int:
    """F(x) mod (q, alpha - r)."""
    value = 0
    for coeff in reversed(poly.at_root(r, q) or [0]):
        value = (value * x + coeff) % q
    return value
