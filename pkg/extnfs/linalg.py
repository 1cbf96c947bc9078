"""Schirokauer maps, the sparse system over F_ell and a Wiedemann nullspace solver."""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from .errors import ContractViolation, FullRankError, PolynomialError, SchirokauerUndefined
from .factorbase import PrimeIdeal
from .norms import norm_of
from .poly import IntPoly, PolyRing, PrimeField
from .relproc import RelationSet

logger = logging.getLogger("extnfs.linalg")

SmSlot = Tuple[str, int, int]
Column = Union[PrimeIdeal, SmSlot]

LIMB_BITS = 31
SMALL_ENTRY = 1 << 16
OBJECT_ELL = 1 << 62
SM_SAMPLES = 12


def unit_rank(poly: IntPoly) -> int:
    """r1 + r2 - 1 from the real root count of an irreducible polynomial."""
    x = sympy.Symbol("x")
    sp = sympy.Poly(list(reversed(poly.coeffs)), x)
    if poly.degree < 1 or not sp.is_irreducible:
        raise PolynomialError(f"{poly} is not irreducible over Q")
    real = sp.count_roots()
    return real + (poly.degree - real) // 2 - 1


def rank_mod(rows: Sequence[Sequence[int]], ell: int) -> int:
    """Rank of a dense integer matrix mod ell."""
    m = [[x % ell for x in row] for row in rows]
    rank, cols = 0, len(m[0]) if m else 0
    for col in range(cols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = pow(m[rank][col], -1, ell)
        m[rank] = [x * inv % ell for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                factor = m[i][col]
                m[i] = [(x - factor * y) % ell for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------- Schirokauer maps


class QuotientRing:
    """(Z/M)[theta]/(F) for a monic F given low degree first."""

    def __init__(self, modulus: int, monic: Sequence[int]) -> None:
        self.modulus = modulus
        self.f = [c % modulus for c in monic]
        self.n = len(monic) - 1

    def reduce(self, coeffs: Sequence[int]) -> List[int]:
        r = list(coeffs) + [0] * max(0, self.n - len(coeffs))
        for k in range(len(r) - 1, self.n - 1, -1):
            c = r[k]
            if c:
                shift = k - self.n
                for i in range(self.n):
                    r[shift + i] -= c * self.f[i]
        return [c % self.modulus for c in r[:self.n]]

    def mul(self, a: Sequence[int], b: Sequence[int]) -> List[int]:
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return self.reduce(out)

    def pow(self, a: Sequence[int], e: int) -> List[int]:
        result = self.reduce([1])
        base = self.reduce(a)
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result


def _inverse_mod_ell(a: List[int], f: List[int], ell: int) -> List[int]:
    """Inverse of a in F_ell[theta]/(f) by the extended Euclidean algorithm."""
    ring = PolyRing(PrimeField(ell))
    r0, r1 = ring.trim(f), ring.trim(a)
    s0, s1 = [], [1]
    while ring.deg(r1) > 0:
        quot, rem = ring.divmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, ring.sub(s0, ring.mul(quot, s1))
    if not r1:
        raise SchirokauerUndefined("element is not invertible mod ell")
    return ring.scale(s1, pow(r1[0], -1, ell))


def alpha_image(setup, side: int, ell: int) -> List[int]:
    """alpha = -P0(theta)/P1(theta) in (Z/ell^2)[theta]/(F_side), F_side made monic."""
    cached = setup.cache.get(f"sm_alpha{side}")
    if cached:
        return [int(c) for c in cached.split(",")]
    poly = setup.abs_poly(side)
    modulus = ell * ell
    lc_inv = pow(poly.lc, -1, modulus)
    monic = [c * lc_inv % modulus for c in poly.coeffs]
    ring = QuotientRing(modulus, monic)
    p0, p1 = setup.side_poly(side).parts()
    inv = _inverse_mod_ell([c % ell for c in p1.coeffs], [c % ell for c in monic], ell)
    # Newton step lifts the inverse from ell to ell^2.
    p1_red = ring.reduce(list(p1.coeffs))
    correction = ring.mul(p1_red, inv)
    correction = [(-c) % modulus for c in correction]
    correction[0] = (correction[0] + 2) % modulus
    inv = ring.mul(inv, correction)
    image = ring.mul([(-c) % modulus for c in p0.coeffs], inv)
    setup.cache[f"sm_alpha{side}"] = ",".join(str(c) for c in image)
    return image


@dataclass
class SchirokauerSpec:
    side: int
    poly: IntPoly
    rank: int
    epsilon: int
    window: int
    ell: int
    ring: QuotientRing
    alpha: List[int]
    alpha_theta: List[int]

    def element(self, element: Sequence[int]) -> List[int]:
        a, b, c, d = element
        m = self.ring.modulus
        out = [0] * self.ring.n
        out[0] += a
        if self.ring.n > 1:
            out[1] += c
        for i in range(self.ring.n):
            out[i] = (out[i] + b * self.alpha[i] + d * self.alpha_theta[i]) % m
        return out

    def mu_ring(self, value: Sequence[int]) -> List[int]:
        """(value^epsilon - 1)/ell mod ell, every coordinate."""
        power = self.ring.pow(value, self.epsilon)
        power[0] -= 1
        if any(c % self.ell for c in power):
            raise SchirokauerUndefined(f"SM undefined for {tuple(value)}, resieve")
        return [(c // self.ell) % self.ell for c in power]

    def mu(self, element: Sequence[int]) -> List[int]:
        return self.mu_ring(self.element(element))


def make_sm_spec(setup, side: int, ell: int, rank: Optional[int] = None, seed: int = 1) -> SchirokauerSpec:
    poly = setup.abs_poly(side)
    rank = unit_rank(poly) if rank is None else rank
    reduced = [c % ell for c in poly.coeffs]
    field_ring = PolyRing(PrimeField(ell))
    if not field_ring.is_squarefree(reduced):
        raise SchirokauerUndefined(f"ell ramifies on side {side}")
    epsilon = 1
    for degree in set(field_ring.factor_degrees(reduced)):
        term = ell**degree - 1
        epsilon = epsilon * term // math.gcd(epsilon, term)
    modulus = ell * ell
    lc_inv = pow(poly.lc, -1, modulus)
    ring = QuotientRing(modulus, [c * lc_inv % modulus for c in poly.coeffs])
    alpha = alpha_image(setup, side, ell)
    theta = ring.reduce([0, 1]) if ring.n > 1 else ring.reduce([0])
    spec = SchirokauerSpec(side, poly, rank, epsilon, 0, ell, ring, alpha, ring.mul(alpha, theta))
    if rank:
        spec.window = _choose_window(spec, setup, seed)
    logger.info("Side %d: unit rank %d, epsilon of %d bits, window %d",
                side, rank, epsilon.bit_length(), spec.window)
    return spec


def _choose_window(spec: SchirokauerSpec, setup, seed: int) -> int:
    """First run of rank coordinates whose sample matrix has full rank mod ell."""
    rng = random.Random(seed * 1009 + spec.side)
    samples = []
    while len(samples) < SM_SAMPLES:
        element = tuple(rng.randint(-1000, 1000) for _ in range(4))
        if not any(element[2:]):
            continue
        if norm_of(setup.side_poly(spec.side), setup.h, element) % spec.ell == 0:
            continue
        samples.append(spec.mu(element))
    for start in range(spec.ring.n - spec.rank + 1):
        if rank_mod([row[start:start + spec.rank] for row in samples], spec.ell) == spec.rank:
            return start
    raise SchirokauerUndefined(f"no coordinate window of rank {spec.rank} on side {spec.side}")


def schirokauer_map(element: Sequence[int], spec: SchirokauerSpec) -> Tuple[int, ...]:
    """The rank selected coordinates of mu(element) mod ell."""
    if not spec.rank:
        return ()
    mu = spec.mu(element)
    return tuple(mu[spec.window:spec.window + spec.rank])


def relation_sm(relation_element: Sequence[int], specs: Sequence[SchirokauerSpec]) -> Tuple[int, ...]:
    """SM row entries of an element: side 0 values, then side 1 values negated."""
    ell = specs[0].ell
    first = schirokauer_map(relation_element, specs[0])
    second = tuple(-v % ell for v in schirokauer_map(relation_element, specs[1]))
    return first + second


def set_sm(rs: RelationSet, elements: Sequence[Sequence[int]], specs: Sequence[SchirokauerSpec],
           cache: Optional[Dict[int, Tuple[int, ...]]] = None) -> Tuple[int, ...]:
    ell = specs[0].ell
    total = [0] * (specs[0].rank + specs[1].rank)
    for index, coeff in rs.members:
        if cache is not None and index in cache:
            values = cache[index]
        else:
            values = relation_sm(elements[index], specs)
            if cache is not None:
                cache[index] = values
        total = [(t + coeff * v) % ell for t, v in zip(total, values)]
    return tuple(total)


# ---------------------------------------------------------------- sparse system


def column_text(column: Column) -> str:
    if isinstance(column, PrimeIdeal):
        return f"{column.side}:{column.token()}"
    return f"sm:{column[1]}:{column[2]}"


def parse_column(text: str) -> Column:
    if text.startswith("sm:"):
        _, side, j = text.split(":")
        return ("sm", int(side), int(j))
    side, token = text.split(":", 1)
    return PrimeIdeal.from_token(int(side), token)


class SparseMatrix:
    """Rows of (column, value) mod ell with an int64 fast path for small entries."""

    def __init__(self, rows: Sequence[Dict[int, int]], ncols: int, ell: int) -> None:
        self.ell = ell
        self.nrows = len(rows)
        self.ncols = ncols
        self.rows = [dict(sorted((c, v % ell) for c, v in row.items() if v % ell)) for row in rows]
        half = ell // 2
        small_ptr, small_idx, small_val = [0], [], []
        big_row, big_col, big_val = [], [], []
        for i, row in enumerate(self.rows):
            for c, v in row.items():
                signed = v - ell if v > half else v
                if abs(signed) < SMALL_ENTRY and ell < OBJECT_ELL:
                    small_idx.append(c)
                    small_val.append(signed)
                else:
                    big_row.append(i)
                    big_col.append(c)
                    big_val.append(v)
            small_ptr.append(len(small_idx))
        self.indptr = np.asarray(small_ptr, dtype=np.int64)
        self.indices = np.asarray(small_idx, dtype=np.int64)
        self.data = np.asarray(small_val, dtype=np.int64)
        self.big_row = np.asarray(big_row, dtype=np.int64)
        self.big_col = np.asarray(big_col, dtype=np.int64)
        self.big_val = np.asarray(big_val, dtype=object) if big_val else np.zeros(0, dtype=object)

    def nnz(self) -> int:
        return len(self.indices) + len(self.big_val)

    def transpose(self) -> "SparseMatrix":
        cols: List[Dict[int, int]] = [dict() for _ in range(self.ncols)]
        for i, row in enumerate(self.rows):
            for c, v in row.items():
                cols[c][i] = v
        return SparseMatrix(cols, self.nrows, self.ell)

    def matvec(self, x: Sequence[int]) -> List[int]:
        """M*x mod ell."""
        ell = self.ell
        out = np.zeros(self.nrows, dtype=object)
        x_obj = np.asarray([int(v) % ell for v in x], dtype=object)
        if len(self.indices):
            counts = np.diff(self.indptr)
            nonempty = np.flatnonzero(counts)
            starts = self.indptr[:-1][nonempty]
            limbs = (ell.bit_length() + LIMB_BITS - 1) // LIMB_BITS
            mask = (1 << LIMB_BITS) - 1
            for k in range(limbs):
                limb = np.asarray([(int(v) >> (LIMB_BITS * k)) & mask for v in x_obj], dtype=np.int64)
                sums = np.add.reduceat(self.data * limb[self.indices], starts)
                out[nonempty] += sums.astype(object) * (1 << (LIMB_BITS * k))
        if len(self.big_val):
            products = self.big_val * x_obj[self.big_col]
            starts = np.flatnonzero(np.concatenate(([True], self.big_row[1:] != self.big_row[:-1])))
            sums = np.add.reduceat(products, starts)
            out[self.big_row[starts]] += sums
        return [int(v) % ell for v in out]


@dataclass
class SparseSystem:
    matrix: SparseMatrix
    columns: List[Column]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.nrows, self.matrix.ncols

    def matvec(self, x: Sequence[int]) -> List[int]:
        return self.matrix.matvec(x)


def build_system(sets: Sequence[RelationSet], sm_rows: Sequence[Sequence[int]],
                 sm_counts: Tuple[int, int], ell: int) -> SparseSystem:
    """Rows of relation sets with ideal columns in sort order followed by the SM slots."""
    if not sets:
        raise ContractViolation("cannot build a system from no relation sets")
    sm_total = sm_counts[0] + sm_counts[1]
    if len(sm_rows) != len(sets) or any(len(row) != sm_total for row in sm_rows):
        raise ContractViolation("Schirokauer rows do not match the relation sets")
    ideals = sorted({ideal for rs in sets for ideal in rs.row}, key=lambda ideal: ideal.sort_key)
    slots: List[Column] = [("sm", 0, j) for j in range(sm_counts[0])]
    slots += [("sm", 1, j) for j in range(sm_counts[1])]
    columns: List[Column] = list(ideals) + slots
    position = {ideal: i for i, ideal in enumerate(ideals)}
    rows = []
    for rs, sm in zip(sets, sm_rows):
        row = {position[ideal]: e for ideal, e in rs.row.items()}
        for j, value in enumerate(sm):
            if value % ell:
                row[len(ideals) + j] = value
        rows.append(row)
    system = SparseSystem(SparseMatrix(rows, len(columns), ell), columns)
    logger.info("System: %d rows x %d columns (%d ideals, %d SM), %d nonzeros",
                system.shape[0], system.shape[1], len(ideals), sm_total, system.matrix.nnz())
    return system


def berlekamp_massey(sequence: Sequence[int], ell: int) -> List[int]:
    """Connection polynomial C (C[0] = 1) of the shortest recurrence of the sequence."""
    c, b = [1], [1]
    length, shift, last = 0, 1, 1
    for i, s in enumerate(sequence):
        d = s
        for j in range(1, min(length, len(c) - 1) + 1):
            d = (d + c[j] * sequence[i - j]) % ell
        if d == 0:
            shift += 1
            continue
        coef = d * pow(last, -1, ell) % ell
        previous = list(c)
        c = c + [0] * max(0, len(b) + shift - len(c))
        for j, value in enumerate(b):
            c[j + shift] = (c[j + shift] - coef * value) % ell
        if 2 * length <= i:
            length, b, last, shift = i + 1 - length, previous, d, 1
        else:
            shift += 1
    return (c + [0] * (length + 1))[:length + 1]


class _Operator:
    """Square operator whose kernel contains the kernel of M."""

    def __init__(self, matrix: SparseMatrix, rng: random.Random) -> None:
        self.matrix = matrix
        self.n = matrix.ncols
        self.transposed = None
        self.diagonal = None
        if matrix.nrows > matrix.ncols:
            self.transposed = matrix.transpose()
            self.diagonal = [rng.randrange(1, matrix.ell) for _ in range(matrix.nrows)]

    def apply(self, x: Sequence[int]) -> List[int]:
        ell = self.matrix.ell
        y = self.matrix.matvec(x)
        if self.transposed is not None:
            y = [v * d % ell for v, d in zip(y, self.diagonal)]
            return self.transposed.matvec(y)
        if len(y) < self.n:
            y = y + [0] * (self.n - len(y))
        return y


def _kernel_attempt(matrix: SparseMatrix, rng: random.Random) -> Optional[List[int]]:
    ell = matrix.ell
    op = _Operator(matrix, rng)
    n = op.n
    u = [rng.randrange(ell) for _ in range(n)]
    y = [rng.randrange(ell) for _ in range(n)]
    sequence = []
    v = y
    for _ in range(2 * n):
        sequence.append(sum(a * b for a, b in zip(u, v)) % ell)
        v = op.apply(v)
    conn = berlekamp_massey(sequence, ell)
    length = len(conn) - 1
    # Minimal polynomial P(l) = sum conn[j] * l^(length - j), low degree first.
    poly = [conn[length - k] for k in range(length + 1)]
    k = 0
    while k < len(poly) and poly[k] == 0:
        k += 1
    if k == 0 or k == len(poly):
        return None
    q = poly[k:]
    w = [0] * n
    for coeff in reversed(q):
        w = op.apply(w)
        w = [(a + coeff * b) % ell for a, b in zip(w, y)]
    if not any(w):
        return None
    for _ in range(k + 1):
        nxt = op.apply(w)
        if not any(nxt):
            return w
        w = nxt
    return None


def wiedemann_nullspace(system: Union[SparseSystem, SparseMatrix], ell: Optional[int] = None,
                        retries: int = 5, seed: int = 1) -> List[int]:
    """Nonzero v with M*v = 0 mod ell.

    Raises:
        FullRankError: no kernel vector after ``retries`` reseeded attempts.
    """
    matrix = system.matrix if isinstance(system, SparseSystem) else system
    if ell is not None and ell != matrix.ell:
        raise ContractViolation("modulus does not match the matrix")
    started = time.time()
    for attempt in range(retries):
        rng = random.Random(seed * 7919 + attempt)
        v = _kernel_attempt(matrix, rng)
        if v is not None and any(v) and not any(matrix.matvec(v)):
            logger.info("Wiedemann: kernel vector after %d attempt(s) (%.1fs)",
                        attempt + 1, time.time() - started)
            return v
        logger.warning("Wiedemann attempt %d failed, reseeding", attempt + 1)
    raise FullRankError(f"no nullspace vector found in {retries} attempts (full rank?)")


def write_system(path: Path, system: SparseSystem) -> None:
    lines = [f"# {system.shape[0]} {system.shape[1]}"]
    lines.extend(f"c {column_text(column)}" for column in system.columns)
    for row in system.matrix.rows:
        lines.append("r " + " ".join(f"{c}:{v}" for c, v in row.items()))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_system(path: Path, ell: int) -> SparseSystem:
    columns: List[Column] = []
    rows: List[Dict[int, int]] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("c "):
            columns.append(parse_column(line[2:].strip()))
        elif line.startswith("r"):
            items = line[1:].split()
            rows.append({int(c): int(v) for c, v in (item.split(":") for item in items)})
    return SparseSystem(SparseMatrix(rows, len(columns), ell), columns)


def write_vector(path: Path, vector: Sequence[int]) -> None:
    path.write_text("\n".join(str(v) for v in vector) + "\n", encoding="utf-8")


def read_vector(path: Path) -> List[int]:
    return [int(line) for line in path.read_text(encoding="utf-8").split()]
