"""Special-q lattice sieving in a 4d orthotope.

For each special-q the lattice points of the box are enumerated once. Every
sieve-base ideal then contributes (packed index, log weight, ideal id) hits:
ideals expected to hit at least a quarter of a point enumerate their own
sublattice line by line, the rest are tested by congruence over the enumerated
points. Hits are sorted by index and summed; points over both thresholds are
factored into relations.
"""

from __future__ import annotations

import logging
import math
import multiprocessing
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import gmpy2
import numpy as np
import psutil

from .enumeration import Orthotope, iter_lines, line_indices
from .errors import ContractViolation, SieveMemoryError
from .factorbase import DEG1, DEG2T1, DEG2T2, DEG4, FactorBase, IdealOracle, PrimeIdeal
from .lattice import Basis4, lll_reduce
from .norms import norm_of
from .relations import Relation, normalize, try_relation

logger = logging.getLogger("extnfs.sieve4d")

SAMPLE_POINTS = 256
# Bytes per enumerated point (coordinates, index, two weights) and per hit.
POINT_BYTES = 64
HIT_BYTES = 17
CONGRUENCE_CHUNK = 1 << 22


@dataclass(frozen=True)
class SpecialQ:
    ideal: PrimeIdeal
    raw_basis: Basis4
    reduced_basis: Basis4

    @property
    def q(self) -> int:
        return self.ideal.q

    @property
    def det(self) -> int:
        return self.ideal.q ** self.ideal.degree


def _type2_columns(ideal: PrimeIdeal, h, construction: str) -> List[List[int]]:
    q = ideal.q
    a0, a1 = ideal.data
    if construction == "matrix":
        return [[q, 0, 0, 0], [0, q, 0, 0], [a0, a1, 1, 0], [0, a0, a1, 1]]
    if h is None:
        raise ContractViolation("the congruence construction needs h")
    h0, h1 = h.coeffs[0], h.coeffs[1]
    # rho = -(a0 + a1*alpha) is the root of the factor x + a0 + a1*alpha
    rho0, rho1 = -a0 % q, -a1 % q
    return [
        [q, 0, 0, 0],
        [0, q, 0, 0],
        [-rho0 % q, -rho1 % q, 1, 0],
        [h0 * rho1 % q, -(rho0 - h1 * rho1) % q, 0, 1],
    ]


def build_special_q_lattice(ideal: PrimeIdeal, setup=None, type2_basis: str = "congruence") -> SpecialQ:
    """Raw and LLL-reduced bases of the lattice of elements divisible by ``ideal``."""
    q = ideal.q
    if ideal.kind == DEG1:
        r, big_r = ideal.data
        columns = [[q, 0, 0, 0], [-r, 1, 0, 0], [-big_r, 0, 1, 0], [0, -big_r, 0, 1]]
    elif ideal.kind == DEG2T1:
        r = ideal.data[0]
        columns = [[q, 0, 0, 0], [-r, 1, 0, 0], [0, 0, q, 0], [0, 0, -r, 1]]
    elif ideal.kind == DEG2T2:
        columns = _type2_columns(ideal, getattr(setup, "h", None), type2_basis)
    elif ideal.kind == DEG4:
        columns = [[q * int(i == j) for i in range(4)] for j in range(4)]
    else:
        raise ContractViolation(f"no special-q lattice for kind {ideal.kind}")
    raw = Basis4.from_columns(columns)
    return SpecialQ(ideal, raw, lll_reduce(raw))


@dataclass(frozen=True)
class SieveParams:
    box: Orthotope
    sieve_bound: int
    lpb: Tuple[int, int]
    thresholds: Tuple[int, int] = (-1, -1)
    slack: int = 25
    rho_budget: int = 20_000
    memory_limit: int = 0
    memory_fraction: float = 0.5
    degree2: bool = False

    @classmethod
    def from_config(cls, config) -> "SieveParams":
        return cls(
            box=Orthotope(tuple(config.box)),
            sieve_bound=config.sieve_bound,
            lpb=config.lpb_bound,
            thresholds=(config.threshold0, config.threshold1),
            slack=config.slack,
            rho_budget=config.rho_budget,
            memory_fraction=config.memory_fraction,
            degree2=config.sq_degree2,
        )

    def memory_budget(self) -> int:
        if self.memory_limit:
            return self.memory_limit
        return int(psutil.virtual_memory().available * self.memory_fraction)


@dataclass
class SieveBase:
    """Degree-1 sieve ideals of one side as parallel arrays."""

    ideals: List[PrimeIdeal]
    q: np.ndarray
    weights: np.ndarray
    forms: np.ndarray
    inverse_sum: float

    @classmethod
    def from_ideals(cls, ideals: Sequence[PrimeIdeal]) -> "SieveBase":
        ideals = [ideal for ideal in ideals if ideal.kind == DEG1]
        q = np.array([ideal.q for ideal in ideals], dtype=np.int64)
        weights = np.array([round(math.log2(ideal.q)) for ideal in ideals], dtype=np.uint8)
        # a*1 + b*r + c*R + d*r*R = 0 mod q
        forms = np.array([[1, r, big_r, r * big_r % ideal.q] for ideal in ideals
                          for r, big_r in [ideal.data]], dtype=np.int64).reshape(-1, 4)
        inverse_sum = float(np.sum(1.0 / q)) if len(q) else 0.0
        return cls(ideals, q, weights, forms, inverse_sum)


@dataclass
class SieveStats:
    points: int = 0
    hits: int = 0
    candidates: int = 0
    relations: int = 0
    seconds: float = 0.0
    thresholds: Tuple[int, int] = (0, 0)


class SieveContext:
    """Read-only state shared by every special-q of a sieving run."""

    def __init__(self, setup, factor_bases: Sequence[FactorBase], params: SieveParams,
                 type2_basis: str = "congruence") -> None:
        self.setup = setup
        self.params = params
        self.type2_basis = type2_basis
        self.oracles = (IdealOracle(setup, 0), IdealOracle(setup, 1))
        self.bases = tuple(SieveBase.from_ideals(fb.sieve_base(params.sieve_bound)) for fb in factor_bases)


def _enumerate(basis: Basis4, box: Orthotope) -> np.ndarray:
    chunks = []
    for line in iter_lines(basis, box):
        steps = np.arange(line.count, dtype=np.int64)[:, None]
        chunks.append(np.asarray(line.start, dtype=np.int64) + steps * np.asarray(line.step, dtype=np.int64))
    if not chunks:
        return np.zeros((0, 4), dtype=np.int64)
    return np.concatenate(chunks)


def _packed(points: np.ndarray, box: Orthotope) -> np.ndarray:
    half = np.asarray(box.half_widths, dtype=np.int64)
    strides = np.asarray(box.strides, dtype=np.int64)
    return (points + half) @ strides


def _sublattice_lines(sq: SpecialQ, form: np.ndarray, p: int, box: Orthotope) -> Optional[np.ndarray]:
    """Packed indices of box points of the special-q lattice where form . x = 0 mod p."""
    basis = sq.reduced_basis
    w = [sum(int(form[i]) * col[i] for i in range(4)) % p for col in basis.columns]
    pivot = next((i for i in range(4) if w[i]), None)
    if pivot is None:
        return None
    inv = int(gmpy2.invert(w[pivot], p))
    z_columns = []
    for j in range(4):
        z = [0, 0, 0, 0]
        if j == pivot:
            z[j] = p
        else:
            z[j] = 1
            z[pivot] = -w[j] * inv % p
        z_columns.append(basis.apply(z))
    sub = lll_reduce(Basis4.from_columns(z_columns))
    pieces = [line_indices(line, box) for line in iter_lines(sub, box)]
    if not pieces:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(pieces)


def _side_hits(sq: SpecialQ, base: SieveBase, points: np.ndarray, indices: np.ndarray,
               box: Orthotope) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(packed index, weight, ideal id) of every sieve hit on one side."""
    idx_parts, weight_parts, id_parts = [], [], []
    if not len(base.q) or not len(points):
        empty = np.zeros(0, dtype=np.int64)
        return empty, np.zeros(0, dtype=np.uint8), empty
    dense = base.q.astype(np.float64) * sq.det <= 4.0 * box.volume
    for k in np.flatnonzero(dense):
        found = _sublattice_lines(sq, base.forms[k], int(base.q[k]), box)
        if found is None:
            dense[k] = False
            continue
        idx_parts.append(found)
        weight_parts.append(np.full(len(found), base.weights[k], dtype=np.uint8))
        id_parts.append(np.full(len(found), k, dtype=np.int64))
    sparse_ids = np.flatnonzero(~dense)
    step = max(1, CONGRUENCE_CHUNK // max(1, len(points)))
    for start in range(0, len(sparse_ids), step):
        ids = sparse_ids[start:start + step]
        qs = base.q[ids]
        values = (points @ base.forms[ids].T) % qs
        rows, cols = np.nonzero(values == 0)
        idx_parts.append(indices[rows])
        weight_parts.append(base.weights[ids[cols]])
        id_parts.append(ids[cols])
    return (np.concatenate(idx_parts), np.concatenate(weight_parts), np.concatenate(id_parts))


def _accumulate(idx: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """List/sort: sort hits by index and sum each run."""
    if not len(idx):
        return idx, weights.astype(np.int32)
    order = np.argsort(idx, kind="stable")
    idx_sorted = idx[order]
    starts = np.flatnonzero(np.concatenate(([True], idx_sorted[1:] != idx_sorted[:-1])))
    sums = np.add.reduceat(weights[order].astype(np.int32), starts)
    return idx_sorted[starts], sums


def _thresholds(ctx: SieveContext, sq: SpecialQ, points: np.ndarray) -> Tuple[int, int]:
    params = ctx.params
    out = []
    stride = max(1, len(points) // SAMPLE_POINTS)
    sample = [tuple(int(x) for x in row) for row in points[::stride][:SAMPLE_POINTS]]
    sample = [pt for pt in sample if any(pt) and math.gcd(*pt) == 1]
    for side in (0, 1):
        if params.thresholds[side] >= 0:
            out.append(params.thresholds[side])
            continue
        if not sample:
            out.append(0)
            continue
        logs = []
        for pt in sample:
            norm = norm_of(ctx.setup.side_poly(side), ctx.setup.h, pt)
            value = math.log2(norm) if norm else 0.0
            if side == sq.ideal.side:
                value -= math.log2(sq.det)
            logs.append(value)
        out.append(max(0, math.floor(float(np.median(logs))) - params.slack))
    return out[0], out[1]


def _check_memory(ctx: SieveContext, sq: SpecialQ) -> None:
    box = ctx.params.box
    points = box.volume // sq.det + 1
    hits = points * sum(base.inverse_sum for base in ctx.bases)
    need = int(points * POINT_BYTES + hits * HIT_BYTES)
    budget = ctx.params.memory_budget()
    if need > budget:
        raise SieveMemoryError(f"special-q {sq.ideal} needs about {need} bytes, budget {budget}")


def sieve_special_q(ctx: SieveContext, sq: SpecialQ) -> Tuple[List[Relation], SieveStats]:
    """Relations of one special-q, in packed-index order."""
    started = time.time()
    params = ctx.params
    box = params.box
    if sq.ideal.degree != 1:
        small = sq.reduced_basis.max_entry() <= min(box.half_widths) / 4
        if not (params.degree2 and sq.ideal.degree == 2 and small):
            raise ContractViolation(f"special-q {sq.ideal} of degree {sq.ideal.degree} is not sieved")
    _check_memory(ctx, sq)

    stats = SieveStats()
    points = _enumerate(sq.reduced_basis, box)
    indices = _packed(points, box)
    stats.points = len(points)
    thresholds = _thresholds(ctx, sq, points)
    stats.thresholds = thresholds

    side_hits = []
    survivors = None
    for side in (0, 1):
        idx, weights, ids = _side_hits(sq, ctx.bases[side], points, indices, box)
        stats.hits += len(idx)
        side_hits.append((idx, ids))
        run_idx, sums = _accumulate(idx, weights)
        # Points with no hit at all sum to zero.
        passing = set(run_idx[sums >= thresholds[side]].tolist())
        if thresholds[side] <= 0:
            passing = set(indices.tolist())
        survivors = passing if survivors is None else survivors & passing

    relations: List[Relation] = []
    seen = set()
    candidates = sorted(survivors or ())
    stats.candidates = len(candidates)
    known = []
    for side in (0, 1):
        idx, ids = side_hits[side]
        mask = np.isin(idx, np.asarray(candidates, dtype=np.int64))
        primes: Dict[int, set] = {}
        for i, k in zip(idx[mask].tolist(), ids[mask].tolist()):
            primes.setdefault(i, set()).add(int(ctx.bases[side].q[k]))
        known.append(primes)

    for index in candidates:
        point = box.point(index)
        if not any(point) or math.gcd(*point) != 1:
            continue
        element = normalize(point)
        if element in seen:
            continue
        seen.add(element)
        extra = [known[0].get(index, set()), known[1].get(index, set())]
        extra[sq.ideal.side] = extra[sq.ideal.side] | {sq.q}
        relation = try_relation(ctx.oracles, element, params.lpb, params.rho_budget,
                                special_q=sq.ideal, known=extra)
        if relation is not None:
            relations.append(relation)
    stats.relations = len(relations)
    stats.seconds = time.time() - started
    logger.debug("special-q %s: %d points, %d hits, %d candidates, %d relations (%.2fs)",
                 sq.ideal, stats.points, stats.hits, stats.candidates, stats.relations, stats.seconds)
    return relations, stats


def special_q_ideals(oracle: IdealOracle, q_range: Tuple[int, int], limit: int = 0,
                     degree2: bool = False) -> Iterator[PrimeIdeal]:
    """Special-q ideals of one side in increasing q, at most ``limit`` of them (0: all)."""
    low, high = q_range
    count = 0
    q = low - 1
    while True:
        q = int(gmpy2.next_prime(q))
        if q > high:
            return
        for ideal in oracle.ideals_above(q):
            if ideal.kind == DEG1 or (degree2 and ideal.degree == 2):
                yield ideal
                count += 1
                if limit and count >= limit:
                    return


_WORKER_CONTEXT: Optional[SieveContext] = None


def _init_worker(setup, factor_bases, params, type2_basis) -> None:
    global _WORKER_CONTEXT
    _WORKER_CONTEXT = SieveContext(setup, factor_bases, params, type2_basis)


def _sieve_task(ideal: PrimeIdeal) -> Tuple[PrimeIdeal, List[Relation], SieveStats]:
    ctx = _WORKER_CONTEXT
    sq = build_special_q_lattice(ideal, ctx.setup, ctx.type2_basis)
    try:
        relations, stats = sieve_special_q(ctx, sq)
    except ContractViolation as exc:
        logger.warning("Skipping special-q %s: %s", ideal, exc)
        return ideal, [], SieveStats()
    return ideal, relations, stats


def sieve_many(setup, factor_bases, params: SieveParams, ideals: Iterable[PrimeIdeal],
               workers: int = 1, type2_basis: str = "congruence"
               ) -> Iterator[Tuple[PrimeIdeal, List[Relation], SieveStats]]:
    """Sieve special-q ideals, yielding results in submission order."""
    ideals = list(ideals)
    if workers > 1 and len(ideals) > 1:
        with multiprocessing.Pool(workers, initializer=_init_worker,
                                  initargs=(setup, factor_bases, params, type2_basis)) as pool:
            yield from pool.imap(_sieve_task, ideals)
    else:
        _init_worker(setup, factor_bases, params, type2_basis)
        for ideal in ideals:
            yield _sieve_task(ideal)
