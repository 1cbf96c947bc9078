"""Individual logarithms: initial split, intermediate descent and the special-q descent tree."""

from __future__ import annotations

import itertools
import logging
import math
import random
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .arith import FactoredInteger, smooth_factor
from .enumeration import Orthotope
from .errors import (ContractViolation, DescentError, NotSmooth, SchirokauerUndefined,
                     SieveMemoryError, Unattributable)
from .factorbase import IdealOracle, PrimeIdeal, j_ideal
from .lattice import lll
from .linalg import SchirokauerSpec, schirokauer_map
from .logdb import LogDatabase, relation_terms
from .norms import norm_of
from .relations import Factors, Relation, factor_side, make_relation, normalize
from .sieve4d import SieveContext, SieveParams, build_special_q_lattice, sieve_special_q
from .tower import Tower, TowerElement

logger = logging.getLogger("extnfs.descent")

PENDING, FOUND, RESOLVED = "pending", "relation-found", "resolved"
TIGHTEN = 0.9
RELAX = 1.1
MAX_RELAX = 2
SPLIT_SPAN = 2
NARROW, WIDE = 3, 7

Coords = Tuple[int, int, int, int]


@dataclass(frozen=True)
class DescentParams:
    split_bound: int
    intermediate_bound: int
    lpb: int
    split_tries: int = 4000
    depth: int = 16
    budget: int = 4000
    points: int = 2048
    rho_budget: int = 20_000
    seed: int = 1
    type2_basis: str = "congruence"

    @classmethod
    def from_config(cls, config) -> "DescentParams":
        split, intermediate = config.descent_bounds
        return cls(
            split_bound=split,
            intermediate_bound=intermediate,
            lpb=max(config.lpb_bound),
            split_tries=config.split_tries,
            depth=config.descent_depth,
            budget=config.descent_budget,
            points=config.descent_points,
            rho_budget=config.rho_budget,
            seed=config.seed,
            type2_basis=config.type2_basis,
        )


@dataclass
class SplitResult:
    """Lift of t*g^shift (up to a subfield factor) with a smooth side-0 norm."""

    shift: int
    element: Coords
    norm: FactoredInteger
    factors: Factors


@dataclass
class DescentNode:
    ideal: PrimeIdeal
    depth: int
    status: str = PENDING
    witness: Optional[Relation] = None
    bound_bits: int = 0
    children: List["DescentNode"] = field(default_factory=list)

    def lines(self, indent: int = 0) -> Iterator[str]:
        witness = self.witness.to_line() if self.witness else "-"
        yield (f"{'  ' * indent}{self.ideal.side}:{self.ideal.token()} q={self.ideal.q} "
               f"{self.status} Q=2^{self.bound_bits} {witness}")
        for child in self.children:
            yield from child.lines(indent + 1)


@dataclass
class DlogResult:
    log: int
    vlog_g: int
    vlog_t: int
    split_g: SplitResult
    split_t: SplitResult
    roots: List[DescentNode]
    seconds: float = 0.0

    def transcript(self) -> List[str]:
        lines = [
            f"# descent policy: tighten {TIGHTEN} relax {RELAX} at most {MAX_RELAX} times",
            f"split g shift {self.split_g.shift} element {','.join(map(str, self.split_g.element))} "
            f"norm {self.split_g.norm}",
            f"split t shift {self.split_t.shift} element {','.join(map(str, self.split_t.element))} "
            f"norm {self.split_t.norm}",
        ]
        for node in self.roots:
            lines.extend(node.lines())
        lines += [f"vlog_g = {self.vlog_g}", f"vlog_t = {self.vlog_t}", f"log = {self.log}"]
        return lines


def _as_element(tower: Tower, value: Union[TowerElement, Sequence[int]]) -> TowerElement:
    return value if isinstance(value, TowerElement) else tower.element(value)


def subfield_lattice(target: TowerElement, tower: Tower) -> List[List[int]]:
    """LLL-reduced basis of {z in Z^4 : z mod p lies in F_{p^2} * target}."""
    p = tower.p
    y = tower.element((0, 1, 0, 0))
    rows = [list(target.coords), list(tower.mul(y, target).coords)]
    pivots = []
    # Row echelon form mod p of the two spanning rows.
    for col in range(4):
        r = len(pivots)
        if r == 2:
            break
        pivot = next((i for i in range(r, 2) if rows[i][col] % p), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = pow(rows[r][col], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(2):
            if i != r and rows[i][col]:
                factor = rows[i][col]
                rows[i] = [(x - factor * z) % p for x, z in zip(rows[i], rows[r])]
        pivots.append(col)
    if len(pivots) != 2:
        raise ContractViolation("target is zero in F_p^4")
    vectors = rows + [[p * int(i == k) for i in range(4)] for k in range(4) if k not in pivots]
    reduced, _ = lll(vectors)
    return reduced


def _combinations(span: int) -> Iterator[Tuple[int, ...]]:
    """Nonzero coefficient vectors up to sign, by largest coefficient."""
    for size in range(1, span + 1):
        for combo in itertools.product(range(-size, size + 1), repeat=4):
            lead = next((c for c in combo if c), 0)
            if lead > 0 and max(map(abs, combo)) == size:
                yield combo


def initial_split(t: Union[TowerElement, Sequence[int]], g: Union[TowerElement, Sequence[int]], setup,
                  bound: int, tries: int = 4000, budget: Optional[int] = None, start: int = 0,
                  spec: Optional[SchirokauerSpec] = None, span: int = SPLIT_SPAN) -> SplitResult:
    """Smooth side-0 lift of t*g^i times a subfield element, for the first workable shift i >= start.

    Lifts are combinations of the reduced subfield lattice basis with
    coefficients in [-span, span], the +-1 combinations first.

    Raises:
        DescentError: ``tries`` candidates examined without a bound-smooth norm.
    """
    tower = Tower(setup.p, setup.h, setup.f0, check=False)
    t = _as_element(tower, t)
    g = _as_element(tower, g)
    if t.is_zero() or g.is_zero():
        raise ContractViolation("initial split of zero")
    oracle = IdealOracle(setup, 0)
    examined = 0
    best: Optional[int] = None
    shift = start
    target = tower.mul(t, tower.pow(g, start))
    while examined < tries:
        basis = subfield_lattice(target, tower)
        for combo in _combinations(span):
            if examined >= tries:
                break
            raw = [sum(c * v[i] for c, v in zip(combo, basis)) for i in range(4)]
            if not any(raw):
                continue
            element = normalize(raw)
            examined += 1
            norm = norm_of(setup.f0, setup.h, element)
            try:
                factored = smooth_factor(norm, bound, budget) if norm > 1 else FactoredInteger(1, ())
                factors = factor_side(oracle, element, bound, budget, norm=norm)
                if any(ideal.degree > 2 for ideal, _ in factors):
                    continue
                if spec is not None:
                    schirokauer_map(element, spec)
            except NotSmooth as exc:
                bits = exc.cofactor.bit_length()
                best = bits if best is None else min(best, bits)
                continue
            except (Unattributable, SchirokauerUndefined):
                continue
            logger.info("Initial split at shift %d after %d candidates: %s", shift, examined, factored)
            return SplitResult(shift, element, factored, factors)  # type: ignore[arg-type]
        shift += 1
        target = tower.mul(target, g)
    raise DescentError(f"initial split failed after {tries} candidates; "
                       f"best unsplit cofactor {best} bits, try a larger split bound")


class Descender:
    """State of one individual-logarithm computation."""

    def __init__(self, setup, factor_bases, db: LogDatabase, specs: Sequence[SchirokauerSpec],
                 params: DescentParams, sieve_params: SieveParams) -> None:
        self.setup = setup
        self.db = db
        self.specs = specs
        self.params = params
        self.j_sides = setup.j_sides
        self.oracles = (IdealOracle(setup, 0), IdealOracle(setup, 1))
        self.ctx = SieveContext(setup, factor_bases, sieve_params, params.type2_basis)
        self.base_sieve = sieve_params
        self.rng = random.Random(params.seed)
        self.spent = 0
        self.nodes: Dict[PrimeIdeal, DescentNode] = {}

    def _charge(self, amount: int = 1) -> None:
        self.spent += amount
        if self.spent > self.params.budget:
            raise DescentError(f"descent budget of {self.params.budget} exhausted")

    def _terms(self, relation: Relation):
        try:
            return relation_terms(relation, self.specs, self.j_sides)
        except SchirokauerUndefined:
            return None

    def _score(self, relation: Relation, node: PrimeIdeal) -> Optional[Tuple[int, int]]:
        """(unknown count, largest unknown q) or None when the relation cannot serve."""
        if self._terms(relation) is None:
            return None
        unknown = [ideal for ideal in relation.ideals() if ideal != node and ideal not in self.db]
        if any(ideal.q**ideal.degree >= node.q**node.degree for ideal in unknown):
            return None
        return len(unknown), max((ideal.q for ideal in unknown), default=0)

    def random_witness(self, ideal: PrimeIdeal, bound: int, budget: int) -> Optional[Relation]:
        """Random short vectors of the ideal's lattice until both norms are bound-smooth."""
        sq = build_special_q_lattice(ideal, self.setup, self.params.type2_basis)
        known: List[Sequence[int]] = [(), ()]
        known[ideal.side] = (ideal.q,)
        for attempt in range(budget):
            span = NARROW if attempt < budget // 2 else WIDE
            z = [self.rng.randint(-span, span) for _ in range(4)]
            if not any(z):
                continue
            point = sq.reduced_basis.apply(z)
            try:
                relation = make_relation(self.oracles, point, (bound, bound), self.params.rho_budget,
                                         special_q=ideal, known=known)
            except (NotSmooth, Unattributable, ContractViolation):
                continue
            if self._score(relation, ideal) is not None:
                return relation
        return None

    def intermediate_descent(self, ideal: PrimeIdeal) -> Relation:
        """Witness relation of a large ideal whose other primes are below the intermediate bound.

        Raises:
            DescentError: the ideal is small enough for the database, or the budget ran out.
        """
        bound = self.params.intermediate_bound
        if ideal.q <= self.params.lpb:
            raise DescentError(f"{ideal} is below the large-prime bound, use database")
        if ideal.q <= bound:
            raise DescentError(f"{ideal} is below the intermediate bound, use the special-q descent")
        budget = max(1, self.params.budget - self.spent)
        relation = self.random_witness(ideal, bound, budget)
        if relation is None:
            raise DescentError(f"no intermediate relation for {ideal}; try a larger intermediate bound")
        return relation

    def _sieve_witness(self, ideal: PrimeIdeal, bound: int) -> Optional[Relation]:
        q_norm = ideal.q ** ideal.degree
        half = max(2, math.ceil((q_norm * self.params.points) ** 0.25 / 2))
        sieve_params = replace(self.base_sieve, box=Orthotope.cube(half), lpb=(bound, bound))
        self.ctx.params = sieve_params
        sq = build_special_q_lattice(ideal, self.setup, self.params.type2_basis)
        try:
            relations, _ = sieve_special_q(self.ctx, sq)
        except (ContractViolation, SieveMemoryError) as exc:
            logger.debug("Sieve for %s unavailable: %s", ideal, exc)
            return None
        scored = [(score, rel) for rel in relations
                  for score in [self._score(rel, ideal)] if score is not None]
        if not scored:
            return None
        return min(scored, key=lambda item: item[0])[1]

    def _find_witness(self, node: DescentNode) -> Relation:
        ideal = node.ideal
        if ideal.q > self.params.intermediate_bound:
            node.bound_bits = self.params.intermediate_bound.bit_length() - 1
            self._charge()
            return self.intermediate_descent(ideal)
        bits = (ideal.q ** ideal.degree).bit_length()
        for k in range(MAX_RELAX + 1):
            node.bound_bits = max(2, min(math.floor(bits * TIGHTEN * RELAX**k), bits - 1))
            bound = 1 << node.bound_bits
            self._charge()
            if ideal.degree == 1:
                relation = self._sieve_witness(ideal, bound)
            else:
                budget = min(self.params.points, max(1, self.params.budget - self.spent))
                relation = self.random_witness(ideal, bound, budget)
            if relation is not None:
                return relation
            logger.debug("No witness for %s below 2^%d, relaxing", ideal, node.bound_bits)
        raise DescentError(f"no descent relation for {ideal} after {MAX_RELAX} relaxations")

    def descend(self, ideal: PrimeIdeal, depth: int = 0) -> DescentNode:
        """Build and resolve the tree under one ideal, extending the database."""
        node = self.nodes.get(ideal)
        if node is not None:
            return node
        node = DescentNode(ideal, depth)
        if ideal in self.db:
            node.status = RESOLVED
            return node
        if depth > self.params.depth:
            raise DescentError(f"descent depth {self.params.depth} exceeded at {ideal}")
        self.nodes[ideal] = node
        node.witness = self._find_witness(node)
        node.status = FOUND
        for child in node.witness.ideals():
            if child != ideal and child not in self.db:
                node.children.append(self.descend(child, depth + 1))
        terms = self._terms(node.witness)
        total, unknown = self.db.evaluate(terms)
        if unknown != [ideal]:
            raise DescentError(f"witness of {ideal} still has unknowns {unknown}")
        self.db.set(ideal, -total * pow(terms[ideal] % self.db.ell, -1, self.db.ell))
        node.status = RESOLVED
        logger.debug("Resolved %s at depth %d", ideal, depth)
        return node

    def special_q_descent(self, roots: Sequence[PrimeIdeal]) -> LogDatabase:
        for ideal in roots:
            if ideal.q > self.params.split_bound:
                raise ContractViolation(f"descent root {ideal} exceeds the split bound")
            self.descend(ideal)
        return self.db

    def element_vlog(self, split: SplitResult) -> int:
        """Side-0 virtual log of a split element; every factor must already be known."""
        ell = self.db.ell
        total = self.db.vlog_of(split.factors)
        if split.element[2] or split.element[3]:
            if 0 in self.j_sides:
                total -= self.db.ideals[j_ideal(0)]
        for j, value in enumerate(schirokauer_map(split.element, self.specs[0])):
            total += value * self.db.sm[("sm", 0, j)]
        return total % ell

    def _split_and_descend(self, t, g) -> Tuple[SplitResult, List[DescentNode], int]:
        split = initial_split(t, g, self.setup, self.params.split_bound, self.params.split_tries,
                              self.params.rho_budget, spec=self.specs[0])
        roots = [self.descend(ideal) for ideal, _ in split.factors]
        return split, roots, self.element_vlog(split)

    def compute(self, g, t) -> DlogResult:
        started = time.time()
        ell = self.db.ell
        split_g, roots_g, lifted_g = self._split_and_descend(g, g)
        vlog_g = lifted_g * pow(split_g.shift + 1, -1, ell) % ell
        if not vlog_g:
            raise DescentError("vlog(g) vanishes; g does not generate the order-ell subgroup")
        split_t, roots_t, lifted_t = self._split_and_descend(t, g)
        vlog_t = (lifted_t - split_t.shift * vlog_g) % ell
        log = vlog_t * pow(vlog_g, -1, ell) % ell
        result = DlogResult(log, vlog_g, vlog_t, split_g, split_t, roots_g + roots_t, time.time() - started)
        logger.info("log_g(t) = %d (%d descent nodes, %.1fs)", log, len(self.nodes), result.seconds)
        return result


def special_q_descent(roots: Sequence[PrimeIdeal], setup, factor_bases, db: LogDatabase,
                      specs: Sequence[SchirokauerSpec], params: DescentParams,
                      sieve_params: SieveParams) -> LogDatabase:
    return Descender(setup, factor_bases, db, specs, params, sieve_params).special_q_descent(roots)


def compute_dlog(g, t, setup, factor_bases, db: LogDatabase, specs: Sequence[SchirokauerSpec],
                 params: DescentParams, sieve_params: SieveParams) -> int:
    return Descender(setup, factor_bases, db, specs, params, sieve_params).compute(g, t).log


def verify_dlog(g, t, vlog_g: int, vlog_t: int, setup) -> bool:
    """g^(C*vlog_t) == t^(C*vlog_g) in F_{p^4} with C = (p^4 - 1)/ell."""
    tower = Tower(setup.p, setup.h, setup.f0, check=False)
    g = _as_element(tower, g)
    t = _as_element(tower, t)
    cofactor = (setup.p**4 - 1) // setup.ell
    return tower.pow(g, cofactor * vlog_t) == tower.pow(t, cofactor * vlog_g)


def write_transcript(path: Path, result: DlogResult) -> None:
    path.write_text("\n".join(result.transcript()) + "\n", encoding="utf-8")


def read_transcript_logs(path: Path) -> Dict[str, int]:
    """The vlog_g, vlog_t and log lines of a transcript."""
    out: Dict[str, int] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        key, sep, value = line.partition(" = ")
        if sep and key in ("vlog_g", "vlog_t", "log"):
            out[key] = int(value)
    missing = {"vlog_g", "vlog_t", "log"} - set(out)
    if missing:
        raise ContractViolation(f"{path} lacks {', '.join(sorted(missing))}")
    return out
