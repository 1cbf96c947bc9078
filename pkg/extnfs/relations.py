"""Relations: coprime 4-tuples with the ideal factorizations of both norms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .arith import smooth_factor
from .errors import ContractViolation, NotSmooth, Unattributable
from .factorbase import DEG1, IdealOracle, PrimeIdeal, local_factorization
from .norms import norm_of

Factors = Tuple[Tuple[PrimeIdeal, int], ...]


def normalize(element: Sequence[int]) -> Tuple[int, int, int, int]:
    """Divide out the content and make the first nonzero coordinate positive."""
    if not any(element):
        raise ContractViolation("cannot normalize the zero element")
    g = math.gcd(*element)
    out = [x // g for x in element]
    lead = next(x for x in out if x)
    if lead < 0:
        out = [-x for x in out]
    return tuple(out)  # type: ignore[return-value]


def _sorted_factors(factors: Dict[PrimeIdeal, int]) -> Factors:
    return tuple(sorted(((ideal, e) for ideal, e in factors.items() if e),
                        key=lambda item: item[0].sort_key))


@dataclass(frozen=True)
class Relation:
    element: Tuple[int, int, int, int]
    side0: Factors
    side1: Factors
    special_q: Optional[PrimeIdeal] = None

    def factors(self, side: int) -> Factors:
        return self.side0 if side == 0 else self.side1

    def ideals(self) -> Iterator[PrimeIdeal]:
        for ideal, _ in self.side0:
            yield ideal
        for ideal, _ in self.side1:
            yield ideal

    def to_line(self) -> str:
        coords = ",".join(f"{x:x}" for x in self.element)
        sides = [",".join(f"{ideal.token()}^{e}" if e > 1 else ideal.token() for ideal, e in facs)
                 for facs in (self.side0, self.side1)]
        return f"{coords}:{sides[0]}:{sides[1]}"

    @classmethod
    def from_line(cls, line: str, special_q: Optional[PrimeIdeal] = None) -> "Relation":
        try:
            coords, first, second = line.strip().split(":")
            element = tuple(int(x, 16) for x in coords.split(","))
            if len(element) != 4:
                raise ValueError("four coordinates expected")
            sides = []
            for side, text in enumerate((first, second)):
                factors: Dict[PrimeIdeal, int] = {}
                for token in filter(None, text.split(",")):
                    body, _, exp = token.partition("^")
                    ideal = PrimeIdeal.from_token(side, body)
                    factors[ideal] = factors.get(ideal, 0) + (int(exp) if exp else 1)
                sides.append(_sorted_factors(factors))
        except ValueError as exc:
            raise ValueError(f"malformed relation line {line.strip()!r}: {exc}") from exc
        return cls(element, sides[0], sides[1], special_q)  # type: ignore[arg-type]


def j_exponent(element: Sequence[int]) -> int:
    """Exponent of the denominator ideal J in <a + b*alpha + (c + d*alpha)*x>."""
    return -1 if element[2] or element[3] else 0


def factor_side(oracle: IdealOracle, element: Sequence[int], bound: int,
                budget: Optional[int] = None, norm: Optional[int] = None,
                known: Iterable[int] = ()) -> Factors:
    """Ideal factorization of one norm over primes <= bound.

    ``known`` primes are divided out before the smoothness test.

    Raises:
        NotSmooth: the cofactor has a prime above the bound or rho ran out of budget.
        Unattributable: some q cannot be split into listed ideals.
    """
    if norm is None:
        norm = norm_of(oracle.poly, oracle.h, element)
    exponents: Dict[int, int] = {}
    rest = norm
    for q in sorted(set(known)):
        while rest % q == 0:
            rest //= q
            exponents[q] = exponents.get(q, 0) + 1
    if rest > 1:
        for q, e in smooth_factor(rest, bound, budget).factors:
            exponents[q] = exponents.get(q, 0) + e
    factors: Dict[PrimeIdeal, int] = {}
    for q, e in exponents.items():
        factors.update(local_factorization(oracle, element, q, e))
    return _sorted_factors(factors)


def make_relation(oracles: Sequence[IdealOracle], element: Sequence[int], bounds: Sequence[int],
                  budget: Optional[int] = None, special_q: Optional[PrimeIdeal] = None,
                  known: Sequence[Iterable[int]] = ((), ()), max_degree: int = 2) -> Relation:
    """Factor both sides of a normalized element into a Relation.

    Raises:
        NotSmooth, Unattributable: as factor_side; Unattributable also for ideals above max_degree.
    """
    element = normalize(element)
    sides = []
    for side in (0, 1):
        factors = factor_side(oracles[side], element, bounds[side], budget, known=known[side])
        if any(ideal.degree > max_degree for ideal, _ in factors):
            raise Unattributable(f"side {side} needs an ideal of degree above {max_degree}")
        sides.append(factors)
    if special_q is not None and special_q not in dict(sides[special_q.side]):
        raise Unattributable(f"special-q {special_q} missing from its own relation")
    return Relation(element, sides[0], sides[1], special_q)


def try_relation(oracles: Sequence[IdealOracle], element: Sequence[int], bounds: Sequence[int],
                 budget: Optional[int] = None, **kwargs) -> Optional[Relation]:
    try:
        return make_relation(oracles, element, bounds, budget, **kwargs)
    except (NotSmooth, Unattributable):
        return None


def check_relation(setup, relation: Relation) -> bool:
    """Recompute both norms and compare them with the declared factorizations."""
    if math.gcd(*relation.element) != 1:
        return False
    for side in (0, 1):
        product = 1
        for ideal, e in relation.factors(side):
            product *= ideal.q ** (ideal.degree * e)
            if ideal.kind == DEG1 and not ideal.contains(relation.element, setup.h):
                return False
        if product != norm_of(setup.side_poly(side), setup.h, relation.element):
            return False
    return True


def sq_header(special_q: PrimeIdeal) -> str:
    return f"# sq {special_q.side}:{special_q.token()}"


def write_relations(path: Path, relations: Iterable[Relation], header: Optional[str] = None) -> int:
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        if header:
            handle.write(header + "\n")
        for relation in relations:
            handle.write(relation.to_line() + "\n")
            count += 1
    return count


def read_relations(path: Path) -> List[Relation]:
    """Relations of a file; "# sq" headers tag the relations that follow them."""
    relations: List[Relation] = []
    special_q: Optional[PrimeIdeal] = None
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("# sq "):
            side, token = line[5:].strip().split(":", 1)
            special_q = PrimeIdeal.from_token(int(side), token)
            continue
        if not line.strip() or line.startswith("#"):
            continue
        relations.append(Relation.from_line(line, special_q))
    return relations
