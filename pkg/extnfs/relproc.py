"""Filtering: duplicate removal, singleton purge and weight-2 merge."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .errors import ContractViolation, DegenerateRelation, InsufficientRelations
from .factorbase import PrimeIdeal, j_ideal
from .poly import IntPoly, QuadField
from .relations import Relation, j_exponent

logger = logging.getLogger("extnfs.relproc")

DupKey = Tuple[int, int]
INFINITY: DupKey = (-1, -1)
EXCESS_BUFFER = 2


def canonical_key(relation: Union[Relation, Sequence[int]], p: int, h: IntPoly) -> DupKey:
    """(a + b*y) / (c + d*y) in F_p[y]/(h), or INFINITY when the denominator vanishes."""
    a, b, c, d = relation.element if isinstance(relation, Relation) else relation
    field = QuadField(p, h)
    num = field.coerce((a, b))
    den = field.coerce((c, d))
    if den == field.zero:
        if num == field.zero:
            raise DegenerateRelation(f"({a},{b},{c},{d}) vanishes mod {p}")
        return INFINITY
    return field.mul(num, field.inv(den))


def remove_duplicates(relations: Iterable[Relation], p: int, h: IntPoly) -> List[Relation]:
    """Keep the first relation of every duplicate key."""
    seen: Set = set()
    out: List[Relation] = []
    total = 0
    for relation in relations:
        total += 1
        try:
            key = canonical_key(relation, p, h)
        except DegenerateRelation:
            logger.warning("Relation %s vanishes mod p, keyed by its coordinates", relation.element)
            key = ("element",) + relation.element
        if key in seen:
            continue
        seen.add(key)
        out.append(relation)
    logger.info("Duplicate removal: %d of %d relations kept", len(out), total)
    return out


def relation_row(relation: Relation, j_sides: Iterable[int] = ()) -> Dict[PrimeIdeal, int]:
    """Signed ideal exponents: side 0 minus side 1, with the denominator ideals."""
    row: Dict[PrimeIdeal, int] = defaultdict(int)
    for ideal, e in relation.side0:
        row[ideal] += e
    for ideal, e in relation.side1:
        row[ideal] -= e
    je = j_exponent(relation.element)
    if je:
        for side in j_sides:
            row[j_ideal(side)] += je if side == 0 else -je
    return {ideal: e for ideal, e in row.items() if e}


def _columns(relation: Relation, j_sides: Iterable[int]) -> Set[PrimeIdeal]:
    return set(relation_row(relation, j_sides))


def excess(relations: Sequence[Relation], j_sides: Iterable[int] = ()) -> int:
    j_sides = tuple(j_sides)
    columns: Set[PrimeIdeal] = set()
    for relation in relations:
        columns |= _columns(relation, j_sides)
    return len(relations) - len(columns)


def _remove_singletons(relations: List[Relation], j_sides: Tuple[int, ...]) -> List[Relation]:
    alive = list(relations)
    while True:
        counts: Dict[PrimeIdeal, int] = defaultdict(int)
        cols = [_columns(rel, j_sides) for rel in alive]
        for columns in cols:
            for ideal in columns:
                counts[ideal] += 1
        keep = [rel for rel, columns in zip(alive, cols)
                if all(counts[ideal] > 1 for ideal in columns)]
        if len(keep) == len(alive):
            return keep
        alive = keep


def purge(relations: Sequence[Relation], sm_count: int, j_sides: Iterable[int] = (),
          target: Optional[int] = None) -> List[Relation]:
    """Singleton removal to a fixpoint, then trimming of the heaviest relations.

    Trimming stops before the excess would fall below ``target`` (default sm_count + 2).

    Raises:
        InsufficientRelations: the excess is below sm_count after singleton removal.
    """
    j_sides = tuple(j_sides)
    target = sm_count + EXCESS_BUFFER if target is None else target
    alive = _remove_singletons(list(relations), j_sides)
    current = excess(alive, j_sides)
    logger.info("Purge: %d relations after singleton removal, excess %d", len(alive), current)
    if not alive or current < sm_count:
        raise InsufficientRelations(
            f"excess {current} below the {sm_count} Schirokauer maps with {len(alive)} relations")
    while current > target:
        batch = (current - target) // 2
        if batch < 1:
            break
        order = sorted(range(len(alive)), key=lambda i: (-len(_columns(alive[i], j_sides)), -i))
        dropped = set(order[:batch])
        trial = _remove_singletons([rel for i, rel in enumerate(alive) if i not in dropped], j_sides)
        trial_excess = excess(trial, j_sides)
        if trial_excess < target:
            break
        alive, current = trial, trial_excess
    logger.info("Purge: kept %d relations, excess %d", len(alive), current)
    return alive


@dataclass
class RelationSet:
    """A signed combination of relations and its combined row."""

    members: Tuple[Tuple[int, int], ...]
    row: Dict[PrimeIdeal, int]

    def to_line(self) -> str:
        return " ".join(f"{index}:{coeff:+d}" for index, coeff in self.members)


def _combine(left: RelationSet, right: RelationSet, coeff: int) -> RelationSet:
    row = dict(left.row)
    for ideal, e in right.row.items():
        value = row.get(ideal, 0) + coeff * e
        if value:
            row[ideal] = value
        else:
            row.pop(ideal, None)
    members = tuple(sorted(left.members + tuple((i, coeff * c) for i, c in right.members)))
    return RelationSet(members, row)


def merge(relations: Sequence[Relation], max_weight: int = 2,
          j_sides: Iterable[int] = ()) -> List[RelationSet]:
    """Eliminate ideal columns of weight <= max_weight with +-1 combinations."""
    j_sides = tuple(j_sides)
    sets: Dict[int, RelationSet] = {
        i: RelationSet(((i, 1),), relation_row(rel, j_sides)) for i, rel in enumerate(relations)}
    where: Dict[PrimeIdeal, Set[int]] = defaultdict(set)
    for i, rs in sets.items():
        for ideal in rs.row:
            where[ideal].add(i)
    for ideal, holders in where.items():
        if ideal.kind != "J" and len(holders) == 1:
            raise ContractViolation(f"column {ideal} has weight 1 after purge")
    eliminated = 0
    changed = True
    while changed:
        changed = False
        for ideal in sorted(where, key=lambda item: item.sort_key):
            holders = where[ideal]
            # weight 1 here comes from an earlier cancellation
            if ideal.kind == "J" or len(holders) < 2 or len(holders) > max_weight:
                continue
            pivot = min(holders, key=lambda i: (len(sets[i].row), i))
            pe = sets[pivot].row[ideal]
            others = sorted(holders - {pivot})
            if any(abs(sets[i].row[ideal]) != abs(pe) for i in others):
                continue
            for i in others:
                coeff = -sets[i].row[ideal] // pe
                old = set(sets[i].row)
                sets[i] = _combine(sets[i], sets[pivot], coeff)
                for col in old - set(sets[i].row):
                    where[col].discard(i)
                for col in set(sets[i].row) - old:
                    where[col].add(i)
            for col in sets[pivot].row:
                where[col].discard(pivot)
            del sets[pivot]
            eliminated += 1
            changed = True
        for ideal in [col for col, holders in where.items() if not holders]:
            del where[ideal]
    out = [sets[i] for i in sorted(sets)]
    columns = {ideal for rs in out for ideal in rs.row}
    logger.info("Merge: %d ideals eliminated, %d rows x %d ideal columns",
                eliminated, len(out), len(columns))
    return out


def write_relation_sets(path: Path, sets: Sequence[RelationSet], sm_counts: Tuple[int, int]) -> None:
    columns = {ideal for rs in sets for ideal in rs.row}
    lines = [f"#{len(sets)} {len(columns)} {sm_counts[0]} {sm_counts[1]}"]
    lines.extend(rs.to_line() for rs in sets)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_relation_sets(path: Path, relations: Sequence[Relation],
                       j_sides: Iterable[int] = ()) -> Tuple[List[RelationSet], Tuple[int, int]]:
    j_sides = tuple(j_sides)
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].lstrip("#").split()
    sm_counts = (int(header[2]), int(header[3]))
    sets = []
    for line in lines[1:]:
        if not line.strip():
            continue
        members = tuple((int(i), int(c)) for i, c in (item.split(":") for item in line.split()))
        row: Dict[PrimeIdeal, int] = defaultdict(int)
        for index, coeff in members:
            for ideal, e in relation_row(relations[index], j_sides).items():
                row[ideal] += coeff * e
        sets.append(RelationSet(members, {ideal: e for ideal, e in row.items() if e}))
    if len(sets) != int(header[0]):
        raise ContractViolation(f"{path} declares {header[0]} rows but holds {len(sets)}")
    return sets, sm_counts
