"""Virtual-log database: seeding from the kernel vector and single-unknown deduction."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import ContractViolation, LogContradiction, SchirokauerUndefined
from .factorbase import PrimeIdeal
from .linalg import Column, SchirokauerSpec, column_text, parse_column, relation_sm
from .relations import Relation
from .relproc import relation_row

logger = logging.getLogger("extnfs.logdb")


def relation_terms(relation: Relation, specs: Sequence[SchirokauerSpec],
                   j_sides: Iterable[int] = ()) -> Dict[Column, int]:
    """Every column coefficient of a relation: ideal exponents, then SM values."""
    terms: Dict[Column, int] = dict(relation_row(relation, j_sides))
    values = relation_sm(relation.element, specs) if specs else ()
    rank0 = specs[0].rank if specs else 0
    for j, value in enumerate(values):
        slot = ("sm", 0, j) if j < rank0 else ("sm", 1, j - rank0)
        if value:
            terms[slot] = value
    return terms


@dataclass
class LogDatabase:
    ell: int
    ideals: Dict[PrimeIdeal, int] = field(default_factory=dict)
    sm: Dict[Tuple[str, int, int], int] = field(default_factory=dict)
    passes: int = 0

    def __contains__(self, column: Column) -> bool:
        return column in (self.sm if isinstance(column, tuple) else self.ideals)

    def __len__(self) -> int:
        return len(self.ideals)

    def get(self, column: Column) -> Optional[int]:
        return self.sm.get(column) if isinstance(column, tuple) else self.ideals.get(column)

    def set(self, column: Column, value: int) -> None:
        if isinstance(column, tuple):
            self.sm[column] = value % self.ell
        else:
            self.ideals[column] = value % self.ell

    def scaled(self, factor: int) -> "LogDatabase":
        ell = self.ell
        return LogDatabase(ell, {k: v * factor % ell for k, v in self.ideals.items()},
                           {k: v * factor % ell for k, v in self.sm.items()}, self.passes)

    def evaluate(self, terms: Dict[Column, int]) -> Tuple[int, List[Column]]:
        """Sum of the known terms and the list of unknown columns."""
        total, unknown = 0, []
        for column, coeff in terms.items():
            value = self.get(column)
            if value is None:
                unknown.append(column)
            else:
                total += coeff * value
        return total % self.ell, unknown

    def vlog_of(self, factors: Iterable[Tuple[PrimeIdeal, int]]) -> int:
        total = 0
        for ideal, e in factors:
            value = self.ideals.get(ideal)
            if value is None:
                raise KeyError(f"no virtual log for {ideal}")
            total += e * value
        return total % self.ell


def seed_from_nullspace(vector: Sequence[int], columns: Sequence[Column], ell: int) -> LogDatabase:
    """Assign the kernel vector entries to the system columns.

    Raises:
        ContractViolation: the vector is zero or does not match the columns.
    """
    if len(vector) != len(columns):
        raise ContractViolation(f"vector of length {len(vector)} for {len(columns)} columns")
    if not any(v % ell for v in vector):
        raise ContractViolation("the zero vector carries no logarithms")
    db = LogDatabase(ell)
    for column, value in zip(columns, vector):
        db.set(column, value)
    logger.info("Seeded %d ideal logs and %d SM logs", len(db.ideals), len(db.sm))
    return db


def reconstruct(db: LogDatabase, relations: Sequence[Relation], specs: Sequence[SchirokauerSpec],
                j_sides: Iterable[int] = (), max_passes: int = 1000) -> LogDatabase:
    """Deduce logs from relations with a single unknown until nothing changes.

    Raises:
        LogContradiction: a fully known relation does not vanish mod ell.
    """
    j_sides = tuple(j_sides)
    ell = db.ell
    started = time.time()
    initial = len(db)
    rows: List[Optional[Dict[Column, int]]] = []
    for relation in relations:
        try:
            rows.append(relation_terms(relation, specs, j_sides))
        except SchirokauerUndefined:
            logger.warning("Skipping %s: SM undefined", relation.element)
            rows.append(None)
    pending = [i for i, row in enumerate(rows) if row is not None]
    passes = 0
    while pending and passes < max_passes:
        passes += 1
        found = 0
        still = []
        for i in pending:
            total, unknown = db.evaluate(rows[i])
            if not unknown:
                if total:
                    raise LogContradiction(
                        f"relation {relations[i].to_line()} evaluates to {total} mod {ell}")
                continue
            if len(unknown) > 1:
                still.append(i)
                continue
            column = unknown[0]
            coeff = rows[i][column] % ell
            db.set(column, -total * pow(coeff, -1, ell))
            found += 1
        pending = still
        logger.debug("Pass %d: %d logs deduced", passes, found)
        if not found:
            break
    db.passes += passes
    logger.info("Reconstruction: %d passes, %d -> %d ideal logs (%.1fs)",
                passes, initial, len(db), time.time() - started)
    return db


def coverage(db: LogDatabase, ideals: Iterable[PrimeIdeal]) -> float:
    ideals = list(ideals)
    if not ideals:
        return 1.0
    return sum(1 for ideal in ideals if ideal in db.ideals) / len(ideals)


def check_database(db: LogDatabase, relations: Sequence[Relation], specs: Sequence[SchirokauerSpec],
                   j_sides: Iterable[int] = ()) -> List[Relation]:
    """Relations that are fully known and do not vanish."""
    j_sides = tuple(j_sides)
    bad = []
    for relation in relations:
        try:
            total, unknown = db.evaluate(relation_terms(relation, specs, j_sides))
        except SchirokauerUndefined:
            continue
        if not unknown and total:
            bad.append(relation)
    return bad


def write_logdb(path: Path, db: LogDatabase) -> None:
    lines = [f"# ell {db.ell} passes {db.passes}"]
    for ideal in sorted(db.ideals, key=lambda item: item.sort_key):
        lines.append(f"{column_text(ideal)} {db.ideals[ideal]}")
    for slot in sorted(db.sm):
        lines.append(f"{column_text(slot)} {db.sm[slot]}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_logdb(path: Path) -> LogDatabase:
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].lstrip("#").split()
    db = LogDatabase(int(header[1]), passes=int(header[3]))
    for line in lines[1:]:
        if not line.strip():
            continue
        key, value = line.rsplit(" ", 1)
        db.set(parse_column(key), int(value))
    return db
