from __future__ import annotations

from pathlib import Path

import pytest

from extnfs.errors import ContractViolation, LogContradiction
from extnfs.factorbase import DEG1, PrimeIdeal, j_ideal
from extnfs.linalg import make_sm_spec, relation_sm
from extnfs.logdb import (LogDatabase, check_database, coverage, read_logdb, reconstruct,
                          relation_terms, seed_from_nullspace, write_logdb)
from extnfs.relations import Relation

ELL = 101
A, B, C, D = (PrimeIdeal(0, q, DEG1, (1, 2)) for q in (11, 13, 17, 19))


def _rel(factors, element=(1, 0, 0, 0)) -> Relation:
    return Relation(element, tuple(factors.items()), ())


def test_seed_from_nullspace() -> None:
    db = seed_from_nullspace([3, 205, 0], [A, B, ("sm", 0, 0)], ELL)
    assert db.get(A) == 3 and db.get(B) == 3 and db.get(("sm", 0, 0)) == 0
    assert A in db and ("sm", 0, 0) in db and C not in db
    assert len(db) == 2
    with pytest.raises(ContractViolation):
        seed_from_nullspace([0, 101], [A, B], ELL)
    with pytest.raises(ContractViolation):
        seed_from_nullspace([1], [A, B], ELL)


def test_scaled_database() -> None:
    db = seed_from_nullspace([3, 50], [A, ("sm", 1, 0)], ELL)
    doubled = db.scaled(2)
    assert doubled.get(A) == 6 and doubled.get(("sm", 1, 0)) == 100
    assert db.get(A) == 3


def test_reconstruct_follows_a_chain() -> None:
    db = LogDatabase(ELL, {A: 3})
    relations = [_rel({C: 1, D: 1}), _rel({A: 1, B: 1}), _rel({B: 1, C: 2})]
    reconstruct(db, relations, ())
    assert db.get(B) == -3 % ELL
    assert 2 * db.get(C) % ELL == 3
    assert (db.get(C) + db.get(D)) % ELL == 0
    assert db.passes == 2
    assert check_database(db, relations, ()) == []
    assert coverage(db, [A, B, C, D]) == 1.0


def test_reconstruct_detects_contradiction() -> None:
    db = LogDatabase(ELL, {A: 3, B: 1})
    with pytest.raises(LogContradiction):
        reconstruct(db, [_rel({A: 1, B: 1})], ())
    assert check_database(db, [_rel({A: 1, B: 1})], ()) == [_rel({A: 1, B: 1})]


def test_j_column_enters_terms() -> None:
    relation = _rel({A: 1}, element=(1, 0, 1, 0))
    assert relation_terms(relation, (), j_sides=(0,)) == {A: 1, j_ideal(0): -1}
    db = LogDatabase(ELL, {j_ideal(0): 5})
    reconstruct(db, [relation], (), j_sides=(0,))
    assert db.get(A) == 5


def test_evaluate_and_vlog_of() -> None:
    db = LogDatabase(ELL, {A: 10, B: 20})
    assert db.evaluate({A: 1, B: 2, C: 1}) == (50, [C])
    assert db.vlog_of([(A, 3), (B, 5)]) == 130 % ELL
    with pytest.raises(KeyError):
        db.vlog_of([(C, 1)])
    assert coverage(db, [A, C]) == 0.5


def test_terms_carry_schirokauer_values(toy_setup, toy_ell) -> None:
    specs = [make_sm_spec(toy_setup, side, toy_ell) for side in (0, 1)]
    relation = Relation((3, 1, 4, 1), ((A, 1),), ())
    terms = relation_terms(relation, specs, toy_setup.j_sides)
    values = relation_sm(relation.element, specs)
    rank0 = specs[0].rank
    for j, value in enumerate(values):
        slot = ("sm", 0, j) if j < rank0 else ("sm", 1, j - rank0)
        assert terms.get(slot, 0) == value


def test_logdb_file_round_trip(tmp_path: Path) -> None:
    db = LogDatabase(ELL, {B: 7, A: 3, j_ideal(0): 9}, {("sm", 1, 0): 4}, passes=3)
    path = tmp_path / "logdb.txt"
    write_logdb(path, db)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# ell 101 passes 3"
    assert lines[1] == "0:j 9"
    assert lines[-1] == "sm:1:0 4"
    assert read_logdb(path) == db
