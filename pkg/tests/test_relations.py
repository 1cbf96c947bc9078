from __future__ import annotations

import random
from dataclasses import replace
from pathlib import Path

import pytest

from extnfs.errors import ContractViolation, Unattributable
from extnfs.factorbase import DEG1, IdealOracle, PrimeIdeal
from extnfs.relations import (Relation, check_relation, j_exponent, make_relation, normalize,
                              read_relations, sq_header, try_relation, write_relations)


@pytest.fixture(scope="module")
def smooth_relations(toy_setup):
    oracles = [IdealOracle(toy_setup, side) for side in (0, 1)]
    rng = random.Random(12)
    found = []
    for _ in range(3000):
        element = tuple(rng.randint(-4, 4) for _ in range(4))
        if not any(element[2:]) or not any(element):
            continue
        relation = try_relation(oracles, normalize(element), (1 << 20, 1 << 20), 20_000)
        if relation is not None:
            found.append(relation)
        if len(found) == 5:
            break
    assert found
    return found


def test_normalize() -> None:
    assert normalize((0, -2, 4, 6)) == (0, 1, -2, -3)
    assert normalize((3, 0, 0, 0)) == (1, 0, 0, 0)
    with pytest.raises(ContractViolation):
        normalize((0, 0, 0, 0))


def test_j_exponent() -> None:
    assert j_exponent((1, 2, 0, 0)) == 0
    assert j_exponent((1, 2, 0, 1)) == -1


def test_relations_check(toy_setup, smooth_relations) -> None:
    for relation in smooth_relations:
        assert check_relation(toy_setup, relation)
        assert all(ideal.degree <= 2 for ideal in relation.ideals())


def test_tampered_relation_fails_check(toy_setup, smooth_relations) -> None:
    relation = next(rel for rel in smooth_relations if rel.side1)
    ideal, e = relation.side1[0]
    tampered = replace(relation, side1=((ideal, e + 1),) + relation.side1[1:])
    assert not check_relation(toy_setup, tampered)
    assert not check_relation(toy_setup, replace(relation, element=tuple(2 * x for x in relation.element)))


def test_line_format_round_trip(smooth_relations) -> None:
    for relation in smooth_relations:
        assert Relation.from_line(relation.to_line()) == relation
    q = PrimeIdeal(0, 101, DEG1, (5, 77))
    line = Relation((1, 0, 0, 1), ((q, 2),), ()).to_line()
    assert line == "1,0,0,1:65.5.4d^2:"
    with pytest.raises(ValueError, match="malformed relation line"):
        Relation.from_line("1,0,0:65.5.4d:")


def test_relation_file_tags_special_q(tmp_path: Path, smooth_relations) -> None:
    special_q = PrimeIdeal(1, 4099, DEG1, (3, 7))
    path = tmp_path / "chunk.0000.txt"
    count = write_relations(path, smooth_relations, header=sq_header(special_q))
    assert count == len(smooth_relations)
    loaded = read_relations(path)
    assert [rel.element for rel in loaded] == [rel.element for rel in smooth_relations]
    assert all(rel.special_q == special_q for rel in loaded)


def test_make_relation_requires_special_q(toy_setup, smooth_relations) -> None:
    oracles = [IdealOracle(toy_setup, side) for side in (0, 1)]
    absent = PrimeIdeal(1, 1048573, DEG1, (1, 1))
    with pytest.raises(Unattributable, match="missing from its own relation"):
        make_relation(oracles, smooth_relations[0].element, (1 << 20, 1 << 20), 20_000, special_q=absent)
