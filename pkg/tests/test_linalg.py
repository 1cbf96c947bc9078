from __future__ import annotations

import random
from pathlib import Path

import pytest

from extnfs.errors import ContractViolation, FullRankError, PolynomialError
from extnfs.factorbase import DEG1, PrimeIdeal, j_ideal
from extnfs.linalg import (SparseMatrix, berlekamp_massey, build_system, make_sm_spec,
                           parse_column, column_text, rank_mod, read_system, read_vector,
                           relation_sm, schirokauer_map, set_sm, unit_rank, wiedemann_nullspace,
                           write_system, write_vector)
from extnfs.norms import norm_side
from extnfs.poly import IntPoly
from extnfs.relproc import RelationSet

RECORD_ELL = 3518936953814357579166997631392367151668364387422300934981051190217


@pytest.fixture(scope="module")
def toy_specs(toy_setup, toy_ell):
    return [make_sm_spec(toy_setup, side, toy_ell) for side in (0, 1)]


def _elements(setup, ell, count, seed=3):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        element = tuple(rng.randint(-50, 50) for _ in range(4))
        if not any(element[2:]):
            continue
        if any(norm_side(setup, side, element) % ell == 0 for side in (0, 1)):
            continue
        out.append(element)
    return out


def test_unit_ranks(record_setup) -> None:
    assert unit_rank(record_setup.f) == 1
    assert unit_rank(record_setup.g) == 3
    assert unit_rank(IntPoly((1, 0, 1))) == 0
    with pytest.raises(PolynomialError):
        unit_rank(IntPoly((-1, 0, 1)))


def test_rank_mod() -> None:
    assert rank_mod([[1, 2], [2, 4]], 101) == 1
    assert rank_mod([[1, 2], [3, 4]], 101) == 2
    assert rank_mod([[1, 2], [3, 4]], 2) == 1


def test_alpha_image_is_a_root_of_h(toy_setup, toy_specs) -> None:
    for spec in toy_specs:
        ring = spec.ring
        h0, h1 = toy_setup.h.coeffs[0], toy_setup.h.coeffs[1]
        square = ring.mul(spec.alpha, spec.alpha)
        value = [s + h1 * a for s, a in zip(square, spec.alpha)]
        value[0] += h0
        assert ring.reduce(value) == [0] * ring.n
        assert toy_setup.cache[f"sm_alpha{spec.side}"]


def test_schirokauer_map_is_additive(toy_setup, toy_ell, toy_specs) -> None:
    e1, e2 = _elements(toy_setup, toy_ell, 2)
    for spec in toy_specs:
        x, y = spec.element(e1), spec.element(e2)
        joint = spec.mu_ring(spec.ring.mul(x, y))
        assert joint == [(a + b) % toy_ell for a, b in zip(spec.mu_ring(x), spec.mu_ring(y))]
        fifth = spec.mu_ring(spec.ring.pow(x, 5))
        assert fifth == [5 * a % toy_ell for a in spec.mu_ring(x)]


def test_schirokauer_map_of_one(toy_specs) -> None:
    for spec in toy_specs:
        assert schirokauer_map((1, 0, 0, 0), spec) == (0,) * spec.rank
        assert len(schirokauer_map((1, 2, 3, 4), spec)) == spec.rank


def test_relation_and_set_sm(toy_setup, toy_ell, toy_specs) -> None:
    e1, e2 = _elements(toy_setup, toy_ell, 2, seed=9)
    first = schirokauer_map(e1, toy_specs[0])
    second = schirokauer_map(e1, toy_specs[1])
    assert relation_sm(e1, toy_specs) == first + tuple(-v % toy_ell for v in second)
    cache = {}
    rs = RelationSet(((0, 1), (1, -1)), {})
    combined = set_sm(rs, [e1, e2], toy_specs, cache)
    expected = [(a - b) % toy_ell for a, b in zip(relation_sm(e1, toy_specs), relation_sm(e2, toy_specs))]
    assert list(combined) == expected
    assert set(cache) == {0, 1}


def test_berlekamp_massey_fibonacci() -> None:
    seq = [1, 1]
    while len(seq) < 12:
        seq.append((seq[-1] + seq[-2]) % 101)
    assert berlekamp_massey(seq, 101) == [1, 100, 100]
    assert berlekamp_massey([0] * 6, 101) == [1]


@pytest.mark.parametrize("ell", [101, 42322389157, RECORD_ELL])
def test_sparse_matvec_matches_dense(ell: int) -> None:
    rng = random.Random(ell % 1000)
    rows = [{c: rng.choice([rng.randint(-9, 9), rng.randrange(ell)]) for c in rng.sample(range(12), 4)}
            for _ in range(9)]
    rows.append({})
    matrix = SparseMatrix(rows, 12, ell)
    x = [rng.randrange(ell) for _ in range(12)]
    expected = [sum(v * x[c] for c, v in row.items()) % ell for row in rows]
    assert matrix.matvec(x) == expected
    assert matrix.transpose().transpose().rows == matrix.rows


def test_wiedemann_wide_matrix() -> None:
    v = wiedemann_nullspace(SparseMatrix([{0: 1, 1: 100}], 2, 101), retries=10)
    assert v[0] % 101 == v[1] % 101 != 0


def test_wiedemann_full_rank() -> None:
    identity = SparseMatrix([{i: 1} for i in range(3)], 3, 101)
    with pytest.raises(FullRankError):
        wiedemann_nullspace(identity, retries=3)
    with pytest.raises(ContractViolation):
        wiedemann_nullspace(identity, ell=103)


def _planted(rng: random.Random, nrows: int, ncols: int, ell: int) -> SparseMatrix:
    kernel = [rng.randrange(1, ell) for _ in range(ncols)]
    inv_last = pow(kernel[-1], -1, ell)
    rows = []
    for _ in range(nrows):
        row = {c: rng.randrange(ell) for c in rng.sample(range(ncols - 1), min(4, ncols - 1))}
        partial = sum(v * kernel[c] for c, v in row.items())
        row[ncols - 1] = -partial * inv_last % ell
        rows.append(row)
    return SparseMatrix(rows, ncols, ell)


def _check_kernel(matrix: SparseMatrix, retries: int) -> None:
    v = wiedemann_nullspace(matrix, retries=retries)
    assert any(v)
    assert not any(matrix.matvec(v))


@pytest.mark.parametrize("seed", range(4))
def test_wiedemann_planted_kernels(seed: int, toy_ell: int) -> None:
    rng = random.Random(seed)
    _check_kernel(_planted(rng, 12, 12, 101), retries=10)
    _check_kernel(_planted(rng, 15, 10, toy_ell), retries=5)
    _check_kernel(_planted(rng, 8, 11, toy_ell), retries=5)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_wiedemann_planted_kernels_many(seed: int) -> None:
    rng = random.Random(1000 + seed)
    n = rng.randint(5, 40)
    _check_kernel(_planted(rng, n, n, 101), retries=10)


def test_build_system_layout() -> None:
    a = PrimeIdeal(0, 11, DEG1, (1, 2))
    b = PrimeIdeal(1, 13, DEG1, (3, 4))
    sets = [RelationSet(((0, 1),), {b: -1, a: 2, j_ideal(0): -1}), RelationSet(((1, 1),), {a: 1})]
    system = build_system(sets, [(5, 0, 7), (0, 1, 0)], (1, 2), 101)
    assert system.columns == [j_ideal(0), a, b, ("sm", 0, 0), ("sm", 1, 0), ("sm", 1, 1)]
    assert system.matrix.rows[0] == {0: 100, 1: 2, 2: 100, 3: 5, 5: 7}
    assert system.shape == (2, 6)
    with pytest.raises(ContractViolation):
        build_system([], [], (0, 0), 101)
    with pytest.raises(ContractViolation):
        build_system(sets, [(1, 2)], (1, 2), 101)


def test_system_and_vector_files(tmp_path: Path) -> None:
    a = PrimeIdeal(0, 11, DEG1, (1, 2))
    system = build_system([RelationSet(((0, 1),), {a: 3})], [(4,)], (1, 0), 101)
    write_system(tmp_path / "matrix.txt", system)
    loaded = read_system(tmp_path / "matrix.txt", 101)
    assert loaded.columns == system.columns
    assert loaded.matrix.rows == system.matrix.rows
    assert parse_column(column_text(("sm", 1, 2))) == ("sm", 1, 2)
    write_vector(tmp_path / "nullspace.txt", [3, 0, 100])
    assert read_vector(tmp_path / "nullspace.txt") == [3, 0, 100]
