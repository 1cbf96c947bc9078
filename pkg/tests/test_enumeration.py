from __future__ import annotations

import itertools

import numpy as np
import pytest
import sympy

from extnfs.enumeration import (Orthotope, count_points, enumerate_box, ilp_start_point, iter_lines,
                                line_indices, subspace_intersects_box)
from extnfs.errors import ContractViolation
from extnfs.lattice import Basis4, lll_reduce


def _congruence_basis(q: int, r1: int, r2: int, r3: int) -> Basis4:
    """Lattice of x with x0 + r1*x1 + r2*x2 + r3*x3 = 0 mod q."""
    return Basis4.from_columns([[q, 0, 0, 0], [-r1, 1, 0, 0], [-r2, 0, 1, 0], [-r3, 0, 0, 1]])


def _brute_force(q: int, r: tuple, box: Orthotope) -> set:
    ranges = [range(-b, b) for b in box.half_widths]
    return {point for point in itertools.product(*ranges)
            if (point[0] + r[0] * point[1] + r[1] * point[2] + r[2] * point[3]) % q == 0}


@pytest.mark.parametrize("half_width", [4, 8, 16])
def test_enumerate_box_matches_brute_force(half_width: int) -> None:
    q, r = 101, (37, 5, 88)
    box = Orthotope((half_width, half_width, max(2, half_width // 2), max(2, half_width // 2)))
    expected = _brute_force(q, r, box)
    for basis in (_congruence_basis(q, *r), lll_reduce(_congruence_basis(q, *r))):
        seen = []
        for z, point in enumerate_box(basis, box):
            assert tuple(basis.apply(z)) == point
            seen.append(point)
        assert len(seen) == len(set(seen))
        assert set(seen) == expected
        assert count_points(basis, box) == len(expected)


def test_line_indices_match_point_indices() -> None:
    box = Orthotope((6, 6, 3, 3))
    basis = lll_reduce(_congruence_basis(53, 11, 29, 3))
    for line in iter_lines(basis, box):
        indices = line_indices(line, box)
        points = box.points(indices)
        for k, point in enumerate(points):
            expected = tuple(s + k * d for s, d in zip(line.start, line.step))
            assert tuple(int(x) for x in point) == expected
            assert box.index(expected) == int(indices[k])


def test_orthotope_index_round_trip() -> None:
    box = Orthotope((3, 2, 2, 1))
    assert box.volume == 6 * 4 * 4 * 2
    indices = np.arange(box.volume, dtype=np.int64)
    assert [box.index(box.point(i)) for i in range(box.volume)] == list(range(box.volume))
    assert [tuple(row) for row in box.points(indices).tolist()] == [box.point(i) for i in range(box.volume)]
    assert box.contains((-3, 1, 0, 0)) and not box.contains((3, 0, 0, 0))
    with pytest.raises(ContractViolation):
        Orthotope((1, 1, 0, 1))


def test_subspace_intersects_box() -> None:
    box = Orthotope.cube(2)
    assert subspace_intersects_box((1, 0, 0, 0), (1, 0, 0, 0), box)
    assert not subspace_intersects_box((1, 0, 0, 0), (2, 0, 0, 0), box)
    assert subspace_intersects_box((1, 1, 1, 1), (0, 0, 0, 0), box)
    with pytest.raises(ContractViolation):
        subspace_intersects_box((0, 0, 0, 0), (0, 0, 0, 0), box)


def test_ilp_start_point() -> None:
    box = Orthotope.cube(2)
    assert ilp_start_point((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, 0), box) == (1, 1)
    assert ilp_start_point((1, 0, 0, 0), (1, 1, 0, 0), (0, 0, 0, 0), box) == (0, 1)
    with pytest.raises(ContractViolation):
        ilp_start_point((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 5, 0), box)


def test_ilp_start_point_examples() -> None:
    box = Orthotope.cube(4)
    e1, e2 = (1, 0, 0, 0), (0, 1, 0, 0)
    assert ilp_start_point(e1, e2, (0, 0, 0, 0), box) == (3, 3)
    assert ilp_start_point(e1, e2, (-5, 0, 0, 0), box) == (8, 3)
    with pytest.raises(ContractViolation, match="dependent"):
        ilp_start_point(e1, (2, 0, 0, 0), (0, 0, 0, 0), box)


# |a|, |b| <= 2 * 4 * 16 for entries and widths drawn below, so this grid is exhaustive
GRID = np.arange(-130, 131)


def _grid_start_point(u, v, origin, box: Orthotope):
    a, b = np.meshgrid(GRID, GRID, indexing="ij")
    points = (np.asarray(origin)[None, None, :] + a[..., None] * np.asarray(u)[None, None, :]
              + b[..., None] * np.asarray(v)[None, None, :])
    widths = np.asarray(box.half_widths)
    feasible = np.all((points >= -widths) & (points < widths), axis=-1)
    if not feasible.any():
        return None
    best_b = b[feasible].max()
    best_a = a[feasible & (b == best_b)].max()
    return int(best_a), int(best_b)


def _independent(u, v) -> bool:
    return any(u[i] * v[j] != u[j] * v[i] for i in range(4) for j in range(i + 1, 4))


def _check_random_ilp(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    done = 0
    while done < count:
        u, v = rng.integers(-4, 5, 4).tolist(), rng.integers(-4, 5, 4).tolist()
        if not _independent(u, v):
            continue
        origin = rng.integers(-8, 9, 4).tolist()
        box = Orthotope(tuple(rng.integers(1, 9, 4).tolist()))
        expected = _grid_start_point(u, v, origin, box)
        if expected is None:
            with pytest.raises(ContractViolation, match="no feasible point"):
                ilp_start_point(u, v, origin, box)
        else:
            assert ilp_start_point(u, v, origin, box) == expected, (u, v, origin, box)
        done += 1


def test_ilp_start_point_matches_a_grid_scan() -> None:
    _check_random_ilp(300, seed=11)


@pytest.mark.slow
def test_ilp_start_point_matches_a_grid_scan_at_scale() -> None:
    _check_random_ilp(10_000, seed=12)


def _check_random_subspaces(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    done = 0
    while done < count:
        normal = rng.integers(-5, 6, 4)
        if not normal.any():
            continue
        offset = rng.integers(-6, 7, 4)
        box = Orthotope(tuple(rng.integers(1, 5, 4).tolist()))
        values = box.points(np.arange(box.volume)) @ normal - int(normal @ offset)
        expected = bool(values.min() <= 0 <= values.max())
        assert subspace_intersects_box(normal.tolist(), offset.tolist(), box) == expected
        done += 1


def test_subspace_intersects_box_matches_every_point() -> None:
    _check_random_subspaces(500, seed=21)


@pytest.mark.slow
def test_subspace_intersects_box_matches_every_point_at_scale() -> None:
    _check_random_subspaces(10_000, seed=22)


def _check_random_degree1_bases(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    primes = list(sympy.primerange(3, 10_000))
    for _ in range(count):
        q = int(rng.choice(primes))
        r, big_r = int(rng.integers(0, q)), int(rng.integers(0, q))
        weights = np.array([1, r, big_r, r * big_r % q], dtype=np.int64)
        basis = lll_reduce(_congruence_basis(q, r, big_r, r * big_r % q))
        box = Orthotope.cube(int(rng.choice([4, 8])))
        points = box.points(np.arange(box.volume))
        expected = {tuple(row) for row in points[(points @ weights) % q == 0].tolist()}
        seen = [point for _, point in enumerate_box(basis, box)]
        assert len(seen) == len(set(seen))
        assert set(seen) == expected, (q, r, big_r, box)


def test_enumerate_random_degree1_bases() -> None:
    _check_random_degree1_bases(40, seed=31)


@pytest.mark.slow
def test_enumerate_random_degree1_bases_at_scale() -> None:
    _check_random_degree1_bases(200, seed=32)
