"""Lattice points of a 4d basis inside an orthotope.

Points are visited hyperspace by hyperspace (fourth coordinate), then plane by
plane (third coordinate), then line by line: inside a plane the two remaining
coordinates satisfy eight linear inequalities, Fourier-Motzkin gives the range of
the second one and every integer value of it leaves an interval for the first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ContractViolation
from .lattice import Basis4, cross4, dot

Vector4 = Tuple[int, int, int, int]


@dataclass(frozen=True)
class Orthotope:
    """[-B1, B1[ x [-B2, B2[ x [-B3, B3[ x [-B4, B4[."""

    half_widths: Tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.half_widths) != 4 or any(b < 1 for b in self.half_widths):
            raise ContractViolation("an orthotope needs four half-widths of at least 1")
        object.__setattr__(self, "half_widths", tuple(int(b) for b in self.half_widths))

    @classmethod
    def cube(cls, half_width: int) -> "Orthotope":
        return cls((half_width,) * 4)

    @property
    def volume(self) -> int:
        total = 1
        for b in self.half_widths:
            total *= 2 * b
        return total

    @property
    def strides(self) -> Tuple[int, int, int, int]:
        out, step = [], 1
        for b in self.half_widths:
            out.append(step)
            step *= 2 * b
        return tuple(out)  # type: ignore[return-value]

    def corners(self) -> Iterator[Vector4]:
        lows = [-b for b in self.half_widths]
        highs = [b - 1 for b in self.half_widths]
        for mask in range(16):
            yield tuple(highs[i] if mask >> i & 1 else lows[i] for i in range(4))  # type: ignore[misc]

    def contains(self, point: Sequence[int]) -> bool:
        return all(-b <= x < b for x, b in zip(point, self.half_widths))

    def index(self, point: Sequence[int]) -> int:
        """Packed index; affine in the point."""
        return sum((x + b) * s for x, b, s in zip(point, self.half_widths, self.strides))

    def point(self, index: int) -> Vector4:
        out = []
        for b in self.half_widths:
            width = 2 * b
            out.append(index % width - b)
            index //= width
        return tuple(out)  # type: ignore[return-value]

    def points(self, indices: np.ndarray) -> np.ndarray:
        """Vectorized inverse of index(): an (n, 4) int64 array."""
        out = np.empty((len(indices), 4), dtype=np.int64)
        rest = np.asarray(indices, dtype=np.int64)
        for i, b in enumerate(self.half_widths):
            out[:, i] = rest % (2 * b) - b
            rest = rest // (2 * b)
        return out


def subspace_intersects_box(normal: Sequence[int], offset: Sequence[int], box: Orthotope) -> bool:
    """Whether the hyperplane through ``offset`` with normal ``normal`` meets the box.

    The signs of N.(P - V) over the 16 corners P decide it.
    """
    if not any(normal):
        raise ContractViolation("zero normal vector")
    base = dot(normal, offset)
    seen_low = seen_high = False
    for corner in box.corners():
        value = dot(normal, corner) - base
        seen_low |= value <= 0
        seen_high |= value >= 0
        if seen_low and seen_high:
            return True
    return False


def _floor_div(x: int, y: int) -> int:
    return x // y


def _ceil_div(x: int, y: int) -> int:
    return -((-x) // y)


def _plane_constraints(u: Sequence[int], v: Sequence[int], origin: Sequence[int],
                       box: Orthotope) -> List[Tuple[int, int, int]]:
    """Rows (U, V, C) meaning U*a + V*b <= C; row i + 4 is the lower edge of row i."""
    rows = []
    for i, b in enumerate(box.half_widths):
        rows.append((u[i], v[i], b - 1 - origin[i]))
    for i, b in enumerate(box.half_widths):
        rows.append((-u[i], -v[i], b + origin[i]))
    return rows


def _b_bounds(rows: List[Tuple[int, int, int]]) -> Optional[Tuple[int, int]]:
    """Integer range of b after eliminating a; None when empty."""
    reduced: List[Tuple[int, int]] = [(v, c) for u, v, c in rows if u == 0]
    for i, (ui, vi, ci) in enumerate(rows):
        if ui >= 0:
            continue
        for j, (uj, vj, cj) in enumerate(rows):
            if uj <= 0 or abs(i - j) == 4:
                continue
            reduced.append((vi * uj + vj * -ui, ci * uj + cj * -ui))
    low, high = None, None
    for d, c in reduced:
        if d > 0:
            bound = _floor_div(c, d)
            high = bound if high is None else min(high, bound)
        elif d < 0:
            bound = _ceil_div(c, d)
            low = bound if low is None else max(low, bound)
        elif c < 0:
            return None
    if low is None or high is None:
        raise ContractViolation("plane direction vectors are dependent")
    if low > high:
        return None
    return low, high


def _a_range(rows: List[Tuple[int, int, int]], b: int) -> Optional[Tuple[int, int]]:
    low, high = None, None
    for u, v, c in rows:
        rest = c - v * b
        if u > 0:
            bound = _floor_div(rest, u)
            high = bound if high is None else min(high, bound)
        elif u < 0:
            bound = _ceil_div(rest, u)
            low = bound if low is None else max(low, bound)
        elif rest < 0:
            return None
    if low is None or high is None or low > high:
        return None
    return low, high


def ilp_start_point(u: Sequence[int], v: Sequence[int], origin: Sequence[int],
                    box: Orthotope) -> Tuple[int, int]:
    """Feasible (a, b) with origin + a*u + b*v in the box, b maximal, then a maximal.

    Raises:
        ContractViolation: the plane holds no lattice point of the box.
    """
    rows = _plane_constraints(u, v, origin, box)
    bounds = _b_bounds(rows)
    if bounds is not None:
        low, high = bounds
        for b in range(high, low - 1, -1):
            a_range = _a_range(rows, b)
            if a_range is not None:
                return a_range[1], b
    raise ContractViolation("no feasible point in the plane")


@dataclass(frozen=True)
class Line:
    """count points start + k*step, k = 0 .. count-1; z is the lattice coordinate of start."""

    z: Vector4
    start: Vector4
    step: Vector4
    count: int


def _walk(normal: Sequence[int], direction: Sequence[int], box: Orthotope) -> Iterator[int]:
    """Integers k, outward from 0, whose hyperplane through k*direction meets the box."""
    k = 0
    while subspace_intersects_box(normal, [k * x for x in direction], box):
        yield k
        k += 1
    k = -1
    while subspace_intersects_box(normal, [k * x for x in direction], box):
        yield k
        k -= 1


def iter_lines(basis, box: Orthotope) -> Iterator[Line]:
    """Lines of lattice points in the box, along the first basis column."""
    basis = getattr(basis, "reduced_basis", basis)
    b1, b2, b3, b4 = basis.columns
    normal4 = cross4(b1, b2, b3)
    normal3 = cross4(b1, b2, b4)
    if not any(normal4) or not any(normal3):
        raise ContractViolation("basis columns are dependent")
    for k in _walk(normal4, b4, box):
        for j in _walk(normal3, b3, box):
            origin = tuple(k * x + j * y for x, y in zip(b4, b3))
            rows = _plane_constraints(b1, b2, origin, box)
            bounds = _b_bounds(rows)
            if bounds is None:
                continue
            for b in range(bounds[0], bounds[1] + 1):
                a_range = _a_range(rows, b)
                if a_range is None:
                    continue
                a = a_range[0]
                start = tuple(o + a * x + b * y for o, x, y in zip(origin, b1, b2))
                yield Line((a, b, j, k), start, b1, a_range[1] - a_range[0] + 1)  # type: ignore[arg-type]


def enumerate_box(basis, box: Orthotope) -> Iterator[Tuple[Vector4, Vector4]]:
    """Every (z, basis*z) with basis*z in the box, each exactly once."""
    for line in iter_lines(basis, box):
        a, b, j, k = line.z
        for step in range(line.count):
            point = tuple(s + step * d for s, d in zip(line.start, line.step))
            yield (a + step, b, j, k), point  # type: ignore[misc]


def line_indices(line: Line, box: Orthotope) -> np.ndarray:
    """Packed indices of a line as an int64 arange."""
    stride = box.index(line.step) - box.index((0, 0, 0, 0))
    return box.index(line.start) + stride * np.arange(line.count, dtype=np.int64)


def count_points(basis: Basis4, box: Orthotope) -> int:
    return sum(line.count for line in iter_lines(basis, box))
